#pragma once

// FBS capture-probability model: lognormal shadowing means, exact quadrature
// of the capture integral, the piecewise-polynomial explicit method, the
// 3-sigma shortcut, a Monte Carlo oracle, and the analytic error bound for
// the polynomial method.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "cpds/common.hpp"
#include "cpds/network.hpp"

namespace cpds {

// Received signal strength S_k at a switch is normal in dB: mean from the
// path-loss law, standard deviation from the shadowing effect.
struct SignalDistribution {
    double mu = 0.0;     // dB
    double sigma = 1.0;  // dB, > 0
};

// One capture question: does the FBS signal beat every legitimate BS signal?
struct CaptureProblem {
    SignalDistribution fbs;
    std::vector<SignalDistribution> legit;  // may be empty
};

// Coefficient magnitudes of the piecewise seventh-order fits. Sign patterns
// are applied in z_pdf / z_cdf; the arrays store the printed magnitudes.
struct PolyCoefficients {
    std::array<double, 8> e{};   // e[0]..e[7], PDF fit
    std::array<double, 8> h{};   // h[1]..h[7], CDF fit (h[0] unused)
    double h0_pos = 0.0;         // CDF intercept on (0, 6)
    double h0_neg = 0.0;         // CDF intercept on (-6, 0)
    double zeta = 0.0;           // PDF fit error bound
    double kappa = 0.0;          // CDF fit error bound

    static PolyCoefficients defaults() {
        PolyCoefficients c;
        c.e = {1.0, 0.002786, 0.4629, 0.1221, 0.3035, 0.1311, 0.0236, 0.001577};
        c.h = {0.0, 0.3908, 0.04542, 0.1485, 0.06604, 0.01362, 0.001385, 5.615e-5};
        c.h0_pos = 0.4999;
        c.h0_neg = 0.5001;
        c.zeta = 2.678e-4;
        c.kappa = 5.69e-4;
        return c;
    }
};

// Reads a coefficient override block (as embedded in a case file) on top of
// the compiled-in defaults. Every field is optional.
inline PolyCoefficients poly_coefficients_from_json(const nlohmann::json& j) {
    PolyCoefficients c = PolyCoefficients::defaults();
    if (j.is_null()) return c;
    if (!j.is_object()) throw ParseError("poly_coeffs: must be an object");
    if (j.contains("e")) {
        const auto& je = j.at("e");
        if (!je.is_array() || je.size() != 8)
            throw ParseError("poly_coeffs: 'e' must be an array of 8 values (e0..e7)");
        for (std::size_t i = 0; i < 8; ++i) c.e[i] = je[i].get<double>();
    }
    if (j.contains("h")) {
        const auto& jh = j.at("h");
        if (!jh.is_array() || jh.size() != 7)
            throw ParseError("poly_coeffs: 'h' must be an array of 7 values (h1..h7)");
        for (std::size_t i = 0; i < 7; ++i) c.h[i + 1] = jh[i].get<double>();
    }
    if (j.contains("h0_pos")) c.h0_pos = j.at("h0_pos").get<double>();
    if (j.contains("h0_neg")) c.h0_neg = j.at("h0_neg").get<double>();
    if (j.contains("zeta")) c.zeta = j.at("zeta").get<double>();
    if (j.contains("kappa")) c.kappa = j.at("kappa").get<double>();
    if (!(c.zeta > 0) || !(c.kappa > 0))
        throw ValidationError("poly_coeffs: zeta and kappa must be > 0");
    return c;
}

inline PolyCoefficients poly_coefficients_for(const Network& net) {
    return poly_coefficients_from_json(net.poly_coeffs);
}

inline void validate(const CaptureProblem& p) {
    if (!(p.fbs.sigma > 0) || !std::isfinite(p.fbs.mu))
        throw ValidationError("capture problem: FBS distribution must have finite mu, sigma > 0");
    for (const SignalDistribution& s : p.legit)
        if (!(s.sigma > 0) || !std::isfinite(s.mu))
            throw ValidationError("capture problem: legit distribution must have finite mu, sigma > 0");
}

// Mean received strength (dB) from a transmitter at bs_pos observed at
// rcs_pos, with the distance clamped below by d_min.
inline double mean_strength(const RadioParams& radio, const Vec2& bs_pos, const Vec2& rcs_pos) {
    double d = std::max(distance(bs_pos, rcs_pos), radio.d_min);
    return radio.s_ref - 10.0 * radio.path_loss_exp * std::log10(d / radio.d0);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes (computed once per order, cached)

namespace detail {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

inline GaussRule compute_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration from the Chebyshev-based initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

inline const GaussRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

template <typename F>
double integrate_gauss(const F& f, double lo, double hi, int order) {
    const GaussRule& g = gauss_legendre(order);
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        acc += g.weights[i] * f(mid + half * g.nodes[i]);
    return acc * half;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact capture probability

// P(FBS strongest) = (1/sqrt(2*pi)) * Int exp(-t^2/2) Prod_k Phi(rho_k t + b_k) dt
// with rho_k = sigma_fbs / sigma_k and b_k = (mu_fbs - mu_k) / sigma_k. The
// integral is truncated at +-8 (tail mass < 1e-15) and evaluated by composite
// Gauss-Legendre panels, doubling the panel count until the result is stable
// to well below the 1e-9 contract.
inline double capture_prob_exact(const CaptureProblem& p) {
    validate(p);
    if (p.legit.empty()) return 1.0;

    std::vector<double> rho(p.legit.size()), b(p.legit.size());
    for (std::size_t k = 0; k < p.legit.size(); ++k) {
        rho[k] = p.fbs.sigma / p.legit[k].sigma;
        b[k] = (p.fbs.mu - p.legit[k].mu) / p.legit[k].sigma;
    }
    auto integrand = [&](double t) {
        double v = std::exp(-0.5 * t * t);
        for (std::size_t k = 0; k < rho.size(); ++k) {
            v *= normal_cdf(rho[k] * t + b[k]);
            if (v == 0.0) break;
        }
        return v;
    };

    const double lo = -8.0, hi = 8.0;
    double prev = 0.0;
    double result = 0.0;
    for (int panels = 8; panels <= 1024; panels *= 2) {
        double acc = 0.0;
        double w = (hi - lo) / panels;
        for (int s = 0; s < panels; ++s)
            acc += detail::integrate_gauss(integrand, lo + s * w, lo + (s + 1) * w, 20);
        result = acc / std::sqrt(2.0 * M_PI);
        if (panels > 8 && std::abs(result - prev) < 1e-12) break;
        prev = result;
    }
    return std::clamp(result, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Piecewise polynomial fits

// Seventh-order fit of exp(-x^2/2) on (-3, 3); zero outside. Even by
// construction (the two branches mirror each other).
inline double z_pdf(double x, const PolyCoefficients& c) {
    if (std::abs(x) >= 3.0) return 0.0;
    const auto& e = c.e;
    if (x > 0)
        return ((((((-e[7] * x + e[6]) * x - e[5]) * x + e[4]) * x - e[3]) * x - e[2]) * x -
                e[1]) * x + e[0];
    if (x < 0)
        return (((((( e[7] * x + e[6]) * x + e[5]) * x + e[4]) * x + e[3]) * x - e[2]) * x +
                e[1]) * x + e[0];
    return e[0];
}

// Seventh-order fit of the standard normal CDF on (-6, 6); clamped to 0/1
// outside; 0.5 exactly at x = 0 (the printed branch intercepts straddle it).
inline double z_cdf(double x, const PolyCoefficients& c) {
    if (x <= -6.0) return 0.0;
    if (x >= 6.0) return 1.0;
    if (x == 0.0) return 0.5;
    const auto& h = c.h;
    if (x > 0)
        return ((((((-h[7] * x + h[6]) * x - h[5]) * x + h[4]) * x - h[3]) * x + h[2]) * x +
                h[1]) * x + c.h0_pos;
    return ((((((-h[7] * x - h[6]) * x - h[5]) * x - h[4]) * x - h[3]) * x - h[2]) * x +
            h[1]) * x + c.h0_neg;
}

// Analytic error bound of the polynomial method for n_legit competitors:
// 6 (zeta + N kappa) / sqrt(2 pi).
inline double prop1_bound(int n_legit, const PolyCoefficients& c = PolyCoefficients::defaults()) {
    if (n_legit < 0) throw ValidationError("prop1_bound: n_legit must be >= 0");
    return 6.0 * (c.zeta + n_legit * c.kappa) / std::sqrt(2.0 * M_PI);
}

// Explicit (polynomial) capture probability. Requires a common sigma across
// the FBS and every legitimate BS; unequal-sigma problems must use
// capture_prob_exact. The integrand is a polynomial on every subinterval
// between breakpoints (branch switches of z_pdf at 0, of each z_cdf factor at
// -a_k, and clamp onsets at +-6 - a_k), so a Gauss-Legendre rule of
// sufficient order integrates each piece exactly; the only residual error is
// the fitting error itself.
inline double capture_prob_poly(const CaptureProblem& p,
                                const PolyCoefficients& c = PolyCoefficients::defaults()) {
    validate(p);
    for (const SignalDistribution& s : p.legit)
        if (std::abs(s.sigma - p.fbs.sigma) > 1e-12 * p.fbs.sigma)
            throw ValidationError(
                "capture_prob_poly requires equal sigmas; use capture_prob_exact for "
                "unequal-sigma problems");
    std::vector<double> a(p.legit.size());
    for (std::size_t k = 0; k < p.legit.size(); ++k)
        a[k] = (p.fbs.mu - p.legit[k].mu) / p.legit[k].sigma;

    std::vector<double> cuts{-3.0, 0.0, 3.0};
    for (double ak : a) {
        for (double t : {-ak, -6.0 - ak, 6.0 - ak})
            if (t > -3.0 && t < 3.0) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double u, double v) { return std::abs(u - v) < 1e-13; }),
               cuts.end());

    auto integrand = [&](double t) {
        double v = z_pdf(t, c);
        for (double ak : a) {
            v *= z_cdf(t + ak, c);
            if (v == 0.0) break;
        }
        return v;
    };

    // Piece degree is at most 7 (N+1); an order-n rule is exact for degree
    // 2n - 1, so n = ceil((7 (N+1) + 1) / 2) suffices; add margin.
    int order = (7 * (static_cast<int>(a.size()) + 1) + 3) / 2 + 1;
    order = std::max(order, 8);

    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
        acc += detail::integrate_gauss(integrand, cuts[s], cuts[s + 1], order);
    return std::clamp(acc / std::sqrt(2.0 * M_PI), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// 3-sigma shortcut

// If the FBS mean clears (or trails) the strongest legitimate mean by at
// least three of its own sigmas, the capture outcome is treated as
// deterministic; otherwise no shortcut applies.
inline std::optional<int> three_sigma_shortcut(const CaptureProblem& p) {
    validate(p);
    if (p.legit.empty()) return 1;
    double mu_max = p.legit.front().mu;
    for (const SignalDistribution& s : p.legit) mu_max = std::max(mu_max, s.mu);
    double diff = p.fbs.mu - mu_max;
    if (std::abs(diff) >= 3.0 * p.fbs.sigma) return diff > 0 ? 1 : 0;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Monte Carlo oracle

struct McResult {
    double estimate = 0.0;
    double std_error = 0.0;
};

namespace detail {

// Deterministic standard-normal generator (Box-Muller over mt19937_64);
// avoids std::normal_distribution, whose output is implementation-defined.
class NormalSampler {
  public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}
    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    double uniform() {
        // In (0, 1]: avoids log(0).
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace detail

inline McResult capture_prob_mc(const CaptureProblem& p, std::size_t samples, std::uint64_t seed) {
    validate(p);
    if (samples < 1000) throw ValidationError("capture_prob_mc: requires samples >= 1000");
    if (p.legit.empty()) return McResult{1.0, 0.0};

    detail::NormalSampler normal(seed);
    std::size_t wins = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        double fbs = p.fbs.mu + p.fbs.sigma * normal();
        bool strongest = true;
        for (const SignalDistribution& l : p.legit) {
            double v = l.mu + l.sigma * normal();
            if (v >= fbs) {
                strongest = false;
                break;
            }
        }
        if (strongest) ++wins;
    }
    McResult r;
    r.estimate = static_cast<double>(wins) / static_cast<double>(samples);
    r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(samples));
    return r;
}

}  // namespace cpds
