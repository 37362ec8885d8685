#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cpds/signal.hpp"

using cpds::CaptureProblem;
using cpds::PolyCoefficients;
using cpds::SignalDistribution;

namespace {

const PolyCoefficients kCoeffs = PolyCoefficients::defaults();

CaptureProblem equal_sigma_problem(const std::vector<double>& a, double sigma = 4.0) {
    CaptureProblem p;
    p.fbs = {0.0, sigma};
    for (double ak : a) p.legit.push_back({-ak * sigma, sigma});
    return p;
}

// Independent reference: Simpson's rule for the capture integrand truncated
// to [-3, 3] (the domain the polynomial method integrates over). Shares no
// code with the implementation under test.
double truncated_reference(const CaptureProblem& p) {
    const int n = 6000;  // even
    const double lo = -3.0, hi = 3.0, w = (hi - lo) / n;
    auto f = [&](double t) {
        double v = std::exp(-0.5 * t * t);
        for (const auto& l : p.legit)
            v *= 0.5 * std::erfc(-((p.fbs.sigma / l.sigma) * t + (p.fbs.mu - l.mu) / l.sigma) /
                                 std::sqrt(2.0));
        return v;
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) acc += f(lo + i * w) * (i % 2 ? 4.0 : 2.0);
    return acc * w / 3.0 / std::sqrt(2.0 * M_PI);
}

}  // namespace

TEST_CASE("mean_strength follows the path-loss law") {
    cpds::RadioParams radio;
    radio.s_ref = 100.0;
    radio.d0 = 10.0;
    radio.path_loss_exp = 2.0;
    radio.d_min = 1.0;

    CHECK(cpds::mean_strength(radio, {0, 0}, {10, 0}) == Catch::Approx(100.0));
    CHECK(cpds::mean_strength(radio, {0, 0}, {100, 0}) == Catch::Approx(80.0));
    // Coincident points clamp to d_min and stay finite.
    double at_zero = cpds::mean_strength(radio, {5, 5}, {5, 5});
    double at_dmin = cpds::mean_strength(radio, {0, 0}, {1, 0});
    CHECK(std::isfinite(at_zero));
    CHECK(at_zero == Catch::Approx(at_dmin));
}

TEST_CASE("z_pdf matches the printed fit") {
    CHECK(cpds::z_pdf(0.0, kCoeffs) == 1.0);
    CHECK(cpds::z_pdf(3.5, kCoeffs) == 0.0);
    CHECK(cpds::z_pdf(3.0, kCoeffs) == 0.0);
    CHECK(cpds::z_pdf(-3.0, kCoeffs) == 0.0);
    CHECK(std::abs(cpds::z_pdf(1.0, kCoeffs) - std::exp(-0.5)) < 1e-3);

    SECTION("even symmetry") {
        for (double x = 0.05; x < 3.0; x += 0.173)
            CHECK(std::abs(cpds::z_pdf(x, kCoeffs) - cpds::z_pdf(-x, kCoeffs)) < 1e-15);
    }
    SECTION("fit error inside the support stays below 1e-3") {
        double worst = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            double x = -3.0 + 6.0 * (i + 0.5) / n;  // midpoint grid, avoids the clamp points
            worst = std::max(worst, std::abs(cpds::z_pdf(x, kCoeffs) - std::exp(-0.5 * x * x)));
        }
        INFO("measured max |z_pdf - exp(-x^2/2)| = " << worst);
        CHECK(worst <= 1e-3);
    }
}

TEST_CASE("z_cdf matches the printed fit") {
    CHECK(cpds::z_cdf(0.0, kCoeffs) == 0.5);
    CHECK(cpds::z_cdf(6.0, kCoeffs) == 1.0);
    CHECK(cpds::z_cdf(-6.0, kCoeffs) == 0.0);
    CHECK(cpds::z_cdf(100.0, kCoeffs) == 1.0);
    CHECK(std::abs(cpds::z_cdf(1.96, kCoeffs) - 0.975) < 2e-3);

    SECTION("mirror identity 1 - z(-x) = z(x)") {
        for (double x = 0.05; x < 6.0; x += 0.289)
            CHECK(std::abs(1.0 - cpds::z_cdf(-x, kCoeffs) - cpds::z_cdf(x, kCoeffs)) < 1e-12);
    }
    SECTION("fit error against the normal CDF on the central region") {
        // The printed coefficients track Phi tightly only away from the +-6
        // edges; the central region is what capture problems with |a_k| <= 3
        // actually exercise (arguments stay in (-6, 6) but weight comes from
        // the PDF factor concentrated in (-3, 3)).
        double worst = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            double x = -3.5 + 7.0 * (i + 0.5) / n;
            worst = std::max(worst,
                             std::abs(cpds::z_cdf(x, kCoeffs) - cpds::normal_cdf(x)));
        }
        INFO("measured max |z_cdf - Phi| on [-3.5, 3.5] = " << worst);
        CHECK(worst <= 2e-3);
    }
    SECTION("non-decreasing away from the documented defect points") {
        // The printed branch intercepts step DOWN by 2e-4 across x = 0, and
        // the fit slopes down from ~3.5 outward; in between the fit is
        // cleanly monotone.
        auto scan = [&](double lo, double hi) {
            double min_step = 1.0;
            double prev = cpds::z_cdf(lo, kCoeffs);
            const int n = 200000;
            for (int i = 1; i <= n; ++i) {
                double cur = cpds::z_cdf(lo + (hi - lo) * i / n, kCoeffs);
                min_step = std::min(min_step, cur - prev);
                prev = cur;
            }
            return min_step;
        };
        CHECK(scan(-3.45, -1e-3) >= -1e-9);
        CHECK(scan(1e-3, 3.45) >= -1e-9);
    }
}

// The printed coefficient set is not globally monotone: measured behavior is
// a -2e-4 step across x = 0 (intercepts 0.5001 -> 0.4999) and a negative
// slope of up to -0.021 approaching +-6. This check documents that defect;
// it is expected to fail for the shipped defaults.
TEST_CASE("z_cdf global monotonicity (known defect of printed coefficients)", "[!shouldfail]") {
    double min_step = 1.0;
    double prev = cpds::z_cdf(-6.0, kCoeffs);
    const int n = 100000;
    for (int i = 1; i <= n; ++i) {
        double cur = cpds::z_cdf(-6.0 + 12.0 * i / n, kCoeffs);
        min_step = std::min(min_step, cur - prev);
        prev = cur;
    }
    INFO("measured min adjacent step = " << min_step);
    CHECK(min_step >= -1e-6);
}

TEST_CASE("capture_prob_exact reproduces closed forms") {
    SECTION("no competitors") {
        CaptureProblem p;
        p.fbs = {50.0, 4.0};
        CHECK(cpds::capture_prob_exact(p) == 1.0);
    }
    SECTION("single equal-sigma competitor has the closed form Phi(a/sqrt(2))") {
        // Independently derived: P(F > L) with F - L normal, variance 2 sigma^2.
        const double expected[] = {0.016947427, 0.144422183, 0.5, 0.855577817, 0.983052573};
        const double as[] = {-3.0, -1.5, 0.0, 1.5, 3.0};
        for (int i = 0; i < 5; ++i) {
            CaptureProblem p = equal_sigma_problem({as[i]});
            CHECK(std::abs(cpds::capture_prob_exact(p) - expected[i]) < 1e-6);
        }
    }
    SECTION("monotone non-decreasing in the FBS mean") {
        CaptureProblem p = equal_sigma_problem({0.7, -1.1, 2.0});
        double prev = -1.0;
        for (double mu = -20.0; mu <= 20.0; mu += 2.5) {
            p.fbs.mu = mu;
            double v = cpds::capture_prob_exact(p);
            CHECK(v >= prev - 1e-12);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
    }
    SECTION("translation invariance") {
        CaptureProblem p;
        p.fbs = {47.0, 4.0};
        p.legit = {{45.0, 3.0}, {51.0, 5.0}, {40.0, 4.0}};
        double base = cpds::capture_prob_exact(p);
        CaptureProblem q = p;
        q.fbs.mu += 123.456;
        for (auto& l : q.legit) l.mu += 123.456;
        CHECK(std::abs(cpds::capture_prob_exact(q) - base) < 1e-12);
    }
    SECTION("agrees with the Monte Carlo oracle on unequal sigmas") {
        CaptureProblem p;
        p.fbs = {50.0, 6.0};
        p.legit = {{48.0, 3.0}, {52.0, 5.0}};
        double exact = cpds::capture_prob_exact(p);
        cpds::McResult mc = cpds::capture_prob_mc(p, 400000, 20260814);
        CHECK(std::abs(exact - mc.estimate) <= 4.0 * mc.std_error);
    }
}

TEST_CASE("capture_prob_poly implements the explicit method") {
    SECTION("rejects unequal sigmas") {
        CaptureProblem p;
        p.fbs = {50.0, 4.0};
        p.legit = {{48.0, 3.0}};
        REQUIRE_THROWS_AS(cpds::capture_prob_poly(p, kCoeffs), cpds::ValidationError);
    }
    SECTION("symmetric single competitor") {
        CaptureProblem p = equal_sigma_problem({0.0});
        CHECK(std::abs(cpds::capture_prob_poly(p, kCoeffs) - 0.5) <= cpds::prop1_bound(1));
    }
    SECTION("matches the truncated reference within the analytic bound") {
        // The analytic bound accounts for the fitting error of the two
        // polynomial pieces; the reference below integrates the true
        // Gaussian over the same [-3, 3] window, so the comparison isolates
        // exactly that error.
        std::mt19937_64 gen(99);
        std::uniform_real_distribution<double> ud(-3.0, 3.0);
        for (int trial = 0; trial < 300; ++trial) {
            int n = 1 + static_cast<int>(gen() % 7);
            std::vector<double> a(n);
            for (double& ak : a) ak = ud(gen);
            CaptureProblem p = equal_sigma_problem(a);
            double poly = cpds::capture_prob_poly(p, kCoeffs);
            double ref = truncated_reference(p);
            REQUIRE(std::abs(poly - ref) <= cpds::prop1_bound(n));
        }
    }
    SECTION("translation invariance") {
        CaptureProblem p = equal_sigma_problem({1.0, -2.0, 0.5});
        double base = cpds::capture_prob_poly(p, kCoeffs);
        p.fbs.mu += 55.0;
        for (auto& l : p.legit) l.mu += 55.0;
        CHECK(std::abs(cpds::capture_prob_poly(p, kCoeffs) - base) < 1e-12);
    }
    SECTION("a_k beyond +-3 degrade gracefully via the clamp") {
        CaptureProblem dominated = equal_sigma_problem({-8.0});  // competitor far above the FBS
        CHECK(cpds::capture_prob_poly(dominated, kCoeffs) <= 0.01);
        CaptureProblem dominating = equal_sigma_problem({8.0});  // competitor far below the FBS
        CHECK(cpds::capture_prob_poly(dominating, kCoeffs) >= 0.99);
    }
}

TEST_CASE("three_sigma_shortcut") {
    CaptureProblem p;
    p.fbs = {60.0, 4.0};
    p.legit = {{40.0, 4.0}, {48.0, 4.0}};

    SECTION("FBS dominates by exactly 3 sigma") {
        p.fbs.mu = 48.0 + 12.0;
        REQUIRE(cpds::three_sigma_shortcut(p).has_value());
        CHECK(*cpds::three_sigma_shortcut(p) == 1);
    }
    SECTION("FBS dominated by 3 sigma") {
        p.fbs.mu = 48.0 - 12.0;
        REQUIRE(cpds::three_sigma_shortcut(p).has_value());
        CHECK(*cpds::three_sigma_shortcut(p) == 0);
    }
    SECTION("within 3 sigma there is no shortcut") {
        p.fbs.mu = 48.0 + 8.0;
        CHECK(!cpds::three_sigma_shortcut(p).has_value());
    }
    SECTION("no competitors means certain capture") {
        p.legit.clear();
        REQUIRE(cpds::three_sigma_shortcut(p).has_value());
        CHECK(*cpds::three_sigma_shortcut(p) == 1);
    }
}

TEST_CASE("capture_prob_mc is a deterministic statistical oracle") {
    SECTION("requires a minimum sample count") {
        CaptureProblem p = equal_sigma_problem({0.0});
        REQUIRE_THROWS_AS(cpds::capture_prob_mc(p, 10, 1), cpds::ValidationError);
    }
    SECTION("no competitors") {
        CaptureProblem p;
        p.fbs = {50.0, 4.0};
        CHECK(cpds::capture_prob_mc(p, 1000, 1).estimate == 1.0);
    }
    SECTION("symmetric case converges to one half") {
        CaptureProblem p = equal_sigma_problem({0.0});
        cpds::McResult r = cpds::capture_prob_mc(p, 1000000, 42);
        CHECK(std::abs(r.estimate - 0.5) <= 3.0 * r.std_error);
    }
    SECTION("fixed seed reproduces, different seed varies") {
        CaptureProblem p = equal_sigma_problem({0.4, -1.0});
        cpds::McResult a = cpds::capture_prob_mc(p, 50000, 7);
        cpds::McResult b = cpds::capture_prob_mc(p, 50000, 7);
        cpds::McResult c = cpds::capture_prob_mc(p, 50000, 8);
        CHECK(a.estimate == b.estimate);
        CHECK(a.estimate != c.estimate);
    }
    SECTION("tracks the exact value across random problems") {
        std::mt19937_64 gen(5);
        std::uniform_real_distribution<double> mu(-5.0, 5.0);
        std::uniform_real_distribution<double> sg(2.0, 6.0);
        for (int trial = 0; trial < 5; ++trial) {
            CaptureProblem p;
            p.fbs = {mu(gen), sg(gen)};
            int n = 1 + static_cast<int>(gen() % 4);
            for (int k = 0; k < n; ++k) p.legit.push_back({mu(gen), sg(gen)});
            double exact = cpds::capture_prob_exact(p);
            cpds::McResult r = cpds::capture_prob_mc(p, 200000, 1000 + trial);
            CHECK(std::abs(exact - r.estimate) <= 4.0 * std::max(r.std_error, 1e-4));
        }
    }
}

TEST_CASE("prop1_bound arithmetic") {
    CHECK(cpds::prop1_bound(0, kCoeffs) == Catch::Approx(6.4101e-4).epsilon(1e-3));
    CHECK(cpds::prop1_bound(1, kCoeffs) == Catch::Approx(2.0030e-3).epsilon(1e-3));
    CHECK(cpds::prop1_bound(7, kCoeffs) == Catch::Approx(1.01749e-2).epsilon(1e-3));
    CHECK(cpds::prop1_bound(2, kCoeffs) > cpds::prop1_bound(1, kCoeffs));
    REQUIRE_THROWS_AS(cpds::prop1_bound(-1, kCoeffs), cpds::ValidationError);
}

TEST_CASE("poly coefficient overrides parse on top of defaults") {
    SECTION("null yields defaults") {
        PolyCoefficients c = cpds::poly_coefficients_from_json(nlohmann::json());
        CHECK(c.e[0] == 1.0);
        CHECK(c.h0_pos == 0.4999);
        CHECK(c.zeta == Catch::Approx(2.678e-4));
    }
    SECTION("partial override") {
        nlohmann::json j = {{"zeta", 1e-3}, {"h0_pos", 0.5}, {"h0_neg", 0.5}};
        PolyCoefficients c = cpds::poly_coefficients_from_json(j);
        CHECK(c.zeta == 1e-3);
        CHECK(c.h0_pos == 0.5);
        CHECK(c.kappa == Catch::Approx(5.69e-4));
    }
    SECTION("bad shapes are rejected") {
        REQUIRE_THROWS_AS(cpds::poly_coefficients_from_json({{"e", {1, 2, 3}}}), cpds::ParseError);
        REQUIRE_THROWS_AS(cpds::poly_coefficients_from_json({{"zeta", -1.0}}),
                          cpds::ValidationError);
    }
    SECTION("a network without an override block reports defaults") {
        cpds::Network net = cpds::load_network(CPDS_CASES_DIR "/toy6.json");
        PolyCoefficients c = cpds::poly_coefficients_for(net);
        CHECK(c.e[7] == Catch::Approx(0.001577));
    }
}
