#pragma once

// Expands a (defense, attack) pair into the weighted outcome-scenario set,
// applying the explicit truncation policy, and computes expected resilience.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cpds/attack.hpp"
#include "cpds/network.hpp"
#include "cpds/restoration.hpp"
#include "cpds/signal.hpp"

namespace cpds {

struct EnumerationParams {
    double eps_p = 1e-3;        // deterministic-collapse threshold on capture prob
    int k_max = 6;              // probabilistic cyber targets kept (largest capture prob)
    int max_probabilistic = 12; // hard cap on 2^N enumeration
};

struct TargetOutcome {
    std::string target;          // line id (physical) or RCS id (cyber)
    bool cyber = false;
    double success_prob = 0.0;   // p_t(alpha, beta), after any defense
    std::optional<bool> forced;  // set when thresholding fixed the outcome
};

struct WeightedScenario {
    OutcomeScenario scenario;
    double prob = 0.0;
};

// Capture probability for one RCS against the FBS at `fbs_pos`, routed
// through the deterministic shortcut, then the polynomial fit when all
// sigmas match, then exact quadrature.
inline double rcs_capture_prob(const Network& net, const Vec2& fbs_pos,
                               std::size_t line_idx) {
    const Vec2 rcs = net.rcs_position(line_idx);
    CaptureProblem prob;
    prob.fbs = {mean_strength(net.radio, fbs_pos, rcs), net.radio.fbs_sigma};
    for (const auto& bs : net.base_stations) {
        // Legitimate transmitters keep their own reference strength;
        // radio.s_ref is the FBS power knob only.
        RadioParams r = net.radio;
        r.s_ref = bs.s_ref.value_or(net.radio.s_ref);
        prob.legit.push_back({mean_strength(r, bs.position, rcs), bs.sigma});
    }

    if (auto forced = three_sigma_shortcut(prob)) return *forced ? 1.0 : 0.0;
    bool equal_sigma = true;
    for (const auto& s : prob.legit)
        equal_sigma &= std::abs(s.sigma - prob.fbs.sigma) <= 1e-12 * prob.fbs.sigma;
    if (equal_sigma) return capture_prob_poly(prob, poly_coefficients_for(net));
    return capture_prob_exact(prob);
}

inline std::vector<TargetOutcome> target_probabilities(
    const Network& net, const DefensePlan& defense, const AttackPlan& attack,
    const EnumerationParams& params = {}) {
    validate_plan(net, defense);
    validate_plan(net, attack);
    const InspectionParams insp = inspection_params(net);

    std::vector<TargetOutcome> out;
    // Physical targets, in network line order.
    for (const auto& line : net.lines) {
        if (attack.attacked_lines.count(line.id) == 0) continue;
        TargetOutcome t;
        t.target = line.id;
        t.cyber = false;
        t.success_prob = physical_success_prob(
            line, true, defense.hardened_lines.count(line.id) > 0, insp);
        out.push_back(std::move(t));
    }
    if (!attack.fbs_position) return out;

    // Cyber targets: every RCS, thresholded on the (defense-independent)
    // capture probability so truncation does not shift with the defense.
    struct Candidate {
        std::size_t line_idx;
        double p_cap;
        TargetOutcome t;
    };
    std::vector<Candidate> candidates;
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        const auto& line = net.lines[li];
        const double p_cap = rcs_capture_prob(net, *attack.fbs_position, li);
        const bool defended = defense.protected_rcs.count(line.rcs_id) > 0;
        TargetOutcome t;
        t.target = line.rcs_id;
        t.cyber = true;
        t.success_prob = cyber_success_prob(p_cap, defended, insp);
        if (p_cap <= params.eps_p) {
            t.forced = false;  // certain capture failure
            out.push_back(std::move(t));
        } else if (p_cap >= 1.0 - params.eps_p && !defended) {
            t.forced = true;  // certain capture, no defense to dilute it
            out.push_back(std::move(t));
        } else {
            candidates.push_back({li, p_cap, std::move(t)});
        }
    }
    // Keep the k_max most capturable; force the rest to failure.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.p_cap > b.p_cap; });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (static_cast<int>(i) >= params.k_max) candidates[i].t.forced = false;
    }
    // Restore network order for a canonical listing.
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.line_idx < b.line_idx; });
    for (auto& c : candidates) out.push_back(std::move(c.t));
    return out;
}

inline std::vector<WeightedScenario> enumerate_outcomes(
    const std::vector<TargetOutcome>& targets, int max_probabilistic = 12) {
    OutcomeScenario base;
    std::vector<const TargetOutcome*> probabilistic;
    for (const auto& t : targets) {
        const bool success_sure = (t.forced && *t.forced) || (!t.forced && t.success_prob >= 1.0);
        const bool failure_sure = (t.forced && !*t.forced) || (!t.forced && t.success_prob <= 0.0);
        if (success_sure) {
            if (t.cyber)
                base.hijacked_rcs.insert(t.target);
            else
                base.faulted_lines.insert(t.target);
        } else if (!failure_sure) {
            probabilistic.push_back(&t);
        }
    }
    const int n = static_cast<int>(probabilistic.size());
    if (n > max_probabilistic)
        throw ValidationError(
            "outcome enumeration needs " + std::to_string(n) + " probabilistic targets (cap " +
            std::to_string(max_probabilistic) + "); tighten eps_p/k_max truncation");

    std::vector<WeightedScenario> out;
    out.reserve(1u << n);
    for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
        WeightedScenario ws;
        ws.scenario = base;
        ws.prob = 1.0;
        for (int i = 0; i < n; ++i) {
            const TargetOutcome& t = *probabilistic[static_cast<size_t>(i)];
            if ((mask >> i) & 1UL) {
                ws.prob *= t.success_prob;
                if (t.cyber)
                    ws.scenario.hijacked_rcs.insert(t.target);
                else
                    ws.scenario.faulted_lines.insert(t.target);
            } else {
                ws.prob *= 1.0 - t.success_prob;
            }
        }
        if (ws.prob > 0.0) out.push_back(std::move(ws));
    }
    return out;
}

inline double expected_resilience(RestorationEngine& engine, const DefensePlan& defense,
                                  const AttackPlan& attack,
                                  const EnumerationParams& params = {}) {
    const auto targets = target_probabilities(engine.network(), defense, attack, params);
    const auto outcomes = enumerate_outcomes(targets, params.max_probabilistic);
    double expected = 0.0;
    for (const auto& ws : outcomes)
        expected += ws.prob * engine.optimal_restoration(ws.scenario).resilience;
    return expected;
}

// Audit table: one row per scenario with its probability and resilience.
inline std::string format_scenario_table(const std::vector<WeightedScenario>& scenarios,
                                         const std::vector<double>& resilience) {
    std::ostringstream os;
    os << std::setw(4) << "id" << "  " << std::setw(12) << "prob" << "  "
       << std::setw(12) << "resilience" << "  faults | hijacks\n";
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto& ws = scenarios[i];
        os << std::setw(4) << i << "  " << std::setw(12) << std::setprecision(6)
           << std::fixed << ws.prob << "  " << std::setw(12);
        if (i < resilience.size())
            os << resilience[i];
        else
            os << "-";
        os << "  " << scenario_key(ws.scenario) << "\n";
        os.unsetf(std::ios::fixed);
    }
    return os.str();
}

}  // namespace cpds
