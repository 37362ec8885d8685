#pragma once

// Stage-1 defense and Stage-2 attack decision vectors, search-theory
// detection probabilities, protection effects, budget feasibility, and
// exhaustive attack-plan enumeration.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cpds/common.hpp"
#include "cpds/network.hpp"

namespace cpds {

struct DefensePlan {
    std::set<std::string> hardened_lines;  // physical hardening (enhanced inspection)
    std::set<std::string> protected_rcs;   // cyber protection against FBS hijack
};

struct AttackPlan {
    std::set<std::string> attacked_lines;
    std::optional<Vec2> fbs_position;  // absent = no FBS deployed
};

struct InspectionParams {
    double zeta_a = 1.0;    // km, normal inspection intensity
    double zeta_b = 5.0;    // km, enhanced (more thorough) inspection intensity
    double p_defend = 0.9;  // effectiveness of cyber protection
};

inline void validate(const InspectionParams& p) {
    if (!(p.zeta_a > 0) || !(p.zeta_b > 0))
        throw ValidationError("inspection: intensities must be > 0");
    if (!(p.zeta_b > p.zeta_a))
        throw ValidationError(
            "inspection: enhanced inspection must detect more (requires zeta_b > zeta_a)");
    if (p.p_defend < 0 || p.p_defend > 1)
        throw ValidationError("inspection: p_defend must be within [0, 1]");
}

inline InspectionParams inspection_params(const Network& net) {
    InspectionParams p;
    p.zeta_a = net.defaults.zeta_a;
    p.zeta_b = net.defaults.zeta_b;
    p.p_defend = net.defaults.p_defend;
    return p;
}

// Probability that an attack on this line is detected and deterred under
// normal (p_a) and enhanced (p_b) inspection: exp(-l / zeta). A larger zeta
// means a more intense patrol, so detection improves with zeta.
inline std::pair<double, double> detection_probs(const Line& line, const InspectionParams& p) {
    if (!(line.length > 0)) throw ValidationError("detection_probs: line length must be > 0");
    return {std::exp(-line.length / p.zeta_a), std::exp(-line.length / p.zeta_b)};
}

// Probability that a physical attack on the line causes a fault. Hardening
// switches the inspection from normal to enhanced intensity.
inline double physical_success_prob(const Line& line, bool attacked, bool hardened,
                                    const InspectionParams& p) {
    if (!attacked) return 0.0;
    auto [pa, pb] = detection_probs(line, p);
    double d = hardened ? 1.0 : 0.0;
    return 1.0 - (pa - d * (pa - pb));
}

// Probability that a deployed FBS actually hijacks the RCS: capture times
// the survival of the cyber protection.
inline double cyber_success_prob(double p_capture, bool protected_rcs, const InspectionParams& p) {
    if (p_capture < -1e-12 || p_capture > 1.0 + 1e-12)
        throw ValidationError("cyber_success_prob: p_capture must be a probability");
    double d = protected_rcs ? 1.0 : 0.0;
    double v = std::clamp(p_capture, 0.0, 1.0) * (1.0 - d * p.p_defend);
    return std::clamp(v, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Feasibility

inline bool plan_feasible(const DefensePlan& plan, const GameDefaults& budgets) {
    return static_cast<int>(plan.hardened_lines.size()) <= budgets.n_defend_phys &&
           static_cast<int>(plan.protected_rcs.size()) <= budgets.n_defend_cyber;
}

inline bool plan_feasible(const AttackPlan& plan, const GameDefaults& budgets) {
    return static_cast<int>(plan.attacked_lines.size()) <= budgets.n_attack_phys;
}

// Structural validity against a network: ids resolve, the FBS position (when
// present) is one of the grid candidates.
inline void validate_plan(const Network& net, const DefensePlan& plan) {
    for (const std::string& id : plan.hardened_lines) net.line_index(id);
    for (const std::string& id : plan.protected_rcs) net.line_of_rcs(id);
}

inline void validate_plan(const Network& net, const AttackPlan& plan) {
    for (const std::string& id : plan.attacked_lines) net.line_index(id);
    if (plan.fbs_position) {
        for (const Vec2& g : grid_positions(net)) {
            if (std::abs(g.x - plan.fbs_position->x) < 1e-9 &&
                std::abs(g.y - plan.fbs_position->y) < 1e-9)
                return;
        }
        throw ValidationError("attack plan: fbs_position is not a grid candidate");
    }
}

// ---------------------------------------------------------------------------
// Enumeration

// Every attack the Stage-2 minimizer considers: line subsets of size
// 1..budget crossed with every FBS grid position (and, when requested, the
// "no FBS" variant). Budget 0 yields the single empty plan. Deterministic
// order: subsets by size then lexicographic line index; within a subset,
// grid positions in grid order, then the no-FBS variant.
inline std::vector<AttackPlan> enumerate_attack_plans(const Network& net, int budget,
                                                      bool include_no_fbs) {
    if (budget < 0) throw ValidationError("enumerate_attack_plans: budget must be >= 0");
    std::vector<AttackPlan> plans;
    if (budget == 0) {
        plans.push_back(AttackPlan{});
        return plans;
    }

    const std::vector<Vec2> grid = grid_positions(net);
    const int nlines = static_cast<int>(net.lines.size());

    auto emit = [&](const std::vector<int>& subset) {
        AttackPlan base;
        for (int idx : subset) base.attacked_lines.insert(net.lines[idx].id);
        for (const Vec2& g : grid) {
            AttackPlan p = base;
            p.fbs_position = g;
            plans.push_back(std::move(p));
        }
        if (include_no_fbs) plans.push_back(base);
    };

    for (int size = 1; size <= std::min(budget, nlines); ++size) {
        std::vector<int> subset(size);
        for (int i = 0; i < size; ++i) subset[i] = i;
        while (true) {
            emit(subset);
            int i = size - 1;
            while (i >= 0 && subset[i] == nlines - size + i) --i;
            if (i < 0) break;
            ++subset[i];
            for (int k = i + 1; k < size; ++k) subset[k] = subset[k - 1] + 1;
        }
    }
    return plans;
}

}  // namespace cpds
