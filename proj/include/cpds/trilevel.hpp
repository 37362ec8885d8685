#pragma once

// Defender-attacker-defender game solved by column-and-constraint generation.
//
// The outer game is max over defenses of min over attacks of the expected
// resilience (the inner restoration problem is pre-solved per outcome
// scenario and cached by RestorationEngine). The subproblem enumerates every
// feasible attack against a fixed defense; the master problem proposes a new
// defense against the attacks collected so far. Each master block carries the
// complete outcome tree of one collected attack: every branch probability is
// a product of per-target factors that are affine in one defense binary, so
// the block constraint expands into monomials over defense binaries, which
// are linearized exactly with auxiliary variables.
//
// The master keeps the game value in a variable eta constrained by
// eta <= sum_h Prob_h(D) * R_h* per collected attack. (Stated as a lower
// bound "eta >=" in some derivations of the method, which would leave the
// maximization unbounded; the binding direction for a max-min master is the
// upper bound used here.)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cpds/attack.hpp"
#include "cpds/highs_backend.hpp"
#include "cpds/milp.hpp"
#include "cpds/network.hpp"
#include "cpds/restoration.hpp"
#include "cpds/scenario.hpp"

namespace cpds {

// ---------------------------------------------------------------------------
// Subproblem: worst attack against a fixed defense, by exhaustive enumeration.
// ---------------------------------------------------------------------------

struct SubproblemResult {
    AttackPlan attack;    // first minimizer in enumeration order
    double value = 1.0;   // expected resilience under that attack
};

// With forbid_fbs the attacker is denied the FBS entirely (the baseline case
// in FBS-power studies): only bare line-attack plans are considered.
inline SubproblemResult solve_subproblem(RestorationEngine& engine, const DefensePlan& defense,
                                         int attack_budget, const EnumerationParams& params = {},
                                         bool include_no_fbs = true, bool forbid_fbs = false) {
    validate_plan(engine.network(), defense);
    const auto plans =
        enumerate_attack_plans(engine.network(), attack_budget, include_no_fbs || forbid_fbs);
    SubproblemResult best;
    bool first = true;
    for (const auto& plan : plans) {
        if (forbid_fbs && plan.fbs_position) continue;
        const double v = expected_resilience(engine, defense, plan, params);
        if (first || v < best.value) {
            best.attack = plan;
            best.value = v;
            first = false;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Master scenario blocks.
// ---------------------------------------------------------------------------

// One collected attack together with the complete branch tree over its kept
// targets. Factor i gives the success probability of target i as an affine
// function of its defense binary: succ(D) = base + slope * D. Targets
// truncated to certain failure (tiny or rank-truncated capture probability,
// a defense-independent test) carry no factor on either side. A branch
// lists, per factor, whether the target succeeded, plus the cached optimal
// restoration value.
struct MasterScenarioBlock {
    AttackPlan attack;
    struct Factor {
        std::string target;   // line id (physical) or RCS id (cyber)
        bool cyber = false;
        double base = 0.0;
        double slope = 0.0;   // 0 when no defense variable can move the outcome
    };
    struct Branch {
        std::vector<bool> success;  // aligned with factors
        double r_star = 0.0;
    };
    std::vector<Factor> factors;
    std::vector<Branch> branches;
};

// Builds the block for one collected attack. The kept-target set matches the
// scenario engine's defense-independent truncation, but every kept target
// branches both ways here, including a near-certain capture that the engine
// may fold to success during evaluation: its failure branch is the one that
// gains probability mass once the master protects the RCS, so dropping it
// would hide exactly the defenses worth pricing. Restoration values come
// from the shared engine cache; branches the subproblem already visited are
// never re-solved.
inline MasterScenarioBlock make_block(RestorationEngine& engine, const DefensePlan& defense,
                                      const AttackPlan& attack,
                                      const EnumerationParams& params = {}) {
    const Network& net = engine.network();
    const InspectionParams insp = inspection_params(net);
    const auto targets = target_probabilities(net, defense, attack, params);

    MasterScenarioBlock block;
    block.attack = attack;
    for (const auto& t : targets) {
        MasterScenarioBlock::Factor f;
        f.target = t.target;
        f.cyber = t.cyber;
        if (t.cyber) {
            if (t.forced && !*t.forced) continue;  // truncated: no branch, no factor
            const double p_cap =
                rcs_capture_prob(net, *attack.fbs_position, net.line_of_rcs(t.target));
            f.base = p_cap;
            f.slope = -p_cap * insp.p_defend;
        } else {
            const Line& line = net.lines[net.line_index(t.target)];
            const auto [pa, pb] = detection_probs(line, insp);
            f.base = 1.0 - pa;
            f.slope = pa - pb;
        }
        block.factors.push_back(std::move(f));
    }

    const std::size_t n = block.factors.size();
    if (static_cast<int>(n) > params.max_probabilistic)
        throw ValidationError("master block enumerates " + std::to_string(n) +
                              " branch targets (cap " + std::to_string(params.max_probabilistic) +
                              "); tighten eps_p/k_max truncation");
    block.branches.reserve(1UL << n);
    for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
        MasterScenarioBlock::Branch br;
        br.success.reserve(n);
        OutcomeScenario sc;
        for (std::size_t i = 0; i < n; ++i) {
            const bool succ = (mask >> i) & 1UL;
            br.success.push_back(succ);
            if (!succ) continue;
            if (block.factors[i].cyber)
                sc.hijacked_rcs.insert(block.factors[i].target);
            else
                sc.faulted_lines.insert(block.factors[i].target);
        }
        br.r_star = engine.optimal_restoration(sc).resilience;
        block.branches.push_back(std::move(br));
    }
    return block;
}

// Direct (non-linearized) value of a block under a concrete defense.
inline double block_value(const MasterScenarioBlock& block, const DefensePlan& defense) {
    double total = 0.0;
    for (const auto& br : block.branches) {
        double p = 1.0;
        for (std::size_t i = 0; i < block.factors.size(); ++i) {
            const auto& f = block.factors[i];
            const bool on = f.cyber ? defense.protected_rcs.count(f.target) > 0
                                    : defense.hardened_lines.count(f.target) > 0;
            const double succ = f.base + (on ? f.slope : 0.0);
            p *= br.success[i] ? succ : 1.0 - succ;
        }
        total += p * br.r_star;
    }
    return total;
}

// Expands sum_h Prob_h(D) * R_h* into monomials over defense binaries.
// Key: sorted defense-variable names ("p:<line>" / "c:<rcs>"); empty key is
// the constant term. Factors with zero slope are folded into the constants
// before expansion, so the monomial count is 2^(defense-relevant targets).
inline std::map<std::vector<std::string>, double> block_monomials(
    const MasterScenarioBlock& block) {
    std::vector<std::size_t> rel;
    for (std::size_t i = 0; i < block.factors.size(); ++i)
        if (block.factors[i].slope != 0.0) rel.push_back(i);
    if (rel.size() > 12)
        throw ValidationError("master block expands to 2^" + std::to_string(rel.size()) +
                              " monomials (cap 2^12); tighten scenario truncation (eps_p/k_max)");

    auto var_name = [](const MasterScenarioBlock::Factor& f) {
        return (f.cyber ? "c:" : "p:") + f.target;
    };

    std::map<std::vector<std::string>, double> mono;
    for (const auto& br : block.branches) {
        double fixed = br.r_star;
        for (std::size_t i = 0; i < block.factors.size(); ++i) {
            const auto& f = block.factors[i];
            if (f.slope != 0.0) continue;
            fixed *= br.success[i] ? f.base : 1.0 - f.base;
        }
        for (unsigned long mask = 0; mask < (1UL << rel.size()); ++mask) {
            double term = fixed;
            std::vector<std::string> key;
            for (std::size_t j = 0; j < rel.size(); ++j) {
                const auto& f = block.factors[rel[j]];
                const bool succ = br.success[rel[j]];
                if ((mask >> j) & 1UL) {
                    term *= succ ? f.slope : -f.slope;
                    key.push_back(var_name(f));
                } else {
                    term *= succ ? f.base : 1.0 - f.base;
                }
            }
            std::sort(key.begin(), key.end());
            mono[key] += term;
        }
    }
    return mono;
}

// ---------------------------------------------------------------------------
// Product linearization and master construction.
// ---------------------------------------------------------------------------

// Replaces a product of binary columns with one auxiliary column f in [0, 1]:
// f <= b_i for every i, and f >= sum b_i - (n - 1). Exact for binary inputs.
// A single-variable product degenerates to the variable itself.
inline int linearize_product(Milp& m, const std::vector<int>& vars, const std::string& name) {
    if (vars.empty()) throw ValidationError("linearize_product: needs at least one variable");
    if (vars.size() == 1) return vars[0];
    const int f = m.add_col(name, 0.0, 1.0, 0.0, false);
    std::vector<std::pair<int, double>> lower{{f, 1.0}};
    for (std::size_t i = 0; i < vars.size(); ++i) {
        m.add_row(name + "_le" + std::to_string(i), -kInf, 0.0, {{f, 1.0}, {vars[i], -1.0}});
        lower.emplace_back(vars[i], -1.0);
    }
    m.add_row(name + "_ge", -(static_cast<double>(vars.size()) - 1.0), kInf, lower);
    return f;
}

struct MasterModel {
    Milp milp;
    int eta = -1;
    std::vector<int> harden;   // defense binary per line (physical hardening)
    std::vector<int> protect;  // defense binary per line's RCS (cyber protection)
    std::map<std::vector<int>, int> products;  // sorted binary-column subsets -> aux column
};

// Master problem over the collected blocks: maximize eta subject to the
// defense budgets and one linearized eta <= sum_h Prob_h(D) * R_h* row per
// block. A tiny negative objective weight on each defense binary prefers the
// lexicographically smallest defense among eta-optimal ones.
inline MasterModel build_master(const Network& net, const std::vector<MasterScenarioBlock>& blocks,
                                const GameDefaults& budgets) {
    constexpr double kTieEps = 1e-9;
    MasterModel mm;
    mm.milp.name = "master";
    mm.milp.maximize = true;
    mm.eta = mm.milp.add_col("eta", 0.0, 1.0, 1.0, false);

    std::vector<std::pair<int, double>> phys_budget, cyber_budget;
    int running = 0;
    for (const auto& line : net.lines) {
        const int c = mm.milp.add_binary("Dp_" + detail_restore::ident(line.id),
                                         -kTieEps * static_cast<double>(++running));
        mm.harden.push_back(c);
        phys_budget.emplace_back(c, 1.0);
    }
    for (const auto& line : net.lines) {
        const int c = mm.milp.add_binary("Dc_" + detail_restore::ident(line.rcs_id),
                                         -kTieEps * static_cast<double>(++running));
        mm.protect.push_back(c);
        cyber_budget.emplace_back(c, 1.0);
    }
    mm.milp.add_row("budget_phys", -kInf, budgets.n_defend_phys, phys_budget);
    mm.milp.add_row("budget_cyber", -kInf, budgets.n_defend_cyber, cyber_budget);

    auto col_of = [&](const std::string& key) {
        const bool cyber = key.rfind("c:", 0) == 0;
        const std::string id = key.substr(2);
        return cyber ? mm.protect[net.line_of_rcs(id)] : mm.harden[net.line_index(id)];
    };

    for (std::size_t n = 0; n < blocks.size(); ++n) {
        const auto mono = block_monomials(blocks[n]);
        double constant = 0.0;
        std::vector<std::pair<int, double>> coefs{{mm.eta, 1.0}};
        for (const auto& [key, coef] : mono) {
            if (key.empty()) {
                constant += coef;
                continue;
            }
            if (std::abs(coef) < 1e-15) continue;
            std::vector<int> cols;
            cols.reserve(key.size());
            for (const auto& k : key) cols.push_back(col_of(k));
            std::sort(cols.begin(), cols.end());
            int term;
            if (cols.size() == 1) {
                term = cols[0];
            } else if (auto it = mm.products.find(cols); it != mm.products.end()) {
                term = it->second;
            } else {
                std::string pname = "f";
                for (int c : cols) pname += "_" + std::to_string(c);
                term = linearize_product(mm.milp, cols, pname);
                mm.products.emplace(cols, term);
            }
            coefs.emplace_back(term, -coef);
        }
        mm.milp.add_row("blk" + std::to_string(n), -kInf, constant, coefs);
    }
    return mm;
}

struct MasterSolution {
    DefensePlan defense;
    double eta = 1.0;  // upper bound on the game value
};

inline MasterSolution solve_master(const MasterModel& mm, const Network& net,
                                   const SolveOptions& opts = {}) {
    const MilpSolution sol = solve_milp(mm.milp, opts);
    MasterSolution out;
    out.eta = sol.value(mm.eta);
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        if (sol.value(mm.harden[li]) > 0.5) out.defense.hardened_lines.insert(net.lines[li].id);
        if (sol.value(mm.protect[li]) > 0.5) out.defense.protected_rcs.insert(net.lines[li].rcs_id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Column-and-constraint generation loop.
// ---------------------------------------------------------------------------

struct CcgOptions {
    double eps = 1e-4;      // convergence gap on UB - LB
    int max_iter = 25;
    EnumerationParams enumeration;
    SolveOptions solver;
    bool include_no_fbs = true;  // let the attacker skip the FBS deployment
};

struct IterationRow {
    int iter = 0;
    double upper = 1.0;  // master value after this iteration's attack joined
    double lower = 0.0;  // best subproblem value seen so far
    AttackPlan attack;   // worst attack found this iteration
};

struct GameSolution {
    DefensePlan defense;     // best defense encountered, by subproblem value
    AttackPlan worst_attack; // its worst-case attack
    double value = 1.0;      // its subproblem value (= final lower bound)
    std::vector<IterationRow> trace;
    bool converged = false;
};

inline std::string describe(const DefensePlan& plan) {
    std::ostringstream os;
    os << "harden={";
    bool first = true;
    for (const auto& id : plan.hardened_lines) os << (first ? "" : ",") << id, first = false;
    os << "} protect={";
    first = true;
    for (const auto& id : plan.protected_rcs) os << (first ? "" : ",") << id, first = false;
    os << "}";
    return os.str();
}

inline std::string describe(const AttackPlan& plan) {
    std::ostringstream os;
    os << "lines={";
    bool first = true;
    for (const auto& id : plan.attacked_lines) os << (first ? "" : ",") << id, first = false;
    os << "}";
    if (plan.fbs_position)
        os << " fbs=(" << plan.fbs_position->x << "," << plan.fbs_position->y << ")";
    else
        os << " fbs=none";
    return os.str();
}

namespace detail_game {

inline std::string attack_key(const AttackPlan& plan) {
    std::ostringstream os;
    bool first = true;
    for (const auto& id : plan.attacked_lines) os << (first ? "" : ",") << id, first = false;
    os << "|";
    if (plan.fbs_position) os << plan.fbs_position->x << "," << plan.fbs_position->y;
    return os.str();
}

}  // namespace detail_game

// Alternates the subproblem (worst attack for the current defense; its value
// is a lower bound, kept as a running max) with the master (best defense
// against all collected attacks; its eta is the upper bound). Stops when
// UB - LB <= eps, when the subproblem repeats an already-collected attack
// (the master already prices that attack exactly, so no progress is
// possible), or after max_iter iterations (converged stays false).
inline GameSolution solve_ccg(RestorationEngine& engine, const GameDefaults& budgets,
                              const CcgOptions& opts = {}) {
    if (!(opts.eps > 0)) throw ValidationError("solve_ccg: eps must be > 0");
    if (opts.max_iter < 1) throw ValidationError("solve_ccg: max_iter must be >= 1");
    if (budgets.n_defend_phys < 0 || budgets.n_defend_cyber < 0 || budgets.n_attack_phys < 0)
        throw ValidationError("solve_ccg: budgets must be >= 0");

    const Network& net = engine.network();
    GameSolution sol;
    DefensePlan defense;  // iteration 1 evaluates the undefended system
    std::vector<MasterScenarioBlock> blocks;
    std::set<std::string> collected;
    double upper = 1.0;
    double lower = -std::numeric_limits<double>::infinity();
    double best_value = -std::numeric_limits<double>::infinity();

    for (int k = 1; k <= opts.max_iter; ++k) {
        const SubproblemResult sp = solve_subproblem(engine, defense, budgets.n_attack_phys,
                                                     opts.enumeration, opts.include_no_fbs);
        lower = std::max(lower, sp.value);
        if (sp.value > best_value) {
            best_value = sp.value;
            sol.defense = defense;
            sol.worst_attack = sp.attack;
        }

        if (!collected.insert(detail_game::attack_key(sp.attack)).second) {
            // The master already carries this attack's block; its proposal
            // cannot improve, so the bounds have met as tightly as they will.
            sol.trace.push_back({k, upper, lower, sp.attack});
            sol.converged = true;
            break;
        }
        blocks.push_back(make_block(engine, defense, sp.attack, opts.enumeration));

        const MasterModel mm = build_master(net, blocks, budgets);
        const MasterSolution ms = solve_master(mm, net, opts.solver);
        upper = ms.eta;
        defense = ms.defense;
        sol.trace.push_back({k, upper, lower, sp.attack});
        if (upper - lower <= opts.eps) {
            sol.converged = true;
            break;
        }
    }
    sol.value = best_value;
    return sol;
}

// Iteration trace as tabular text.
inline std::string format_trace(const GameSolution& sol) {
    std::ostringstream os;
    os << std::setw(5) << "iter" << std::setw(12) << "upper" << std::setw(12) << "lower"
       << std::setw(12) << "gap" << "  attack\n";
    for (const auto& row : sol.trace) {
        os << std::setw(5) << row.iter << std::fixed << std::setprecision(6) << std::setw(12)
           << row.upper << std::setw(12) << row.lower << std::setw(12) << row.upper - row.lower
           << "  " << describe(row.attack) << "\n";
        os.unsetf(std::ios_base::floatfield);
    }
    os << (sol.converged ? "converged" : "iteration limit reached") << ": value "
       << std::fixed << std::setprecision(6) << sol.value << " with " << describe(sol.defense)
       << "\n";
    return os.str();
}

// Every feasible defense, for exhaustive cross-checks on small instances:
// hardened-line subsets of size 0..n_defend_phys crossed with protected-RCS
// subsets of size 0..n_defend_cyber, in deterministic order.
inline std::vector<DefensePlan> enumerate_defense_plans(const Network& net,
                                                        const GameDefaults& budgets) {
    const int nlines = static_cast<int>(net.lines.size());
    auto subsets = [&](int max_size) {
        std::vector<std::vector<int>> out{{}};
        for (int size = 1; size <= std::min(max_size, nlines); ++size) {
            std::vector<int> subset(static_cast<std::size_t>(size));
            for (int i = 0; i < size; ++i) subset[static_cast<std::size_t>(i)] = i;
            while (true) {
                out.push_back(subset);
                int i = size - 1;
                while (i >= 0 && subset[static_cast<std::size_t>(i)] == nlines - size + i) --i;
                if (i < 0) break;
                ++subset[static_cast<std::size_t>(i)];
                for (int k = i + 1; k < size; ++k)
                    subset[static_cast<std::size_t>(k)] = subset[static_cast<std::size_t>(k - 1)] + 1;
            }
        }
        return out;
    };
    std::vector<DefensePlan> plans;
    for (const auto& hs : subsets(budgets.n_defend_phys)) {
        for (const auto& ps : subsets(budgets.n_defend_cyber)) {
            DefensePlan plan;
            for (int idx : hs) plan.hardened_lines.insert(net.lines[static_cast<std::size_t>(idx)].id);
            for (int idx : ps) plan.protected_rcs.insert(net.lines[static_cast<std::size_t>(idx)].rcs_id);
            plans.push_back(std::move(plan));
        }
    }
    return plans;
}

}  // namespace cpds
