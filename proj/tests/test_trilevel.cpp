#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cpds/trilevel.hpp"

using cpds::AttackPlan;
using cpds::DefensePlan;
using cpds::GameDefaults;
using cpds::MasterScenarioBlock;
using cpds::Network;
using cpds::RestorationEngine;
using nlohmann::json;

namespace {

Network toy() { return cpds::load_network(CPDS_CASES_DIR "/toy6.json"); }

// Shared engine so the restoration cache warms once for the whole binary.
RestorationEngine& toy_engine() {
    static Network net = toy();
    static RestorationEngine engine(net);
    return engine;
}

// Two-line feeder whose first RCS sits exactly on a grid point: an FBS
// placed there captures WA with probability exactly 1, the case where the
// scenario engine folds the capture during evaluation.
Network exposed_chain() {
    return cpds::network_from_json(json::parse(R"({
      "format_version": 1,
      "region": {"xmin": 0, "ymin": 0, "xmax": 200, "ymax": 100},
      "grid_step": 100,
      "radio": {"s_ref": 100, "d0": 10, "path_loss_exp": 3, "fbs_sigma": 4, "d_min": 1},
      "times": {"t_fault": 0, "t_r1": 1, "t_r2": 31, "t_r3": 61},
      "nodes": [
        {"id": "S", "is_substation": true, "pg_max": 10, "qg_max": 10, "position": [0, 0]},
        {"id": "A", "p_load": 1.0, "q_load": 0.4, "position": [100, 0]},
        {"id": "B", "p_load": 0.5, "q_load": 0.2, "position": [200, 0]}
      ],
      "lines": [
        {"id": "LA", "from": "S", "to": "A", "length": 1.0, "r": 0.01, "x": 0.02,
         "s_max": 5, "switch_class": "sectionalizing", "rcs_id": "WA",
         "rcs_position": [100, 0]},
        {"id": "LB", "from": "A", "to": "B", "length": 1.0, "r": 0.01, "x": 0.02,
         "s_max": 5, "switch_class": "sectionalizing", "rcs_id": "WB"}
      ],
      "base_stations": [{"id": "BS1", "position": [100, 50], "sigma": 4}]
    })"));
}

GameDefaults budgets_of(int defend_phys, int defend_cyber, int attack_phys) {
    GameDefaults g;
    g.n_defend_phys = defend_phys;
    g.n_defend_cyber = defend_cyber;
    g.n_attack_phys = attack_phys;
    return g;
}

// Exhaustive max-min value computed without the master problem.
double exhaustive_game_value(RestorationEngine& engine, const GameDefaults& budgets,
                             DefensePlan* argmax = nullptr) {
    double best = -1.0;
    for (const auto& defense : cpds::enumerate_defense_plans(engine.network(), budgets)) {
        const auto sp = cpds::solve_subproblem(engine, defense, budgets.n_attack_phys);
        if (sp.value > best) {
            best = sp.value;
            if (argmax) *argmax = defense;
        }
    }
    return best;
}

// Evaluates a monomial map at a concrete defense.
double monomials_at(const std::map<std::vector<std::string>, double>& mono,
                    const DefensePlan& d) {
    double total = 0.0;
    for (const auto& [key, coef] : mono) {
        double term = coef;
        for (const auto& var : key) {
            const bool cyber = var.rfind("c:", 0) == 0;
            const std::string id = var.substr(2);
            const bool on = cyber ? d.protected_rcs.count(id) > 0 : d.hardened_lines.count(id) > 0;
            if (!on) {
                term = 0.0;
                break;
            }
        }
        total += term;
    }
    return total;
}

// Fixes the master's defense binaries to a concrete plan and resolves.
double master_value_at(const cpds::MasterModel& mm, const Network& net, const DefensePlan& d) {
    cpds::MasterModel fixed = mm;
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        fixed.milp.fix_col(mm.harden[li], d.hardened_lines.count(net.lines[li].id) ? 1.0 : 0.0);
        fixed.milp.fix_col(mm.protect[li],
                           d.protected_rcs.count(net.lines[li].rcs_id) ? 1.0 : 0.0);
    }
    return cpds::solve_milp(fixed.milp).value(fixed.eta);
}

}  // namespace

TEST_CASE("product linearization is exact for binary inputs") {
    for (int n = 2; n <= 3; ++n) {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            cpds::Milp m;
            m.maximize = GENERATE(true, false);
            std::vector<int> vars;
            double prod = 1.0;
            for (int i = 0; i < n; ++i) {
                vars.push_back(m.add_binary("b" + std::to_string(i)));
                const double v = (mask >> i) & 1u ? 1.0 : 0.0;
                m.fix_col(vars.back(), v);
                prod *= v;
            }
            const int f = cpds::linearize_product(m, vars, "f");
            m.cols[static_cast<std::size_t>(f)].obj = 1.0;
            const auto sol = cpds::solve_milp(m);
            CHECK(sol.value(f) == Catch::Approx(prod).margin(1e-9));
        }
    }

    cpds::Milp m;
    const int b = m.add_binary("b");
    const std::size_t ncols = m.cols.size();
    CHECK(cpds::linearize_product(m, {b}, "f") == b);  // degenerate: the variable itself
    CHECK(m.cols.size() == ncols);
    CHECK_THROWS_AS(cpds::linearize_product(m, {}, "f"), cpds::ValidationError);
}

TEST_CASE("subproblem matches hand enumeration") {
    RestorationEngine& engine = toy_engine();
    const Network& net = engine.network();

    for (const DefensePlan& defense :
         {DefensePlan{}, DefensePlan{{"L2"}, {"W2"}}, DefensePlan{{}, {"W4"}}}) {
        double best = 0.0;
        AttackPlan best_attack;
        bool first = true;
        for (const auto& plan : cpds::enumerate_attack_plans(net, 1, true)) {
            const double v = cpds::expected_resilience(engine, defense, plan);
            if (first || v < best) {
                best = v;
                best_attack = plan;
                first = false;
            }
        }
        const auto sp = cpds::solve_subproblem(engine, defense, 1);
        CHECK(sp.value == best);
        CHECK(sp.attack.attacked_lines == best_attack.attacked_lines);
        REQUIRE(sp.attack.fbs_position.has_value() == best_attack.fbs_position.has_value());
        CHECK(sp.value < 1.0);
        CHECK_FALSE(sp.attack.attacked_lines.empty());
    }

    const auto idle = cpds::solve_subproblem(engine, {}, 0);
    CHECK(idle.value == 1.0);
    CHECK(idle.attack.attacked_lines.empty());
    CHECK_FALSE(idle.attack.fbs_position.has_value());
}

TEST_CASE("master blocks price every defense exactly like the scenario engine") {
    const Network net = toy();
    RestorationEngine engine(net);

    const auto sp = cpds::solve_subproblem(engine, {}, 1);
    REQUIRE(sp.attack.fbs_position.has_value());  // cyber leverage should pay off here

    const std::size_t cached = engine.cache_size();
    const auto block = cpds::make_block(engine, {}, sp.attack);
    CHECK(engine.cache_size() == cached);  // every branch was already solved by the SP

    // One factor per attacked line plus per RCS that survives truncation.
    std::size_t kept = 0;
    for (const auto& t : cpds::target_probabilities(net, {}, sp.attack))
        if (!t.forced || *t.forced) ++kept;
    REQUIRE(block.factors.size() == kept);
    REQUIRE(block.factors.size() >= 2);  // cyber leverage present, not physical-only
    REQUIRE(block.branches.size() == (1u << kept));

    const auto mono = cpds::block_monomials(block);
    for (const auto& defense : cpds::enumerate_defense_plans(net, budgets_of(1, 1, 0))) {
        const double direct = cpds::block_value(block, defense);
        CHECK(direct ==
              Catch::Approx(cpds::expected_resilience(engine, defense, sp.attack)).margin(1e-12));
        CHECK(monomials_at(mono, defense) == Catch::Approx(direct).margin(1e-9));
    }
}

TEST_CASE("master linearization is exact at integral defenses") {
    RestorationEngine& engine = toy_engine();
    const Network& net = engine.network();

    AttackPlan a1;
    a1.attacked_lines = {"L2"};
    a1.fbs_position = cpds::grid_positions(net)[4];
    AttackPlan a2;
    a2.attacked_lines = {"L4"};
    a2.fbs_position = cpds::grid_positions(net)[0];
    AttackPlan a3;
    a3.attacked_lines = {"L1"};  // no FBS: physical-only block

    std::vector<MasterScenarioBlock> blocks;
    blocks.push_back(cpds::make_block(engine, {}, a1));
    blocks.push_back(cpds::make_block(engine, DefensePlan{{"L4"}, {"W1"}}, a2));
    blocks.push_back(cpds::make_block(engine, {}, a3));

    // Full budgets so every random assignment is feasible.
    const auto mm = cpds::build_master(net, blocks, budgets_of(6, 6, 0));

    std::mt19937 rng(123);
    for (int trial = 0; trial < 25; ++trial) {
        DefensePlan d;
        for (const auto& line : net.lines) {
            if (rng() & 1u) d.hardened_lines.insert(line.id);
            if (rng() & 1u) d.protected_rcs.insert(line.rcs_id);
        }
        double expect = 1.0;
        for (const auto& b : blocks) expect = std::min(expect, cpds::block_value(b, d));
        CHECK(master_value_at(mm, net, d) == Catch::Approx(expect).margin(1e-9));
    }
}

TEST_CASE("master respects budgets and attains the exhaustive defense optimum") {
    RestorationEngine& engine = toy_engine();
    const Network& net = engine.network();

    const auto sp0 = cpds::solve_subproblem(engine, {}, 1);
    std::vector<MasterScenarioBlock> blocks{cpds::make_block(engine, {}, sp0.attack)};
    AttackPlan other;
    other.attacked_lines = {"L1"};
    other.fbs_position = cpds::grid_positions(net)[4];
    blocks.push_back(cpds::make_block(engine, {}, other));

    const auto none = cpds::solve_master(cpds::build_master(net, blocks, budgets_of(0, 0, 0)), net);
    CHECK(none.defense.hardened_lines.empty());
    CHECK(none.defense.protected_rcs.empty());
    double undefended = 1.0;
    for (const auto& b : blocks) undefended = std::min(undefended, cpds::block_value(b, {}));
    CHECK(none.eta == Catch::Approx(undefended).margin(1e-9));

    const GameDefaults budgets = budgets_of(1, 1, 0);
    const auto ms = cpds::solve_master(cpds::build_master(net, blocks, budgets), net);
    CHECK(ms.defense.hardened_lines.size() <= 1);
    CHECK(ms.defense.protected_rcs.size() <= 1);

    double best = -1.0;
    for (const auto& d : cpds::enumerate_defense_plans(net, budgets)) {
        double v = 1.0;
        for (const auto& b : blocks) v = std::min(v, cpds::block_value(b, d));
        best = std::max(best, v);
    }
    CHECK(ms.eta == Catch::Approx(best).margin(1e-9));
    double attained = 1.0;
    for (const auto& b : blocks) attained = std::min(attained, cpds::block_value(b, ms.defense));
    CHECK(attained == Catch::Approx(ms.eta).margin(1e-9));
}

TEST_CASE("near-certain captures keep their defensive leverage in the master") {
    const Network net = exposed_chain();
    RestorationEngine engine(net);

    AttackPlan attack;
    attack.attacked_lines = {"LA"};
    attack.fbs_position = cpds::Vec2{100.0, 0.0};

    // The engine folds WA's certain capture when WA is undefended; the block
    // must still carry the failure branch so protection has priced value.
    const auto block = cpds::make_block(engine, {}, attack);
    REQUIRE(block.factors.size() == 3);  // LA physical, WA certain, WB probabilistic

    const DefensePlan none, wa{{}, {"WA"}}, wb{{}, {"WB"}};
    CHECK(cpds::block_value(block, none) ==
          Catch::Approx(cpds::expected_resilience(engine, none, attack)).margin(1e-12));
    CHECK(cpds::block_value(block, wa) ==
          Catch::Approx(cpds::expected_resilience(engine, wa, attack)).margin(1e-12));
    CHECK(cpds::block_value(block, wa) > cpds::block_value(block, none));

    const auto ms = cpds::solve_master(
        cpds::build_master(net, {block}, budgets_of(0, 1, 0)), net);
    const double best = std::max({cpds::block_value(block, none), cpds::block_value(block, wa),
                                  cpds::block_value(block, wb)});
    CHECK(ms.eta == Catch::Approx(best).margin(1e-9));
    CHECK(cpds::block_value(block, ms.defense) == Catch::Approx(ms.eta).margin(1e-9));
    CHECK(best > cpds::block_value(block, none));  // defending is strictly worth pricing

    // End to end, the game must find the exhaustive optimum on this instance.
    const GameDefaults budgets = budgets_of(0, 1, 1);
    const auto sol = cpds::solve_ccg(engine, budgets);
    CHECK(sol.converged);
    CHECK(sol.value == Catch::Approx(exhaustive_game_value(engine, budgets)).margin(2e-4));
}

TEST_CASE("zero attack budget converges immediately") {
    RestorationEngine& engine = toy_engine();
    const auto sol = cpds::solve_ccg(engine, budgets_of(1, 1, 0));
    CHECK(sol.converged);
    CHECK(sol.value == 1.0);
    CHECK(sol.trace.size() <= 2);
    CHECK(sol.worst_attack.attacked_lines.empty());
    CHECK_FALSE(sol.worst_attack.fbs_position.has_value());
}

TEST_CASE("ccg solves the toy game to the exhaustive optimum") {
    RestorationEngine& engine = toy_engine();
    const GameDefaults budgets = engine.network().defaults;  // (1, 1, 1)
    REQUIRE(budgets.n_attack_phys == 1);

    cpds::CcgOptions opts;
    const auto sol = cpds::solve_ccg(engine, budgets, opts);
    REQUIRE_FALSE(sol.trace.empty());
    CHECK(sol.converged);

    for (std::size_t i = 0; i < sol.trace.size(); ++i) {
        if (i > 0) {
            CHECK(sol.trace[i].upper <= sol.trace[i - 1].upper + 1e-9);
            CHECK(sol.trace[i].lower >= sol.trace[i - 1].lower);
        }
        CHECK(sol.trace[i].upper >= sol.trace[i].lower - 1e-6);
    }
    CHECK(sol.trace.back().upper - sol.trace.back().lower <= opts.eps + 1e-6);
    CHECK(sol.value == sol.trace.back().lower);

    // The returned defense really achieves the reported value.
    const auto replay = cpds::solve_subproblem(engine, sol.defense, budgets.n_attack_phys);
    CHECK(replay.value == Catch::Approx(sol.value).margin(opts.eps + 1e-6));
    CHECK(cpds::expected_resilience(engine, sol.defense, sol.worst_attack) ==
          Catch::Approx(sol.value).margin(1e-9));

    // And it is the exhaustive max-min optimum.
    const double best = exhaustive_game_value(engine, budgets);
    CHECK(sol.value == Catch::Approx(best).margin(opts.eps + 1e-6));
    CHECK(sol.trace.back().upper >= best - 1e-6);

    const std::string table = cpds::format_trace(sol);
    CHECK(table.find("iter") != std::string::npos);
    CHECK(table.find("converged") != std::string::npos);
}

TEST_CASE("ccg is deterministic") {
    const Network net = toy();
    RestorationEngine cold(net);
    const auto a = cpds::solve_ccg(toy_engine(), net.defaults);
    const auto b = cpds::solve_ccg(cold, net.defaults);
    CHECK(a.value == b.value);
    CHECK(a.converged == b.converged);
    CHECK(a.defense.hardened_lines == b.defense.hardened_lines);
    CHECK(a.defense.protected_rcs == b.defense.protected_rcs);
    CHECK(a.worst_attack.attacked_lines == b.worst_attack.attacked_lines);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].upper == b.trace[i].upper);
        CHECK(a.trace[i].lower == b.trace[i].lower);
    }
}

TEST_CASE("solver guards reject bad inputs and oversized blocks") {
    RestorationEngine& engine = toy_engine();

    cpds::CcgOptions opts;
    opts.eps = 0.0;
    CHECK_THROWS_AS(cpds::solve_ccg(engine, budgets_of(1, 1, 1), opts), cpds::ValidationError);
    opts.eps = 1e-4;
    opts.max_iter = 0;
    CHECK_THROWS_AS(cpds::solve_ccg(engine, budgets_of(1, 1, 1), opts), cpds::ValidationError);
    CHECK_THROWS_AS(cpds::solve_ccg(engine, budgets_of(-1, 1, 1)), cpds::ValidationError);

    // Monomial expansion cap: 13 defense-relevant targets would need 2^13 terms.
    MasterScenarioBlock big;
    for (int i = 0; i < 13; ++i) {
        MasterScenarioBlock::Factor f;
        f.target = "W" + std::to_string(i);
        f.cyber = true;
        f.base = 0.5;
        f.slope = -0.45;
        big.factors.push_back(f);
    }
    big.branches.push_back({std::vector<bool>(13, true), 1.0});
    CHECK_THROWS_WITH(cpds::block_monomials(big),
                      Catch::Matchers::ContainsSubstring("tighten scenario truncation"));

    // Branch-tree cap in block construction mirrors the scenario engine's.
    AttackPlan attack;
    attack.attacked_lines = {"L1"};
    attack.fbs_position = cpds::grid_positions(engine.network())[4];
    cpds::EnumerationParams tight;
    tight.max_probabilistic = 2;
    CHECK_THROWS_WITH(cpds::make_block(engine, {}, attack, tight),
                      Catch::Matchers::ContainsSubstring("tighten eps_p/k_max"));
}
