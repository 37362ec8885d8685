#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cpds/scenario.hpp"

using cpds::AttackPlan;
using cpds::DefensePlan;
using cpds::EnumerationParams;
using cpds::Network;
using cpds::TargetOutcome;
using cpds::WeightedScenario;
using nlohmann::json;

namespace {

Network toy() { return cpds::load_network(CPDS_CASES_DIR "/toy6.json"); }

// Two-line feeder whose first RCS sits exactly on a grid point, so an FBS
// placed there dominates every legitimate base station by far more than
// three sigma.
Network chain_with_exposed_rcs(double bs_sigma = 4.0) {
    json j = json::parse(R"({
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
    })");
    j["base_stations"][0]["sigma"] = bs_sigma;
    return cpds::network_from_json(j);
}

TargetOutcome prob_target(const std::string& id, bool cyber, double p) {
    TargetOutcome t;
    t.target = id;
    t.cyber = cyber;
    t.success_prob = p;
    return t;
}

double total_prob(const std::vector<WeightedScenario>& ws) {
    double s = 0.0;
    for (const auto& w : ws) s += w.prob;
    return s;
}

}  // namespace

TEST_CASE("no FBS means no cyber targets") {
    const Network net = toy();
    AttackPlan attack;
    attack.attacked_lines = {"L1"};
    const auto targets = cpds::target_probabilities(net, {}, attack);
    REQUIRE(targets.size() == 1);
    CHECK(targets[0].target == "L1");
    CHECK_FALSE(targets[0].cyber);
    // Unhardened line of length zeta_a: success probability 1 - e^-1.
    CHECK(targets[0].success_prob == Catch::Approx(1.0 - std::exp(-1.0)).margin(1e-12));

    DefensePlan defense;
    defense.hardened_lines = {"L1"};
    const auto hardened = cpds::target_probabilities(net, defense, attack);
    CHECK(hardened[0].success_prob ==
          Catch::Approx(1.0 - std::exp(-0.2)).margin(1e-12));
}

TEST_CASE("FBS on top of an RCS forces capture unless the RCS is protected") {
    const Network net = chain_with_exposed_rcs();
    AttackPlan attack;
    attack.fbs_position = cpds::Vec2{100.0, 0.0};
    const auto targets = cpds::target_probabilities(net, {}, attack);
    REQUIRE(targets.size() == 2);  // no attacked lines, two RCSs
    const auto& wa = targets[0];
    CHECK(wa.target == "WA");
    CHECK(wa.cyber);
    REQUIRE(wa.forced.has_value());
    CHECK(*wa.forced == true);
    CHECK(wa.success_prob == Catch::Approx(1.0).margin(1e-12));
    // The second RCS is 50 m from the FBS: genuinely probabilistic.
    const auto& wb = targets[1];
    CHECK(wb.target == "WB");
    CHECK_FALSE(wb.forced.has_value());
    CHECK(wb.success_prob > 0.0);
    CHECK(wb.success_prob < 1.0);

    // Protection dilutes a certain capture into a 10% success: the target
    // must stay probabilistic rather than be folded.
    DefensePlan defense;
    defense.protected_rcs = {"WA"};
    const auto defended = cpds::target_probabilities(net, defense, attack);
    const auto& wa_def = defended[0];
    CHECK(wa_def.target == "WA");
    CHECK_FALSE(wa_def.forced.has_value());
    CHECK(wa_def.success_prob == Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("unequal sigmas route through exact quadrature") {
    const Network net = chain_with_exposed_rcs(5.0);
    AttackPlan attack;
    attack.fbs_position = cpds::Vec2{100.0, 0.0};
    const auto targets = cpds::target_probabilities(net, {}, attack);
    for (const auto& t : targets) {
        CHECK(t.success_prob >= 0.0);
        CHECK(t.success_prob <= 1.0);
    }
}

TEST_CASE("truncation thresholds and k_max ranking") {
    const Network net = toy();
    AttackPlan attack;
    attack.fbs_position = cpds::Vec2{500.0, 500.0};

    EnumerationParams tight;
    tight.k_max = 2;
    const auto targets = cpds::target_probabilities(net, {}, attack, tight);
    int probabilistic = 0, forced_fail = 0;
    for (const auto& t : targets) {
        REQUIRE(t.cyber);
        if (!t.forced)
            ++probabilistic;
        else if (!*t.forced)
            ++forced_fail;
    }
    CHECK(probabilistic <= 2);
    CHECK(probabilistic + forced_fail == static_cast<int>(targets.size()));

    // A huge eps collapses everything into forced outcomes.
    EnumerationParams coarse;
    coarse.eps_p = 0.499;
    for (const auto& t : cpds::target_probabilities(net, {}, attack, coarse)) {
        const bool collapsed = t.forced.has_value();
        const bool mid = t.success_prob > 0.4 && t.success_prob < 0.6;
        if (!mid) CHECK(collapsed);
    }
}

TEST_CASE("outcome enumeration basics") {
    // All forced: a single scenario of probability one.
    TargetOutcome forced = prob_target("L1", false, 1.0);
    forced.forced = true;
    TargetOutcome dead = prob_target("W1", true, 0.0);
    dead.forced = false;
    auto ws = cpds::enumerate_outcomes({forced, dead});
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].prob == 1.0);
    CHECK(ws[0].scenario.faulted_lines.count("L1") == 1);
    CHECK(ws[0].scenario.hijacked_rcs.empty());

    // Two fair coins: four quarters.
    ws = cpds::enumerate_outcomes(
        {prob_target("L1", false, 0.5), prob_target("W1", true, 0.5)});
    REQUIRE(ws.size() == 4);
    for (const auto& w : ws) CHECK(w.prob == Catch::Approx(0.25).margin(1e-15));

    // Product arithmetic.
    ws = cpds::enumerate_outcomes({prob_target("L1", false, 0.9),
                                   prob_target("L2", false, 0.5),
                                   prob_target("W1", true, 0.2)});
    REQUIRE(ws.size() == 8);
    CHECK(total_prob(ws) == Catch::Approx(1.0).margin(1e-9));
    bool found_all_success = false;
    for (const auto& w : ws) {
        if (w.scenario.faulted_lines.size() == 2 && w.scenario.hijacked_rcs.size() == 1) {
            found_all_success = true;
            CHECK(w.prob == Catch::Approx(0.09).margin(1e-12));
        }
    }
    CHECK(found_all_success);

    // Degenerate probabilities fold instead of spawning zero-mass branches.
    ws = cpds::enumerate_outcomes(
        {prob_target("L1", false, 1.0), prob_target("L2", false, 0.0),
         prob_target("W1", true, 0.5)});
    REQUIRE(ws.size() == 2);
    for (const auto& w : ws) {
        CHECK(w.prob == Catch::Approx(0.5).margin(1e-15));
        CHECK(w.scenario.faulted_lines.count("L1") == 1);
        CHECK(w.scenario.faulted_lines.count("L2") == 0);
    }
}

TEST_CASE("probability mass sums to one for random target mixes") {
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TargetOutcome> targets;
        const int n = 1 + static_cast<int>(unit(gen) * 8.0);
        for (int i = 0; i < n; ++i) {
            TargetOutcome t = prob_target("T" + std::to_string(i), unit(gen) < 0.5,
                                          unit(gen));
            if (unit(gen) < 0.2) t.forced = unit(gen) < 0.5;
            targets.push_back(t);
        }
        const auto ws = cpds::enumerate_outcomes(targets);
        CHECK(total_prob(ws) == Catch::Approx(1.0).margin(1e-9));
        for (const auto& w : ws) CHECK(w.prob > 0.0);
    }
}

TEST_CASE("enumeration cap rejects oversized probabilistic sets") {
    std::vector<TargetOutcome> targets;
    for (int i = 0; i < 13; ++i)
        targets.push_back(prob_target("T" + std::to_string(i), false, 0.5));
    CHECK_THROWS_AS(cpds::enumerate_outcomes(targets), cpds::ValidationError);
    CHECK_NOTHROW(cpds::enumerate_outcomes(targets, 13));
}

TEST_CASE("expected resilience: empty attack is perfect") {
    const Network net = toy();
    cpds::RestorationEngine engine(net);
    CHECK(cpds::expected_resilience(engine, {}, {}) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("expected resilience: two-scenario expectation") {
    const Network net = toy();
    cpds::RestorationEngine engine(net);
    AttackPlan attack;
    attack.attacked_lines = {"L2"};

    const auto targets = cpds::target_probabilities(net, {}, attack);
    REQUIRE(targets.size() == 1);
    const double p = targets[0].success_prob;

    cpds::OutcomeScenario fault;
    fault.faulted_lines = {"L2"};
    const double r_fault = engine.optimal_restoration(fault).resilience;
    const double expected = p * r_fault + (1.0 - p) * 1.0;
    CHECK(cpds::expected_resilience(engine, {}, attack) ==
          Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("expected resilience matches a brute-force expectation") {
    const Network net = toy();
    cpds::RestorationEngine engine(net);
    DefensePlan defense;
    defense.hardened_lines = {"L2"};
    defense.protected_rcs = {"W1"};
    AttackPlan attack;
    attack.attacked_lines = {"L2"};
    attack.fbs_position = cpds::Vec2{500.0, 500.0};
    EnumerationParams params;
    params.k_max = 3;  // keep the brute-force pass quick

    const auto targets = cpds::target_probabilities(net, defense, attack, params);
    const auto outcomes = cpds::enumerate_outcomes(targets, params.max_probabilistic);
    double oracle_expectation = 0.0;
    for (const auto& ws : outcomes)
        oracle_expectation +=
            ws.prob * cpds::brute_force_restoration(net, ws.scenario).resilience;

    const double value = cpds::expected_resilience(engine, defense, attack, params);
    CHECK(value == Catch::Approx(oracle_expectation).margin(1e-6));
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
}

TEST_CASE("raising a success probability cannot raise expected resilience") {
    const Network net = toy();
    cpds::RestorationEngine engine(net);
    AttackPlan attack;
    attack.attacked_lines = {"L2", "L4"};
    attack.fbs_position = cpds::Vec2{500.0, 0.0};
    EnumerationParams params;
    params.k_max = 2;

    auto targets = cpds::target_probabilities(net, {}, attack, params);
    auto value_of = [&](const std::vector<TargetOutcome>& ts) {
        double e = 0.0;
        for (const auto& ws : cpds::enumerate_outcomes(ts, params.max_probabilistic))
            e += ws.prob * engine.optimal_restoration(ws.scenario).resilience;
        return e;
    };
    const double base = value_of(targets);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i].forced) continue;
        auto bumped = targets;
        bumped[i].success_prob = std::min(1.0, bumped[i].success_prob + 0.05);
        CHECK(value_of(bumped) <= base + 1e-12);
    }
}

TEST_CASE("cache transparency: engine and one-shot solves agree") {
    const Network net = toy();
    AttackPlan attack;
    attack.attacked_lines = {"L3"};
    cpds::RestorationEngine engine(net);
    const double with_cache_cold = cpds::expected_resilience(engine, {}, attack);
    const double with_cache_warm = cpds::expected_resilience(engine, {}, attack);
    CHECK(with_cache_cold == with_cache_warm);

    const auto targets = cpds::target_probabilities(net, {}, attack);
    double uncached = 0.0;
    for (const auto& ws : cpds::enumerate_outcomes(targets))
        uncached += ws.prob * cpds::optimal_restoration(net, ws.scenario).resilience;
    CHECK(uncached == with_cache_cold);
}

TEST_CASE("target listing is deterministic") {
    const Network net = toy();
    AttackPlan attack;
    attack.attacked_lines = {"L1", "L5"};
    attack.fbs_position = cpds::Vec2{0.0, 500.0};
    const auto a = cpds::target_probabilities(net, {}, attack);
    const auto b = cpds::target_probabilities(net, {}, attack);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].target == b[i].target);
        CHECK(a[i].success_prob == b[i].success_prob);
        CHECK(a[i].forced == b[i].forced);
    }
}

TEST_CASE("scenario table renders one row per scenario") {
    const auto ws = cpds::enumerate_outcomes(
        {prob_target("L1", false, 0.7), prob_target("W2", true, 0.3)});
    const std::string table = cpds::format_scenario_table(ws, {1.0, 0.9, 0.8, 0.7});
    CHECK(table.find("prob") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);  // header + 4 rows
    CHECK(table.find("L1") != std::string::npos);
}
