#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "cpds/attack.hpp"

namespace {

cpds::Line line_of_length(double km) {
    cpds::Line l;
    l.id = "L";
    l.from = "A";
    l.to = "B";
    l.length = km;
    return l;
}

const cpds::InspectionParams kParams{1.0, 5.0, 0.9};

}  // namespace

TEST_CASE("detection_probs follows the search-theory law") {
    auto [pa, pb] = cpds::detection_probs(line_of_length(1.0), kParams);
    CHECK(pa == Catch::Approx(std::exp(-1.0)));  // l = zeta_a
    CHECK(pb == Catch::Approx(std::exp(-0.2)));

    auto [pa2, pb2] = cpds::detection_probs(line_of_length(10.0), kParams);
    CHECK(pb2 == Catch::Approx(std::exp(-2.0)));  // l = 2 zeta_b

    auto [pa3, pb3] = cpds::detection_probs(line_of_length(1e-12), kParams);
    CHECK(pa3 == Catch::Approx(1.0));
    CHECK(pb3 == Catch::Approx(1.0));

    REQUIRE_THROWS_AS(cpds::detection_probs(line_of_length(0.0), kParams),
                      cpds::ValidationError);
}

TEST_CASE("physical_success_prob") {
    cpds::Line l = line_of_length(5.0);

    CHECK(cpds::physical_success_prob(l, false, false, kParams) == 0.0);
    CHECK(cpds::physical_success_prob(l, false, true, kParams) == 0.0);
    CHECK(cpds::physical_success_prob(l, true, false, kParams) ==
          Catch::Approx(1.0 - std::exp(-5.0)));
    CHECK(cpds::physical_success_prob(l, true, true, kParams) ==
          Catch::Approx(1.0 - std::exp(-1.0)));

    SECTION("hardening never helps the attacker when zeta_b > zeta_a") {
        for (double km : {0.1, 0.5, 1.0, 2.5, 7.0, 20.0}) {
            cpds::Line t = line_of_length(km);
            CHECK(cpds::physical_success_prob(t, true, true, kParams) <=
                  cpds::physical_success_prob(t, true, false, kParams));
        }
    }
}

TEST_CASE("cyber_success_prob") {
    CHECK(cpds::cyber_success_prob(0.8, false, kParams) == Catch::Approx(0.8));
    CHECK(cpds::cyber_success_prob(0.8, true, kParams) == Catch::Approx(0.08));
    cpds::InspectionParams perfect = kParams;
    perfect.p_defend = 1.0;
    CHECK(cpds::cyber_success_prob(0.7, true, perfect) == 0.0);

    SECTION("protection never helps the attacker") {
        for (double p = 0.0; p <= 1.0; p += 0.111)
            CHECK(cpds::cyber_success_prob(p, true, kParams) <=
                  cpds::cyber_success_prob(p, false, kParams));
    }
    REQUIRE_THROWS_AS(cpds::cyber_success_prob(1.5, false, kParams), cpds::ValidationError);
}

TEST_CASE("inspection parameter validation") {
    cpds::InspectionParams bad = kParams;
    bad.zeta_b = 0.5;  // weaker than the normal intensity
    REQUIRE_THROWS_AS(cpds::validate(bad), cpds::ValidationError);
    bad = kParams;
    bad.p_defend = 1.5;
    REQUIRE_THROWS_AS(cpds::validate(bad), cpds::ValidationError);
    REQUIRE_NOTHROW(cpds::validate(kParams));
}

TEST_CASE("plan feasibility is a cardinality check") {
    cpds::GameDefaults budgets;
    budgets.n_defend_phys = 2;
    budgets.n_defend_cyber = 1;
    budgets.n_attack_phys = 2;

    cpds::DefensePlan d;
    CHECK(cpds::plan_feasible(d, budgets));  // empty plan
    d.hardened_lines = {"L1", "L2"};
    d.protected_rcs = {"W1"};
    CHECK(cpds::plan_feasible(d, budgets));  // at the budget
    d.hardened_lines.insert("L3");
    CHECK(!cpds::plan_feasible(d, budgets));

    cpds::AttackPlan a;
    CHECK(cpds::plan_feasible(a, budgets));
    a.attacked_lines = {"L1", "L2"};
    CHECK(cpds::plan_feasible(a, budgets));
    a.attacked_lines.insert("L3");
    CHECK(!cpds::plan_feasible(a, budgets));
}

TEST_CASE("attack plan enumeration") {
    cpds::Network net = cpds::load_network(CPDS_CASES_DIR "/toy6.json");  // 6 lines, 3x3 grid

    SECTION("budget 0 yields the single empty plan") {
        auto plans = cpds::enumerate_attack_plans(net, 0, true);
        REQUIRE(plans.size() == 1);
        CHECK(plans[0].attacked_lines.empty());
        CHECK(!plans[0].fbs_position.has_value());
    }
    SECTION("counts match the combinatorial prediction") {
        // (C(6,1) + C(6,2)) x 9 grid positions, without the no-FBS variant.
        auto plans = cpds::enumerate_attack_plans(net, 2, false);
        CHECK(plans.size() == (6 + 15) * 9);
        // With the no-FBS variant the second factor grows by one.
        auto plans2 = cpds::enumerate_attack_plans(net, 2, true);
        CHECK(plans2.size() == (6 + 15) * 10);
    }
    SECTION("no duplicates and all plans are valid") {
        auto plans = cpds::enumerate_attack_plans(net, 2, true);
        std::set<std::string> seen;
        for (const auto& p : plans) {
            std::ostringstream key;
            for (const auto& id : p.attacked_lines) key << id << ',';
            if (p.fbs_position) key << '@' << p.fbs_position->x << ':' << p.fbs_position->y;
            CHECK(seen.insert(key.str()).second);
            REQUIRE_NOTHROW(cpds::validate_plan(net, p));
            CHECK(cpds::plan_feasible(p, cpds::GameDefaults{0, 0, 2}));
        }
    }
    SECTION("enumeration is deterministic") {
        auto a = cpds::enumerate_attack_plans(net, 2, true);
        auto b = cpds::enumerate_attack_plans(net, 2, true);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].attacked_lines == b[i].attacked_lines);
            CHECK(a[i].fbs_position.has_value() == b[i].fbs_position.has_value());
        }
    }
    SECTION("budget larger than the line count saturates") {
        auto plans = cpds::enumerate_attack_plans(net, 99, false);
        CHECK(plans.size() == 63 * 9);  // all 2^6 - 1 nonempty subsets
    }
}

TEST_CASE("plan validation catches structural problems") {
    cpds::Network net = cpds::load_network(CPDS_CASES_DIR "/toy6.json");

    cpds::AttackPlan a;
    a.attacked_lines = {"L1"};
    a.fbs_position = cpds::Vec2{123.0, 456.0};  // not a lattice point
    REQUIRE_THROWS_AS(cpds::validate_plan(net, a), cpds::ValidationError);

    a.fbs_position = cpds::Vec2{500.0, 500.0};
    REQUIRE_NOTHROW(cpds::validate_plan(net, a));

    cpds::DefensePlan d;
    d.protected_rcs = {"NOPE"};
    REQUIRE_THROWS_AS(cpds::validate_plan(net, d), cpds::ValidationError);
    d.protected_rcs = {"W1", "WT1"};
    REQUIRE_NOTHROW(cpds::validate_plan(net, d));
}
