#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpds/restoration.hpp"

using cpds::Network;
using cpds::OutcomeScenario;
using cpds::RestorationResult;
using nlohmann::json;

namespace {

Network toy() { return cpds::load_network(CPDS_CASES_DIR "/toy6.json"); }

// Substation S feeds A which feeds leaf B; no tie, no DG.
Network leaf_chain() {
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
         "s_max": 5, "switch_class": "sectionalizing", "rcs_id": "WA"},
        {"id": "LB", "from": "A", "to": "B", "length": 1.0, "r": 0.01, "x": 0.02,
         "s_max": 5, "switch_class": "sectionalizing", "rcs_id": "WB"}
      ],
      "base_stations": [{"id": "BS1", "position": [100, 50], "sigma": 4}]
    })"));
}

// A straight 17-node feeder with 16 switchable lines (over the oracle cap).
Network long_chain() {
    json j;
    j["format_version"] = 1;
    j["region"] = {{"xmin", 0}, {"ymin", 0}, {"xmax", 1600}, {"ymax", 100}};
    j["grid_step"] = 800;
    j["radio"] = {{"s_ref", 100}, {"d0", 10}, {"path_loss_exp", 3}, {"fbs_sigma", 4}, {"d_min", 1}};
    j["times"] = {{"t_fault", 0}, {"t_r1", 1}, {"t_r2", 31}, {"t_r3", 61}};
    j["nodes"] = json::array();
    j["lines"] = json::array();
    for (int i = 0; i <= 16; ++i) {
        json n;
        n["id"] = "N" + std::to_string(i);
        n["position"] = {100 * i, 0};
        if (i == 0) {
            n["is_substation"] = true;
            n["pg_max"] = 20;
            n["qg_max"] = 20;
        } else {
            n["p_load"] = 0.1;
            n["q_load"] = 0.05;
        }
        j["nodes"].push_back(n);
        if (i > 0) {
            json l;
            l["id"] = "L" + std::to_string(i);
            l["from"] = "N" + std::to_string(i - 1);
            l["to"] = "N" + std::to_string(i);
            l["length"] = 0.1;
            l["r"] = 0.005;
            l["x"] = 0.01;
            l["s_max"] = 10;
            l["switch_class"] = "sectionalizing";
            l["rcs_id"] = "W" + std::to_string(i);
            j["lines"].push_back(l);
        }
    }
    j["base_stations"] = json::array({{{"id", "BS1"}, {"position", {800, 50}}, {"sigma", 4}}});
    return cpds::network_from_json(j);
}

void check_matches_oracle(const Network& net, const OutcomeScenario& sc) {
    const RestorationResult milp = cpds::optimal_restoration(net, sc);
    const RestorationResult oracle = cpds::brute_force_restoration(net, sc);
    INFO("scenario {" << cpds::scenario_key(sc) << "}");
    CHECK(milp.stage0_loss == Catch::Approx(oracle.stage0_loss).margin(1e-9));
    CHECK(milp.stage1_loss == Catch::Approx(oracle.stage1_loss).margin(1e-6));
    CHECK(milp.stage2_loss == Catch::Approx(oracle.stage2_loss).margin(1e-6));
    CHECK(milp.resilience == Catch::Approx(oracle.resilience).margin(1e-6));
}

void check_stage_invariants(const Network& net, const OutcomeScenario& sc,
                            const cpds::StageSolution& s) {
    INFO("scenario {" << cpds::scenario_key(sc) << "}");
    std::vector<bool> closed(net.lines.size());
    for (size_t li = 0; li < net.lines.size(); ++li)
        closed[li] = s.closed.at(net.lines[li].id) != 0;
    CHECK(cpds::is_forest(net, closed));

    for (const auto& l : net.lines) {
        const bool is_closed = s.closed.at(l.id) != 0;
        // Virtual flow only on closed lines, exactly one direction.
        CHECK(s.vflow.at({l.from, l.to}) + s.vflow.at({l.to, l.from}) ==
              (is_closed ? 1 : 0));
        // Fault-area agreement across closed lines (11b).
        if (is_closed)
            CHECK(s.fault_area.at(l.from) == s.fault_area.at(l.to));
        // Fault containment: closed faulted lines lie inside the fault area.
        if (is_closed && sc.faulted_lines.count(l.id) > 0) {
            CHECK(s.fault_area.at(l.from) == 1);
            CHECK(s.fault_area.at(l.to) == 1);
        }
        // Tail of a faulted line is always in the fault area (11a).
        if (sc.faulted_lines.count(l.id) > 0) CHECK(s.fault_area.at(l.to) == 1);
    }
    for (const auto& n : net.nodes) {
        const double ps = s.p_shed.at(n.id);
        const int lam = s.fault_area.at(n.id);
        CHECK(ps >= lam * n.p_load - 1e-6);
        CHECK(ps <= n.p_load + 1e-6);
        CHECK(s.u_sq.at(n.id) >= n.u_min - 1e-6);
        CHECK(s.u_sq.at(n.id) <= n.u_max + 1e-6);
    }
}

}  // namespace

TEST_CASE("resilience formula") {
    cpds::TimeParams t{0.0, 1.0, 31.0, 61.0};
    CHECK(cpds::resilience_of(0, 0, 0, t, 4.1) == Catch::Approx(1.0).margin(1e-12));
    CHECK(cpds::resilience_of(4.1, 4.1, 4.1, t, 4.1) == Catch::Approx(0.0).margin(1e-12));
    // One minute of total blackout, then full restoration.
    CHECK(cpds::resilience_of(4.1, 0, 0, t, 4.1) ==
          Catch::Approx(1.0 - 1.0 / 61.0).margin(1e-9));
    CHECK_THROWS_AS(cpds::resilience_of(0, 0, 0, t, 0.0), cpds::ValidationError);
}

TEST_CASE("big-M follows the network data") {
    const Network net = toy();
    // max(|B|, (Umax-Umin) + 2*max(r+x)*sum(smax)) = max(6, 0.4 + 2*0.09*60).
    CHECK(cpds::big_m_for(net) == Catch::Approx(11.2).margin(1e-12));
}

TEST_CASE("empty scenario restores everything") {
    const Network net = toy();
    const OutcomeScenario sc;
    const auto res = cpds::optimal_restoration(net, sc);
    CHECK(res.stage0_loss == 0.0);
    CHECK(res.stage1_loss == Catch::Approx(0.0).margin(1e-9));
    CHECK(res.stage2_loss == Catch::Approx(0.0).margin(1e-9));
    CHECK(res.resilience == Catch::Approx(1.0).margin(1e-9));
    check_matches_oracle(net, sc);
    check_stage_invariants(net, sc, res.stage_solutions.first);
    check_stage_invariants(net, sc, res.stage_solutions.second);
}

TEST_CASE("base switch states carry zero shed for the empty scenario") {
    const Network net = toy();
    // Feasibility of the base configuration with no shed: check by fixing
    // the switch variables of the stage-1 model at their base states.
    auto sm = cpds::build_stage1_model(net, OutcomeScenario{});
    for (size_t li = 0; li < net.lines.size(); ++li)
        sm.milp.fix_col(sm.c[li], net.lines[li].base_closed ? 1.0 : 0.0);
    const auto sol = cpds::solve_stage(sm);
    CHECK(cpds::weighted_shed(net, sol) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("zero-load network sheds nothing") {
    Network net = toy();
    for (auto& n : net.nodes) {
        n.p_load = 0.0;
        n.q_load = 0.0;
    }
    const auto sol = cpds::solve_stage(cpds::build_stage1_model(net, OutcomeScenario{}));
    CHECK(cpds::weighted_shed(net, sol) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("every single-fault scenario matches the oracle") {
    const Network net = toy();
    for (const auto& line : net.lines) {
        OutcomeScenario sc;
        sc.faulted_lines = {line.id};
        check_matches_oracle(net, sc);
        const auto res = cpds::optimal_restoration(net, sc);
        CHECK(res.stage2_loss <= res.stage1_loss + 1e-9);
        CHECK(res.stage0_loss == Catch::Approx(cpds::total_weighted_load(net)).margin(1e-12));
        check_stage_invariants(net, sc, res.stage_solutions.first);
        check_stage_invariants(net, sc, res.stage_solutions.second);
    }
}

TEST_CASE("every double-fault scenario matches the oracle") {
    const Network net = toy();
    for (size_t i = 0; i < net.lines.size(); ++i) {
        for (size_t j = i + 1; j < net.lines.size(); ++j) {
            OutcomeScenario sc;
            sc.faulted_lines = {net.lines[i].id, net.lines[j].id};
            check_matches_oracle(net, sc);
        }
    }
}

TEST_CASE("fault plus hijack scenarios match the oracle") {
    const Network net = toy();
    // Hijacked RCS on the faulted sectionalizing line, on a neighbor, and on
    // the tie, plus a two-hijack case.
    const std::vector<OutcomeScenario> scenarios = {
        {{"L2"}, {"W2"}},          // fault + its own stuck-closed switch
        {{"L2"}, {"WT1"}},         // fault + tie stuck open
        {{"L2"}, {"W2", "WT1"}},   // both
        {{"L1"}, {"W4"}},          // upstream fault, stuck neighbor
        {{"L1", "L3"}, {"WT1"}},   // double fault + tie stuck open
        {{"L4", "L5"}, {"W2", "W3"}},
        {{}, {"WT1"}},             // hijack with no fault
        {{}, {"W1", "W2"}},
    };
    for (const auto& sc : scenarios) {
        check_matches_oracle(net, sc);
        const auto res = cpds::optimal_restoration(net, sc);
        CHECK(res.stage2_loss <= res.stage1_loss + 1e-9);
        check_stage_invariants(net, sc, res.stage_solutions.first);
        check_stage_invariants(net, sc, res.stage_solutions.second);
    }
}

TEST_CASE("hijacked switches hold their base state in stage 1 only") {
    const Network net = toy();
    OutcomeScenario sc;
    sc.faulted_lines = {"L2"};
    sc.hijacked_rcs = {"W2"};  // sectionalizing switch of the faulted line
    const auto res = cpds::optimal_restoration(net, sc);
    // (12a): stuck closed, so both endpoints sit in the fault area.
    CHECK(res.stage_solutions.first.closed.at("L2") == 1);
    CHECK(res.stage_solutions.first.fault_area.at("N2") == 1);
    CHECK(res.stage_solutions.first.fault_area.at("N3") == 1);

    OutcomeScenario tie_sc;
    tie_sc.faulted_lines = {"L5"};
    tie_sc.hijacked_rcs = {"WT1"};
    const auto tie_res = cpds::optimal_restoration(net, tie_sc);
    // (12b): the tie stays open in stage 1, blocking any transfer through it.
    CHECK(tie_res.stage_solutions.first.closed.at("T1") == 0);

    // Hijacking an RCS can never improve the stage-1 outcome.
    OutcomeScenario no_hijack;
    no_hijack.faulted_lines = {"L2"};
    const auto base = cpds::optimal_restoration(net, no_hijack);
    CHECK(res.stage1_loss >= base.stage1_loss - 1e-9);
    CHECK(res.resilience <= base.resilience + 1e-9);
}

TEST_CASE("faulted leaf line sheds the leaf load in both stages") {
    const Network net = leaf_chain();
    OutcomeScenario sc;
    sc.faulted_lines = {"LB"};
    const auto res = cpds::optimal_restoration(net, sc);
    CHECK(res.stage1_loss == Catch::Approx(0.5).margin(1e-6));
    CHECK(res.stage2_loss == Catch::Approx(0.5).margin(1e-6));
    check_matches_oracle(net, sc);

    // Faulting the substation-side line blacks out both loads: the fault
    // area spreads to everything downstream of the open switch.
    OutcomeScenario up;
    up.faulted_lines = {"LA"};
    const auto res_up = cpds::optimal_restoration(net, up);
    CHECK(res_up.stage1_loss == Catch::Approx(1.5).margin(1e-6));
    check_matches_oracle(net, up);
}

TEST_CASE("restoration engine caches by scenario") {
    const Network net = toy();
    cpds::RestorationEngine engine(net);
    OutcomeScenario sc;
    sc.faulted_lines = {"L3"};
    const auto first = engine.optimal_restoration(sc);
    CHECK(engine.cache_size() == 1);
    CHECK(engine.cache_hits() == 0);
    const auto again = engine.optimal_restoration(sc);
    CHECK(engine.cache_size() == 1);
    CHECK(engine.cache_hits() == 1);
    CHECK(first.resilience == again.resilience);
    CHECK(first.stage_solutions.first.closed == again.stage_solutions.first.closed);
}

TEST_CASE("solver is deterministic for a fixed seed") {
    const Network net = toy();
    OutcomeScenario sc;
    sc.faulted_lines = {"L1", "L4"};
    const auto a = cpds::optimal_restoration(net, sc);
    const auto b = cpds::optimal_restoration(net, sc);
    CHECK(a.stage1_loss == b.stage1_loss);
    CHECK(a.stage2_loss == b.stage2_loss);
    CHECK(a.stage_solutions.first.closed == b.stage_solutions.first.closed);
    CHECK(a.stage_solutions.second.closed == b.stage_solutions.second.closed);
    CHECK(a.stage_solutions.first.p_shed == b.stage_solutions.first.p_shed);
}

TEST_CASE("per-feeder stage-0 scope is recorded and matches on one feeder") {
    const Network net = toy();
    OutcomeScenario sc;
    sc.faulted_lines = {"L2"};
    cpds::RestorationOptions per_feeder;
    per_feeder.stage0_per_feeder = true;
    const auto res = cpds::optimal_restoration(net, sc, {}, per_feeder);
    CHECK(res.stage0_per_feeder);
    // toy network is a single feeder, so both scopes agree.
    CHECK(res.stage0_loss == Catch::Approx(cpds::total_weighted_load(net)).margin(1e-12));

    // A hijack-only scenario loses nothing at the fault instant.
    OutcomeScenario cyber_only;
    cyber_only.hijacked_rcs = {"W1"};
    CHECK(cpds::optimal_restoration(net, cyber_only).stage0_loss == 0.0);
}

TEST_CASE("stage model dumps in LP interchange format") {
    const Network net = toy();
    OutcomeScenario sc;
    sc.faulted_lines = {"L2"};
    const auto sm = cpds::build_stage1_model(net, sc);
    std::ostringstream os;
    cpds::write_lp_format(sm.milp, os);
    const std::string text = os.str();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("c_L2") != std::string::npos);
    CHECK(text.find("lam_N3") != std::string::npos);
    CHECK(text.find("Generals") != std::string::npos);
}

TEST_CASE("brute force refuses more than 15 switchable lines") {
    const Network net = long_chain();
    OutcomeScenario sc;
    sc.faulted_lines = {"L8"};
    CHECK_THROWS_AS(cpds::brute_force_restoration(net, sc), cpds::ValidationError);
    // The MILP route still handles it.
    const auto res = cpds::optimal_restoration(net, sc);
    CHECK(res.stage1_loss >= 0.0);
}

TEST_CASE("scenario validation rejects unknown ids") {
    const Network net = toy();
    OutcomeScenario bad_line;
    bad_line.faulted_lines = {"NOPE"};
    CHECK_THROWS_AS(cpds::validate_scenario(net, bad_line), cpds::ValidationError);
    OutcomeScenario bad_rcs;
    bad_rcs.hijacked_rcs = {"NOPE"};
    CHECK_THROWS_AS(cpds::validate_scenario(net, bad_rcs), cpds::ValidationError);
}
