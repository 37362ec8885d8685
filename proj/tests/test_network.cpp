#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "cpds/network.hpp"

using nlohmann::json;

namespace {

// Smallest valid case: two nodes, one line, one base station.
json minimal_case() {
    return json::parse(R"({
      "format_version": 1,
      "region": {"xmin": 0, "ymin": 0, "xmax": 100, "ymax": 100},
      "grid_step": 50,
      "radio": {"s_ref": 100, "d0": 10, "path_loss_exp": 3, "fbs_sigma": 4, "d_min": 1},
      "times": {"t_fault": 0, "t_r1": 1, "t_r2": 31, "t_r3": 61},
      "nodes": [
        {"id": "A", "is_substation": true, "pg_max": 5, "qg_max": 5, "position": [0, 0]},
        {"id": "B", "p_load": 1.0, "q_load": 0.5, "position": [100, 0]}
      ],
      "lines": [
        {"id": "L1", "from": "A", "to": "B", "length": 1.0, "r": 0.01, "x": 0.02,
         "s_max": 5, "switch_class": "sectionalizing", "rcs_id": "W1"}
      ],
      "base_stations": [{"id": "BS1", "position": [50, 50], "sigma": 4}]
    })");
}

bool networks_equal(const cpds::Network& a, const cpds::Network& b) {
    // Field-by-field comparison via the canonical JSON form.
    return cpds::network_to_json(a) == cpds::network_to_json(b);
}

}  // namespace

TEST_CASE("load_network accepts the toy case") {
    cpds::Network net = cpds::load_network(CPDS_CASES_DIR "/toy6.json");
    REQUIRE(net.nodes.size() == 6);
    REQUIRE(net.lines.size() == 6);
    REQUIRE(net.base_stations.size() == 2);

    int ties = 0, sect = 0;
    for (const auto& l : net.lines)
        (l.switch_class == cpds::SwitchClass::tie ? ties : sect)++;
    CHECK(ties == 1);
    CHECK(sect == 5);

    CHECK(net.nodes[net.node_index("N1")].is_substation);
    CHECK(net.nodes[net.node_index("N6")].is_dg);
    CHECK(net.defaults.n_attack_phys == 1);
}

TEST_CASE("load_network accepts a minimal 2-node case") {
    cpds::Network net = cpds::network_from_json(minimal_case());
    REQUIRE(net.nodes.size() == 2);
    REQUIRE(net.lines.size() == 1);
    cpds::Adjacency adj = cpds::adjacency(net);
    CHECK(adj.incident[0].size() == 1);
    CHECK(adj.incident[1].size() == 1);
    CHECK(adj.incident[0][0].other == 1);
}

TEST_CASE("validation rejects a tie line marked closed") {
    json j = minimal_case();
    j["nodes"].push_back({{"id", "C"}, {"p_load", 0.5}, {"position", {50, 50}}});
    j["lines"].push_back({{"id", "T1"}, {"from", "B"}, {"to", "C"}, {"length", 1.0},
                          {"r", 0.01}, {"x", 0.02}, {"s_max", 5},
                          {"switch_class", "tie"}, {"rcs_id", "W2"},
                          {"base_closed", true}});
    REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
}

TEST_CASE("validation rejects malformed inputs with named elements") {
    SECTION("unknown node reference") {
        json j = minimal_case();
        j["lines"][0]["to"] = "Z";
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("self loop") {
        json j = minimal_case();
        j["lines"][0]["to"] = "A";
        REQUIRE_THROWS_WITH(cpds::network_from_json(j), Catch::Matchers::ContainsSubstring("L1"));
    }
    SECTION("u_min >= u_max") {
        json j = minimal_case();
        j["nodes"][1]["u_min"] = 1.21;
        j["nodes"][1]["u_max"] = 0.81;
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("node cannot be both substation and DG") {
        json j = minimal_case();
        j["nodes"][0]["is_dg"] = true;
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("plain load node cannot have generation limits") {
        json j = minimal_case();
        j["nodes"][1]["pg_max"] = 1.0;
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("duplicate node ids") {
        json j = minimal_case();
        j["nodes"][1]["id"] = "A";
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("duplicate rcs ids") {
        json j = minimal_case();
        j["nodes"].push_back({{"id", "C"}, {"p_load", 0.5}, {"position", {50, 50}}});
        j["lines"].push_back({{"id", "L2"}, {"from", "B"}, {"to", "C"}, {"length", 1.0},
                              {"r", 0.01}, {"x", 0.02}, {"s_max", 5},
                              {"switch_class", "sectionalizing"}, {"rcs_id", "W1"}});
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("d_min must not exceed d0") {
        json j = minimal_case();
        j["radio"]["d_min"] = 20.0;
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("restoration instants must be ordered") {
        json j = minimal_case();
        j["times"]["t_r2"] = 0.5;
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("missing required field is a parse error") {
        json j = minimal_case();
        j["lines"][0].erase("s_max");
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ParseError);
    }
    SECTION("bad format_version") {
        json j = minimal_case();
        j["format_version"] = 99;
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ParseError);
    }
}

TEST_CASE("base topology radiality is enforced") {
    SECTION("cycle of sectionalizing lines") {
        json j = minimal_case();
        j["nodes"].push_back({{"id", "C"}, {"p_load", 0.5}, {"position", {50, 50}}});
        auto line = [](const char* id, const char* a, const char* b, const char* w) {
            return json{{"id", id}, {"from", a}, {"to", b}, {"length", 1.0}, {"r", 0.01},
                        {"x", 0.02}, {"s_max", 5}, {"switch_class", "sectionalizing"},
                        {"rcs_id", w}};
        };
        j["lines"].push_back(line("L2", "B", "C", "W2"));
        j["lines"].push_back(line("L3", "C", "A", "W3"));
        REQUIRE_THROWS_WITH(cpds::network_from_json(j), Catch::Matchers::ContainsSubstring("cycle"));
    }
    SECTION("component with two substations") {
        json j = minimal_case();
        j["nodes"][1]["is_substation"] = true;
        j["nodes"][1].erase("p_load");
        j["nodes"][1].erase("q_load");
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("component with no substation") {
        json j = minimal_case();
        j["nodes"][0]["is_substation"] = false;
        j["nodes"][0]["pg_max"] = 0;
        j["nodes"][0]["qg_max"] = 0;
        REQUIRE_THROWS_AS(cpds::network_from_json(j), cpds::ValidationError);
    }
    SECTION("tie lines do not count toward the base forest") {
        // A tie line may close a loop as long as it starts open.
        json j = minimal_case();
        j["nodes"].push_back({{"id", "C"}, {"p_load", 0.5}, {"position", {50, 50}}});
        j["lines"].push_back({{"id", "L2"}, {"from", "B"}, {"to", "C"}, {"length", 1.0},
                              {"r", 0.01}, {"x", 0.02}, {"s_max", 5},
                              {"switch_class", "sectionalizing"}, {"rcs_id", "W2"}});
        j["lines"].push_back({{"id", "T1"}, {"from", "C"}, {"to", "A"}, {"length", 1.0},
                              {"r", 0.01}, {"x", 0.02}, {"s_max", 5},
                              {"switch_class", "tie"}, {"rcs_id", "W3"}});
        REQUIRE_NOTHROW(cpds::network_from_json(j));
    }
}

TEST_CASE("serialization round-trips") {
    cpds::Network net = cpds::load_network(CPDS_CASES_DIR "/toy6.json");
    json dumped = cpds::network_to_json(net);
    cpds::Network again = cpds::network_from_json(dumped);
    CHECK(networks_equal(net, again));

    cpds::Network mini = cpds::network_from_json(minimal_case());
    CHECK(networks_equal(mini, cpds::network_from_json(cpds::network_to_json(mini))));
}

TEST_CASE("adjacency lists every line exactly twice") {
    cpds::Network net = cpds::load_network(CPDS_CASES_DIR "/toy6.json");
    cpds::Adjacency adj = cpds::adjacency(net);
    std::vector<int> appearances(net.lines.size(), 0);
    for (const auto& inc : adj.incident)
        for (const auto& e : inc) appearances[e.line]++;
    for (int c : appearances) CHECK(c == 2);

    // N2 carries the junction: L1 (to N1), L2 (to N3), L4 (to N5).
    std::set<std::string> ids;
    for (const auto& e : adj.incident[net.node_index("N2")]) ids.insert(net.lines[e.line].id);
    CHECK(ids == std::set<std::string>{"L1", "L2", "L4"});
}

TEST_CASE("grid_positions covers the region deterministically") {
    cpds::Network net = cpds::network_from_json(minimal_case());

    SECTION("100x100 m with 50 m steps is a 3x3 lattice") {
        auto pts = cpds::grid_positions(net);
        REQUIRE(pts.size() == 9);
        // Row-major: y varies slowest, x fastest, both ascending.
        CHECK(pts[0] == cpds::Vec2{0, 0});
        CHECK(pts[1] == cpds::Vec2{50, 0});
        CHECK(pts[3] == cpds::Vec2{0, 50});
        CHECK(pts[8] == cpds::Vec2{100, 100});
        std::set<std::pair<double, double>> uniq;
        for (const auto& p : pts) uniq.insert({p.x, p.y});
        CHECK(uniq.size() == pts.size());
        // Deterministic across calls.
        auto pts2 = cpds::grid_positions(net);
        REQUIRE(pts2.size() == pts.size());
        for (size_t i = 0; i < pts.size(); ++i) CHECK(pts[i] == pts2[i]);
    }
    SECTION("step larger than the region leaves one corner point") {
        net.grid_step = 200;
        auto pts = cpds::grid_positions(net);
        REQUIRE(pts.size() == 1);
        CHECK(pts[0] == cpds::Vec2{0, 0});
    }
    SECTION("all points lie inside the region") {
        net.grid_step = 30;  // does not divide 100 evenly
        for (const auto& p : cpds::grid_positions(net)) {
            CHECK(p.x >= 0);
            CHECK(p.x <= 100);
            CHECK(p.y >= 0);
            CHECK(p.y <= 100);
        }
    }
    SECTION("degenerate region is rejected") {
        net.region.xmax = net.region.xmin;
        REQUIRE_THROWS_AS(cpds::grid_positions(net), cpds::ValidationError);
    }
}

TEST_CASE("rcs_position defaults to the line midpoint") {
    cpds::Network net = cpds::load_network(CPDS_CASES_DIR "/toy6.json");
    std::size_t l1 = net.line_index("L1");
    cpds::Vec2 mid = net.rcs_position(l1);  // N1 (0,0) -- N2 (500,0)
    CHECK(mid == cpds::Vec2{250, 0});

    net.lines[l1].rcs_position = cpds::Vec2{10, 20};
    CHECK(net.rcs_position(l1) == cpds::Vec2{10, 20});
}
