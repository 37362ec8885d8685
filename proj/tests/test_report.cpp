#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cpds/report.hpp"

using cpds::EnumerationParams;
using cpds::FbsStudyResult;
using cpds::Report;
using cpds::RunConfig;
using cpds::SweepGrid;
using cpds::SweepResult;
using cpds::ValidationError;
using nlohmann::json;

namespace {

RunConfig toy_config() {
    RunConfig c;
    c.case_file = CPDS_CASES_DIR "/toy6.json";
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("cpds_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("run config validation", "[report]") {
    RunConfig c = toy_config();
    REQUIRE_NOTHROW(cpds::validate(c));

    SECTION("budgets must be nonnegative") {
        c.n_attack_phys = -1;
        REQUIRE_THROWS_AS(cpds::validate(c), ValidationError);
    }
    SECTION("eps must be positive") {
        c.eps = 0.0;
        REQUIRE_THROWS_AS(cpds::validate(c), ValidationError);
    }
    SECTION("eps_p range") {
        c.truncation.eps_p = 0.5;
        REQUIRE_THROWS_AS(cpds::validate(c), ValidationError);
    }
    SECTION("formats are checked") {
        c.formats = {"yaml"};
        REQUIRE_THROWS_AS(cpds::validate(c), ValidationError);
    }
    SECTION("case file required") {
        c.case_file.clear();
        REQUIRE_THROWS_AS(cpds::validate(c), ValidationError);
    }
    SECTION("overrides must be positive") {
        c.grid_step = 0.0;
        REQUIRE_THROWS_AS(cpds::validate(c), ValidationError);
    }
}

TEST_CASE("run config json round-trip", "[report]") {
    RunConfig c = toy_config();
    SECTION("defaults (optionals absent)") {
        const json j = cpds::to_json(c);
        REQUIRE(j.at("n_attack_phys").is_null());
        const RunConfig back = cpds::run_config_from_json(j);
        REQUIRE(cpds::to_json(back) == j);
    }
    SECTION("fully specified") {
        c.n_defend_phys = 2;
        c.n_defend_cyber = 1;
        c.n_attack_phys = 3;
        c.s_ref = 104.0;
        c.grid_step = 250.0;
        c.truncation.eps_p = 0.01;
        c.truncation.k_max = 3;
        c.eps = 1e-5;
        c.max_iter = 7;
        c.seed = 42;
        c.output_dir = "out";
        c.formats = {"csv"};
        const json j = cpds::to_json(c);
        const RunConfig back = cpds::run_config_from_json(j);
        REQUIRE(cpds::to_json(back) == j);
        REQUIRE(back.s_ref == 104.0);
        REQUIRE(back.n_attack_phys == 3);
    }
}

TEST_CASE("budget list parsing", "[report]") {
    REQUIRE(cpds::parse_int_list("2..4") == std::vector<int>{2, 3, 4});
    REQUIRE(cpds::parse_int_list("5") == std::vector<int>{5});
    REQUIRE(cpds::parse_int_list("1,3,2") == std::vector<int>{1, 3, 2});
    REQUIRE(cpds::parse_int_list("0..0") == std::vector<int>{0});
    REQUIRE_THROWS_AS(cpds::parse_int_list("4..2"), ValidationError);
    REQUIRE_THROWS_AS(cpds::parse_int_list("x"), ValidationError);
    REQUIRE_THROWS_AS(cpds::parse_int_list("1,,2"), ValidationError);
    REQUIRE_THROWS_AS(cpds::parse_int_list("-1"), ValidationError);
    REQUIRE_THROWS_AS(cpds::parse_int_list("2..x"), ValidationError);
}

TEST_CASE("load_case applies overrides", "[report]") {
    RunConfig c = toy_config();
    SECTION("case defaults pass through") {
        const auto lc = cpds::load_case(c);
        REQUIRE(lc.budgets.n_defend_phys == 1);
        REQUIRE(lc.budgets.n_defend_cyber == 1);
        REQUIRE(lc.budgets.n_attack_phys == 1);
        REQUIRE(lc.net.grid_step == 500.0);
    }
    SECTION("overrides replace them") {
        c.n_attack_phys = 2;
        c.s_ref = 90.0;
        c.grid_step = 250.0;
        const auto lc = cpds::load_case(c);
        REQUIRE(lc.budgets.n_attack_phys == 2);
        REQUIRE(lc.budgets.n_defend_phys == 1);  // untouched
        REQUIRE(lc.net.radio.s_ref == 90.0);
        REQUIRE(lc.net.grid_step == 250.0);
        REQUIRE(cpds::grid_positions(lc.net).size() == 25);  // 5x5 at step 250
    }
}

TEST_CASE("run_game solves the toy case and reports faithfully", "[report][slow]") {
    RunConfig c = toy_config();
    const Report r = cpds::run_game(c);

    REQUIRE(r.solution.converged);
    REQUIRE(r.case_echo.name == "toy6");
    REQUIRE(r.case_echo.budgets.n_attack_phys == 1);

    // The report's game value must match a direct library solve.
    cpds::Network net = cpds::load_network(c.case_file);
    cpds::RestorationEngine engine(net);
    const cpds::GameSolution direct = cpds::solve_ccg(engine, net.defaults);
    REQUIRE(r.solution.value == Catch::Approx(direct.value).margin(1e-12));

    // Scenario table: mass 1, expectation equals the game value.
    REQUIRE(r.truncation.scenario_mass == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(r.truncation.scenario_count == r.scenarios.size());
    double expectation = 0.0;
    for (const auto& row : r.scenarios) expectation += row.prob * row.r_star;
    REQUIRE(expectation == Catch::Approx(r.solution.value).margin(1e-9));

    // Strategy map mirrors the solution and ranks at most three RCSs.
    REQUIRE(r.strategy.attacked_lines.size() == r.solution.worst_attack.attacked_lines.size());
    REQUIRE(r.strategy.top_hijack_rcs.size() <= 3);
    for (std::size_t i = 1; i < r.strategy.top_hijack_rcs.size(); ++i)
        REQUIRE(r.strategy.top_hijack_rcs[i - 1].prob >= r.strategy.top_hijack_rcs[i].prob);
    if (r.solution.worst_attack.fbs_position) {
        REQUIRE(!r.strategy.top_hijack_rcs.empty());
    }

    REQUIRE(r.timing.restoration_solves > 0);
    REQUIRE(r.timing.iterations == static_cast<int>(r.solution.trace.size()));

    // Round-trip invariant: the serialized form reconstructs byte-for-byte.
    const json j = cpds::to_json(r);
    const Report back = cpds::report_from_json(j);
    REQUIRE(cpds::to_json(back) == j);
    REQUIRE(cpds::to_json(back).dump(2) == j.dump(2));

    // The document conforms to the published schema.
    REQUIRE(cpds::schema_violations(j, cpds::report_schema()).empty());
}

TEST_CASE("run_game with zero budgets equals the undefended subproblem", "[report][slow]") {
    RunConfig c = toy_config();
    c.n_defend_phys = 0;
    c.n_defend_cyber = 0;
    const Report r = cpds::run_game(c);
    REQUIRE(r.solution.converged);
    REQUIRE(r.solution.defense.hardened_lines.empty());
    REQUIRE(r.solution.defense.protected_rcs.empty());

    cpds::Network net = cpds::load_network(c.case_file);
    cpds::RestorationEngine engine(net);
    const auto sp = cpds::solve_subproblem(engine, {}, net.defaults.n_attack_phys);
    REQUIRE(r.solution.value == Catch::Approx(sp.value).margin(1e-12));
}

TEST_CASE("run_game writes deterministic files", "[report][slow]") {
    TempDir tmp("report");
    RunConfig c = toy_config();
    c.output_dir = tmp.path.string();
    c.truncation.k_max = 2;  // small tree keeps this test quick

    cpds::run_game(c);
    REQUIRE(std::filesystem::exists(tmp.path / "report.json"));
    REQUIRE(std::filesystem::exists(tmp.path / "scenarios.csv"));
    const std::string first_json = slurp(tmp.path / "report.json");
    const std::string first_csv = slurp(tmp.path / "scenarios.csv");

    cpds::run_game(c);  // identical config, second run
    const std::string second_json = slurp(tmp.path / "report.json");
    const std::string second_csv = slurp(tmp.path / "scenarios.csv");

    // Byte-identical after erasing the single timestamp field.
    json a = json::parse(first_json);
    json b = json::parse(second_json);
    REQUIRE(a.contains("generated_at"));
    a.erase("generated_at");
    b.erase("generated_at");
    REQUIRE(a.dump() == b.dump());
    REQUIRE(first_csv == second_csv);  // no timestamp in the flat tables

    // The CSV mirrors the scenario table.
    const Report r = cpds::report_from_json(json::parse(second_json));
    std::istringstream lines(second_csv);
    std::string line;
    std::getline(lines, line);
    REQUIRE(line == "id,prob,r_star,faults,hijacks");
    std::size_t rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    REQUIRE(rows == r.scenarios.size());

    SECTION("csv-only format writes no json") {
        TempDir tmp2("report_csv");
        c.output_dir = tmp2.path.string();
        c.formats = {"csv"};
        cpds::run_game(c);
        REQUIRE(std::filesystem::exists(tmp2.path / "scenarios.csv"));
        REQUIRE(!std::filesystem::exists(tmp2.path / "report.json"));
    }
}

TEST_CASE("published schema file matches the embedded schema", "[report]") {
    const std::filesystem::path path = CPDS_REPO_DIR "/schema/report.schema.json";
    REQUIRE(std::filesystem::exists(path));
    const json on_disk = json::parse(slurp(path));
    REQUIRE(on_disk == cpds::report_schema());
}

TEST_CASE("schema validator flags structural violations", "[report]") {
    const json schema = json::parse(R"({
        "type": "object",
        "additionalProperties": false,
        "required": ["name", "count", "tags"],
        "properties": {
            "name": {"type": "string", "enum": ["a", "b"]},
            "count": {"type": ["integer", "null"]},
            "tags": {"type": "array", "items": {"type": "string"}, "minItems": 1, "maxItems": 2}
        }
    })");

    REQUIRE(cpds::schema_violations(
                json{{"name", "a"}, {"count", nullptr}, {"tags", json::array({"x"})}}, schema)
                .empty());

    auto violations = [&](const json& doc) { return cpds::schema_violations(doc, schema); };
    REQUIRE(!violations(json{{"name", "a"}, {"count", 1}}).empty());              // missing key
    REQUIRE(!violations(json{{"name", "c"}, {"count", 1}, {"tags", json::array({"x"})}}).empty());
    REQUIRE(!violations(json{{"name", "a"}, {"count", 0.5}, {"tags", json::array({"x"})}}).empty());
    REQUIRE(!violations(json{{"name", "a"}, {"count", 1}, {"tags", json::array()}}).empty());
    REQUIRE(!violations(json{{"name", "a"}, {"count", 1}, {"tags", json::array({"x", "y", "z"})}})
                 .empty());
    REQUIRE(!violations(json{{"name", "a"},
                             {"count", 1},
                             {"tags", json::array({"x"})},
                             {"extra", 1}})
                 .empty());
    REQUIRE(!violations(json{{"name", "a"}, {"count", 1}, {"tags", json::array({1})}}).empty());
    REQUIRE_THROWS_AS(cpds::validate_against_schema(json{{"name", "c"}}, schema),
                      ValidationError);

    // Violation messages carry the JSON path of the offending element.
    const auto errs =
        violations(json{{"name", "a"}, {"count", 1}, {"tags", json::array({"x", 2})}});
    REQUIRE(errs.size() == 1);
    REQUIRE(errs.front().find("/tags/1") != std::string::npos);
}

TEST_CASE("run_sweep covers the grid and stays monotone", "[report][slow]") {
    RunConfig c = toy_config();
    SweepGrid grid;
    grid.n_defend_cyber = {0, 1};
    grid.n_defend_phys = {0, 1};
    grid.n_attack_phys = {1};
    const SweepResult res = cpds::run_sweep(c, grid);

    REQUIRE(res.rows.size() == 4);
    for (const auto& row : res.rows) {
        REQUIRE(row.error.empty());
        REQUIRE(row.converged);
        REQUIRE(row.resilience > 0.0);
        REQUIRE(row.resilience <= 1.0 + 1e-9);
    }
    // Long format in deterministic cell order: (nc, np) = (0,0),(0,1),(1,0),(1,1).
    REQUIRE(res.rows[0].n_defend_cyber == 0);
    REQUIRE(res.rows[3].n_defend_cyber == 1);
    // Resilience is non-decreasing in each defense budget at fixed others.
    REQUIRE(res.rows[0].resilience <= res.rows[1].resilience + 1e-9);
    REQUIRE(res.rows[0].resilience <= res.rows[2].resilience + 1e-9);
    REQUIRE(res.rows[1].resilience <= res.rows[3].resilience + 1e-9);
    REQUIRE(res.rows[2].resilience <= res.rows[3].resilience + 1e-9);

    SECTION("1x1x1 grid equals run_game") {
        SweepGrid one;
        one.n_defend_cyber = {1};
        one.n_defend_phys = {1};
        one.n_attack_phys = {1};
        const SweepResult single = cpds::run_sweep(c, one);
        REQUIRE(single.rows.size() == 1);
        const Report r = cpds::run_game(c);  // toy defaults are (1,1,1)
        REQUIRE(single.rows[0].resilience == Catch::Approx(r.solution.value).margin(1e-12));
    }
}

TEST_CASE("run_sweep records cell failures and continues", "[report][slow]") {
    RunConfig c = toy_config();
    c.truncation.max_probabilistic = 2;  // an FBS attack needs more branching than this
    SweepGrid grid;
    grid.n_defend_cyber = {0};
    grid.n_defend_phys = {0};
    grid.n_attack_phys = {0, 1};
    const SweepResult res = cpds::run_sweep(c, grid);
    REQUIRE(res.rows.size() == 2);
    REQUIRE(res.rows[0].error.empty());  // empty attack: nothing to enumerate
    REQUIRE(res.rows[0].resilience == Catch::Approx(1.0));
    REQUIRE(!res.rows[1].error.empty());
    REQUIRE_THAT(res.rows[1].error, Catch::Matchers::ContainsSubstring("tighten"));

    SECTION("empty grid is rejected") {
        REQUIRE_THROWS_AS(cpds::run_sweep(c, SweepGrid{}), ValidationError);
    }
}

TEST_CASE("fbs power study reports losses against the no-FBS baseline",
          "[report][slow]") {
    RunConfig c = toy_config();
    const FbsStudyResult res = cpds::run_fbs_power_study(c, {90.0, 110.0});
    REQUIRE(res.rows.size() == 2);
    for (const auto& row : res.rows) {
        REQUIRE(row.error.empty());
        // The attacker can always ignore the FBS, so it never hurts.
        REQUIRE(row.loss >= row.loss_no_fbs - 1e-9);
        REQUIRE(row.loss >= 0.0);
        REQUIRE(row.loss <= 1.0);
    }
    // On the toy case the FBS pays off, so the optimal attack deploys it.
    REQUIRE(res.rows[0].fbs_position.has_value());

    SECTION("bad s_ref is recorded per row, not thrown") {
        const FbsStudyResult bad = cpds::run_fbs_power_study(c, {-5.0, 100.0});
        REQUIRE(bad.rows.size() == 2);
        REQUIRE(!bad.rows[0].error.empty());
        REQUIRE(bad.rows[1].error.empty());
    }
    SECTION("empty list is rejected") {
        REQUIRE_THROWS_AS(cpds::run_fbs_power_study(c, {}), ValidationError);
    }
}

TEST_CASE("sweep and study files are written when requested", "[report][slow]") {
    TempDir tmp("sweep");
    RunConfig c = toy_config();
    c.output_dir = tmp.path.string();

    SweepGrid grid;
    grid.n_defend_cyber = {0};
    grid.n_defend_phys = {0};
    grid.n_attack_phys = {1};
    cpds::run_sweep(c, grid);
    REQUIRE(std::filesystem::exists(tmp.path / "sweep.json"));
    const std::string csv = slurp(tmp.path / "sweep.csv");
    REQUIRE_THAT(csv, Catch::Matchers::StartsWith(
                          "n_defend_cyber,n_defend_phys,n_attack_phys,resilience,converged,error"));

    cpds::run_fbs_power_study(c, {100.0});
    REQUIRE(std::filesystem::exists(tmp.path / "fbs_study.json"));
    REQUIRE_THAT(slurp(tmp.path / "fbs_study.csv"),
                 Catch::Matchers::StartsWith("s_ref,fbs_x,fbs_y,loss,loss_no_fbs,error"));
    const json study = json::parse(slurp(tmp.path / "fbs_study.json"));
    REQUIRE(study.at("schema") == "cpds-fbs-study-v1");
    REQUIRE(study.at("rows").size() == 1);
}
