#pragma once

// Batch front end behind the CLI: run one game, sweep resource budgets, or
// sweep FBS reference power, and emit machine-readable results. Every run
// produces one structured JSON document plus flat CSV tables for plotting;
// nothing here draws.
//
// Determinism contract: with the same config (and seed) the emitted files
// are byte-identical except for the single "generated_at" field, which
// carries the wall-clock timestamp and elapsed time. Everything else —
// including the timing counters — is a pure function of the config.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpds/attack.hpp"
#include "cpds/network.hpp"
#include "cpds/restoration.hpp"
#include "cpds/scenario.hpp"
#include "cpds/trilevel.hpp"

namespace cpds {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string case_file;
    // Budget overrides; absent fields fall back to the case defaults.
    std::optional<int> n_defend_phys;
    std::optional<int> n_defend_cyber;
    std::optional<int> n_attack_phys;
    // Radio/grid overrides.
    std::optional<double> s_ref;
    std::optional<double> grid_step;
    // Scenario truncation.
    EnumerationParams truncation;
    // C&CG controls.
    double eps = 1e-4;
    int max_iter = 25;
    std::uint64_t seed = 0;
    // Output: empty dir = compute only, no files.
    std::string output_dir;
    std::vector<std::string> formats = {"json", "csv"};
};

inline void validate(const RunConfig& c) {
    if (c.case_file.empty()) throw ValidationError("config: case_file must be set");
    auto nonneg = [](const std::optional<int>& v, const char* what) {
        if (v && *v < 0) throw ValidationError(std::string("config: ") + what + " must be >= 0");
    };
    nonneg(c.n_defend_phys, "n_defend_phys");
    nonneg(c.n_defend_cyber, "n_defend_cyber");
    nonneg(c.n_attack_phys, "n_attack_phys");
    if (c.s_ref && !(*c.s_ref > 0)) throw ValidationError("config: s_ref must be > 0");
    if (c.grid_step && !(*c.grid_step > 0)) throw ValidationError("config: grid_step must be > 0");
    if (c.truncation.eps_p < 0 || c.truncation.eps_p >= 0.5)
        throw ValidationError("config: eps_p must be within [0, 0.5)");
    if (c.truncation.k_max < 0) throw ValidationError("config: k_max must be >= 0");
    if (c.truncation.max_probabilistic < 0)
        throw ValidationError("config: max_probabilistic must be >= 0");
    if (!(c.eps > 0)) throw ValidationError("config: eps must be > 0");
    if (c.max_iter < 1) throw ValidationError("config: max_iter must be >= 1");
    for (const auto& f : c.formats)
        if (f != "json" && f != "csv")
            throw ValidationError("config: unknown report format '" + f + "' (json, csv)");
}

inline json to_json(const RunConfig& c) {
    auto opt_int = [](const std::optional<int>& v) { return v ? json(*v) : json(nullptr); };
    auto opt_num = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return json{{"case_file", c.case_file},
                {"n_defend_phys", opt_int(c.n_defend_phys)},
                {"n_defend_cyber", opt_int(c.n_defend_cyber)},
                {"n_attack_phys", opt_int(c.n_attack_phys)},
                {"s_ref", opt_num(c.s_ref)},
                {"grid_step", opt_num(c.grid_step)},
                {"eps_p", c.truncation.eps_p},
                {"k_max", c.truncation.k_max},
                {"max_probabilistic", c.truncation.max_probabilistic},
                {"eps", c.eps},
                {"max_iter", c.max_iter},
                {"seed", c.seed},
                {"output_dir", c.output_dir},
                {"formats", c.formats}};
}

inline RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    c.case_file = j.at("case_file").get<std::string>();
    auto opt_int = [&](const char* key) -> std::optional<int> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<int>();
    };
    auto opt_num = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<double>();
    };
    c.n_defend_phys = opt_int("n_defend_phys");
    c.n_defend_cyber = opt_int("n_defend_cyber");
    c.n_attack_phys = opt_int("n_attack_phys");
    c.s_ref = opt_num("s_ref");
    c.grid_step = opt_num("grid_step");
    c.truncation.eps_p = j.at("eps_p").get<double>();
    c.truncation.k_max = j.at("k_max").get<int>();
    c.truncation.max_probabilistic = j.at("max_probabilistic").get<int>();
    c.eps = j.at("eps").get<double>();
    c.max_iter = j.at("max_iter").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
    c.formats = j.at("formats").get<std::vector<std::string>>();
    return c;
}

// Case file + overrides, resolved to the network and budgets a run uses.
struct LoadedCase {
    Network net;
    GameDefaults budgets;
};

inline LoadedCase load_case(const RunConfig& c) {
    validate(c);
    LoadedCase lc;
    lc.net = load_network(c.case_file);
    if (c.s_ref) lc.net.radio.s_ref = *c.s_ref;
    if (c.grid_step) lc.net.grid_step = *c.grid_step;
    validate(lc.net);
    lc.budgets = lc.net.defaults;
    if (c.n_defend_phys) lc.budgets.n_defend_phys = *c.n_defend_phys;
    if (c.n_defend_cyber) lc.budgets.n_defend_cyber = *c.n_defend_cyber;
    if (c.n_attack_phys) lc.budgets.n_attack_phys = *c.n_attack_phys;
    return lc;
}

// ---------------------------------------------------------------------------
// Report document
// ---------------------------------------------------------------------------

struct ScenarioRow {
    std::vector<std::string> faults;
    std::vector<std::string> hijacks;
    double prob = 0.0;
    double r_star = 0.0;
};

struct RcsThreat {
    std::string rcs;
    double prob = 0.0;  // hijack success probability under the final strategies
};

struct StrategyMap {
    std::vector<std::string> hardened_lines;
    std::vector<std::string> protected_rcs;
    std::vector<std::string> attacked_lines;
    std::optional<Vec2> fbs_position;
    std::vector<RcsThreat> top_hijack_rcs;  // at most three, by success probability
};

struct TimingCounters {
    std::size_t restoration_solves = 0;  // distinct scenarios solved
    std::size_t cache_hits = 0;
    int iterations = 0;  // C&CG iterations (or completed cells/rows in sweeps)
};

struct TruncationAudit {
    double eps_p = 0.0;
    int k_max = 0;
    int max_probabilistic = 0;
    int forced_success = 0;   // targets collapsed to certain success
    int forced_failure = 0;   // targets collapsed to certain failure
    int probabilistic = 0;    // targets kept branching
    std::size_t scenario_count = 0;
    double scenario_mass = 0.0;  // must be 1 within 1e-9
};

struct CaseEcho {
    std::string name;
    std::size_t nodes = 0;
    std::size_t lines = 0;
    std::size_t base_stations = 0;
    std::size_t grid_positions = 0;
    GameDefaults budgets;  // effective budgets after overrides
};

struct Stamp {
    std::string utc;               // RFC 3339, second resolution
    double elapsed_seconds = 0.0;  // wall clock for the whole operation
};

struct Report {
    std::string schema = "cpds-report-v1";
    Stamp generated_at;  // the single nondeterministic field
    RunConfig config;
    CaseEcho case_echo;
    GameSolution solution;
    std::vector<ScenarioRow> scenarios;  // under the final (defense, attack)
    StrategyMap strategy;
    TimingCounters timing;
    TruncationAudit truncation;
};

// --- serialization helpers -------------------------------------------------

inline json to_json(const Vec2& v) { return json::array({v.x, v.y}); }

inline json to_json(const DefensePlan& p) {
    return json{{"hardened_lines", std::vector<std::string>(p.hardened_lines.begin(),
                                                            p.hardened_lines.end())},
                {"protected_rcs",
                 std::vector<std::string>(p.protected_rcs.begin(), p.protected_rcs.end())}};
}

inline json to_json(const AttackPlan& p) {
    return json{{"attacked_lines", std::vector<std::string>(p.attacked_lines.begin(),
                                                            p.attacked_lines.end())},
                {"fbs_position", p.fbs_position ? to_json(*p.fbs_position) : json(nullptr)}};
}

inline json to_json(const GameSolution& s) {
    json trace = json::array();
    for (const auto& row : s.trace)
        trace.push_back(json{{"iter", row.iter},
                             {"upper", row.upper},
                             {"lower", row.lower},
                             {"attack", to_json(row.attack)}});
    return json{{"converged", s.converged},
                {"value", s.value},
                {"defense", to_json(s.defense)},
                {"worst_attack", to_json(s.worst_attack)},
                {"trace", trace}};
}

namespace detail_report {

inline std::optional<Vec2> vec2_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_array() || j.size() != 2)
        throw ParseError("report: position must be null or [x, y]");
    return Vec2{j.at(0).get<double>(), j.at(1).get<double>()};
}

inline DefensePlan defense_from_json(const json& j) {
    DefensePlan p;
    for (const auto& s : j.at("hardened_lines")) p.hardened_lines.insert(s.get<std::string>());
    for (const auto& s : j.at("protected_rcs")) p.protected_rcs.insert(s.get<std::string>());
    return p;
}

inline AttackPlan attack_from_json(const json& j) {
    AttackPlan p;
    for (const auto& s : j.at("attacked_lines")) p.attacked_lines.insert(s.get<std::string>());
    p.fbs_position = vec2_from_json(j.at("fbs_position"));
    return p;
}

inline GameSolution solution_from_json(const json& j) {
    GameSolution s;
    s.converged = j.at("converged").get<bool>();
    s.value = j.at("value").get<double>();
    s.defense = defense_from_json(j.at("defense"));
    s.worst_attack = attack_from_json(j.at("worst_attack"));
    for (const auto& jr : j.at("trace")) {
        IterationRow row;
        row.iter = jr.at("iter").get<int>();
        row.upper = jr.at("upper").get<double>();
        row.lower = jr.at("lower").get<double>();
        row.attack = attack_from_json(jr.at("attack"));
        s.trace.push_back(std::move(row));
    }
    return s;
}

inline std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline std::string csv_num(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

}  // namespace detail_report

inline json to_json(const Report& r) {
    json scenarios = json::array();
    for (const auto& s : r.scenarios)
        scenarios.push_back(json{{"faults", s.faults},
                                 {"hijacks", s.hijacks},
                                 {"prob", s.prob},
                                 {"r_star", s.r_star}});
    json top = json::array();
    for (const auto& t : r.strategy.top_hijack_rcs)
        top.push_back(json{{"rcs", t.rcs}, {"prob", t.prob}});
    return json{
        {"schema", r.schema},
        {"generated_at",
         json{{"utc", r.generated_at.utc}, {"elapsed_seconds", r.generated_at.elapsed_seconds}}},
        {"config", to_json(r.config)},
        {"case",
         json{{"name", r.case_echo.name},
              {"nodes", r.case_echo.nodes},
              {"lines", r.case_echo.lines},
              {"base_stations", r.case_echo.base_stations},
              {"grid_positions", r.case_echo.grid_positions},
              {"budgets",
               json{{"n_defend_phys", r.case_echo.budgets.n_defend_phys},
                    {"n_defend_cyber", r.case_echo.budgets.n_defend_cyber},
                    {"n_attack_phys", r.case_echo.budgets.n_attack_phys}}}}},
        {"solution", to_json(r.solution)},
        {"scenarios", scenarios},
        {"strategy",
         json{{"hardened_lines", r.strategy.hardened_lines},
              {"protected_rcs", r.strategy.protected_rcs},
              {"attacked_lines", r.strategy.attacked_lines},
              {"fbs_position",
               r.strategy.fbs_position ? to_json(*r.strategy.fbs_position) : json(nullptr)},
              {"top_hijack_rcs", top}}},
        {"timing",
         json{{"restoration_solves", r.timing.restoration_solves},
              {"cache_hits", r.timing.cache_hits},
              {"iterations", r.timing.iterations}}},
        {"truncation",
         json{{"eps_p", r.truncation.eps_p},
              {"k_max", r.truncation.k_max},
              {"max_probabilistic", r.truncation.max_probabilistic},
              {"forced_success", r.truncation.forced_success},
              {"forced_failure", r.truncation.forced_failure},
              {"probabilistic", r.truncation.probabilistic},
              {"scenario_count", r.truncation.scenario_count},
              {"scenario_mass", r.truncation.scenario_mass}}}};
}

inline Report report_from_json(const json& j) {
    Report r;
    r.schema = j.at("schema").get<std::string>();
    r.generated_at.utc = j.at("generated_at").at("utc").get<std::string>();
    r.generated_at.elapsed_seconds = j.at("generated_at").at("elapsed_seconds").get<double>();
    r.config = run_config_from_json(j.at("config"));
    const json& jc = j.at("case");
    r.case_echo.name = jc.at("name").get<std::string>();
    r.case_echo.nodes = jc.at("nodes").get<std::size_t>();
    r.case_echo.lines = jc.at("lines").get<std::size_t>();
    r.case_echo.base_stations = jc.at("base_stations").get<std::size_t>();
    r.case_echo.grid_positions = jc.at("grid_positions").get<std::size_t>();
    r.case_echo.budgets.n_defend_phys = jc.at("budgets").at("n_defend_phys").get<int>();
    r.case_echo.budgets.n_defend_cyber = jc.at("budgets").at("n_defend_cyber").get<int>();
    r.case_echo.budgets.n_attack_phys = jc.at("budgets").at("n_attack_phys").get<int>();
    r.solution = detail_report::solution_from_json(j.at("solution"));
    for (const auto& js : j.at("scenarios")) {
        ScenarioRow row;
        row.faults = js.at("faults").get<std::vector<std::string>>();
        row.hijacks = js.at("hijacks").get<std::vector<std::string>>();
        row.prob = js.at("prob").get<double>();
        row.r_star = js.at("r_star").get<double>();
        r.scenarios.push_back(std::move(row));
    }
    const json& jm = j.at("strategy");
    r.strategy.hardened_lines = jm.at("hardened_lines").get<std::vector<std::string>>();
    r.strategy.protected_rcs = jm.at("protected_rcs").get<std::vector<std::string>>();
    r.strategy.attacked_lines = jm.at("attacked_lines").get<std::vector<std::string>>();
    r.strategy.fbs_position = detail_report::vec2_from_json(jm.at("fbs_position"));
    for (const auto& jt : jm.at("top_hijack_rcs"))
        r.strategy.top_hijack_rcs.push_back(
            {jt.at("rcs").get<std::string>(), jt.at("prob").get<double>()});
    const json& jtm = j.at("timing");
    r.timing.restoration_solves = jtm.at("restoration_solves").get<std::size_t>();
    r.timing.cache_hits = jtm.at("cache_hits").get<std::size_t>();
    r.timing.iterations = jtm.at("iterations").get<int>();
    const json& jt = j.at("truncation");
    r.truncation.eps_p = jt.at("eps_p").get<double>();
    r.truncation.k_max = jt.at("k_max").get<int>();
    r.truncation.max_probabilistic = jt.at("max_probabilistic").get<int>();
    r.truncation.forced_success = jt.at("forced_success").get<int>();
    r.truncation.forced_failure = jt.at("forced_failure").get<int>();
    r.truncation.probabilistic = jt.at("probabilistic").get<int>();
    r.truncation.scenario_count = jt.at("scenario_count").get<std::size_t>();
    r.truncation.scenario_mass = jt.at("scenario_mass").get<double>();
    return r;
}

inline std::string scenarios_csv(const Report& r) {
    using detail_report::csv_num;
    std::string out = "id,prob,r_star,faults,hijacks\n";
    for (std::size_t i = 0; i < r.scenarios.size(); ++i) {
        const auto& s = r.scenarios[i];
        out += std::to_string(i) + "," + csv_num(s.prob) + "," + csv_num(s.r_star) + "," +
               detail_report::join(s.faults, ';') + "," + detail_report::join(s.hijacks, ';') +
               "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// run: one game
// ---------------------------------------------------------------------------

namespace detail_report {

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParseError("cannot open for writing: " + path.string());
    os << text;
    if (!os) throw ParseError("write failed: " + path.string());
}

inline void write_outputs(const RunConfig& c,
                          const std::vector<std::pair<std::string, std::string>>& files) {
    if (c.output_dir.empty()) return;
    std::filesystem::create_directories(c.output_dir);
    for (const auto& [name, text] : files)
        write_text_file(std::filesystem::path(c.output_dir) / name, text);
}

}  // namespace detail_report

inline Report run_game(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    LoadedCase lc = load_case(config);
    RestorationEngine engine(lc.net);

    CcgOptions opts;
    opts.eps = config.eps;
    opts.max_iter = config.max_iter;
    opts.enumeration = config.truncation;

    Report r;
    r.config = config;
    r.case_echo.name = lc.net.name;
    r.case_echo.nodes = lc.net.nodes.size();
    r.case_echo.lines = lc.net.lines.size();
    r.case_echo.base_stations = lc.net.base_stations.size();
    r.case_echo.grid_positions = grid_positions(lc.net).size();
    r.case_echo.budgets = lc.budgets;

    r.solution = solve_ccg(engine, lc.budgets, opts);

    // Scenario table and truncation audit under the final strategies.
    const auto targets =
        target_probabilities(lc.net, r.solution.defense, r.solution.worst_attack, config.truncation);
    r.truncation.eps_p = config.truncation.eps_p;
    r.truncation.k_max = config.truncation.k_max;
    r.truncation.max_probabilistic = config.truncation.max_probabilistic;
    for (const auto& t : targets) {
        if (!t.forced)
            ++r.truncation.probabilistic;
        else if (*t.forced)
            ++r.truncation.forced_success;
        else
            ++r.truncation.forced_failure;
    }
    const auto outcomes = enumerate_outcomes(targets, config.truncation.max_probabilistic);
    for (const auto& ws : outcomes) {
        ScenarioRow row;
        row.faults.assign(ws.scenario.faulted_lines.begin(), ws.scenario.faulted_lines.end());
        row.hijacks.assign(ws.scenario.hijacked_rcs.begin(), ws.scenario.hijacked_rcs.end());
        row.prob = ws.prob;
        row.r_star = engine.optimal_restoration(ws.scenario).resilience;
        r.truncation.scenario_mass += ws.prob;
        r.scenarios.push_back(std::move(row));
    }
    r.truncation.scenario_count = r.scenarios.size();

    // Strategy map with the top-3 hijack-probability RCSs.
    r.strategy.hardened_lines.assign(r.solution.defense.hardened_lines.begin(),
                                     r.solution.defense.hardened_lines.end());
    r.strategy.protected_rcs.assign(r.solution.defense.protected_rcs.begin(),
                                    r.solution.defense.protected_rcs.end());
    r.strategy.attacked_lines.assign(r.solution.worst_attack.attacked_lines.begin(),
                                     r.solution.worst_attack.attacked_lines.end());
    r.strategy.fbs_position = r.solution.worst_attack.fbs_position;
    if (r.strategy.fbs_position) {
        const InspectionParams insp = inspection_params(lc.net);
        std::vector<RcsThreat> threats;
        for (std::size_t li = 0; li < lc.net.lines.size(); ++li) {
            const auto& line = lc.net.lines[li];
            const double p_cap = rcs_capture_prob(lc.net, *r.strategy.fbs_position, li);
            const bool prot = r.solution.defense.protected_rcs.count(line.rcs_id) > 0;
            threats.push_back({line.rcs_id, cyber_success_prob(p_cap, prot, insp)});
        }
        std::sort(threats.begin(), threats.end(), [](const RcsThreat& a, const RcsThreat& b) {
            if (a.prob != b.prob) return a.prob > b.prob;
            return a.rcs < b.rcs;
        });
        if (threats.size() > 3) threats.resize(3);
        r.strategy.top_hijack_rcs = std::move(threats);
    }

    r.timing.restoration_solves = engine.cache_size();
    r.timing.cache_hits = engine.cache_hits();
    r.timing.iterations = static_cast<int>(r.solution.trace.size());

    r.generated_at.utc = detail_report::utc_now();
    r.generated_at.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& f : config.formats) {
        if (f == "json") files.emplace_back("report.json", to_json(r).dump(2) + "\n");
        if (f == "csv") files.emplace_back("scenarios.csv", scenarios_csv(r));
    }
    detail_report::write_outputs(config, files);
    return r;
}

// ---------------------------------------------------------------------------
// sweep: one game per budget cell
// ---------------------------------------------------------------------------

struct SweepGrid {
    std::vector<int> n_defend_cyber;
    std::vector<int> n_defend_phys;
    std::vector<int> n_attack_phys;
};

struct SweepRow {
    int n_defend_cyber = 0;
    int n_defend_phys = 0;
    int n_attack_phys = 0;
    double resilience = 0.0;
    bool converged = false;
    std::string error;  // empty on success; cell failures do not stop the sweep
};

struct SweepResult {
    RunConfig config;
    std::vector<SweepRow> rows;
    TimingCounters timing;
    Stamp generated_at;
};

// Parses "2..4" (inclusive range) or "2,3,4" (list) or "3" into values >= 0.
inline std::vector<int> parse_int_list(const std::string& text) {
    auto parse_one = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            throw ValidationError("cannot parse integer '" + s + "' in '" + text + "'");
        }
        if (used != s.size())
            throw ValidationError("cannot parse integer '" + s + "' in '" + text + "'");
        if (v < 0) throw ValidationError("budget values must be >= 0: '" + text + "'");
        return v;
    };
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = parse_one(text.substr(0, dots));
        const int hi = parse_one(text.substr(dots + 2));
        if (hi < lo) throw ValidationError("empty range '" + text + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(parse_one(item));
    if (out.empty()) throw ValidationError("empty budget list '" + text + "'");
    return out;
}

inline SweepResult run_sweep(const RunConfig& config, const SweepGrid& grid) {
    if (grid.n_defend_cyber.empty() || grid.n_defend_phys.empty() || grid.n_attack_phys.empty())
        throw ValidationError("sweep: grid must be non-empty in every dimension");
    const auto t0 = std::chrono::steady_clock::now();
    LoadedCase lc = load_case(config);
    RestorationEngine engine(lc.net);  // shared across every cell

    CcgOptions opts;
    opts.eps = config.eps;
    opts.max_iter = config.max_iter;
    opts.enumeration = config.truncation;

    SweepResult res;
    res.config = config;
    for (int nc : grid.n_defend_cyber)
        for (int np : grid.n_defend_phys)
            for (int na : grid.n_attack_phys) {
                SweepRow row;
                row.n_defend_cyber = nc;
                row.n_defend_phys = np;
                row.n_attack_phys = na;
                GameDefaults budgets = lc.budgets;
                budgets.n_defend_cyber = nc;
                budgets.n_defend_phys = np;
                budgets.n_attack_phys = na;
                try {
                    const GameSolution sol = solve_ccg(engine, budgets, opts);
                    row.resilience = sol.value;
                    row.converged = sol.converged;
                    ++res.timing.iterations;
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                res.rows.push_back(std::move(row));
            }
    res.timing.restoration_solves = engine.cache_size();
    res.timing.cache_hits = engine.cache_hits();
    res.generated_at.utc = detail_report::utc_now();
    res.generated_at.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& f : config.formats) {
        if (f == "json") {
            json rows = json::array();
            for (const auto& r : res.rows)
                rows.push_back(json{{"n_defend_cyber", r.n_defend_cyber},
                                    {"n_defend_phys", r.n_defend_phys},
                                    {"n_attack_phys", r.n_attack_phys},
                                    {"resilience", r.resilience},
                                    {"converged", r.converged},
                                    {"error", r.error}});
            const json doc{{"schema", "cpds-sweep-v1"},
                           {"generated_at",
                            json{{"utc", res.generated_at.utc},
                                 {"elapsed_seconds", res.generated_at.elapsed_seconds}}},
                           {"config", to_json(config)},
                           {"rows", rows},
                           {"timing",
                            json{{"restoration_solves", res.timing.restoration_solves},
                                 {"cache_hits", res.timing.cache_hits},
                                 {"iterations", res.timing.iterations}}}};
            files.emplace_back("sweep.json", doc.dump(2) + "\n");
        }
        if (f == "csv") {
            std::string csv = "n_defend_cyber,n_defend_phys,n_attack_phys,resilience,converged,error\n";
            for (const auto& r : res.rows)
                csv += std::to_string(r.n_defend_cyber) + "," + std::to_string(r.n_defend_phys) +
                       "," + std::to_string(r.n_attack_phys) + "," +
                       detail_report::csv_num(r.resilience) + "," +
                       (r.converged ? "true" : "false") + "," + r.error + "\n";
            files.emplace_back("sweep.csv", csv);
        }
    }
    detail_report::write_outputs(config, files);
    return res;
}

// ---------------------------------------------------------------------------
// fbs-study: attacker-side sweep over the FBS reference power
// ---------------------------------------------------------------------------

// For each S(d_0) value the study solves the attacker's subproblem against
// the undefended system and reports the optimal FBS grid position and the
// resilience loss (1 - value), next to the no-FBS baseline. Defense budgets
// in the config are ignored here: the study isolates the attacker's stage.
struct FbsStudyRow {
    double s_ref = 0.0;
    std::optional<Vec2> fbs_position;  // absent when the optimal attack skips the FBS
    double loss = 0.0;                 // 1 - expected resilience, FBS allowed
    double loss_no_fbs = 0.0;          // 1 - expected resilience, FBS forbidden
    std::string error;
};

struct FbsStudyResult {
    RunConfig config;
    std::vector<FbsStudyRow> rows;
    TimingCounters timing;
    Stamp generated_at;
};

inline FbsStudyResult run_fbs_power_study(const RunConfig& config,
                                          const std::vector<double>& s_refs) {
    if (s_refs.empty()) throw ValidationError("fbs-study: s_ref value list must be non-empty");
    const auto t0 = std::chrono::steady_clock::now();
    LoadedCase lc = load_case(config);
    // One engine for every row: restoration never reads the radio parameters,
    // so mutating s_ref between rows keeps the scenario cache valid.
    RestorationEngine engine(lc.net);

    FbsStudyResult res;
    res.config = config;
    for (double s : s_refs) {
        FbsStudyRow row;
        row.s_ref = s;
        try {
            if (!(s > 0)) throw ValidationError("s_ref must be > 0");
            lc.net.radio.s_ref = s;
            const DefensePlan undefended;
            const SubproblemResult with_fbs = solve_subproblem(
                engine, undefended, lc.budgets.n_attack_phys, config.truncation);
            const SubproblemResult without_fbs =
                solve_subproblem(engine, undefended, lc.budgets.n_attack_phys, config.truncation,
                                 /*include_no_fbs=*/true, /*forbid_fbs=*/true);
            row.fbs_position = with_fbs.attack.fbs_position;
            row.loss = 1.0 - with_fbs.value;
            row.loss_no_fbs = 1.0 - without_fbs.value;
            ++res.timing.iterations;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        res.rows.push_back(std::move(row));
    }
    res.timing.restoration_solves = engine.cache_size();
    res.timing.cache_hits = engine.cache_hits();
    res.generated_at.utc = detail_report::utc_now();
    res.generated_at.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& f : config.formats) {
        if (f == "json") {
            json rows = json::array();
            for (const auto& r : res.rows)
                rows.push_back(
                    json{{"s_ref", r.s_ref},
                         {"fbs_position", r.fbs_position ? to_json(*r.fbs_position) : json(nullptr)},
                         {"loss", r.loss},
                         {"loss_no_fbs", r.loss_no_fbs},
                         {"error", r.error}});
            const json doc{{"schema", "cpds-fbs-study-v1"},
                           {"generated_at",
                            json{{"utc", res.generated_at.utc},
                                 {"elapsed_seconds", res.generated_at.elapsed_seconds}}},
                           {"config", to_json(config)},
                           {"rows", rows},
                           {"timing",
                            json{{"restoration_solves", res.timing.restoration_solves},
                                 {"cache_hits", res.timing.cache_hits},
                                 {"iterations", res.timing.iterations}}}};
            files.emplace_back("fbs_study.json", doc.dump(2) + "\n");
        }
        if (f == "csv") {
            std::string csv = "s_ref,fbs_x,fbs_y,loss,loss_no_fbs,error\n";
            for (const auto& r : res.rows) {
                csv += detail_report::csv_num(r.s_ref) + ",";
                if (r.fbs_position)
                    csv += detail_report::csv_num(r.fbs_position->x) + "," +
                           detail_report::csv_num(r.fbs_position->y);
                else
                    csv += ",";
                csv += "," + detail_report::csv_num(r.loss) + "," +
                       detail_report::csv_num(r.loss_no_fbs) + "," + r.error + "\n";
            }
            files.emplace_back("fbs_study.csv", csv);
        }
    }
    detail_report::write_outputs(config, files);
    return res;
}

// ---------------------------------------------------------------------------
// Report schema: published JSON Schema plus a small structural validator.
// ---------------------------------------------------------------------------

// The subset used: type (string or array of strings), properties, required,
// additionalProperties (boolean), items (single schema), enum, minItems,
// maxItems. Enough to pin the report layout without an external dependency.
inline const json& report_schema() {
    static const json schema = json::parse(R"JSON(
{
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "cpds game run report",
  "type": "object",
  "additionalProperties": false,
  "required": ["schema", "generated_at", "config", "case", "solution",
               "scenarios", "strategy", "timing", "truncation"],
  "properties": {
    "schema": {"type": "string", "enum": ["cpds-report-v1"]},
    "generated_at": {
      "type": "object",
      "additionalProperties": false,
      "required": ["utc", "elapsed_seconds"],
      "properties": {
        "utc": {"type": "string"},
        "elapsed_seconds": {"type": "number"}
      }
    },
    "config": {
      "type": "object",
      "additionalProperties": false,
      "required": ["case_file", "n_defend_phys", "n_defend_cyber", "n_attack_phys",
                   "s_ref", "grid_step", "eps_p", "k_max", "max_probabilistic",
                   "eps", "max_iter", "seed", "output_dir", "formats"],
      "properties": {
        "case_file": {"type": "string"},
        "n_defend_phys": {"type": ["integer", "null"]},
        "n_defend_cyber": {"type": ["integer", "null"]},
        "n_attack_phys": {"type": ["integer", "null"]},
        "s_ref": {"type": ["number", "null"]},
        "grid_step": {"type": ["number", "null"]},
        "eps_p": {"type": "number"},
        "k_max": {"type": "integer"},
        "max_probabilistic": {"type": "integer"},
        "eps": {"type": "number"},
        "max_iter": {"type": "integer"},
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "formats": {"type": "array", "items": {"type": "string", "enum": ["json", "csv"]}}
      }
    },
    "case": {
      "type": "object",
      "additionalProperties": false,
      "required": ["name", "nodes", "lines", "base_stations", "grid_positions", "budgets"],
      "properties": {
        "name": {"type": "string"},
        "nodes": {"type": "integer"},
        "lines": {"type": "integer"},
        "base_stations": {"type": "integer"},
        "grid_positions": {"type": "integer"},
        "budgets": {
          "type": "object",
          "additionalProperties": false,
          "required": ["n_defend_phys", "n_defend_cyber", "n_attack_phys"],
          "properties": {
            "n_defend_phys": {"type": "integer"},
            "n_defend_cyber": {"type": "integer"},
            "n_attack_phys": {"type": "integer"}
          }
        }
      }
    },
    "solution": {
      "type": "object",
      "additionalProperties": false,
      "required": ["converged", "value", "defense", "worst_attack", "trace"],
      "properties": {
        "converged": {"type": "boolean"},
        "value": {"type": "number"},
        "defense": {
          "type": "object",
          "additionalProperties": false,
          "required": ["hardened_lines", "protected_rcs"],
          "properties": {
            "hardened_lines": {"type": "array", "items": {"type": "string"}},
            "protected_rcs": {"type": "array", "items": {"type": "string"}}
          }
        },
        "worst_attack": {
          "type": "object",
          "additionalProperties": false,
          "required": ["attacked_lines", "fbs_position"],
          "properties": {
            "attacked_lines": {"type": "array", "items": {"type": "string"}},
            "fbs_position": {"type": ["array", "null"], "items": {"type": "number"},
                             "minItems": 2, "maxItems": 2}
          }
        },
        "trace": {
          "type": "array",
          "items": {
            "type": "object",
            "additionalProperties": false,
            "required": ["iter", "upper", "lower", "attack"],
            "properties": {
              "iter": {"type": "integer"},
              "upper": {"type": "number"},
              "lower": {"type": "number"},
              "attack": {
                "type": "object",
                "additionalProperties": false,
                "required": ["attacked_lines", "fbs_position"],
                "properties": {
                  "attacked_lines": {"type": "array", "items": {"type": "string"}},
                  "fbs_position": {"type": ["array", "null"], "items": {"type": "number"},
                                   "minItems": 2, "maxItems": 2}
                }
              }
            }
          }
        }
      }
    },
    "scenarios": {
      "type": "array",
      "items": {
        "type": "object",
        "additionalProperties": false,
        "required": ["faults", "hijacks", "prob", "r_star"],
        "properties": {
          "faults": {"type": "array", "items": {"type": "string"}},
          "hijacks": {"type": "array", "items": {"type": "string"}},
          "prob": {"type": "number"},
          "r_star": {"type": "number"}
        }
      }
    },
    "strategy": {
      "type": "object",
      "additionalProperties": false,
      "required": ["hardened_lines", "protected_rcs", "attacked_lines",
                   "fbs_position", "top_hijack_rcs"],
      "properties": {
        "hardened_lines": {"type": "array", "items": {"type": "string"}},
        "protected_rcs": {"type": "array", "items": {"type": "string"}},
        "attacked_lines": {"type": "array", "items": {"type": "string"}},
        "fbs_position": {"type": ["array", "null"], "items": {"type": "number"},
                         "minItems": 2, "maxItems": 2},
        "top_hijack_rcs": {
          "type": "array",
          "maxItems": 3,
          "items": {
            "type": "object",
            "additionalProperties": false,
            "required": ["rcs", "prob"],
            "properties": {
              "rcs": {"type": "string"},
              "prob": {"type": "number"}
            }
          }
        }
      }
    },
    "timing": {
      "type": "object",
      "additionalProperties": false,
      "required": ["restoration_solves", "cache_hits", "iterations"],
      "properties": {
        "restoration_solves": {"type": "integer"},
        "cache_hits": {"type": "integer"},
        "iterations": {"type": "integer"}
      }
    },
    "truncation": {
      "type": "object",
      "additionalProperties": false,
      "required": ["eps_p", "k_max", "max_probabilistic", "forced_success",
                   "forced_failure", "probabilistic", "scenario_count", "scenario_mass"],
      "properties": {
        "eps_p": {"type": "number"},
        "k_max": {"type": "integer"},
        "max_probabilistic": {"type": "integer"},
        "forced_success": {"type": "integer"},
        "forced_failure": {"type": "integer"},
        "probabilistic": {"type": "integer"},
        "scenario_count": {"type": "integer"},
        "scenario_mass": {"type": "number"}
      }
    }
  }
}
)JSON");
    return schema;
}

namespace detail_report {

inline bool type_matches(const json& doc, const std::string& t) {
    if (t == "object") return doc.is_object();
    if (t == "array") return doc.is_array();
    if (t == "string") return doc.is_string();
    if (t == "integer") return doc.is_number_integer();
    if (t == "number") return doc.is_number();
    if (t == "boolean") return doc.is_boolean();
    if (t == "null") return doc.is_null();
    throw ValidationError("schema: unsupported type '" + t + "'");
}

inline void validate_schema_at(const json& doc, const json& schema, const std::string& path,
                               std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const json& t = schema.at("type");
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(doc, t.get<std::string>());
        } else {
            for (const auto& alt : t) ok = ok || type_matches(doc, alt.get<std::string>());
        }
        if (!ok) {
            errors.push_back(path + ": type mismatch (expected " + t.dump() + ")");
            return;  // further structural checks would only cascade
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& v : schema.at("enum")) ok = ok || v == doc;
        if (!ok) errors.push_back(path + ": value " + doc.dump() + " not in enum");
    }
    if (doc.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema.at("required"))
                if (!doc.contains(key.get<std::string>()))
                    errors.push_back(path + ": missing required key '" + key.get<std::string>() +
                                     "'");
        const json* props = schema.contains("properties") ? &schema.at("properties") : nullptr;
        const bool extra_ok = !schema.contains("additionalProperties") ||
                              schema.at("additionalProperties").get<bool>();
        for (const auto& [key, value] : doc.items()) {
            if (props && props->contains(key))
                validate_schema_at(value, props->at(key), path + "/" + key, errors);
            else if (!extra_ok)
                errors.push_back(path + ": unexpected key '" + key + "'");
        }
    }
    if (doc.is_array()) {
        if (schema.contains("minItems") && doc.size() < schema.at("minItems").get<std::size_t>())
            errors.push_back(path + ": fewer than minItems elements");
        if (schema.contains("maxItems") && doc.size() > schema.at("maxItems").get<std::size_t>())
            errors.push_back(path + ": more than maxItems elements");
        if (schema.contains("items")) {
            for (std::size_t i = 0; i < doc.size(); ++i)
                validate_schema_at(doc[i], schema.at("items"),
                                   path + "/" + std::to_string(i), errors);
        }
    }
}

}  // namespace detail_report

// Structural validation against the restricted JSON Schema subset above.
// Returns the list of violations; empty means the document conforms.
inline std::vector<std::string> schema_violations(const json& doc, const json& schema) {
    std::vector<std::string> errors;
    detail_report::validate_schema_at(doc, schema, "", errors);
    return errors;
}

inline void validate_against_schema(const json& doc, const json& schema) {
    const auto errors = schema_violations(doc, schema);
    if (!errors.empty()) {
        std::string msg = "schema validation failed:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ValidationError(msg);
    }
}

}  // namespace cpds
