// Command-line front end: run one game, sweep budgets, sweep FBS power,
// lint a case file, or dump a stage MILP for debugging.
//
// Exit codes: 0 success (run/sweep/fbs-study fully converged), 2 completed
// but not (fully) converged, 1 runtime error; CLI11 usage errors keep their
// own codes. Environment: CPDS_SOLVER selects the solver backend ("highs"),
// CPDS_THREADS the solver thread count.

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11/CLI11.hpp>

#include <cpds/report.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct CommonFlags {
    cpds::RunConfig config;
    int ndp = -1, ndc = -1, nap = -1;
    double s_ref = 0.0, grid_step = 0.0;
    CLI::Option *ondp = nullptr, *ondc = nullptr, *onap = nullptr;
    CLI::Option *osref = nullptr, *ogrid = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("case", f.config.case_file, "case file (JSON)")->required();
    f.ondp = cmd->add_option("--n-defend-phys", f.ndp, "lines the defender may harden");
    f.ondc = cmd->add_option("--n-defend-cyber", f.ndc, "RCSs the defender may protect");
    f.onap = cmd->add_option("--n-attack-phys", f.nap, "lines the attacker may strike");
    f.osref = cmd->add_option("--s-ref", f.s_ref, "override the FBS reference power S(d_0), dB");
    f.ogrid = cmd->add_option("--grid-step", f.grid_step, "override the FBS grid step, meters");
    cmd->add_option("--eps-p", f.config.truncation.eps_p,
                    "capture-probability threshold for deterministic collapse");
    cmd->add_option("--k-max", f.config.truncation.k_max,
                    "probabilistic cyber targets kept per attack");
    cmd->add_option("--max-probabilistic", f.config.truncation.max_probabilistic,
                    "hard cap on 2^N outcome enumeration");
    cmd->add_option("--eps", f.config.eps, "C&CG convergence gap");
    cmd->add_option("--max-iter", f.config.max_iter, "C&CG iteration cap");
    cmd->add_option("--seed", f.config.seed, "run seed, echoed into reports");
    cmd->add_option("--out", f.config.output_dir, "output directory (omit to skip files)");
    cmd->add_option("--format", f.config.formats, "report formats: json, csv")
        ->delimiter(',');
}

void resolve_common_flags(CommonFlags& f) {
    if (f.ondp->count()) f.config.n_defend_phys = f.ndp;
    if (f.ondc->count()) f.config.n_defend_cyber = f.ndc;
    if (f.onap->count()) f.config.n_attack_phys = f.nap;
    if (f.osref->count()) f.config.s_ref = f.s_ref;
    if (f.ogrid->count()) f.config.grid_step = f.grid_step;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw cpds::ValidationError("cannot parse number '" + item + "' in '" + text + "'");
        }
        if (used != item.size())
            throw cpds::ValidationError("cannot parse number '" + item + "' in '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw cpds::ValidationError("empty value list '" + text + "'");
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_run(CommonFlags& f) {
    resolve_common_flags(f);
    const cpds::Report report = cpds::run_game(f.config);
    std::cout << cpds::format_trace(report.solution);
    std::cout << "resilience " << report.solution.value << " over " << report.scenarios.size()
              << " scenarios (mass " << report.truncation.scenario_mass << "), "
              << report.timing.restoration_solves << " restorations solved\n";
    if (!f.config.output_dir.empty())
        std::cout << "report written to " << f.config.output_dir << "\n";
    return report.solution.converged ? kExitOk : kExitNotConverged;
}

int cmd_sweep(CommonFlags& f, const std::string& nc, const std::string& np,
              const std::string& na) {
    resolve_common_flags(f);
    cpds::SweepGrid grid;
    grid.n_defend_cyber = cpds::parse_int_list(nc);
    grid.n_defend_phys = cpds::parse_int_list(np);
    grid.n_attack_phys = cpds::parse_int_list(na);
    const cpds::SweepResult res = cpds::run_sweep(f.config, grid);
    std::printf("%4s %4s %4s  %-10s  %s\n", "ndc", "ndp", "nap", "resilience", "status");
    bool all_ok = true;
    for (const auto& r : res.rows) {
        if (!r.error.empty()) {
            std::printf("%4d %4d %4d  %-10s  error: %s\n", r.n_defend_cyber, r.n_defend_phys,
                        r.n_attack_phys, "-", r.error.c_str());
            all_ok = false;
            continue;
        }
        std::printf("%4d %4d %4d  %-10.6f  %s\n", r.n_defend_cyber, r.n_defend_phys,
                    r.n_attack_phys, r.resilience, r.converged ? "converged" : "iteration limit");
        all_ok = all_ok && r.converged;
    }
    std::printf("%zu cells, %zu restorations solved, %zu cache hits\n", res.rows.size(),
                res.timing.restoration_solves, res.timing.cache_hits);
    if (!f.config.output_dir.empty())
        std::cout << "sweep table written to " << f.config.output_dir << "\n";
    return all_ok ? kExitOk : kExitNotConverged;
}

int cmd_fbs_study(CommonFlags& f, const std::string& s_refs_text) {
    resolve_common_flags(f);
    const std::vector<double> s_refs = parse_double_list(s_refs_text);
    const cpds::FbsStudyResult res = cpds::run_fbs_power_study(f.config, s_refs);
    std::printf("%8s  %-16s  %-10s  %-10s\n", "s_ref", "fbs position", "loss", "loss(noFBS)");
    bool all_ok = true;
    for (const auto& r : res.rows) {
        if (!r.error.empty()) {
            std::printf("%8.2f  %-16s  error: %s\n", r.s_ref, "-", r.error.c_str());
            all_ok = false;
            continue;
        }
        std::string pos = "none";
        if (r.fbs_position) {
            std::ostringstream os;
            os << "(" << r.fbs_position->x << "," << r.fbs_position->y << ")";
            pos = os.str();
        }
        std::printf("%8.2f  %-16s  %-10.6f  %-10.6f\n", r.s_ref, pos.c_str(), r.loss,
                    r.loss_no_fbs);
    }
    std::printf("%zu rows, %zu restorations solved, %zu cache hits\n", res.rows.size(),
                res.timing.restoration_solves, res.timing.cache_hits);
    if (!f.config.output_dir.empty())
        std::cout << "study table written to " << f.config.output_dir << "\n";
    return all_ok ? kExitOk : kExitNotConverged;
}

int cmd_validate(const std::string& case_file) {
    const cpds::Network net = cpds::load_network(case_file);
    const auto grid = cpds::grid_positions(net);
    std::cout << "ok: " << case_file << "\n"
              << "  name           " << net.name << "\n"
              << "  nodes          " << net.nodes.size() << "\n"
              << "  lines          " << net.lines.size() << "\n"
              << "  base stations  " << net.base_stations.size() << "\n"
              << "  fbs grid       " << grid.size() << " positions (step " << net.grid_step
              << " m)\n"
              << "  budgets        defend_phys=" << net.defaults.n_defend_phys
              << " defend_cyber=" << net.defaults.n_defend_cyber
              << " attack_phys=" << net.defaults.n_attack_phys << "\n";
    return kExitOk;
}

int cmd_dump_model(const std::string& case_file, const std::string& faults,
                   const std::string& hijacks, int stage, const std::string& out_path) {
    const cpds::Network net = cpds::load_network(case_file);
    cpds::OutcomeScenario sc;
    for (const auto& id : split(faults, ',')) {
        net.line_index(id);  // surfaces unknown ids before the model build
        sc.faulted_lines.insert(id);
    }
    for (const auto& id : split(hijacks, ',')) {
        net.line_of_rcs(id);
        sc.hijacked_rcs.insert(id);
    }
    const auto model = stage == 1 ? cpds::build_stage1_model(net, sc, {})
                                  : cpds::build_stage2_model(net, sc, {});
    if (out_path.empty()) {
        cpds::write_lp_format(model.milp, std::cout);
    } else {
        std::ostringstream os;
        cpds::write_lp_format(model.milp, os);
        cpds::detail_report::write_text_file(out_path, os.str());
        std::cout << "model written to " << out_path << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tri-level defender-attacker-defender resilience games on "
                 "cyber-physical distribution systems"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "solve one game and write a report");
    add_common_flags(run, run_flags);

    CommonFlags sweep_flags;
    std::string sweep_nc = "2..4", sweep_np = "2..4", sweep_na = "1..3";
    CLI::App* sweep = app.add_subcommand("sweep", "one game per budget cell, long-format table");
    add_common_flags(sweep, sweep_flags);
    sweep->add_option("--nc", sweep_nc, "cyber defense budgets, e.g. 2..4 or 2,3,4");
    sweep->add_option("--np", sweep_np, "physical defense budgets");
    sweep->add_option("--na", sweep_na, "physical attack budgets");

    CommonFlags fbs_flags;
    std::string fbs_srefs;
    CLI::App* fbs = app.add_subcommand(
        "fbs-study", "attacker-side sweep over the FBS reference power (undefended system)");
    add_common_flags(fbs, fbs_flags);
    fbs->add_option("--s-refs", fbs_srefs, "S(d_0) values, e.g. 100,104,108,112")->required();

    std::string validate_case;
    CLI::App* validate = app.add_subcommand("validate", "lint a case file and print a summary");
    validate->add_option("case", validate_case, "case file (JSON)")->required();

    std::string dump_case, dump_faults, dump_hijacks, dump_out;
    int dump_stage = 1;
    CLI::App* dump = app.add_subcommand("dump-model", "write one stage MILP in LP format");
    dump->add_option("case", dump_case, "case file (JSON)")->required();
    dump->add_option("--faults", dump_faults, "faulted line ids, comma-separated");
    dump->add_option("--hijacks", dump_hijacks, "hijacked RCS ids, comma-separated");
    dump->add_option("--stage", dump_stage, "restoration stage: 1 or 2")
        ->check(CLI::Range(1, 2));
    dump->add_option("--out", dump_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_nc, sweep_np, sweep_na);
        if (fbs->parsed()) return cmd_fbs_study(fbs_flags, fbs_srefs);
        if (validate->parsed()) return cmd_validate(validate_case);
        if (dump->parsed())
            return cmd_dump_model(dump_case, dump_faults, dump_hijacks, dump_stage, dump_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
