#pragma once

// Two-stage service-restoration MILP for one outcome scenario, plus an
// independent brute-force oracle (switch-configuration enumeration over the
// built-in LP solver) for small networks.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cpds/common.hpp"
#include "cpds/highs_backend.hpp"
#include "cpds/lp.hpp"
#include "cpds/milp.hpp"
#include "cpds/network.hpp"

namespace cpds {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct OutcomeScenario {
    std::set<std::string> faulted_lines;  // lines with a physical fault
    std::set<std::string> hijacked_rcs;   // RCSs stuck at their base state
};

inline void validate_scenario(const Network& net, const OutcomeScenario& sc) {
    for (const auto& id : sc.faulted_lines) net.line_index(id);
    for (const auto& id : sc.hijacked_rcs) net.line_of_rcs(id);
}

inline std::string scenario_key(const OutcomeScenario& sc) {
    std::string key;
    for (const auto& id : sc.faulted_lines) {
        if (!key.empty()) key += ',';
        key += id;
    }
    key += '|';
    bool first = true;
    for (const auto& id : sc.hijacked_rcs) {
        if (!first) key += ',';
        key += id;
        first = false;
    }
    return key;
}

struct StageSolution {
    std::map<std::string, int> closed;                            // c
    std::map<std::pair<std::string, std::string>, int> vflow;     // X per arc
    std::map<std::string, int> fault_area;                        // lambda
    std::map<std::string, int> dg_root;                           // alpha (DG nodes)
    std::map<std::string, double> p_flow, q_flow;                 // per line
    std::map<std::string, double> u_sq;                           // per node
    std::map<std::string, double> p_gen, q_gen;                   // per node
    std::map<std::string, double> p_shed, q_shed;                 // per node
};

struct RestorationResult {
    double stage0_loss = 0.0;
    double stage1_loss = 0.0;
    double stage2_loss = 0.0;
    double resilience = 1.0;
    std::pair<StageSolution, StageSolution> stage_solutions;
    bool stage0_per_feeder = false;  // which Eq.-(16) scope produced stage0_loss
};

struct RestorationOptions {
    bool stage0_per_feeder = false;  // restrict the stage-0 blackout to faulted feeders
    double tie_break_eps = 1e-9;     // penalty steering ties toward sparse forests
};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

inline double total_weighted_load(const Network& net) {
    double w = 0.0;
    for (const auto& n : net.nodes) w += n.weight * n.p_load;
    return w;
}

inline double resilience_of(double stage0_loss, double stage1_loss,
                            double stage2_loss, const TimeParams& t,
                            double total_weighted_load_mw) {
    if (!(total_weighted_load_mw > 0.0))
        throw ValidationError("resilience undefined: total weighted load must be positive");
    const double horizon = t.t_r3 - t.t_fault;
    const double lost = (t.t_r1 - t.t_fault) * stage0_loss +
                        (t.t_r2 - t.t_r1) * stage1_loss +
                        (t.t_r3 - t.t_r2) * stage2_loss;
    return 1.0 - lost / (horizon * total_weighted_load_mw);
}

inline double big_m_for(const Network& net) {
    double u_max = -kInf, u_min = kInf, rx_max = 0.0, s_total = 0.0;
    for (const auto& n : net.nodes) {
        u_max = std::max(u_max, n.u_max);
        u_min = std::min(u_min, n.u_min);
    }
    for (const auto& l : net.lines) {
        rx_max = std::max(rx_max, l.r + l.x);
        s_total += l.s_max;
    }
    return std::max(static_cast<double>(net.nodes.size()),
                    (u_max - u_min) + 2.0 * rx_max * s_total);
}

namespace detail_restore {

inline std::string ident(const std::string& raw) {
    std::string out = raw;
    for (auto& ch : out)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') ch = '_';
    return out;
}

// Fault seeds per Eq. (11a): the tail node of a faulted line is always in
// the fault area; the head node joins only while the line is closed.
struct FaultIncidence {
    std::vector<int> faulted_in;  // per node: # faulted lines ending at it
    std::vector<std::vector<std::size_t>> faulted_out;  // per node: faulted lines led by it
};

inline FaultIncidence fault_incidence(const Network& net,
                                      const OutcomeScenario& sc) {
    FaultIncidence fi;
    fi.faulted_in.assign(net.nodes.size(), 0);
    fi.faulted_out.assign(net.nodes.size(), {});
    for (const auto& id : sc.faulted_lines) {
        const std::size_t li = net.line_index(id);
        const auto& line = net.lines[li];
        fi.faulted_in[net.node_index(line.to)] += 1;
        fi.faulted_out[net.node_index(line.from)].push_back(li);
    }
    return fi;
}

}  // namespace detail_restore

// ---------------------------------------------------------------------------
// Stage MILP builder
// ---------------------------------------------------------------------------

struct StageModel {
    Milp milp;
    int stage = 1;
    const Network* net = nullptr;
    std::string scenario;
    double big_m = 0.0;
    // Column indices, in network order.
    std::vector<int> c, xf, xr, p, q;                  // per line
    std::vector<int> lam, alpha, u, pg, qg, ps, qs;    // per node (alpha -1 if none)
    std::vector<int> dep;                              // per node: depth potential
};

namespace detail_restore {

inline StageModel build_stage_model(const Network& net,
                                    const OutcomeScenario& sc, int stage,
                                    double tie_break_eps) {
    validate(net);
    validate_scenario(net, sc);
    const size_t nn = net.nodes.size(), nl = net.lines.size();
    const double m_big = big_m_for(net);
    const double oct = std::sqrt(2.0) - 1.0;

    StageModel sm;
    sm.stage = stage;
    sm.net = &net;
    sm.scenario = scenario_key(sc);
    sm.big_m = m_big;
    sm.milp.name = "stage" + std::to_string(stage) + " " + sm.scenario;
    Milp& m = sm.milp;

    sm.c.resize(nl);
    sm.xf.resize(nl);
    sm.xr.resize(nl);
    sm.p.resize(nl);
    sm.q.resize(nl);
    for (size_t li = 0; li < nl; ++li) {
        const auto& l = net.lines[li];
        const std::string s = ident(l.id);
        sm.c[li] = m.add_binary("c_" + s, tie_break_eps);
        sm.xf[li] = m.add_binary("xf_" + s);
        sm.xr[li] = m.add_binary("xr_" + s);
        sm.p[li] = m.add_col("P_" + s, -l.s_max, l.s_max, 0.0);
        sm.q[li] = m.add_col("Q_" + s, -l.s_max, l.s_max, 0.0);
    }
    sm.lam.resize(nn);
    sm.alpha.assign(nn, -1);
    sm.u.resize(nn);
    sm.pg.resize(nn);
    sm.qg.resize(nn);
    sm.ps.resize(nn);
    sm.qs.resize(nn);
    sm.dep.resize(nn);
    for (size_t ni = 0; ni < nn; ++ni) {
        const auto& n = net.nodes[ni];
        const std::string s = ident(n.id);
        sm.lam[ni] = m.add_binary("lam_" + s, tie_break_eps);
        if (n.is_dg) sm.alpha[ni] = m.add_binary("al_" + s);
        sm.u[ni] = m.add_col("U_" + s, n.u_min, n.u_max, 0.0);
        sm.pg[ni] = m.add_col("Pg_" + s, 0.0, n.pg_max, 0.0);
        sm.qg[ni] = m.add_col("Qg_" + s, 0.0, n.qg_max, 0.0);
        sm.ps[ni] = m.add_col("Ps_" + s, std::min(0.0, n.p_load),
                              std::max(0.0, n.p_load), n.weight);
        sm.qs[ni] = m.add_col("Qs_" + s, std::min(0.0, n.q_load),
                              std::max(0.0, n.q_load), 0.0);
        sm.dep[ni] = m.add_col("dep_" + s, 0.0, static_cast<double>(nn), 0.0);
    }

    const auto adj = adjacency(net);
    const auto fi = fault_incidence(net, sc);

    for (size_t ni = 0; ni < nn; ++ni) {
        const auto& n = net.nodes[ni];
        const std::string s = ident(n.id);

        // (10a)/(10b): virtual in-flow accounting with fault-area relaxation.
        std::vector<std::pair<int, double>> inflow;
        for (const auto& inc : adj.incident[ni]) {
            const auto& l = net.lines[inc.line];
            const bool into = net.node_index(l.to) == ni;
            inflow.emplace_back(into ? sm.xf[inc.line] : sm.xr[inc.line], 1.0);
        }
        // Unconditional in-degree cap. Together with the depth rows below it
        // closes the gap the fault-area relaxation leaves in (10a)/(10b):
        // every closed line carries exactly one unit of orientation, so a
        // closed cycle would hand its k nodes k units of in-flow, forcing a
        // directed ring, which the depth rows make infeasible. Trees stay
        // feasible by orienting away from any root with increasing depth.
        if (!inflow.empty()) m.add_row("indeg_" + s, -kInf, 1.0, inflow);
        if (n.is_dg) inflow.emplace_back(sm.alpha[ni], 1.0);
        const double rhs = 1.0 - (n.is_substation ? 1.0 : 0.0);
        auto rad_ub = inflow;
        rad_ub.emplace_back(sm.lam[ni], -m_big);
        m.add_row("rad_ub_" + s, -kInf, rhs, std::move(rad_ub));
        auto rad_lb = inflow;
        rad_lb.emplace_back(sm.lam[ni], m_big);
        m.add_row("rad_lb_" + s, rhs, kInf, std::move(rad_lb));

        // (11a): faults force the fault-area flag.
        if (fi.faulted_in[ni] > 0 || !fi.faulted_out[ni].empty()) {
            std::vector<std::pair<int, double>> row{{sm.lam[ni], m_big}};
            for (std::size_t li : fi.faulted_out[ni]) row.emplace_back(sm.c[li], -1.0);
            m.add_row("fault_" + s, static_cast<double>(fi.faulted_in[ni]), kInf,
                      std::move(row));
        }

        // (13a)/(13b): nodal power balance.
        std::vector<std::pair<int, double>> bal_p, bal_q;
        for (const auto& inc : adj.incident[ni]) {
            const auto& l = net.lines[inc.line];
            const bool outgoing = net.node_index(l.from) == ni;
            bal_p.emplace_back(sm.p[inc.line], outgoing ? 1.0 : -1.0);
            bal_q.emplace_back(sm.q[inc.line], outgoing ? 1.0 : -1.0);
        }
        bal_p.emplace_back(sm.pg[ni], -1.0);
        bal_p.emplace_back(sm.ps[ni], -1.0);
        bal_q.emplace_back(sm.qg[ni], -1.0);
        bal_q.emplace_back(sm.qs[ni], -1.0);
        m.add_row("balP_" + s, -n.p_load, -n.p_load, std::move(bal_p));
        m.add_row("balQ_" + s, -n.q_load, -n.q_load, std::move(bal_q));

        // (13h)/(13i): fault-area nodes shed fully; signs follow the load.
        if (n.p_load >= 0.0)
            m.add_row("shedP_" + s, 0.0, kInf, {{sm.ps[ni], 1.0}, {sm.lam[ni], -n.p_load}});
        else
            m.add_row("shedP_" + s, -kInf, 0.0, {{sm.ps[ni], 1.0}, {sm.lam[ni], -n.p_load}});
        if (n.q_load >= 0.0)
            m.add_row("shedQ_" + s, 0.0, kInf, {{sm.qs[ni], 1.0}, {sm.lam[ni], -n.q_load}});
        else
            m.add_row("shedQ_" + s, -kInf, 0.0, {{sm.qs[ni], 1.0}, {sm.lam[ni], -n.q_load}});
    }

    for (size_t li = 0; li < nl; ++li) {
        const auto& l = net.lines[li];
        const std::string s = ident(l.id);
        const size_t a = net.node_index(l.from);
        const size_t b = net.node_index(l.to);

        // (10c): exactly one virtual-flow direction on a closed line.
        m.add_row("dir_" + s, 0.0, 0.0,
                  {{sm.xf[li], 1.0}, {sm.xr[li], 1.0}, {sm.c[li], -1.0}});

        // Depth potentials strictly increase along the chosen orientation,
        // so directed rings cannot close (see the in-degree cap above).
        const double nnd = static_cast<double>(nn);
        m.add_row("depf_" + s, 1.0 - nnd, kInf,
                  {{sm.dep[b], 1.0}, {sm.dep[a], -1.0}, {sm.xf[li], -nnd}});
        m.add_row("depr_" + s, 1.0 - nnd, kInf,
                  {{sm.dep[a], 1.0}, {sm.dep[b], -1.0}, {sm.xr[li], -nnd}});

        // (11b): the fault area spreads across closed lines.
        m.add_row("spreadA_" + s, -kInf, 1.0,
                  {{sm.lam[a], 1.0}, {sm.lam[b], -1.0}, {sm.c[li], 1.0}});
        m.add_row("spreadB_" + s, -kInf, 1.0,
                  {{sm.lam[b], 1.0}, {sm.lam[a], -1.0}, {sm.c[li], 1.0}});

        // (13c)/(13d): LinDistFlow voltage drop, active only when closed.
        m.add_row("voltU_" + s, -kInf, m_big,
                  {{sm.u[a], 1.0},
                   {sm.u[b], -1.0},
                   {sm.p[li], -2.0 * l.r},
                   {sm.q[li], -2.0 * l.x},
                   {sm.c[li], m_big}});
        m.add_row("voltL_" + s, -m_big, kInf,
                  {{sm.u[a], 1.0},
                   {sm.u[b], -1.0},
                   {sm.p[li], -2.0 * l.r},
                   {sm.q[li], -2.0 * l.x},
                   {sm.c[li], -m_big}});

        // (13j)-(13m): octagonal capacity, zero flow when open.
        auto octagon = [&](const char* tag, double cp, double cq) {
            m.add_row(std::string("cap") + tag + "U_" + s, -kInf, 0.0,
                      {{sm.p[li], cp}, {sm.q[li], cq}, {sm.c[li], -l.s_max}});
            m.add_row(std::string("cap") + tag + "L_" + s, 0.0, kInf,
                      {{sm.p[li], cp}, {sm.q[li], cq}, {sm.c[li], l.s_max}});
        };
        octagon("J", oct, 1.0);
        octagon("K", oct, -1.0);
        octagon("L", 1.0, oct);
        octagon("M", 1.0, -oct);

        // (12a)/(12b): hijacked RCSs hold their base state in stage 1.
        if (stage == 1 && sc.hijacked_rcs.count(l.rcs_id) > 0)
            sm.milp.fix_col(sm.c[li], l.base_closed ? 1.0 : 0.0);
    }
    return sm;
}

}  // namespace detail_restore

inline StageModel build_stage1_model(const Network& net, const OutcomeScenario& sc,
                                     const RestorationOptions& ropts = {}) {
    return detail_restore::build_stage_model(net, sc, 1, ropts.tie_break_eps);
}

inline StageModel build_stage2_model(const Network& net, const OutcomeScenario& sc,
                                     const RestorationOptions& ropts = {}) {
    return detail_restore::build_stage_model(net, sc, 2, ropts.tie_break_eps);
}

// ---------------------------------------------------------------------------
// Stage solve + extraction
// ---------------------------------------------------------------------------

inline StageSolution solve_stage(const StageModel& sm, const SolveOptions& opts = {}) {
    MilpSolution sol;
    try {
        sol = solve_milp(sm.milp, opts);
    } catch (const SolveError& e) {
        throw SolveError("stage " + std::to_string(sm.stage) + " of scenario {" +
                         sm.scenario + "}: " + e.what());
    }
    const Network& net = *sm.net;
    auto bin = [&](int col) { return sol.value(col) > 0.5 ? 1 : 0; };

    StageSolution out;
    std::vector<bool> closed(net.lines.size());
    for (size_t li = 0; li < net.lines.size(); ++li) {
        const auto& l = net.lines[li];
        closed[li] = bin(sm.c[li]) != 0;
        out.closed[l.id] = bin(sm.c[li]);
        out.vflow[{l.from, l.to}] = bin(sm.xf[li]);
        out.vflow[{l.to, l.from}] = bin(sm.xr[li]);
        out.p_flow[l.id] = sol.value(sm.p[li]);
        out.q_flow[l.id] = sol.value(sm.q[li]);
    }
    for (size_t ni = 0; ni < net.nodes.size(); ++ni) {
        const auto& n = net.nodes[ni];
        out.fault_area[n.id] = bin(sm.lam[ni]);
        if (n.is_dg) out.dg_root[n.id] = bin(sm.alpha[ni]);
        out.u_sq[n.id] = sol.value(sm.u[ni]);
        out.p_gen[n.id] = sol.value(sm.pg[ni]);
        out.q_gen[n.id] = sol.value(sm.qg[ni]);
        out.p_shed[n.id] = sol.value(sm.ps[ni]);
        out.q_shed[n.id] = sol.value(sm.qs[ni]);
    }
    if (!is_forest(net, closed))
        throw SolveError("stage " + std::to_string(sm.stage) + " of scenario {" +
                         sm.scenario + "} returned a non-forest switch state");
    return out;
}

inline double weighted_shed(const Network& net, const StageSolution& s) {
    double w = 0.0;
    for (const auto& n : net.nodes) {
        const double shed = s.p_shed.at(n.id);
        w += n.weight * shed;
    }
    return std::max(0.0, w);
}

// ---------------------------------------------------------------------------
// Stage-0 loss (blackout at fault time)
// ---------------------------------------------------------------------------

inline double stage0_loss_for(const Network& net, const OutcomeScenario& sc,
                              bool per_feeder) {
    if (sc.faulted_lines.empty()) return 0.0;
    if (!per_feeder) return total_weighted_load(net);
    std::vector<std::size_t> component_of;
    substations_per_component(net, base_closed_states(net), &component_of);
    std::set<std::size_t> hit;
    for (const auto& id : sc.faulted_lines) {
        const auto& l = net.lines[net.line_index(id)];
        hit.insert(component_of[net.node_index(l.from)]);
        hit.insert(component_of[net.node_index(l.to)]);
    }
    double w = 0.0;
    for (size_t ni = 0; ni < net.nodes.size(); ++ni)
        if (hit.count(component_of[ni]) > 0)
            w += net.nodes[ni].weight * net.nodes[ni].p_load;
    return w;
}

// ---------------------------------------------------------------------------
// Optimal restoration (MILP route)
// ---------------------------------------------------------------------------

inline RestorationResult optimal_restoration(const Network& net,
                                             const OutcomeScenario& sc,
                                             const SolveOptions& sopts = {},
                                             const RestorationOptions& ropts = {}) {
    RestorationResult res;
    res.stage0_per_feeder = ropts.stage0_per_feeder;
    res.stage0_loss = stage0_loss_for(net, sc, ropts.stage0_per_feeder);
    const auto m1 = build_stage1_model(net, sc, ropts);
    const auto m2 = build_stage2_model(net, sc, ropts);
    res.stage_solutions.first = solve_stage(m1, sopts);
    res.stage_solutions.second = solve_stage(m2, sopts);
    res.stage1_loss = weighted_shed(net, res.stage_solutions.first);
    res.stage2_loss = weighted_shed(net, res.stage_solutions.second);
    res.resilience = resilience_of(res.stage0_loss, res.stage1_loss, res.stage2_loss,
                                   net.times, total_weighted_load(net));
    return res;
}

class RestorationEngine {
  public:
    explicit RestorationEngine(const Network& net, SolveOptions sopts = {},
                               RestorationOptions ropts = {})
        : net_(&net), sopts_(sopts), ropts_(ropts) {}

    RestorationResult optimal_restoration(const OutcomeScenario& sc) {
        const std::string key = scenario_key(sc);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) {
                ++hits_;
                return it->second;
            }
        }
        RestorationResult res = cpds::optimal_restoration(*net_, sc, sopts_, ropts_);
        std::lock_guard<std::mutex> lock(mu_);
        cache_.emplace(key, res);
        return res;
    }

    const Network& network() const { return *net_; }
    const RestorationOptions& options() const { return ropts_; }
    size_t cache_size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return cache_.size();
    }
    size_t cache_hits() const {
        std::lock_guard<std::mutex> lock(mu_);
        return hits_;
    }

  private:
    const Network* net_;
    SolveOptions sopts_;
    RestorationOptions ropts_;
    mutable std::mutex mu_;
    std::map<std::string, RestorationResult> cache_;
    size_t hits_ = 0;
};

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

namespace detail_restore {

// Fault-area flags for a fixed switch configuration, by fixed-point
// propagation of (11a)/(11b): seed the tail of every faulted line and the
// head of every closed faulted line, then spread over closed lines. A
// component that cannot host exactly one virtual-flow root is forced into
// the fault area as well (full shedding is its only feasible state).
struct ConfigAreas {
    std::vector<std::size_t> component_of;  // per node
    std::vector<char> lambda;               // per node
    std::vector<int> root_dg;  // per component: node idx of chosen DG root, else -1
};

inline ConfigAreas derive_areas(const Network& net, const OutcomeScenario& sc,
                                const std::vector<bool>& closed) {
    ConfigAreas ca;
    const size_t nn = net.nodes.size();
    detail::UnionFind uf(nn);
    for (size_t li = 0; li < net.lines.size(); ++li) {
        if (!closed[li]) continue;
        const auto& l = net.lines[li];
        uf.unite(net.node_index(l.from), net.node_index(l.to));
    }
    ca.component_of.assign(nn, 0);
    std::map<size_t, size_t> comp_id;
    for (size_t ni = 0; ni < nn; ++ni) {
        auto [it, inserted] = comp_id.emplace(uf.find(ni), comp_id.size());
        ca.component_of[ni] = it->second;
    }
    const size_t nc = comp_id.size();

    std::vector<char> seeded(nc, 0);
    for (const auto& id : sc.faulted_lines) {
        const size_t li = net.line_index(id);
        const auto& l = net.lines[li];
        seeded[ca.component_of[net.node_index(l.to)]] = 1;
        if (closed[li]) seeded[ca.component_of[net.node_index(l.from)]] = 1;
    }

    std::vector<int> subs(nc, 0);
    std::vector<int> first_dg(nc, -1);
    for (size_t ni = 0; ni < nn; ++ni) {
        const size_t c = ca.component_of[ni];
        if (net.nodes[ni].is_substation) subs[c] += 1;
        if (net.nodes[ni].is_dg && first_dg[c] < 0) first_dg[c] = static_cast<int>(ni);
    }

    ca.lambda.assign(nn, 0);
    ca.root_dg.assign(nc, -1);
    std::vector<char> comp_lambda(nc, 0);
    for (size_t c = 0; c < nc; ++c) {
        if (seeded[c]) {
            comp_lambda[c] = 1;
        } else if (subs[c] == 1) {
            comp_lambda[c] = 0;  // substation-rooted
        } else if (subs[c] == 0 && first_dg[c] >= 0) {
            comp_lambda[c] = 0;
            ca.root_dg[c] = first_dg[c];  // islanded, one DG takes the root
        } else {
            comp_lambda[c] = 1;  // rootless or multi-substation: full shed
        }
    }
    for (size_t ni = 0; ni < nn; ++ni)
        ca.lambda[ni] = comp_lambda[ca.component_of[ni]];
    return ca;
}

// LinDistFlow load-shed LP for one fixed configuration; open lines are
// excluded entirely, fault-area flags are constants.
struct ConfigLp {
    double objective = 0.0;
    std::vector<double> p_flow, q_flow;  // per line (0 when open)
    std::vector<double> u_sq, p_gen, q_gen, p_shed, q_shed;  // per node
};

inline ConfigLp solve_config_lp(const Network& net, const std::vector<bool>& closed,
                                const std::vector<char>& lambda) {
    const double oct = std::sqrt(2.0) - 1.0;
    Milp m;
    m.name = "config-lp";
    const size_t nn = net.nodes.size(), nl = net.lines.size();
    std::vector<int> p(nl, -1), q(nl, -1);
    for (size_t li = 0; li < nl; ++li) {
        if (!closed[li]) continue;
        const auto& l = net.lines[li];
        p[li] = m.add_col("P" + std::to_string(li), -l.s_max, l.s_max, 0.0);
        q[li] = m.add_col("Q" + std::to_string(li), -l.s_max, l.s_max, 0.0);
    }
    std::vector<int> u(nn), pg(nn), qg(nn), ps(nn), qs(nn);
    for (size_t ni = 0; ni < nn; ++ni) {
        const auto& n = net.nodes[ni];
        u[ni] = m.add_col("U" + std::to_string(ni), n.u_min, n.u_max, 0.0);
        pg[ni] = m.add_col("Pg" + std::to_string(ni), 0.0, n.pg_max, 0.0);
        qg[ni] = m.add_col("Qg" + std::to_string(ni), 0.0, n.qg_max, 0.0);
        const double lp = lambda[ni] ? n.p_load : 0.0;
        ps[ni] = m.add_col("Ps" + std::to_string(ni), std::min(lp, n.p_load),
                           std::max(lp, n.p_load), n.weight);
        const double lq = lambda[ni] ? n.q_load : 0.0;
        qs[ni] = m.add_col("Qs" + std::to_string(ni), std::min(lq, n.q_load),
                           std::max(lq, n.q_load), 0.0);
    }
    const auto adj = adjacency(net);
    for (size_t ni = 0; ni < nn; ++ni) {
        const auto& n = net.nodes[ni];
        std::vector<std::pair<int, double>> bal_p{{pg[ni], -1.0}, {ps[ni], -1.0}};
        std::vector<std::pair<int, double>> bal_q{{qg[ni], -1.0}, {qs[ni], -1.0}};
        for (const auto& inc : adj.incident[ni]) {
            if (!closed[static_cast<size_t>(inc.line)]) continue;
            const auto& l = net.lines[static_cast<size_t>(inc.line)];
            const bool outgoing = net.node_index(l.from) == static_cast<int>(ni);
            bal_p.emplace_back(p[static_cast<size_t>(inc.line)], outgoing ? 1.0 : -1.0);
            bal_q.emplace_back(q[static_cast<size_t>(inc.line)], outgoing ? 1.0 : -1.0);
        }
        m.add_row("balP" + std::to_string(ni), -n.p_load, -n.p_load, std::move(bal_p));
        m.add_row("balQ" + std::to_string(ni), -n.q_load, -n.q_load, std::move(bal_q));
    }
    for (size_t li = 0; li < nl; ++li) {
        if (!closed[li]) continue;
        const auto& l = net.lines[li];
        const size_t a = static_cast<size_t>(net.node_index(l.from));
        const size_t b = static_cast<size_t>(net.node_index(l.to));
        m.add_row("volt" + std::to_string(li), 0.0, 0.0,
                  {{u[a], 1.0}, {u[b], -1.0}, {p[li], -2.0 * l.r}, {q[li], -2.0 * l.x}});
        m.add_row("capJ" + std::to_string(li), -l.s_max, l.s_max,
                  {{p[li], oct}, {q[li], 1.0}});
        m.add_row("capK" + std::to_string(li), -l.s_max, l.s_max,
                  {{p[li], oct}, {q[li], -1.0}});
        m.add_row("capL" + std::to_string(li), -l.s_max, l.s_max,
                  {{p[li], 1.0}, {q[li], oct}});
        m.add_row("capM" + std::to_string(li), -l.s_max, l.s_max,
                  {{p[li], 1.0}, {q[li], -oct}});
    }
    const MilpSolution sol = solve_lp_reference(m);
    ConfigLp out;
    out.objective = sol.objective;
    out.p_flow.assign(nl, 0.0);
    out.q_flow.assign(nl, 0.0);
    for (size_t li = 0; li < nl; ++li) {
        if (!closed[li]) continue;
        out.p_flow[li] = sol.value(p[li]);
        out.q_flow[li] = sol.value(q[li]);
    }
    out.u_sq.resize(nn);
    out.p_gen.resize(nn);
    out.q_gen.resize(nn);
    out.p_shed.resize(nn);
    out.q_shed.resize(nn);
    for (size_t ni = 0; ni < nn; ++ni) {
        out.u_sq[ni] = sol.value(u[ni]);
        out.p_gen[ni] = sol.value(pg[ni]);
        out.q_gen[ni] = sol.value(qg[ni]);
        out.p_shed[ni] = sol.value(ps[ni]);
        out.q_shed[ni] = sol.value(qs[ni]);
    }
    return out;
}

// Orients each component's closed lines away from its root (substation,
// chosen DG, or the lowest-index node in a fault-area component) to produce
// the virtual-flow flags of the returned solution.
inline void fill_vflow(const Network& net, const std::vector<bool>& closed,
                       const ConfigAreas& ca, StageSolution* out) {
    const size_t nn = net.nodes.size();
    const auto adj = adjacency(net);
    std::vector<int> root_of_comp(ca.root_dg.size(), -1);
    for (size_t ni = 0; ni < nn; ++ni) {
        const size_t c = static_cast<size_t>(ca.component_of[ni]);
        if (net.nodes[ni].is_substation && root_of_comp[c] < 0)
            root_of_comp[c] = static_cast<int>(ni);
    }
    for (size_t c = 0; c < ca.root_dg.size(); ++c)
        if (root_of_comp[c] < 0 && ca.root_dg[c] >= 0) root_of_comp[c] = ca.root_dg[c];
    for (size_t ni = 0; ni < nn; ++ni) {
        const size_t c = static_cast<size_t>(ca.component_of[ni]);
        if (root_of_comp[c] < 0) root_of_comp[c] = static_cast<int>(ni);
    }

    for (const auto& l : net.lines) {
        out->vflow[{l.from, l.to}] = 0;
        out->vflow[{l.to, l.from}] = 0;
    }
    std::vector<char> seen(nn, 0);
    for (size_t c = 0; c < root_of_comp.size(); ++c) {
        const int root = root_of_comp[c];
        if (root < 0 || seen[static_cast<size_t>(root)]) continue;
        std::vector<int> stack{root};
        seen[static_cast<size_t>(root)] = 1;
        while (!stack.empty()) {
            const int at = stack.back();
            stack.pop_back();
            for (const auto& inc : adj.incident[static_cast<size_t>(at)]) {
                if (!closed[inc.line] || seen[inc.other]) continue;
                seen[inc.other] = 1;
                out->vflow[{net.nodes[static_cast<size_t>(at)].id,
                            net.nodes[inc.other].id}] = 1;
                stack.push_back(static_cast<int>(inc.other));
            }
        }
    }
}

inline StageSolution oracle_stage(const Network& net, const OutcomeScenario& sc,
                                  int stage, double* best_loss_out) {
    const size_t nl = net.lines.size();
    if (nl > 15)
        throw ValidationError("brute-force restoration supports at most 15 switchable lines, got " +
                              std::to_string(nl));

    double best = kInf;
    std::vector<bool> best_closed;
    ConfigAreas best_areas;
    ConfigLp best_lp;

    for (unsigned long mask = 0; mask < (1UL << nl); ++mask) {
        std::vector<bool> closed(nl);
        bool ok = true;
        for (size_t li = 0; li < nl; ++li) {
            closed[li] = (mask >> li) & 1UL;
            if (stage == 1 && sc.hijacked_rcs.count(net.lines[li].rcs_id) > 0 &&
                closed[li] != net.lines[li].base_closed)
                ok = false;
        }
        if (!ok || !is_forest(net, closed)) continue;
        const auto areas = derive_areas(net, sc, closed);
        const auto lp = solve_config_lp(net, closed, areas.lambda);
        if (lp.objective < best - 1e-12) {
            best = lp.objective;
            best_closed = closed;
            best_areas = areas;
            best_lp = lp;
        }
    }
    if (!(best < kInf))
        throw SolveError("brute-force stage " + std::to_string(stage) +
                         " found no feasible configuration for scenario {" +
                         scenario_key(sc) + "}");

    StageSolution out;
    for (size_t li = 0; li < nl; ++li) {
        const auto& l = net.lines[li];
        out.closed[l.id] = best_closed[li] ? 1 : 0;
        out.p_flow[l.id] = best_lp.p_flow[li];
        out.q_flow[l.id] = best_lp.q_flow[li];
    }
    for (size_t ni = 0; ni < net.nodes.size(); ++ni) {
        const auto& n = net.nodes[ni];
        out.fault_area[n.id] = best_areas.lambda[ni];
        if (n.is_dg)
            out.dg_root[n.id] =
                best_areas.root_dg[static_cast<size_t>(best_areas.component_of[ni])] ==
                        static_cast<int>(ni)
                    ? 1
                    : 0;
        out.u_sq[n.id] = best_lp.u_sq[ni];
        out.p_gen[n.id] = best_lp.p_gen[ni];
        out.q_gen[n.id] = best_lp.q_gen[ni];
        out.p_shed[n.id] = best_lp.p_shed[ni];
        out.q_shed[n.id] = best_lp.q_shed[ni];
    }
    fill_vflow(net, best_closed, best_areas, &out);
    *best_loss_out = std::max(0.0, best);
    return out;
}

}  // namespace detail_restore

inline RestorationResult brute_force_restoration(const Network& net,
                                                 const OutcomeScenario& sc,
                                                 const RestorationOptions& ropts = {}) {
    validate(net);
    validate_scenario(net, sc);
    RestorationResult res;
    res.stage0_per_feeder = ropts.stage0_per_feeder;
    res.stage0_loss = stage0_loss_for(net, sc, ropts.stage0_per_feeder);
    res.stage_solutions.first =
        detail_restore::oracle_stage(net, sc, 1, &res.stage1_loss);
    res.stage_solutions.second =
        detail_restore::oracle_stage(net, sc, 2, &res.stage2_loss);
    res.resilience = resilience_of(res.stage0_loss, res.stage1_loss, res.stage2_loss,
                                   net.times, total_weighted_load(net));
    return res;
}

}  // namespace cpds
