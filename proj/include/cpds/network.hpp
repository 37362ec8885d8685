#pragma once

// Static cyber-physical network data model: nodes, lines (with their
// remote-controlled switches), legitimate base stations, radio and time
// parameters, and the FBS deployment region. Loaded from a single JSON case
// file; immutable after validation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpds/common.hpp"

namespace cpds {

struct Node {
    std::string id;
    bool is_substation = false;  // g_j
    bool is_dg = false;          // dg_j
    double p_load = 0.0;         // MW
    double q_load = 0.0;         // MVAr (may be negative, e.g. capacitive loads)
    double weight = 1.0;         // load priority, dimensionless
    double u_min = 0.81;         // squared voltage, p.u. (0.9^2)
    double u_max = 1.21;         // squared voltage, p.u. (1.1^2)
    double pg_max = 0.0;         // MW, generation capability (substation/DG only)
    double qg_max = 0.0;         // MVAr
    Vec2 position;               // meters
};

enum class SwitchClass {
    sectionalizing,  // normally closed
    tie,             // normally open
};

struct Line {
    std::string id;
    std::string from;
    std::string to;
    double length = 1.0;  // km
    double r = 0.0;       // p.u.
    double x = 0.0;       // p.u.
    double s_max = 1.0;   // MVA
    SwitchClass switch_class = SwitchClass::sectionalizing;
    std::string rcs_id;       // the remote-controlled switch guarding this line
    bool base_closed = true;  // pre-event switch state
    // RCS physical location; defaults to the line midpoint when absent.
    std::optional<Vec2> rcs_position;
};

struct BaseStation {
    std::string id;
    Vec2 position;       // meters
    double sigma = 4.0;  // dB, shadowing standard deviation
    // Reference strength of this (legitimate) transmitter at d0, dB. Filled
    // from radio.s_ref at load time when the case file omits it, so that
    // later changes to radio.s_ref move only the FBS.
    std::optional<double> s_ref;
};

struct RadioParams {
    // Reference strength S(d_0) of the FBS transmitter, dB. This is the
    // attacker-side power knob: sweeps and the --s-ref override vary it while
    // every legitimate base station keeps its own frozen s_ref.
    double s_ref = 100.0;
    double d0 = 10.0;           // meters
    double path_loss_exp = 3.0;
    double fbs_sigma = 4.0;     // dB, FBS shadowing standard deviation
    double d_min = 1.0;         // meters, distance clamp floor (avoids log 0)
};

struct TimeParams {
    double t_fault = 0.0;  // minutes
    double t_r1 = 1.0;
    double t_r2 = 31.0;
    double t_r3 = 61.0;
};

struct Region {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;
};

// Default game budgets and inspection/protection parameters embedded in a
// case file (all overridable from the CLI).
struct GameDefaults {
    int n_defend_cyber = 0;   // RCSs that can be protected
    int n_defend_phys = 0;    // lines that can be hardened
    int n_attack_phys = 0;    // lines the attacker can strike
    double zeta_a = 1.0;      // km, normal inspection intensity
    double zeta_b = 5.0;      // km, enhanced inspection intensity (> zeta_a)
    double p_defend = 0.9;    // protection effectiveness against FBS hijack
};

struct Network {
    std::string name;
    std::vector<Node> nodes;
    std::vector<Line> lines;
    std::vector<BaseStation> base_stations;
    RadioParams radio;
    TimeParams times;
    Region region;
    double grid_step = 0.0;  // meters
    GameDefaults defaults;
    // Optional override block for the polynomial fit coefficients (kept as
    // raw JSON here; the signal layer interprets it). Null when absent.
    nlohmann::json poly_coeffs;

    std::size_t node_index(const std::string& id) const {
        auto it = node_idx_.find(id);
        if (it == node_idx_.end()) throw ValidationError("unknown node id: " + id);
        return it->second;
    }
    std::size_t line_index(const std::string& id) const {
        auto it = line_idx_.find(id);
        if (it == line_idx_.end()) throw ValidationError("unknown line id: " + id);
        return it->second;
    }
    // Line guarded by the given remote-controlled switch.
    std::size_t line_of_rcs(const std::string& rcs_id) const {
        auto it = rcs_idx_.find(rcs_id);
        if (it == rcs_idx_.end()) throw ValidationError("unknown rcs id: " + rcs_id);
        return it->second;
    }

    // RCS location for a line: explicit override or the line midpoint.
    Vec2 rcs_position(std::size_t line) const {
        const Line& l = lines[line];
        if (l.rcs_position) return *l.rcs_position;
        const Vec2& a = nodes[node_idx_.at(l.from)].position;
        const Vec2& b = nodes[node_idx_.at(l.to)].position;
        return Vec2{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    }

    void rebuild_indices() {
        node_idx_.clear();
        line_idx_.clear();
        rcs_idx_.clear();
        for (std::size_t i = 0; i < nodes.size(); ++i) node_idx_[nodes[i].id] = i;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            line_idx_[lines[i].id] = i;
            rcs_idx_[lines[i].rcs_id] = i;
        }
    }

  private:
    std::unordered_map<std::string, std::size_t> node_idx_;
    std::unordered_map<std::string, std::size_t> line_idx_;
    std::unordered_map<std::string, std::size_t> rcs_idx_;
};

// ---------------------------------------------------------------------------
// Adjacency

struct IncidentLine {
    std::size_t line;   // index into Network::lines
    std::size_t other;  // index of the opposite endpoint node
};

struct Adjacency {
    // incident[n] lists every line touching node n together with the far end.
    std::vector<std::vector<IncidentLine>> incident;
};

inline Adjacency adjacency(const Network& net) {
    Adjacency adj;
    adj.incident.resize(net.nodes.size());
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        const Line& l = net.lines[li];
        std::size_t a = net.node_index(l.from);
        std::size_t b = net.node_index(l.to);
        adj.incident[a].push_back({li, b});
        adj.incident[b].push_back({li, a});
    }
    return adj;
}

// ---------------------------------------------------------------------------
// Radiality check (union-find)

namespace detail {

class UnionFind {
  public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    // Returns false if a and b were already connected (i.e. the edge closes a cycle).
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[a] = b;
        return true;
    }

  private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

// True iff the subgraph consisting of the lines flagged in `closed` is a
// forest (no cycles). `closed` is indexed like Network::lines.
inline bool is_forest(const Network& net, const std::vector<bool>& closed) {
    detail::UnionFind uf(net.nodes.size());
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        if (!closed[li]) continue;
        const Line& l = net.lines[li];
        if (!uf.unite(net.node_index(l.from), net.node_index(l.to))) return false;
    }
    return true;
}

// Number of substations in each connected component under `closed`, keyed by
// component representative of each node. Used by validation and tests.
inline std::vector<int> substations_per_component(const Network& net,
                                                  const std::vector<bool>& closed,
                                                  std::vector<std::size_t>* component_of = nullptr) {
    detail::UnionFind uf(net.nodes.size());
    for (std::size_t li = 0; li < net.lines.size(); ++li) {
        if (!closed[li]) continue;
        const Line& l = net.lines[li];
        uf.unite(net.node_index(l.from), net.node_index(l.to));
    }
    std::vector<std::size_t> rep(net.nodes.size());
    std::unordered_map<std::size_t, std::size_t> comp_id;
    std::vector<int> counts;
    for (std::size_t n = 0; n < net.nodes.size(); ++n) {
        std::size_t r = uf.find(n);
        auto [it, fresh] = comp_id.try_emplace(r, counts.size());
        if (fresh) counts.push_back(0);
        rep[n] = it->second;
        if (net.nodes[n].is_substation) ++counts[it->second];
    }
    if (component_of) *component_of = std::move(rep);
    return counts;
}

inline std::vector<bool> base_closed_states(const Network& net) {
    std::vector<bool> closed(net.lines.size());
    for (std::size_t li = 0; li < net.lines.size(); ++li) closed[li] = net.lines[li].base_closed;
    return closed;
}

// ---------------------------------------------------------------------------
// Validation

inline void validate(const Network& net) {
    if (net.nodes.empty()) throw ValidationError("network has no nodes");
    if (net.lines.empty()) throw ValidationError("network has no lines");
    if (net.base_stations.empty()) throw ValidationError("network has no base stations");

    {
        std::unordered_map<std::string, int> seen;
        for (const Node& n : net.nodes)
            if (++seen[n.id] > 1) throw ValidationError("duplicate node id: " + n.id);
    }
    {
        std::unordered_map<std::string, int> seen;
        for (const Line& l : net.lines)
            if (++seen[l.id] > 1) throw ValidationError("duplicate line id: " + l.id);
    }
    {
        std::unordered_map<std::string, int> seen;
        for (const BaseStation& b : net.base_stations)
            if (++seen[b.id] > 1) throw ValidationError("duplicate base station id: " + b.id);
        // Each line carries exactly one RCS; RCS ids may not be shared between lines.
        std::unordered_map<std::string, int> rcs_seen;
        for (const Line& l : net.lines) {
            if (l.rcs_id.empty()) throw ValidationError("line " + l.id + " has no rcs_id");
            if (++rcs_seen[l.rcs_id] > 1)
                throw ValidationError("rcs id " + l.rcs_id + " is assigned to more than one line");
        }
    }

    for (const Node& n : net.nodes) {
        if (n.p_load < 0) throw ValidationError("node " + n.id + ": p_load must be >= 0");
        if (n.weight < 0) throw ValidationError("node " + n.id + ": weight must be >= 0");
        if (!(n.u_min > 0) || !(n.u_max > 0) || !(n.u_min < n.u_max))
            throw ValidationError("node " + n.id + ": requires 0 < u_min < u_max");
        if (n.is_substation && n.is_dg)
            throw ValidationError("node " + n.id + ": cannot be both substation and DG");
        if (n.pg_max < 0 || n.qg_max < 0)
            throw ValidationError("node " + n.id + ": generation limits must be >= 0");
        if (!(n.is_substation || n.is_dg) && (n.pg_max != 0 || n.qg_max != 0))
            throw ValidationError("node " + n.id + ": only substations/DGs may have generation limits");
    }

    for (const Line& l : net.lines) {
        if (l.from == l.to) throw ValidationError("line " + l.id + ": from == to");
        net.node_index(l.from);  // throws if unresolved
        net.node_index(l.to);
        if (!(l.length > 0)) throw ValidationError("line " + l.id + ": length must be > 0");
        if (l.r < 0 || l.x < 0) throw ValidationError("line " + l.id + ": r/x must be >= 0");
        if (!(l.s_max > 0)) throw ValidationError("line " + l.id + ": s_max must be > 0");
        if (l.switch_class == SwitchClass::tie && l.base_closed)
            throw ValidationError("line " + l.id + ": tie lines must start open (base_closed = false)");
        if (l.switch_class == SwitchClass::sectionalizing && !l.base_closed)
            throw ValidationError("line " + l.id +
                                  ": sectionalizing lines must start closed (base_closed = true)");
    }

    for (const BaseStation& b : net.base_stations) {
        if (!(b.sigma > 0)) throw ValidationError("base station " + b.id + ": sigma must be > 0");
        if (b.s_ref && !std::isfinite(*b.s_ref))
            throw ValidationError("base station " + b.id + ": s_ref must be finite");
    }

    const RadioParams& r = net.radio;
    if (!(r.d0 > 0)) throw ValidationError("radio: d0 must be > 0");
    if (!(r.path_loss_exp > 0)) throw ValidationError("radio: path_loss_exp must be > 0");
    if (!(r.fbs_sigma > 0)) throw ValidationError("radio: fbs_sigma must be > 0");
    if (!(r.d_min > 0)) throw ValidationError("radio: d_min must be > 0");
    if (r.d_min > r.d0) throw ValidationError("radio: requires d_min <= d0");

    const TimeParams& t = net.times;
    if (!(t.t_fault < t.t_r1 && t.t_r1 < t.t_r2 && t.t_r2 < t.t_r3))
        throw ValidationError("times: require t_fault < t_r1 < t_r2 < t_r3");

    if (!(net.region.xmax > net.region.xmin) || !(net.region.ymax > net.region.ymin))
        throw ValidationError("region: must have positive area");
    if (!(net.grid_step > 0)) throw ValidationError("grid_step must be > 0");

    if (net.defaults.n_defend_cyber < 0 || net.defaults.n_defend_phys < 0 ||
        net.defaults.n_attack_phys < 0)
        throw ValidationError("defaults: budgets must be >= 0");
    if (!(net.defaults.zeta_a > 0) || !(net.defaults.zeta_b > 0))
        throw ValidationError("defaults: inspection intensities must be > 0");
    if (!(net.defaults.zeta_b > net.defaults.zeta_a))
        throw ValidationError(
            "defaults: enhanced inspection must be more intense (zeta_b > zeta_a)");
    if (net.defaults.p_defend < 0 || net.defaults.p_defend > 1)
        throw ValidationError("defaults: p_defend must be within [0, 1]");

    // Base topology: all sectionalizing lines closed and ties open must form a
    // forest in which every tree contains exactly one substation.
    std::vector<bool> closed = base_closed_states(net);
    if (!is_forest(net, closed))
        throw ValidationError("base topology contains a cycle (not a spanning forest)");
    std::vector<int> subs = substations_per_component(net, closed);
    for (std::size_t c = 0; c < subs.size(); ++c) {
        if (subs[c] != 1) {
            std::ostringstream os;
            os << "base topology: component " << c << " contains " << subs[c]
               << " substations (expected exactly 1)";
            throw ValidationError(os.str());
        }
    }
}

// ---------------------------------------------------------------------------
// JSON (de)serialization

namespace detail {

inline Vec2 parse_vec2(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(where + ": expected [x, y]");
    return Vec2{j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T require(const nlohmann::json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing required field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + ": field '" + key + "': " + e.what());
    }
}

template <typename T>
T optional_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace detail

inline Network network_from_json(const nlohmann::json& j) {
    using detail::optional_or;
    using detail::parse_vec2;
    using detail::require;

    if (!j.is_object()) throw ParseError("case file: top level must be an object");
    int version = require<int>(j, "format_version", "case file");
    if (version != 1) throw ParseError("case file: unsupported format_version " + std::to_string(version));

    Network net;
    net.name = optional_or<std::string>(j, "name", "");

    const auto& jr = j.contains("region") ? j.at("region") : nlohmann::json::object();
    net.region.xmin = require<double>(jr, "xmin", "region");
    net.region.ymin = require<double>(jr, "ymin", "region");
    net.region.xmax = require<double>(jr, "xmax", "region");
    net.region.ymax = require<double>(jr, "ymax", "region");
    net.grid_step = require<double>(j, "grid_step", "case file");

    const auto& jrad = j.contains("radio") ? j.at("radio") : nlohmann::json::object();
    net.radio.s_ref = require<double>(jrad, "s_ref", "radio");
    net.radio.d0 = require<double>(jrad, "d0", "radio");
    net.radio.path_loss_exp = require<double>(jrad, "path_loss_exp", "radio");
    net.radio.fbs_sigma = require<double>(jrad, "fbs_sigma", "radio");
    net.radio.d_min = optional_or<double>(jrad, "d_min", 1.0);

    const auto& jt = j.contains("times") ? j.at("times") : nlohmann::json::object();
    net.times.t_fault = require<double>(jt, "t_fault", "times");
    net.times.t_r1 = require<double>(jt, "t_r1", "times");
    net.times.t_r2 = require<double>(jt, "t_r2", "times");
    net.times.t_r3 = require<double>(jt, "t_r3", "times");

    if (j.contains("defaults")) {
        const auto& jd = j.at("defaults");
        net.defaults.n_defend_cyber = optional_or<int>(jd, "n_defend_cyber", 0);
        net.defaults.n_defend_phys = optional_or<int>(jd, "n_defend_phys", 0);
        net.defaults.n_attack_phys = optional_or<int>(jd, "n_attack_phys", 0);
        net.defaults.zeta_a = optional_or<double>(jd, "zeta_a", 1.0);
        net.defaults.zeta_b = optional_or<double>(jd, "zeta_b", 5.0);
        net.defaults.p_defend = optional_or<double>(jd, "p_defend", 0.9);
    }

    if (j.contains("poly_coeffs")) {
        if (!j.at("poly_coeffs").is_object())
            throw ParseError("case file: 'poly_coeffs' must be an object");
        net.poly_coeffs = j.at("poly_coeffs");
    }

    if (!j.contains("nodes") || !j.at("nodes").is_array())
        throw ParseError("case file: 'nodes' must be an array");
    for (const auto& jn : j.at("nodes")) {
        Node n;
        n.id = require<std::string>(jn, "id", "node");
        const std::string where = "node " + n.id;
        n.is_substation = optional_or<bool>(jn, "is_substation", false);
        n.is_dg = optional_or<bool>(jn, "is_dg", false);
        n.p_load = optional_or<double>(jn, "p_load", 0.0);
        n.q_load = optional_or<double>(jn, "q_load", 0.0);
        n.weight = optional_or<double>(jn, "weight", 1.0);
        n.u_min = optional_or<double>(jn, "u_min", 0.81);
        n.u_max = optional_or<double>(jn, "u_max", 1.21);
        n.pg_max = optional_or<double>(jn, "pg_max", 0.0);
        n.qg_max = optional_or<double>(jn, "qg_max", 0.0);
        if (jn.contains("position")) n.position = parse_vec2(jn.at("position"), where);
        net.nodes.push_back(std::move(n));
    }

    if (!j.contains("lines") || !j.at("lines").is_array())
        throw ParseError("case file: 'lines' must be an array");
    for (const auto& jl : j.at("lines")) {
        Line l;
        l.id = require<std::string>(jl, "id", "line");
        const std::string where = "line " + l.id;
        l.from = require<std::string>(jl, "from", where);
        l.to = require<std::string>(jl, "to", where);
        l.length = require<double>(jl, "length", where);
        l.r = require<double>(jl, "r", where);
        l.x = require<double>(jl, "x", where);
        l.s_max = require<double>(jl, "s_max", where);
        std::string cls = require<std::string>(jl, "switch_class", where);
        if (cls == "sectionalizing")
            l.switch_class = SwitchClass::sectionalizing;
        else if (cls == "tie")
            l.switch_class = SwitchClass::tie;
        else
            throw ParseError(where + ": switch_class must be 'sectionalizing' or 'tie'");
        l.rcs_id = require<std::string>(jl, "rcs_id", where);
        l.base_closed = optional_or<bool>(jl, "base_closed",
                                          l.switch_class == SwitchClass::sectionalizing);
        if (jl.contains("rcs_position")) l.rcs_position = parse_vec2(jl.at("rcs_position"), where);
        net.lines.push_back(std::move(l));
    }

    if (!j.contains("base_stations") || !j.at("base_stations").is_array())
        throw ParseError("case file: 'base_stations' must be an array");
    for (const auto& jb : j.at("base_stations")) {
        BaseStation b;
        b.id = require<std::string>(jb, "id", "base_station");
        b.position = parse_vec2(jb.contains("position") ? jb.at("position") : nlohmann::json(),
                                "base station " + b.id);
        b.sigma = require<double>(jb, "sigma", "base station " + b.id);
        // Freeze the legitimate transmit power at the file's baseline so a
        // later radio.s_ref override moves only the FBS.
        b.s_ref = optional_or<double>(jb, "s_ref", net.radio.s_ref);
        net.base_stations.push_back(std::move(b));
    }

    net.rebuild_indices();
    validate(net);
    return net;
}

inline nlohmann::json network_to_json(const Network& net) {
    nlohmann::json j;
    j["format_version"] = 1;
    if (!net.name.empty()) j["name"] = net.name;
    j["region"] = {{"xmin", net.region.xmin},
                   {"ymin", net.region.ymin},
                   {"xmax", net.region.xmax},
                   {"ymax", net.region.ymax}};
    j["grid_step"] = net.grid_step;
    j["radio"] = {{"s_ref", net.radio.s_ref},
                  {"d0", net.radio.d0},
                  {"path_loss_exp", net.radio.path_loss_exp},
                  {"fbs_sigma", net.radio.fbs_sigma},
                  {"d_min", net.radio.d_min}};
    j["times"] = {{"t_fault", net.times.t_fault},
                  {"t_r1", net.times.t_r1},
                  {"t_r2", net.times.t_r2},
                  {"t_r3", net.times.t_r3}};
    j["defaults"] = {{"n_defend_cyber", net.defaults.n_defend_cyber},
                     {"n_defend_phys", net.defaults.n_defend_phys},
                     {"n_attack_phys", net.defaults.n_attack_phys},
                     {"zeta_a", net.defaults.zeta_a},
                     {"zeta_b", net.defaults.zeta_b},
                     {"p_defend", net.defaults.p_defend}};
    if (!net.poly_coeffs.is_null()) j["poly_coeffs"] = net.poly_coeffs;
    j["nodes"] = nlohmann::json::array();
    for (const Node& n : net.nodes) {
        nlohmann::json jn{{"id", n.id},
                          {"is_substation", n.is_substation},
                          {"is_dg", n.is_dg},
                          {"p_load", n.p_load},
                          {"q_load", n.q_load},
                          {"weight", n.weight},
                          {"u_min", n.u_min},
                          {"u_max", n.u_max},
                          {"pg_max", n.pg_max},
                          {"qg_max", n.qg_max},
                          {"position", {n.position.x, n.position.y}}};
        j["nodes"].push_back(std::move(jn));
    }
    j["lines"] = nlohmann::json::array();
    for (const Line& l : net.lines) {
        nlohmann::json jl{{"id", l.id},
                          {"from", l.from},
                          {"to", l.to},
                          {"length", l.length},
                          {"r", l.r},
                          {"x", l.x},
                          {"s_max", l.s_max},
                          {"switch_class",
                           l.switch_class == SwitchClass::sectionalizing ? "sectionalizing" : "tie"},
                          {"rcs_id", l.rcs_id},
                          {"base_closed", l.base_closed}};
        if (l.rcs_position) jl["rcs_position"] = {l.rcs_position->x, l.rcs_position->y};
        j["lines"].push_back(std::move(jl));
    }
    j["base_stations"] = nlohmann::json::array();
    for (const BaseStation& b : net.base_stations) {
        nlohmann::json jb{
            {"id", b.id}, {"position", {b.position.x, b.position.y}}, {"sigma", b.sigma}};
        if (b.s_ref) jb["s_ref"] = *b.s_ref;
        j["base_stations"].push_back(std::move(jb));
    }
    return j;
}

inline Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open case file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("case file ") + path + ": " + e.what());
    }
    return network_from_json(j);
}

inline void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write case file: " + path);
    out << network_to_json(net).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// FBS candidate grid

// Candidate FBS coordinates: lattice points of spacing grid_step anchored at
// the region's lower-left corner, row-major (y ascending, then x ascending).
inline std::vector<Vec2> grid_positions(const Network& net) {
    const Region& r = net.region;
    if (!(r.xmax > r.xmin) || !(r.ymax > r.ymin))
        throw ValidationError("grid_positions: region must have positive area");
    if (!(net.grid_step > 0)) throw ValidationError("grid_positions: grid_step must be > 0");

    // A small tolerance keeps boundary points that land on the region edge up
    // to floating-point noise.
    const double eps = 1e-9 * std::max({1.0, std::abs(r.xmax), std::abs(r.ymax)});
    std::vector<Vec2> pts;
    for (double y = r.ymin; y <= r.ymax + eps; y += net.grid_step)
        for (double x = r.xmin; x <= r.xmax + eps; x += net.grid_step)
            pts.push_back(Vec2{x, y});
    return pts;
}

}  // namespace cpds
