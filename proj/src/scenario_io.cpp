#include "sweep/scenario_io.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace sweep {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

YAML::Node load_yaml(const std::string& text) {
    try {
        YAML::Node n = YAML::Load(text);
        if (!n.IsMap()) throw ParseError("top level must be a mapping");
        return n;
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("yaml: ") + e.what());
    }
}

template <class T>
T get(const YAML::Node& n, const char* key, T fallback) {
    if (!n[key]) return fallback;
    try {
        return n[key].as<T>();
    } catch (const YAML::Exception&) {
        throw ParseError(std::string("bad value for '") + key + "'");
    }
}

Vec2 as_vec2(const YAML::Node& n, const std::string& key) {
    if (!n.IsSequence() || n.size() != 2) throw ParseError("'" + key + "' must be a 2-element list");
    try {
        return {n[0].as<double>(), n[1].as<double>()};
    } catch (const YAML::Exception&) {
        throw ParseError("'" + key + "' must hold numbers");
    }
}

Vec2 get_vec2(const YAML::Node& n, const char* key, Vec2 fallback) {
    if (!n[key]) return fallback;
    return as_vec2(n[key], key);
}

std::vector<double> get_list(const YAML::Node& n, const char* key, std::vector<double> fallback) {
    if (!n[key]) return fallback;
    try {
        return n[key].as<std::vector<double>>();
    } catch (const YAML::Exception&) {
        throw ParseError(std::string("'") + key + "' must be a list of numbers");
    }
}

Scenario scenario_from(const YAML::Node& root) {
    const YAML::Node n = root["scenario"] ? root["scenario"] : root;
    Scenario s;
    s.name = get<std::string>(n, "name", s.name);
    s.dim = get<int>(n, "dim", s.dim);
    s.q0 = get_vec2(n, "q0", s.q0);
    s.R = get<double>(n, "R", s.R);
    s.R1 = get<double>(n, "R1", s.R1);
    s.y0 = get_vec2(n, "y0", s.y0);
    if (const YAML::Node e = n["exit"]) {
        s.exit.angle_lo = get<double>(e, "angle_lo", s.exit.angle_lo);
        s.exit.angle_hi = get<double>(e, "angle_hi", s.exit.angle_hi);
    }
    s.M = get<double>(n, "M", s.M);
    s.u_bound = get<double>(n, "u_bound", s.u_bound);
    s.v_bound = get<double>(n, "v_bound", s.v_bound);
    if (const YAML::Node d = n["drift"]) {
        std::string kind = get<std::string>(d, "kind", "identity");
        if (kind == "identity")
            s.drift.kind = DriftKind::Identity;
        else if (kind == "affine")
            s.drift.kind = DriftKind::Affine;
        else
            throw ParseError("drift.kind must be identity or affine");
        std::vector<double> A = get_list(d, "A", {0.0, 0.0, 0.0, 0.0});
        if (A.size() != 4) throw ParseError("drift.A must have 4 entries (row-major)");
        std::copy(A.begin(), A.end(), s.drift.A.begin());
    }
    s.M1 = get<double>(n, "M1", s.M1);
    s.K_f = get<double>(n, "K_f", s.K_f);
    s.delta = get<double>(n, "delta", s.delta);
    s.target_samples = get<int>(n, "target_samples", s.target_samples);
    if (s.dim != 2) throw ParseError("only dim = 2 is supported");
    return s;
}

std::vector<double> node_list(const YAML::Node& n, const char* key, int nodes, double fallback) {
    if (!n[key]) return std::vector<double>(nodes, fallback);
    if (n[key].IsScalar()) return std::vector<double>(nodes, get<double>(n, key, fallback));
    std::vector<double> out = get_list(n, key, {});
    if (static_cast<int>(out.size()) != nodes)
        throw ParseError(std::string("'") + key + "' needs " + std::to_string(nodes) + " entries");
    return out;
}

std::vector<Vec2> node_vec_list(const YAML::Node& n, const char* key, int nodes) {
    if (!n[key]) return std::vector<Vec2>(nodes);
    const YAML::Node e = n[key];
    if (e.IsSequence() && e.size() == 2 && e[0].IsScalar()) return std::vector<Vec2>(nodes, as_vec2(e, key));
    if (!e.IsSequence() || static_cast<int>(e.size()) != nodes)
        throw ParseError(std::string("'") + key + "' needs " + std::to_string(nodes) + " entries");
    std::vector<Vec2> out;
    for (const auto& item : e) out.push_back(as_vec2(item, key));
    return out;
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text) { return scenario_from(load_yaml(yaml_text)); }

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string scenario_to_yaml(const Scenario& s) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "dim" << YAML::Value << s.dim;
    out << YAML::Key << "q0" << YAML::Value << YAML::Flow << YAML::BeginSeq << s.q0.x << s.q0.y << YAML::EndSeq;
    out << YAML::Key << "R" << YAML::Value << s.R;
    out << YAML::Key << "R1" << YAML::Value << s.R1;
    out << YAML::Key << "y0" << YAML::Value << YAML::Flow << YAML::BeginSeq << s.y0.x << s.y0.y << YAML::EndSeq;
    out << YAML::Key << "exit" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "angle_lo" << YAML::Value << s.exit.angle_lo;
    out << YAML::Key << "angle_hi" << YAML::Value << s.exit.angle_hi;
    out << YAML::EndMap;
    out << YAML::Key << "M" << YAML::Value << s.M;
    out << YAML::Key << "u_bound" << YAML::Value << s.u_bound;
    out << YAML::Key << "v_bound" << YAML::Value << s.v_bound;
    out << YAML::Key << "drift" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << (s.drift.kind == DriftKind::Affine ? "affine" : "identity");
    out << YAML::Key << "A" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double a : s.drift.A) out << a;
    out << YAML::EndSeq << YAML::EndMap;
    out << YAML::Key << "M1" << YAML::Value << s.M1;
    out << YAML::Key << "K_f" << YAML::Value << s.K_f;
    out << YAML::Key << "delta" << YAML::Value << s.delta;
    out << YAML::Key << "target_samples" << YAML::Value << s.target_samples;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

RunConfig parse_run_config(const std::string& yaml_text, const std::string& base_dir) {
    const YAML::Node root = load_yaml(yaml_text);
    RunConfig cfg;
    if (root["scenario"] && root["scenario"].IsScalar()) {
        std::filesystem::path file = root["scenario"].as<std::string>();
        if (file.is_relative() && !base_dir.empty()) file = std::filesystem::path(base_dir) / file;
        cfg.scenario = load_scenario(file.string());
    } else {
        cfg.scenario = scenario_from(root);
    }
    if (const YAML::Node n = root["solver"]) {
        SolverOptions& o = cfg.solver;
        o.grid.n_intervals = get<int>(n, "grid", o.grid.n_intervals);
        o.max_inner_iters = get<int>(n, "max_inner_iters", o.max_inner_iters);
        o.max_al_rounds = get<int>(n, "max_al_rounds", o.max_al_rounds);
        o.feas_tol = get<double>(n, "feas_tol", o.feas_tol);
        o.opt_tol = get<double>(n, "opt_tol", o.opt_tol);
        o.omega_max = get<double>(n, "omega_max", o.omega_max);
        o.seeds = get<int>(n, "seeds", o.seeds);
        o.seed = get<std::uint64_t>(n, "seed", o.seed);
        o.rho_schedule = get_list(n, "rho_schedule", o.rho_schedule);
        o.gamma_schedule = get_list(n, "gamma_schedule", o.gamma_schedule);
        o.threads = get<unsigned>(n, "threads", o.threads);
    }
    if (const YAML::Node n = root["tolerances"]) {
        CertificateTolerances& t = cfg.tolerances;
        t.adjoint = get<double>(n, "adjoint", t.adjoint);
        t.conservation = get<double>(n, "conservation", t.conservation);
        t.max_u = get<double>(n, "max_u", t.max_u);
        t.boundary = get<double>(n, "boundary", t.boundary);
        t.max_v = get<double>(n, "max_v", t.max_v);
        t.monotone = get<double>(n, "monotone", t.monotone);
    }
    cfg.out_dir = get<std::string>(root, "out_dir", cfg.out_dir);
    if (cfg.solver.grid.n_intervals < 2) throw ParseError("solver.grid must be at least 2");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_file(path), std::filesystem::path(path).parent_path().string());
}

ControlsFile parse_controls(const std::string& yaml_text, const Scenario& s, const TimeGrid& fallback) {
    const YAML::Node n = load_yaml(yaml_text);
    ControlsFile cf;
    TimeGrid g = fallback;
    g.n_intervals = get<int>(n, "n_intervals", g.n_intervals);
    g.horizon = get<double>(n, "horizon", g.horizon);
    if (g.n_intervals < 1 || !(g.horizon > 0.0)) throw ParseError("controls: bad grid");
    int nodes = g.nodes();
    cf.controls = ControlProfile::zeros(g);
    cf.controls.omega = node_list(n, "omega", nodes, 0.0);
    cf.controls.u0 = node_list(n, "u0", nodes, 0.0);
    cf.controls.v = node_vec_list(n, "v", nodes);
    cf.controls.u = node_vec_list(n, "u", nodes);
    if (n["x_init"]) {
        cf.x_init = as_vec2(n["x_init"], "x_init");
        cf.has_x_init = true;
    } else {
        cf.x_init = s.y0;
    }
    cf.gamma_sweep = get_list(n, "gamma_sweep", {});
    return cf;
}

ControlsFile load_controls(const std::string& path, const Scenario& s, const TimeGrid& fallback) {
    return parse_controls(read_file(path), s, fallback);
}

}  // namespace sweep
