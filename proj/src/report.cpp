#include "sweep/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sweep {

namespace {

Json vec_json(const Vec2& v) { return Json::array({v.x, v.y}); }

Vec2 vec_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Json vecs_json(const std::vector<Vec2>& vs) {
    Json a = Json::array();
    for (const Vec2& v : vs) a.push_back(vec_json(v));
    return a;
}

std::vector<Vec2> vecs_from(const Json& j) {
    std::vector<Vec2> out;
    for (const auto& e : j) out.push_back(vec_from(e));
    return out;
}

void row(std::ostringstream& os, std::initializer_list<double> vals) {
    bool first = true;
    for (double v : vals) {
        if (!first) os << ',';
        os << fmt_double(v);
        first = false;
    }
    os << '\n';
}

}  // namespace

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trajectory_csv(const StateTrajectory& tr, const ControlProfile& cp) {
    std::ostringstream os;
    os << "tau,t,y1,y2,x1,x2,z,u1,u2,u0,v1,v2,omega\n";
    for (int i = 0; i < tr.grid.nodes(); ++i)
        row(os, {tr.grid.tau(i), tr.t[i], tr.y[i].x, tr.y[i].y, tr.x[i].x, tr.x[i].y, tr.z[i], cp.u[i].x, cp.u[i].y,
                 cp.u0[i], cp.v[i].x, cp.v[i].y, cp.omega[i]});
    return os.str();
}

std::string side_by_side_csv(const StateTrajectory& smooth, const StateTrajectory& catchup, const ControlProfile& cp,
                             const Scenario& s) {
    std::ostringstream os;
    os << "tau,t,y1,y2,x1_smooth,x2_smooth,x1_catchup,x2_catchup,z_smooth,z_catchup,u0_catchup,h_lower_smooth,"
          "h_lower_catchup\n";
    for (int i = 0; i < smooth.grid.nodes(); ++i) {
        double u0c = catchup.u0_recorded.empty() ? cp.u0[i] : catchup.u0_recorded[i];
        row(os, {smooth.grid.tau(i), smooth.t[i], smooth.y[i].x, smooth.y[i].y, smooth.x[i].x, smooth.x[i].y,
                 catchup.x[i].x, catchup.x[i].y, smooth.z[i], catchup.z[i], u0c,
                 h_lower(smooth.x[i], smooth.y[i], s), h_lower(catchup.x[i], catchup.y[i], s)});
    }
    return os.str();
}

Json violation_json(const StateTrajectory& tr, const Scenario& s) {
    ViolationReport v = feasibility_monitor(tr, s);
    Json j;
    j["T"] = tr.T;
    j["max_h_lower"] = v.max_h_lower;
    j["node_h_lower"] = v.node_h_lower;
    j["max_h_upper"] = v.max_h_upper;
    j["node_h_upper"] = v.node_h_upper;
    j["terminal_distance"] = v.terminal_distance;
    j["first_violation"] = tr.first_violation;
    j["warnings"] = tr.warnings;
    return j;
}

Json validation_to_json(const ValidationReport& rep) {
    Json j;
    j["ok"] = rep.ok;
    j["M_bar"] = rep.bounds.M_bar;
    j["m_bar"] = rep.bounds.m_bar;
    j["degenerate"] = rep.bounds.degenerate;
    Json f = Json::array();
    for (const ValidationIssue& i : rep.failures) f.push_back({{"assumption", i.assumption}, {"message", i.message}});
    j["failures"] = f;
    j["notes"] = rep.notes;
    return j;
}

std::string convergence_csv(const std::vector<double>& gammas, const std::vector<double>& errors) {
    std::ostringstream os;
    os << "gamma,sup_error\n";
    for (std::size_t i = 0; i < gammas.size() && i < errors.size(); ++i) row(os, {gammas[i], errors[i]});
    return os.str();
}

Json solution_to_json(const BilevelSolution& sol) {
    const ControlProfile& cp = sol.decision.controls;
    Json j;
    j["status"] = sol.status;
    j["feasible"] = sol.feasible;
    j["T_star"] = sol.T_star;
    j["gamma_final"] = sol.gamma_final;
    j["rho_final"] = sol.rho_final;
    j["max_violation"] = sol.max_violation;
    j["penalty_gap"] = sol.lower.traj.z.empty() ? 0.0 : penalty_gap(sol);
    j["grid"] = {{"n_intervals", cp.grid.n_intervals}, {"horizon", cp.grid.horizon}};
    j["x_init"] = vec_json(sol.decision.x_init);
    j["omega"] = cp.omega;
    j["v"] = vecs_json(cp.v);
    j["u"] = vecs_json(cp.u);
    j["u0"] = cp.u0;
    j["lambda"] = sol.lambda;
    Json lo;
    lo["x_init"] = vec_json(sol.lower.x_init);
    lo["u"] = vecs_json(sol.lower.u);
    lo["u0"] = sol.lower.u0;
    lo["value"] = sol.lower.value;
    lo["grad_omega"] = sol.lower.grad_omega;
    lo["grad_v"] = vecs_json(sol.lower.grad_v);
    lo["converged"] = sol.lower.converged;
    lo["max_violation"] = sol.lower.max_violation;
    lo["status"] = sol.lower.status;
    j["lower"] = lo;
    Json hist = Json::array();
    for (const StageRecord& r : sol.history)
        hist.push_back({{"gamma", r.gamma},
                        {"rho", r.rho},
                        {"T", r.T},
                        {"objective", r.objective},
                        {"gap_before_sync", r.gap_before_sync},
                        {"gap", r.gap},
                        {"max_violation", r.max_violation},
                        {"iterations", r.iterations},
                        {"converged", r.converged},
                        {"syncs", r.syncs},
                        {"incumbents", r.incumbents}});
    j["history"] = hist;
    double lam_norm = 0.0;
    for (double l : sol.lambda) lam_norm = std::max(lam_norm, std::abs(l));
    j["multiplier_norm_inf"] = lam_norm;
    return j;
}

Json lower_multipliers_to_json(const LowerMultipliers& m) {
    Json j;
    j["p_H"] = vecs_json(m.p_H);
    j["p_L"] = vecs_json(m.p_L);
    j["mu_H"] = m.mu_H;
    j["mu_L"] = m.mu_L;
    j["weights_L"] = m.weights_L;
    j["lambda_bar"] = m.lambda_bar;
    j["zeta2"] = vecs_json(m.zeta2);
    j["zeta1"] = m.zeta1;
    return j;
}

BilevelSolution solution_from_json(const Json& j, const Scenario& s) {
    try {
        BilevelSolution sol;
        TimeGrid g{j.at("grid").at("n_intervals").get<int>(), j.at("grid").at("horizon").get<double>()};
        ControlProfile cp = ControlProfile::zeros(g);
        cp.omega = j.at("omega").get<std::vector<double>>();
        cp.v = vecs_from(j.at("v"));
        cp.u = vecs_from(j.at("u"));
        cp.u0 = j.at("u0").get<std::vector<double>>();
        std::size_t nodes = static_cast<std::size_t>(g.nodes());
        if (cp.omega.size() != nodes || cp.v.size() != nodes || cp.u.size() != nodes || cp.u0.size() != nodes)
            throw std::invalid_argument("control arrays do not match the grid");
        sol.decision.x_init = vec_from(j.at("x_init"));
        sol.decision.controls = cp;
        sol.status = j.at("status").get<std::string>();
        sol.feasible = j.at("feasible").get<bool>();
        sol.gamma_final = j.at("gamma_final").get<double>();
        sol.rho_final = j.at("rho_final").get<double>();
        sol.max_violation = j.at("max_violation").get<double>();
        sol.lambda = j.at("lambda").get<std::vector<double>>();
        sol.traj = integrate_smooth(cp, sol.decision.x_init, sol.gamma_final, s);
        sol.T_star = sol.traj.T;
        const Json& lo = j.at("lower");
        LowerSolution& l = sol.lower;
        l.x_init = vec_from(lo.at("x_init"));
        l.u = vecs_from(lo.at("u"));
        l.u0 = lo.at("u0").get<std::vector<double>>();
        l.value = lo.at("value").get<double>();
        l.grad_omega = lo.at("grad_omega").get<std::vector<double>>();
        l.grad_v = vecs_from(lo.at("grad_v"));
        l.converged = lo.at("converged").get<bool>();
        l.max_violation = lo.at("max_violation").get<double>();
        l.status = lo.at("status").get<std::string>();
        ControlProfile lcp = cp;
        lcp.u = l.u;
        lcp.u0 = l.u0;
        l.traj = integrate_smooth(lcp, l.x_init, sol.gamma_final, s);
        for (const auto& r : j.at("history")) {
            StageRecord rec;
            rec.gamma = r.at("gamma").get<double>();
            rec.rho = r.at("rho").get<double>();
            rec.T = r.at("T").get<double>();
            rec.objective = r.at("objective").get<double>();
            rec.gap_before_sync = r.at("gap_before_sync").get<double>();
            rec.gap = r.at("gap").get<double>();
            rec.max_violation = r.at("max_violation").get<double>();
            rec.iterations = r.at("iterations").get<int>();
            rec.converged = r.at("converged").get<bool>();
            rec.syncs = r.value("syncs", 0);
            rec.incumbents = r.value("incumbents", std::vector<double>{});
            sol.history.push_back(rec);
        }
        return sol;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("solution file: ") + e.what());
    }
}

void apply_lower_multipliers(BilevelSolution& sol, const Json& j) {
    try {
        LowerMultipliers& m = sol.lower.multipliers;
        m.p_H = vecs_from(j.at("p_H"));
        m.p_L = vecs_from(j.at("p_L"));
        m.mu_H = j.at("mu_H").get<std::vector<double>>();
        m.mu_L = j.at("mu_L").get<std::vector<double>>();
        m.weights_L = j.at("weights_L").get<std::vector<double>>();
        m.lambda_bar = j.at("lambda_bar").get<double>();
        m.zeta2 = vecs_from(j.at("zeta2"));
        m.zeta1 = j.at("zeta1").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("multiplier file: ") + e.what());
    }
}

Json certificate_to_json(const CertificateReport& rep, const GamkrelidzeMultipliers& m) {
    Json j;
    j["pass"] = rep.pass;
    Json conds = Json::array();
    for (const ConditionResult& c : rep.conditions)
        conds.push_back({{"name", c.name},
                         {"residual", c.residual},
                         {"tolerance", c.tolerance},
                         {"pass", c.pass},
                         {"skipped", c.skipped},
                         {"detail", c.detail}});
    j["conditions"] = conds;
    j["nontriviality"] = rep.nontriviality;
    j["adjoint_H"] = rep.adjoint_H;
    j["adjoint_L"] = rep.adjoint_L;
    j["boundary"] = rep.boundary;
    j["conservation_stdev"] = rep.conservation_stdev;
    j["conservation_mean"] = rep.conservation_mean;
    j["conservation_offset"] = rep.conservation_offset;
    j["max_u_gap"] = rep.max_u_gap;
    j["max_v_residual"] = rep.max_v_residual;
    j["monotonicity"] = rep.monotonicity;
    j["hamiltonian"] = rep.hamiltonian;
    j["multipliers"] = {{"lambda", m.lambda}, {"r", m.r}, {"c", m.c}, {"kappa", m.kappa}, {"scale", m.scale},
                        {"has_lower", m.has_lower}};
    return j;
}

std::string certificate_table(const CertificateReport& rep) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-34s %14s %14s  %s\n", "condition", "residual", "tolerance", "status");
    os << line;
    for (const ConditionResult& c : rep.conditions) {
        const char* st = c.skipped ? "skipped" : (c.pass ? "pass" : "FAIL");
        std::snprintf(line, sizeof line, "%-34s %14.6e %14.6e  %s\n", c.name.c_str(), c.residual, c.tolerance, st);
        os << line;
    }
    os << (rep.pass ? "certificate: pass\n" : "certificate: FAIL\n");
    return os.str();
}

std::string oracle_top_csv(const LowerOracleResult& res) {
    std::ostringstream os;
    os << "rank,value,x_init1,x_init2";
    std::size_t n = res.top.empty() ? 0 : res.top.front().u.size();
    for (std::size_t i = 0; i < n; ++i) os << ",u1_" << i << ",u2_" << i << ",u0_" << i;
    os << '\n';
    for (std::size_t k = 0; k < res.top.size(); ++k) {
        const OracleCandidate& c = res.top[k];
        os << k << ',' << fmt_double(c.value) << ',' << fmt_double(c.x_init.x) << ',' << fmt_double(c.x_init.y);
        for (std::size_t i = 0; i < c.u.size(); ++i)
            os << ',' << fmt_double(c.u[i].x) << ',' << fmt_double(c.u[i].y) << ',' << fmt_double(c.u0[i]);
        os << '\n';
    }
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

}  // namespace sweep
