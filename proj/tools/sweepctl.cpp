#include "sweep/oracle.hpp"
#include "sweep/report.hpp"
#include "sweep/scenario_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

using namespace sweep;

namespace {

enum Exit { kOk = 0, kParse = 1, kValidation = 2, kSolve = 3, kCertificate = 4 };

struct Common {
    std::string config;
    std::string out;
    int grid = 0;
    long long seed = -1;
    double rho_max = -1.0;
    double gamma_max = -1.0;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "run configuration (YAML)")->required();
    cmd->add_option("--out", c.out, "output directory (default: out_dir from the config)");
    cmd->add_option("--grid", c.grid, "number of grid intervals N");
    cmd->add_option("--seed", c.seed, "multi-start seed");
    cmd->add_option("--rho-max", c.rho_max, "truncate the penalty schedule at this value");
    cmd->add_option("--gamma-max", c.gamma_max, "largest smoothing factor, in units of M/R1");
}

RunConfig load(const Common& c) {
    RunConfig cfg = load_run_config(c.config);
    if (!c.out.empty()) cfg.out_dir = c.out;
    if (c.grid != 0) {
        if (c.grid < 2) throw UsageError("--grid must be at least 2");
        cfg.solver.grid.n_intervals = c.grid;
    }
    if (c.seed >= 0) cfg.solver.seed = static_cast<std::uint64_t>(c.seed);
    if (c.rho_max >= 0.0) {
        std::vector<double> rhos;
        for (double r : cfg.solver.rho_schedule)
            if (r <= c.rho_max) rhos.push_back(r);
        if (rhos.empty() || rhos.back() < c.rho_max) rhos.push_back(c.rho_max);
        cfg.solver.rho_schedule = rhos;
    }
    if (c.gamma_max >= 0.0) {
        if (c.gamma_max < 2.0) throw UsageError("--gamma-max must be at least 2");
        cfg.solver.gamma_schedule = SmoothingSchedule::doubling(cfg.scenario, c.gamma_max).gammas;
    }
    return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::vector<double> gammas_of(const RunConfig& cfg) {
    if (!cfg.solver.gamma_schedule.empty()) return cfg.solver.gamma_schedule;
    return SmoothingSchedule::doubling(cfg.scenario, 64.0).gammas;
}

int cmd_validate(const Common& c) {
    const RunConfig cfg = load(c);
    const ValidationReport rep = validate(cfg.scenario);
    const Json j = validation_to_json(rep);
    write_text(out_path(cfg, "validation.json"), j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    for (const ValidationIssue& i : rep.failures) std::cerr << "validation: " << i.assumption << ": " << i.message << "\n";
    return rep.ok ? kOk : kValidation;
}

int cmd_simulate(const Common& c, const std::string& controls_path, double gamma_arg) {
    const RunConfig cfg = load(c);
    const ControlsFile cf = load_controls(controls_path, cfg.scenario, cfg.solver.grid);
    cf.controls.check(cfg.scenario);
    const double gamma = gamma_arg > 0.0 ? gamma_arg : gammas_of(cfg).back();
    const StateTrajectory smooth = integrate_smooth(cf.controls, cf.x_init, gamma, cfg.scenario);
    const StateTrajectory catchup = integrate_catchup(cf.controls, cf.x_init, cfg.scenario);
    write_text(out_path(cfg, "simulate.csv"), side_by_side_csv(smooth, catchup, cf.controls, cfg.scenario));
    Json j;
    j["gamma"] = gamma;
    j["validation"] = validation_to_json(validate(cfg.scenario));
    j["smooth"] = violation_json(smooth, cfg.scenario);
    j["catchup"] = violation_json(catchup, cfg.scenario);
    write_text(out_path(cfg, "violation.json"), j.dump(2) + "\n");
    for (const std::string& w : catchup.warnings) std::cerr << "warning: " << w << "\n";
    if (!cf.gamma_sweep.empty()) {
        const std::vector<double> err =
            convergence_study(cf.controls, cf.x_init, SmoothingSchedule{cf.gamma_sweep}, cfg.scenario);
        write_text(out_path(cfg, "convergence.csv"), convergence_csv(cf.gamma_sweep, err));
    }
    std::cout << j.dump(2) << "\n";
    return kOk;
}

int cmd_sweep_gamma(const Common& c, const std::string& controls_path) {
    const RunConfig cfg = load(c);
    const ControlsFile cf = load_controls(controls_path, cfg.scenario, cfg.solver.grid);
    cf.controls.check(cfg.scenario);
    const std::vector<double> gammas = cf.gamma_sweep.empty() || c.gamma_max >= 0.0 ? gammas_of(cfg) : cf.gamma_sweep;
    const std::vector<double> err = convergence_study(cf.controls, cf.x_init, SmoothingSchedule{gammas}, cfg.scenario);
    const std::string csv = convergence_csv(gammas, err);
    write_text(out_path(cfg, "convergence.csv"), csv);
    std::cout << csv;
    return kOk;
}

int cmd_solve(const Common& c) {
    const RunConfig cfg = load(c);
    const ValidationReport vr = validate(cfg.scenario);
    if (!vr.ok) {
        for (const ValidationIssue& i : vr.failures)
            std::cerr << "validation: " << i.assumption << ": " << i.message << "\n";
        return kValidation;
    }
    BilevelSolution sol;
    try {
        sol = solve_bilevel(cfg.scenario, cfg.solver);
    } catch (const std::exception& e) {
        Json j;
        j["status"] = "failed";
        j["error"] = e.what();
        write_text(out_path(cfg, "solution.json"), j.dump(2) + "\n");
        std::cerr << "solve: " << e.what() << "\n";
        return kSolve;
    }
    const Json j = solution_to_json(sol);
    write_text(out_path(cfg, "solution.json"), j.dump(2) + "\n");
    write_text(out_path(cfg, "lower_multipliers.json"), lower_multipliers_to_json(sol.lower.multipliers).dump(2) + "\n");
    write_text(out_path(cfg, "trajectory.csv"), trajectory_csv(sol.traj, sol.decision.controls));
    std::cout << "status " << sol.status << "\nT_star " << fmt_double(sol.T_star) << "\nmax_violation "
              << fmt_double(sol.max_violation) << "\npenalty_gap " << fmt_double(penalty_gap(sol)) << "\n";
    return sol.feasible ? kOk : kSolve;
}

int cmd_certify(const Common& c, std::string solution_path, std::string mult_path) {
    const RunConfig cfg = load(c);
    if (solution_path.empty()) solution_path = (std::filesystem::path(cfg.out_dir) / "solution.json").string();
    if (mult_path.empty())
        mult_path = (std::filesystem::path(solution_path).parent_path() / "lower_multipliers.json").string();
    BilevelSolution sol = solution_from_json(read_json(solution_path), cfg.scenario);
    if (std::filesystem::exists(mult_path)) apply_lower_multipliers(sol, read_json(mult_path));
    const GamkrelidzeMultipliers m = extract_multipliers(sol, cfg.scenario);
    const CertificateReport rep = certify(sol, m, cfg.scenario, cfg.tolerances);
    write_text(out_path(cfg, "certificate.json"), certificate_to_json(rep, m).dump(2) + "\n");
    const std::string table = certificate_table(rep);
    write_text(out_path(cfg, "certificate.txt"), table);
    std::cout << table;
    return rep.pass ? kOk : kCertificate;
}

// Tiny lower instance: straight run toward the target at full speed.
void tiny_instance(const Scenario& s, int n, std::vector<double>& omega, std::vector<Vec2>& v) {
    const TargetHit hit = target_set(s)->closest(s.y0);
    Vec2 dir = hit.point - s.y0;
    const double d = norm(dir);
    dir = d > 0.0 ? dir * (1.0 / d) : Vec2{1.0, 0.0};
    omega.assign(n, s.v_bound > 0.0 ? std::max(d / s.v_bound, 1.0) : 1.0);
    v.assign(n, dir * s.v_bound);
}

int cmd_oracle(const Common& c, int samples) {
    const RunConfig cfg = load(c);
    const Scenario& s = cfg.scenario;
    Json j;
    bool ok = true;

    // sigma against the grid sup.
    {
        std::mt19937_64 rng(cfg.solver.seed);
        std::uniform_real_distribution<double> U(-1.0, 1.0), P(0.0, 1.0);
        constexpr int kGrid = 32769;
        double worst = 0.0;
        for (int k = 0; k < samples; ++k) {
            const double a = 2.0 * 3.14159265358979323846 * P(rng);
            const Vec2 y = s.y0;
            const Vec2 x = y + Vec2{std::cos(a), std::sin(a)} * s.R1;
            const Vec2 q{U(rng), U(rng)};
            const double nu = P(rng);
            const double r = P(rng);
            const double ex = sigma_value(y, x, q, nu, r, s);
            const double gr = sigma_sup_oracle(q, nu, r, x, y, s, kGrid);
            worst = std::max(worst, std::abs(ex - gr));
        }
        const bool pass = worst <= 1e-9;
        ok = ok && pass;
        j["sigma"] = {{"samples", samples}, {"max_abs_error", worst}, {"tolerance", 1e-9}, {"pass", pass}};
    }

    // Lower level against exhaustive enumeration.
    EnumSpec es;
    const double gamma = gammas_of(cfg).back();
    {
        std::vector<double> omega;
        std::vector<Vec2> v;
        tiny_instance(s, es.n_intervals, omega, v);
        const LowerOracleResult br = brute_lower(omega, v, gamma, es, s);
        SolverOptions so = cfg.solver;
        so.grid = TimeGrid{es.n_intervals, es.horizon};
        std::vector<double> wn(omega);
        std::vector<Vec2> vn(v);
        wn.push_back(omega.back());
        vn.push_back(v.back());
        const LowerSolution lo = solve_lower(wn, vn, gamma, s, so);
        const bool pass = br.feasible && lo.value <= br.value + 1e-6;
        ok = ok && pass;
        j["lower"] = {{"gamma", gamma},          {"oracle_feasible", br.feasible}, {"oracle_value", br.value},
                      {"solver_value", lo.value}, {"solver_status", lo.status},     {"evaluated", br.evaluated},
                      {"pass", pass}};
        write_text(out_path(cfg, "oracle_top.csv"), oracle_top_csv(br));
    }

    // Bilevel optimum against enumeration of (omega, v).
    {
        const BilevelOracleResult bb = brute_bilevel(es, s, gamma);
        const BilevelSolution sol = solve_bilevel(s, cfg.solver);
        const bool pass = bb.feasible && sol.feasible && std::abs(sol.T_star - bb.T_best) <= bb.grid_step;
        ok = ok && pass;
        j["bilevel"] = {{"oracle_feasible", bb.feasible}, {"oracle_T", bb.T_best},   {"grid_step", bb.grid_step},
                        {"oracle_phi", bb.phi},           {"solver_T", sol.T_star},  {"solver_status", sol.status},
                        {"candidates", bb.candidates},    {"pass", pass}};
    }
    j["pass"] = ok;
    write_text(out_path(cfg, "oracle.json"), j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return ok ? kOk : kCertificate;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bilevel sweeping-process solver and certificate checker"};
    app.require_subcommand(1);
    Common common;
    std::string controls, solution, multipliers;
    double gamma = 0.0;
    int samples = 10000;

    CLI::App* validate_cmd = app.add_subcommand("validate", "check scenario assumptions");
    add_common(validate_cmd, common);
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "run both integrators on given controls");
    add_common(simulate_cmd, common);
    simulate_cmd->add_option("--controls", controls, "control file (YAML)")->required();
    simulate_cmd->add_option("--gamma", gamma, "smoothing parameter (default: end of the schedule)");
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve the penalized bilevel problem");
    add_common(solve_cmd, common);
    CLI::App* certify_cmd = app.add_subcommand("certify", "check the necessary conditions on a solution");
    add_common(certify_cmd, common);
    certify_cmd->add_option("--solution", solution, "solution JSON (default: <out>/solution.json)");
    certify_cmd->add_option("--multipliers", multipliers, "lower multiplier JSON (default: next to the solution)");
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "compare against brute-force references");
    add_common(oracle_cmd, common);
    oracle_cmd->add_option("--samples", samples, "sigma samples")->check(CLI::PositiveNumber);
    CLI::App* sweep_cmd = app.add_subcommand("sweep-gamma", "smoothing convergence study");
    add_common(sweep_cmd, common);
    sweep_cmd->add_option("--controls", controls, "control file (YAML)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kParse;
    }

    try {
        if (*validate_cmd) return cmd_validate(common);
        if (*simulate_cmd) return cmd_simulate(common, controls, gamma);
        if (*solve_cmd) return cmd_solve(common);
        if (*certify_cmd) return cmd_certify(common, solution, multipliers);
        if (*oracle_cmd) return cmd_oracle(common, samples);
        if (*sweep_cmd) return cmd_sweep_gamma(common, controls);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParse;
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return kParse;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolve;
    }
    return kParse;
}
