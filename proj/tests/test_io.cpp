#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweep/report.hpp"
#include "sweep/scenario_io.hpp"

#include <cstdlib>
#include <string>

using namespace sweep;

namespace {
const std::string kDir = SWEEP_SCENARIO_DIR;
}

TEST_CASE("fmt_double round-trips") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 8.989999990438656, 1.0 / 3.0}) {
        const std::string s = fmt_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("scenario YAML round-trip") {
    Scenario s;
    s.name = "rt";
    s.R = 12.0;
    s.exit = {-0.2, 0.4};
    s.drift.kind = DriftKind::Affine;
    s.drift.A = {0.0, -0.1, 0.1, 0.0};
    s.K_f = 0.1;
    const Scenario back = parse_scenario(scenario_to_yaml(s));
    CHECK(back.name == "rt");
    CHECK(back.R == s.R);
    CHECK(back.exit.angle_lo == s.exit.angle_lo);
    CHECK(back.exit.angle_hi == s.exit.angle_hi);
    CHECK(back.drift.kind == DriftKind::Affine);
    CHECK(back.drift.A == s.drift.A);
    CHECK(back.K_f == s.K_f);
}

TEST_CASE("run configs shipped with the repository load") {
    const RunConfig c = load_run_config(kDir + "/corridor.yaml");
    CHECK(c.scenario.name == "corridor");
    CHECK(c.solver.grid.n_intervals == 40);
    CHECK(c.tolerances.conservation == doctest::Approx(1e-3));
    for (const char* f : {"affine.yaml", "h5_window.yaml", "low_budget.yaml", "unreachable.yaml"})
        CHECK_NOTHROW(load_run_config(kDir + "/" + f));
}

TEST_CASE("scenario given by path matches the inline form") {
    const RunConfig inline_cfg = load_run_config(kDir + "/corridor.yaml");
    const RunConfig by_path = load_run_config(kDir + "/corridor_ref.yaml");
    CHECK(scenario_to_yaml(by_path.scenario) == scenario_to_yaml(inline_cfg.scenario));
    CHECK(by_path.solver.grid.n_intervals == inline_cfg.solver.grid.n_intervals);
    CHECK_THROWS_AS(parse_run_config("scenario: no_such_file.yaml\n", kDir), ParseError);
}

TEST_CASE("malformed input is a parse error") {
    CHECK_THROWS_AS(parse_scenario("scenario: [1, 2"), ParseError);
    CHECK_THROWS_AS(parse_scenario("scenario: {R: ten}"), ParseError);
}

TEST_CASE("controls broadcast scalars and accept per-node lists") {
    Scenario s;
    const ControlsFile c = parse_controls("n_intervals: 4\nhorizon: 2.0\nomega: 1.5\nv: [1.0, 0.0]\n"
                                          "u0: [0, 0.25, 0.5, 0.75, 1]\nx_init: [0.5, 0.0]\n",
                                          s, TimeGrid{10, 1.0});
    CHECK(c.controls.grid.n_intervals == 4);
    CHECK(c.controls.grid.horizon == 2.0);
    CHECK(c.controls.omega[3] == 1.5);
    CHECK(c.controls.v[4] == Vec2{1.0, 0.0});
    CHECK(c.controls.u0[2] == 0.5);
    CHECK(c.has_x_init);
    CHECK(c.x_init == Vec2{0.5, 0.0});
    CHECK(c.gamma_sweep.empty());
}

TEST_CASE("solution JSON round-trip") {
    Scenario s;
    SolverOptions o;
    o.grid = {6, 1.0};
    o.seeds = 2;
    o.rho_schedule = {0.0, 4.0};
    const BilevelSolution sol = solve_bilevel(s, o);
    const Json j = solution_to_json(sol);
    BilevelSolution back = solution_from_json(Json::parse(j.dump()), s);
    CHECK(back.T_star == sol.T_star);
    CHECK(back.decision.x_init == sol.decision.x_init);
    CHECK(back.decision.controls.omega == sol.decision.controls.omega);
    CHECK(back.traj.T == doctest::Approx(sol.traj.T).epsilon(1e-12));
    apply_lower_multipliers(back, Json::parse(lower_multipliers_to_json(sol.lower.multipliers).dump()));
    CHECK(back.lower.multipliers.mu_L == sol.lower.multipliers.mu_L);
    CHECK(solution_to_json(back).dump() == j.dump());
}

TEST_CASE("report helpers") {
    CHECK(convergence_csv({3.0, 6.0}, {0.5, 0.25}) == "gamma,sup_error\n3,0.5\n6,0.25\n");
    Scenario s;
    const ValidationReport rep = validate(s);
    const Json j = validation_to_json(rep);
    CHECK(j["ok"] == true);
    CHECK(j["M_bar"] == 2.0);
}
