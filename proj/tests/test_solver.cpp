#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweep/solver.hpp"

#include <cmath>

using namespace sweep;

namespace {

SolverOptions quick_options(int n) {
    SolverOptions o;
    o.grid = {n, 1.0};
    o.seeds = 2;
    o.rho_schedule = {0.0, 4.0};
    return o;
}

}  // namespace

TEST_CASE("lower problem with a still outer agent costs nothing") {
    Scenario s;
    const int n = 8;
    const std::vector<double> omega(n + 1, 0.0);
    const std::vector<Vec2> v(n + 1, Vec2{});
    const LowerSolution low = solve_lower(omega, v, 12.0, s, quick_options(n));
    CHECK(low.value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(low.max_violation <= 1e-7);
}

TEST_CASE("lower problem with a moving outer agent pays for correction") {
    Scenario s;
    const int n = 8;
    const std::vector<double> omega(n + 1, 4.0);
    const std::vector<Vec2> v(n + 1, Vec2{1, 0});
    const LowerSolution low = solve_lower(omega, v, 12.0, s, quick_options(n));
    CHECK(low.status != "infeasible");
    CHECK(low.value > 0.0);
    CHECK(low.max_violation <= 1e-6);
    REQUIRE(low.u.size() == static_cast<std::size_t>(n + 1));
    for (const Vec2& u : low.u) CHECK(norm(u) <= s.u_bound + 1e-9);
    for (double u0 : low.u0) {
        CHECK(u0 >= -1e-12);
        CHECK(u0 <= 1.0 + 1e-12);
    }
    CHECK(low.multipliers.lambda_bar == doctest::Approx(1.0));
    for (std::size_t i = 1; i < low.multipliers.mu_L.size(); ++i)
        CHECK(low.multipliers.mu_L[i] <= low.multipliers.mu_L[i - 1] + 1e-12);
}

TEST_CASE("warm start does not lose optimality") {
    Scenario s;
    const int n = 8;
    const std::vector<double> omega(n + 1, 4.0);
    const std::vector<Vec2> v(n + 1, Vec2{1, 0});
    const SolverOptions o = quick_options(n);
    const LowerSolution cold = solve_lower(omega, v, 12.0, s, o);
    const LowerSolution warm = solve_lower(omega, v, 12.0, s, o, &cold);
    CHECK(warm.value <= cold.value + 1e-6);
}

TEST_CASE("abnormal lower multipliers are rejected") {
    Scenario s;
    const int n = 4;
    const std::vector<double> omega(n + 1, 1.0);
    const std::vector<Vec2> v(n + 1, Vec2{1, 0});
    LowerSolution low = solve_lower(omega, v, 12.0, s, quick_options(n));
    low.multipliers.lambda_bar = 0.0;
    CHECK_THROWS_AS(value_subgradient(omega, v, low, s, 12.0), std::domain_error);
}

TEST_CASE("adjoint sweep with zero data stays zero") {
    Scenario s;
    const TimeGrid g{6, 1.0};
    ControlProfile cp = ControlProfile::zeros(g);
    const StateTrajectory tr = integrate_smooth(cp, {0, 0}, 12.0, s);
    const std::vector<double> zeros(g.nodes(), 0.0);
    const AdjointArcs a = adjoint_sweep(tr, cp, {}, {}, zeros, zeros, 1.0, 12.0, s);
    REQUIRE(a.p_H.size() == static_cast<std::size_t>(g.nodes()));
    for (const Vec2& p : a.p_H) CHECK(norm(p) == 0.0);
    for (const Vec2& p : a.p_L) CHECK(norm(p) == 0.0);
}

TEST_CASE("bilevel solve reaches the exit and is deterministic") {
    Scenario s;
    const SolverOptions o = quick_options(8);
    const BilevelSolution a = solve_bilevel(s, o);
    CHECK(a.feasible);
    CHECK(a.T_star == doctest::Approx(8.99).epsilon(0.02));
    CHECK(a.max_violation <= 1e-6);
    CHECK(penalty_gap(a) >= -1e-9);
    CHECK_FALSE(a.history.empty());
    CHECK(a.history.back().rho == doctest::Approx(4.0));
    const BilevelSolution b = solve_bilevel(s, o);
    CHECK(a.T_star == b.T_star);
    CHECK(a.decision.x_init == b.decision.x_init);
}

TEST_CASE("unreachable exit is reported as infeasible") {
    Scenario s;
    s.v_bound = 0.0;
    s.M = 0.5;
    const BilevelSolution sol = solve_bilevel(s, quick_options(6));
    CHECK_FALSE(sol.feasible);
    CHECK(sol.status == "infeasible");
}
