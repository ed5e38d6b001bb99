#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweep/dynamics.hpp"

#include <cmath>

using namespace sweep;

namespace {

ControlProfile ride(int n, double horizon, double omega, Vec2 v, double u0) {
    ControlProfile cp = ControlProfile::zeros({n, horizon});
    for (int i = 0; i <= n; ++i) {
        cp.omega[i] = omega;
        cp.v[i] = v;
        cp.u0[i] = u0;
    }
    return cp;
}

}  // namespace

TEST_CASE("exact field switches on at the boundary") {
    Scenario s;
    const Vec2 f_in = sweeping_field_exact({0.5, 0}, {0, 0}, {0.2, 0.1}, 1.0, s);
    CHECK(f_in == Vec2{0.2, 0.1});
    const Vec2 f_bd = sweeping_field_exact({1, 0}, {0, 0}, {0.2, 0.1}, 1.0, s);
    CHECK(f_bd.x == doctest::Approx(0.2 - 1.5));
    CHECK(f_bd.y == doctest::Approx(0.1));
    CHECK_THROWS_AS(sweeping_field_exact({2, 0}, {0, 0}, {}, 1.0, s), InfeasibleState);
}

TEST_CASE("smoothing coefficient") {
    Scenario s;
    CHECK(smoothing_coefficient(6.0, {1, 0}, {0, 0}, s) == doctest::Approx(1.5));
    CHECK(smoothing_coefficient(6.0, {0, 0}, {0, 0}, s) == doctest::Approx(6.0 * std::exp(-3.0)));
    CHECK(smoothing_coefficient(6.0, {5, 0}, {0, 0}, s) == 1.5);
    CHECK_THROWS_AS(smoothing_coefficient(1.5, {0, 0}, {0, 0}, s), ScheduleError);
}

TEST_CASE("schedules") {
    Scenario s;
    const SmoothingSchedule d = SmoothingSchedule::doubling(s, 64.0);
    REQUIRE(d.gammas.size() == 6);
    CHECK(d.gammas.front() == doctest::Approx(3.0));
    CHECK(d.gammas.back() == doctest::Approx(96.0));
    CHECK_NOTHROW(d.check(s));
    CHECK_THROWS_AS((SmoothingSchedule{{1.0, 3.0}}.check(s)), ScheduleError);
    CHECK_THROWS_AS((SmoothingSchedule{{4.0, 3.0}}.check(s)), ScheduleError);
    CHECK_THROWS_AS(SmoothingSchedule{}.check(s), ScheduleError);
}

TEST_CASE("control profile bounds") {
    Scenario s;
    ControlProfile cp = ride(4, 1.0, 1.0, {1, 0}, 0.5);
    CHECK_NOTHROW(cp.check(s));
    cp.u[2] = {2, 0};
    CHECK_THROWS_AS(cp.check(s), std::invalid_argument);
    cp.u[2] = {};
    cp.u0[1] = 1.5;
    CHECK_THROWS_AS(cp.check(s), std::invalid_argument);
    cp.u0[1] = 0.0;
    cp.omega[3] = -1.0;
    CHECK_THROWS_AS(cp.check(s), std::invalid_argument);
}

TEST_CASE("zero controls leave the state still") {
    Scenario s;
    const ControlProfile cp = ControlProfile::zeros({10, 1.0});
    const StateTrajectory tr = integrate_smooth(cp, {0.3, 0.1}, 12.0, s);
    CHECK(tr.T == 0.0);
    CHECK(tr.x.back() == Vec2{0.3, 0.1});
    CHECK(tr.z.back() == 0.0);
}

TEST_CASE("outer path and clock") {
    Scenario s;
    const ControlProfile cp = ride(20, 1.0, 3.0, {0.6, 0.8}, 0.0);
    const StateTrajectory tr = integrate_smooth(cp, {0, 0}, 12.0, s);
    CHECK(tr.T == doctest::Approx(3.0));
    CHECK(tr.y.back().x == doctest::Approx(1.8));
    CHECK(tr.y.back().y == doctest::Approx(2.4));
    CHECK(tr.t.back() == doctest::Approx(3.0));
}

TEST_CASE("catching-up keeps x in the small disk with a sufficient budget") {
    Scenario s;
    const ControlProfile cp = ride(200, 1.0, 2.0, {1, 0}, 1.0);
    const StateTrajectory tr = integrate_catchup(cp, {0, 0}, s);
    const ViolationReport vr = feasibility_monitor(tr, s);
    CHECK(vr.max_h_lower <= 1e-9);
    CHECK(tr.warnings.empty());
    CHECK(tr.first_violation == -1);
    // x trails y at distance R1 once swept.
    CHECK(norm(tr.x.back() - tr.y.back()) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("catching-up warns when the budget is too small") {
    Scenario s;
    s.M = 0.5;
    const ControlProfile cp = ride(50, 1.0, 2.0, {1, 0}, 1.0);
    const StateTrajectory tr = integrate_catchup(cp, {-1, 0}, s);
    CHECK_FALSE(tr.warnings.empty());
    CHECK(tr.first_violation >= 0);
}

TEST_CASE("smoothed runs approach the catching-up run") {
    Scenario s;
    const ControlProfile cp = ride(200, 1.0, 2.0, {1, 0}, 1.0);
    const std::vector<double> err = convergence_study(cp, {0, 0}, SmoothingSchedule::doubling(s, 64.0), s);
    REQUIRE(err.size() == 6);
    for (std::size_t k = 1; k < err.size(); ++k) CHECK(err[k] < err[k - 1]);
    CHECK(err.back() < 0.1);
}

TEST_CASE("RK4 substep count grows with gamma and is refinement-stable") {
    Scenario s;
    const ControlProfile cp = ride(20, 1.0, 2.0, {1, 0}, 1.0);
    CHECK(stable_substeps(cp, 96.0, s) >= stable_substeps(cp, 3.0, s));
    const StateTrajectory a = integrate_smooth(cp, {0, 0}, 24.0, s);
    const StateTrajectory b = integrate_smooth(cp, {0, 0}, 24.0, s, 64);
    CHECK(norm(a.x.back() - b.x.back()) < 1e-4);
}
