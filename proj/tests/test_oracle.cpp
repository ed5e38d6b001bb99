#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweep/oracle.hpp"

#include <cmath>

using namespace sweep;

TEST_CASE("frozen N=2 lower enumeration matches the independent reference") {
    // Value produced by tests/reference/brute_lower_n2.py.
    constexpr double kReference = 1.9999999999999996;
    Scenario s;
    const EnumSpec spec{2, 3, 1.0, 0.0};
    const LowerOracleResult r = brute_lower({4.0, 4.0}, {{1, 0}, {0.6, 0.8}}, 6.0, spec, s);
    REQUIRE(r.feasible);
    CHECK(r.value == doctest::Approx(kReference).epsilon(1e-12));
    CHECK(r.top.size() <= 10);
    for (std::size_t i = 1; i < r.top.size(); ++i) CHECK(r.top[i - 1].value <= r.top[i].value);
    CHECK(r.best.value == r.value);
}

TEST_CASE("enumeration is deterministic") {
    Scenario s;
    const EnumSpec spec{2, 3, 1.0, 0.0};
    const LowerOracleResult a = brute_lower({4.0, 4.0}, {{1, 0}, {0.6, 0.8}}, 6.0, spec, s);
    const LowerOracleResult b = brute_lower({4.0, 4.0}, {{1, 0}, {0.6, 0.8}}, 6.0, spec, s);
    CHECK(a.value == b.value);
    CHECK(a.best.x_init == b.best.x_init);
    CHECK(a.evaluated == b.evaluated);
}

TEST_CASE("still outer agent needs no correction") {
    Scenario s;
    const EnumSpec spec{2, 3, 1.0, 0.0};
    const LowerOracleResult r = brute_lower({0.0, 0.0}, {{}, {}}, 6.0, spec, s);
    REQUIRE(r.feasible);
    CHECK(r.value == 0.0);
    CHECK(lower_feasible({0.0, 0.0}, {{}, {}}, 6.0, spec, s));
}

TEST_CASE("infeasible when the outer agent outruns the budget") {
    Scenario s;
    s.M = 0.0;
    s.u_bound = 0.1;
    const EnumSpec spec{2, 3, 1.0, 0.0};
    CHECK(lower_feasible({2.0, 0.0}, {{1, 0}, {1, 0}}, 6.0, spec, s));
    CHECK_FALSE(lower_feasible({4.0, 4.0}, {{1, 0}, {1, 0}}, 6.0, spec, s));
    CHECK_FALSE(brute_lower({4.0, 4.0}, {{1, 0}, {1, 0}}, 6.0, spec, s).feasible);
}

TEST_CASE("enumeration limits") {
    CHECK_THROWS_AS((EnumSpec{4, 4, 1.0, 0.0}.check()), std::invalid_argument);
    CHECK_THROWS_AS((EnumSpec{2, 1, 1.0, 0.0}.check()), std::invalid_argument);
    CHECK_THROWS_AS((EnumSpec{0, 3, 1.0, 0.0}.check()), std::invalid_argument);
    CHECK(EnumSpec{2, 3, 1.0, 0.0}.lower_combinations() == 27u * 27u * 17u);
    Scenario s;
    CHECK_THROWS_AS(brute_lower({1.0, 1.0}, {{}, {}}, 1.0, EnumSpec{2, 3, 1.0, 0.0}, s), ScheduleError);
}

TEST_CASE("Euler trajectory on held controls") {
    Scenario s;
    const ControlProfile cp = hold_profile({2.0, 2.0}, {{1, 0}, {0, 1}}, {{0.5, 0}, {0, 0}}, {0.0, 0.0}, 1.0);
    REQUIRE(cp.grid.nodes() == 3);
    CHECK(cp.omega[2] == 2.0);
    const StateTrajectory tr = euler_trajectory(cp, {0, 0}, 6.0, s);
    CHECK(tr.y[2].x == doctest::Approx(1.0));
    CHECK(tr.y[2].y == doctest::Approx(1.0));
    CHECK(tr.x[1].x == doctest::Approx(0.5));
    CHECK(tr.z.back() == doctest::Approx(0.25));
    CHECK(tr.T == doctest::Approx(2.0));
}

TEST_CASE("sampled sigma sup agrees with brute force over u0") {
    const Vec2 q{0.3, -1.2}, x{1, 0}, y{0, 0};
    const double v = sigma_sup_oracle_gain(q, 0.4, 0.2, x, y, 1.5, 1001);
    double best = -1e300;
    for (int k = 0; k <= 1000; ++k) {
        const double u0 = k / 1000.0;
        const Vec2 d = x - y;
        best = std::max(best, dot(q - d * 0.4, d * (-1.5 * u0)) - 0.2 * u0 * u0);
    }
    CHECK(v == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("fd_check on a smooth function") {
    auto fn = [](const std::vector<double>& p) { return p[0] * p[0] + 3.0 * p[1]; };
    const std::vector<double> pt{1.0, 2.0};
    const FDCheckReport ok = fd_check(fn, pt, {{1, 0}, {0, 1}, {1, 1}}, {2.0, 3.0}, 1e-5);
    CHECK(ok.max_rel_error < 1e-8);
    const FDCheckReport bad = fd_check(fn, pt, {{1, 0}}, {1.0, 3.0}, 1e-5);
    CHECK(bad.max_rel_error > 0.1);
}

TEST_CASE("tiny bilevel enumeration reaches the exit") {
    Scenario s;
    const BilevelOracleResult r = brute_bilevel(EnumSpec{2, 3, 1.0, 0.0}, s, 6.0);
    REQUIRE(r.feasible);
    CHECK(r.T_best >= 9.0 - r.grid_step - 1e-9);
    CHECK(r.candidates > 0u);
}
