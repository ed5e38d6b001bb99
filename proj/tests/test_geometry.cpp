#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweep/geometry.hpp"

#include <cmath>
#include <numbers>

using namespace sweep;

TEST_CASE("constraint functions") {
    Scenario s;
    CHECK(h_upper({0, 0}, s) == doctest::Approx(-0.5 * 81.0));
    CHECK(h_upper({9, 0}, s) == doctest::Approx(0.0));
    CHECK(h_lower({1, 0}, {0, 0}, s) == doctest::Approx(0.0));
    CHECK(h_lower({0, 0}, {0, 0}, s) == doctest::Approx(-0.5));
}

TEST_CASE("disk projection") {
    const Vec2 p = project_disk({3, 4}, {0, 0}, 1.0);
    CHECK(p.x == doctest::Approx(0.6));
    CHECK(p.y == doctest::Approx(0.8));
    const Vec2 q = project_disk({0.1, 0.2}, {0, 0}, 1.0);
    CHECK(q == Vec2{0.1, 0.2});
}

TEST_CASE("target distance for a point exit") {
    Scenario s;
    CHECK(target_distance({0, 0}, s) == doctest::Approx(9.0).epsilon(1e-9));
    CHECK(target_distance({9, 0}, s) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(target_distance({4, 0}, s) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(distance_to_exit({0, 0}, s) == doctest::Approx(10.0));
}

TEST_CASE("target distance for an arc exit") {
    Scenario s;
    s.exit = {-std::numbers::pi / 4, std::numbers::pi / 4};
    // Inside the cone of the arc the target circle is at radius R - R1.
    const double a = 0.3;
    CHECK(target_distance({std::cos(a), std::sin(a)}, s) == doctest::Approx(8.0).epsilon(1e-5));
    CHECK(target_distance({0, 0}, s) == doctest::Approx(9.0).epsilon(1e-5));
}

TEST_CASE("target set is shared and non-empty") {
    Scenario s;
    auto a = target_set(s);
    auto b = target_set(s);
    CHECK(a == b);
    CHECK_FALSE(a->empty());
    CHECK(a->point_count() > 100);
    const TargetHit hit = a->closest({0, 0});
    CHECK(std::abs(norm(hit.tangent) - 1.0) < 1e-12);
}

TEST_CASE("truncation window, closed form and sampled") {
    Scenario s;
    const TruncationBounds b = truncation_bounds(s);
    CHECK(b.M_bar == doctest::Approx(2.0));
    CHECK(b.m_bar == doctest::Approx(-2.0));
    CHECK_FALSE(b.degenerate);
    const TruncationBounds sb = truncation_bounds_sampled(s, 512);
    CHECK(sb.M_bar == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(sb.m_bar == doctest::Approx(-2.0).epsilon(1e-3));
    s.u_bound = 0.0;
    s.v_bound = 0.0;
    CHECK(truncation_bounds(s).degenerate);
    CHECK_THROWS_AS(truncation_bounds(s, 4), std::invalid_argument);
}

TEST_CASE("validation accepts the default and rejects each broken assumption") {
    Scenario s;
    CHECK(validate(s).ok);

    auto fails_on = [](const Scenario& bad, const std::string& tag) {
        const ValidationReport r = validate(bad);
        bool hit = false;
        for (const auto& f : r.failures) hit = hit || f.assumption == tag;
        return !r.ok && hit;
    };
    Scenario g = s;
    g.R1 = 20.0;
    CHECK(fails_on(g, "geometry"));
    Scenario h1 = s;
    h1.M1 = 0.5;
    CHECK(fails_on(h1, "H1"));
    Scenario h4 = s;
    h4.delta = 2.0;
    CHECK(fails_on(h4, "H4"));
    Scenario h5 = s;
    h5.M = 3.0;
    CHECK(fails_on(h5, "H5"));
    Scenario h5b = s;
    h5b.M = -3.0;
    CHECK(fails_on(h5b, "H5"));
}
