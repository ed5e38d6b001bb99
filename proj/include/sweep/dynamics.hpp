#pragma once

#include "sweep/geometry.hpp"
#include "sweep/vec2.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace sweep {

/// Uniform grid of N intervals on the reparametrized horizon [0, T*].
struct TimeGrid {
    int n_intervals = 50;
    double horizon = 1.0;

    int nodes() const { return n_intervals + 1; }
    double dt() const { return horizon / n_intervals; }
    double tau(int i) const { return horizon * i / n_intervals; }
    /// Trapezoid weight of node i.
    double weight(int i) const { return (i == 0 || i == n_intervals) ? 0.5 * dt() : dt(); }
};

struct ControlProfile {
    TimeGrid grid;
    std::vector<Vec2> v;
    std::vector<Vec2> u;
    std::vector<double> u0;
    std::vector<double> omega;

    static ControlProfile zeros(const TimeGrid& g);
    /// Throws std::invalid_argument naming the first out-of-bounds node.
    void check(const Scenario& s, double tol = 1e-9) const;
};

struct StateTrajectory {
    TimeGrid grid;
    std::vector<Vec2> y;
    std::vector<Vec2> x;
    std::vector<double> z;
    std::vector<double> t;
    double T = 0.0;

    // Filled by the catching-up integrator only.
    std::vector<double> u0_recorded;
    std::vector<std::string> warnings;
    int first_violation = -1;
};

struct SmoothingSchedule {
    std::vector<double> gammas;

    /// {2,4,...,2^k}·M/R1 up to `max_factor`.
    static SmoothingSchedule doubling(const Scenario& s, double max_factor = 64.0);
    void check(const Scenario& s) const;
};

struct ScheduleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InfeasibleState : std::domain_error {
    using std::domain_error::domain_error;
};

/// 2x2 matrix, row-major.
struct Mat2 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;
    Vec2 operator*(const Vec2& v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
    Vec2 tmul(const Vec2& v) const { return {a00 * v.x + a10 * v.y, a01 * v.x + a11 * v.y}; }
};

Vec2 drift_unsaturated(const Vec2& x, const Vec2& u, const Scenario& s);
Vec2 drift(const Vec2& x, const Vec2& u, const Scenario& s);
/// d f / d x, ignoring the saturation (never active on validated scenarios).
Mat2 drift_jacobian(const Vec2& x, const Vec2& u, const Scenario& s);

Vec2 sweeping_field_exact(const Vec2& x, const Vec2& y, const Vec2& u, double u0, const Scenario& s);

double smoothing_coefficient(double gamma, const Vec2& x, const Vec2& y, const Scenario& s);
Vec2 sweeping_field_smooth(const Vec2& x, const Vec2& y, const Vec2& u, double u0, double gamma, const Scenario& s);

/// Largest omega*dt*lambda per RK4 substep, lambda bounding the field's x-Jacobian.
inline constexpr double kRk4StableStep = 2.5;

/// RK4 substeps per interval that keep the smoothed field inside the stability region.
int stable_substeps(const ControlProfile& cp, double gamma, const Scenario& s);

/// RK4 with controls linear inside each interval; substeps <= 0 selects stable_substeps.
StateTrajectory integrate_smooth(const ControlProfile& cp, const Vec2& x_init, double gamma, const Scenario& s,
                                 int substeps = 0);
StateTrajectory integrate_catchup(const ControlProfile& cp, const Vec2& x_init, const Scenario& s);

struct ViolationReport {
    double max_h_lower = 0.0;
    int node_h_lower = 0;
    double max_h_upper = 0.0;
    int node_h_upper = 0;
    double terminal_distance = 0.0;
};

ViolationReport feasibility_monitor(const StateTrajectory& tr, const Scenario& s);

/// sup-norm distance of x between each smoothed run and the catching-up run.
std::vector<double> convergence_study(const ControlProfile& cp, const Vec2& x_init, const SmoothingSchedule& sched,
                                      const Scenario& s);

}  // namespace sweep
