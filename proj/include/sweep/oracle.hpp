#pragma once

#include "sweep/dynamics.hpp"

#include <functional>
#include <vector>

namespace sweep {

/// Enumeration grid. Controls are piecewise constant on each of the
/// n_intervals intervals; every control component takes levels_per_control
/// evenly spaced values over its range (balls are clipped radially).
struct EnumSpec {
    int n_intervals = 4;
    int levels_per_control = 3;
    double horizon = 1.0;
    /// omega levels are j * omega_step, j = 0..levels-1; 0 selects 2 d / b_V / (levels-1).
    double omega_step = 0.0;

    void check() const;
    std::size_t lower_combinations() const;
};

struct OracleCandidate {
    double value = 0.0;
    Vec2 x_init;
    std::vector<Vec2> u;
    std::vector<double> u0;
};

struct LowerOracleResult {
    bool feasible = false;
    double value = 0.0;
    OracleCandidate best;
    std::vector<OracleCandidate> top;  // up to 10, best first
    std::size_t evaluated = 0;
};

/// omega and v hold one value per interval.
LowerOracleResult brute_lower(const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma,
                              const EnumSpec& spec, const Scenario& s);

/// Stops at the first feasible combination; used for feasibility screening.
bool lower_feasible(const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma, const EnumSpec& spec,
                    const Scenario& s);

/// Node-valued view of interval controls (last node repeats the last interval).
ControlProfile hold_profile(const std::vector<double>& omega, const std::vector<Vec2>& v, const std::vector<Vec2>& u,
                            const std::vector<double>& u0, double horizon);

/// Explicit Euler with the smoothed field; z and t use the left node (exact for held controls).
StateTrajectory euler_trajectory(const ControlProfile& cp, const Vec2& x_init, double gamma, const Scenario& s);

struct BilevelOracleResult {
    bool feasible = false;
    double T_best = 0.0;
    double grid_step = 0.0;  // time resolution of the omega grid
    std::vector<double> omega;
    std::vector<Vec2> v;
    double phi = 0.0;
    std::size_t candidates = 0;
    std::size_t lower_checks = 0;
};

BilevelOracleResult brute_bilevel(const EnumSpec& spec, const Scenario& s, double gamma);

/// max over a u0 grid of <q_L - nu_L (x-y), -(M/R1)(x-y) u0> - r u0^2.
double sigma_sup_oracle(const Vec2& q_L, double nu_L, double r, const Vec2& x, const Vec2& y, const Scenario& s,
                        int grid_pts);

/// Same sup with an arbitrary gain c in place of M/R1.
double sigma_sup_oracle_gain(const Vec2& q_L, double nu_L, double r, const Vec2& x, const Vec2& y, double gain,
                             int grid_pts);

struct FDCheckReport {
    double max_rel_error = 0.0;
    std::vector<double> fd;
    std::vector<double> analytic;
};

FDCheckReport fd_check(const std::function<double(const std::vector<double>&)>& fn, const std::vector<double>& point,
                       const std::vector<std::vector<double>>& directions, const std::vector<double>& gradient,
                       double h);

}  // namespace sweep
