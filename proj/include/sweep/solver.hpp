#pragma once

#include "sweep/transcription.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sweep {

struct SolverOptions {
    TimeGrid grid{40, 1.0};
    int max_inner_iters = 600;
    int max_al_rounds = 40;
    double feas_tol = 1e-8;
    double opt_tol = 1e-9;
    double omega_max = 1e3;
    int seeds = 8;
    std::uint64_t seed = 1;
    std::vector<double> rho_schedule{0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
    std::vector<double> gamma_schedule;  // empty: {2,...,64}·M/R1
    unsigned threads = 0;                // 0: hardware concurrency
};

/// Result of the augmented-Lagrangian projected-gradient driver.
struct ALResult {
    std::vector<double> z;
    std::vector<double> lambda;  // one per residual
    double objective = 0.0;
    double max_violation = 0.0;
    double stationarity = 0.0;
    int iterations = 0;
    int rounds = 0;
    bool converged = false;
    bool stalled = false;  // feasible and no further descent found
};

struct ALOptions {
    int max_inner_iters = 600;
    int max_rounds = 40;
    double feas_tol = 1e-8;
    double opt_tol = 1e-9;
    double mu0 = 10.0;
    double mu_max = 1e8;
    double rel_obj_tol = 1e-10;  // feasible rounds with a smaller change count as stalled
};

/// Residual j is a constraint iff mask[j] != 0.
ALResult augmented_lagrangian(const NLPInstance& nlp, std::vector<double> z0, const std::vector<char>& mask,
                              std::vector<double> lambda0, const ALOptions& opt, double mu_init = 0.0);

struct LowerMultipliers {
    std::vector<Vec2> p_H, p_L;
    std::vector<double> mu_H, mu_L;  // non-increasing, right-limit at each node
    std::vector<double> weights_L;   // nodal constraint weights
    double lambda_bar = 1.0;
    std::vector<Vec2> zeta2;
    std::vector<double> zeta1;
};

struct LowerSolution {
    Vec2 x_init;
    std::vector<Vec2> u;
    std::vector<double> u0;
    double value = 0.0;
    LowerMultipliers multipliers;
    StateTrajectory traj;
    // Derivative of the discrete value with respect to node controls (envelope form).
    std::vector<double> grad_omega;
    std::vector<Vec2> grad_v;
    bool converged = false;
    int iterations = 0;
    double max_violation = 0.0;
    std::string status;
};

LowerSolution solve_lower(const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma,
                          const Scenario& s, const SolverOptions& opts, const LowerSolution* warm = nullptr);

struct AdjointArcs {
    std::vector<Vec2> p_H, p_L;
};

/// Backward Euler integration of the smoothed lower adjoint system from the
/// given terminal values, with the multiplier functions held fixed.
AdjointArcs adjoint_sweep(const StateTrajectory& tr, const ControlProfile& cp, const Vec2& p_H_final,
                          const Vec2& p_L_final, const std::vector<double>& mu_H, const std::vector<double>& mu_L,
                          double lambda_bar, double gamma, const Scenario& s);

struct ValueSubgradient {
    std::vector<double> zeta1;
    std::vector<Vec2> zeta2;      // with the N_V(v) component removed
    std::vector<Vec2> zeta2_raw;  // before the projection
};

/// Throws std::domain_error when lambda_bar == 0.
ValueSubgradient value_subgradient(const std::vector<double>& omega, const std::vector<Vec2>& v,
                                   const LowerSolution& lower, const Scenario& s, double gamma);

struct StageRecord {
    double gamma = 0.0;
    double rho = 0.0;
    double T = 0.0;
    double objective = 0.0;
    double gap_before_sync = 0.0;
    double gap = 0.0;
    double max_violation = 0.0;
    int iterations = 0;
    bool converged = false;
    int syncs = 0;                   // lower resyncs within the stage
    std::vector<double> incumbents;  // t + rho * gap after each resync
};

struct BilevelSolution {
    DecisionVector decision;
    StateTrajectory traj;
    double T_star = 0.0;
    double gamma_final = 0.0;
    double rho_final = 0.0;
    LowerSolution lower;
    std::vector<double> lambda;  // outer multipliers, one per residual
    std::vector<StageRecord> history;
    bool feasible = false;
    double max_violation = 0.0;
    std::string status;
};

BilevelSolution solve_bilevel(const Scenario& s, const SolverOptions& opts);

/// z(T*) - phi(omega, v) for the stored decision and lower solution.
double penalty_gap(const BilevelSolution& sol);

/// Discrete Lagrangian gradient of the outer problem at the solution; used by
/// multiplier extraction. Returns the full evaluation with adjoint arcs.
Evaluation outer_adjoint(const BilevelSolution& sol, const Scenario& s);

}  // namespace sweep
