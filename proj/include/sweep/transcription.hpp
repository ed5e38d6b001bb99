#pragma once

#include "sweep/dynamics.hpp"

#include <functional>
#include <vector>

namespace sweep {

struct DecisionVector {
    Vec2 x_init;
    ControlProfile controls;
};

/// Value of the lower problem at (omega, v) with a gradient selection.
struct ValueGradient {
    double value = 0.0;
    std::vector<double> d_omega;
    std::vector<Vec2> d_v;
    bool ok = true;
};

using LowerCallback = std::function<ValueGradient(const std::vector<double>& omega, const std::vector<Vec2>& v)>;

/// Residual order: h_lower at nodes 0..N, h_upper at nodes 0..N, terminal
/// target_distance(y_N) - target_tol.
struct Evaluation {
    double objective = 0.0;
    double z_final = 0.0;
    double t_final = 0.0;
    double phi = 0.0;
    double merit = 0.0;
    std::vector<double> residuals;
    std::vector<double> weights;
    StateTrajectory traj;

    // Gradient of objective + sum_j weights[j] * residuals[j].
    bool has_gradient = false;
    Vec2 g_x_init;
    std::vector<Vec2> g_v, g_u;
    std::vector<double> g_u0, g_omega;
    // Adjoint of (y, x) at each node, after the node's own residual terms.
    std::vector<Vec2> a_y, a_x;
};

class NLPInstance {
public:
    enum class Kind { Lower, Penalized };

    Kind kind = Kind::Lower;
    Scenario scenario;
    TimeGrid grid;
    double gamma = 0.0;
    double rho = 0.0;
    double target_tol = 0.0;
    double omega_max = 1e9;
    int substeps = 0;  // RK4 substeps per interval; 0 selects stable_substeps per evaluation
    // Lower kind only.
    std::vector<double> omega_fixed;
    std::vector<Vec2> v_fixed;
    // Penalized kind with rho > 0.
    LowerCallback lower_solver;

    int residual_count() const { return 2 * grid.nodes() + 1; }
    int variable_count() const;

    /// Fills the fixed (omega, v) for the lower kind.
    DecisionVector normalize(const DecisionVector& d) const;

    double objective(const DecisionVector& d) const;
    std::vector<double> residuals(const DecisionVector& d) const;
    Evaluation evaluate(const DecisionVector& d, const std::vector<double>* weights, bool gradient) const;

    /// PHR augmented Lagrangian: merit = objective + sum over masked residuals of
    /// (max(0, l + mu g)^2 - l^2) / (2 mu); gradient weights max(0, l + mu g).
    Evaluation evaluate_al(const DecisionVector& d, const std::vector<double>& lambda, double mu,
                           const std::vector<char>& mask, bool gradient) const;

    // Flat view of the free variables: x_init, then v, u, u0, omega
    // (v and omega are absent for the lower kind).
    std::vector<double> pack(const DecisionVector& d) const;
    DecisionVector unpack(const std::vector<double>& z) const;
    std::vector<double> pack_gradient(const Evaluation& e) const;
    struct ALTerms {
        const std::vector<double>* lambda;
        double mu;
        const std::vector<char>* mask;
    };
    Evaluation evaluate_impl(const DecisionVector& d, const std::vector<double>* weights, bool gradient,
                             const ALTerms* al) const;

    /// Euclidean projection onto the control sets and x_init onto the initial disk.
    void project(std::vector<double>& z) const;
};

NLPInstance assemble_lower(const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma,
                           const Scenario& s, const TimeGrid& grid);

NLPInstance assemble_penalized(double rho, double gamma, const Scenario& s, const TimeGrid& grid,
                               LowerCallback lower_solver);

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;
    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

/// Central differences; row 0 is the objective, rows 1.. the residuals,
/// columns follow NLPInstance::pack.
Matrix fd_jacobian(const NLPInstance& nlp, const DecisionVector& point, double h);

}  // namespace sweep
