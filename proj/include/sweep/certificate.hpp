#pragma once

#include "sweep/solver.hpp"

#include <string>
#include <vector>

namespace sweep {

/// sup over u0 in [0,1] of a*u0 - r*u0^2, and its maximizer.
struct QuadSup {
    double value = 0.0;
    double argmax = 0.0;
};
QuadSup quad_sup(double a, double r);

/// sigma for the exact truncated cone; zero unless |x-y| is within boundary_tol of R1.
double sigma_value(const Vec2& y, const Vec2& x, const Vec2& q_L, double nu_L, double r, const Scenario& s);

/// Smoothed counterpart with c = smoothing_coefficient(gamma, x, y).
double sigma_smooth_value(const Vec2& y, const Vec2& x, const Vec2& p_L, double mu_L, double lambda_bar, double gamma,
                          const Scenario& s);

double hamiltonian_upper(const Vec2& y, const Vec2& x, const Vec2& v, const Vec2& u, const Vec2& q_H, const Vec2& q_L,
                         double nu_H, double nu_L, double r, const Scenario& s);

/// Which sigma enters the Hamiltonian and its gradients.
enum class SigmaMode {
    Exact,     // indicator of the boundary, gradients of sigma~ as -q_L / +q_L
    Smoothed,  // c(gamma,x,y) everywhere, full gradients
};

struct HamiltonianTerms {
    double value = 0.0;
    Vec2 d_y;  // gradient in y with multipliers held fixed
    Vec2 d_x;
    double sigma = 0.0;
    double u0_star = 0.0;
};

HamiltonianTerms hamiltonian_terms(const Vec2& y, const Vec2& x, const Vec2& v, const Vec2& u, const Vec2& q_H,
                                   const Vec2& q_L, double nu_H, double nu_L, double r, SigmaMode mode, double gamma,
                                   const Scenario& s);

struct GamkrelidzeMultipliers {
    std::vector<Vec2> q_H, q_L;
    std::vector<double> nu_H, nu_L;  // right-limit value at each node
    std::vector<double> weight_H, weight_L;  // nodal jumps, nu_i = sum_{j>i} weight_j
    double lambda = 0.0;
    double r = 0.0;
    double c = 0.0;
    double scale = 1.0;  // normalization divisor applied
    double kappa = 0.0;  // terminal multiplier
    // Lower-level selections in physical time (normalized to lambda_bar = 1).
    std::vector<Vec2> zeta_v;
    bool has_lower = false;
};

GamkrelidzeMultipliers extract_multipliers(const BilevelSolution& sol, const Scenario& s);

struct CertificateTolerances {
    double adjoint = -1.0;  // negative: 10/N
    double conservation = 1e-3;
    double max_u = 1e-4;
    double boundary = 1e-6;
    double max_v = 5e-2;
    double monotone = 1e-12;
};

struct ConditionResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

struct CertificateReport {
    std::vector<ConditionResult> conditions;
    double nontriviality = 0.0;
    double adjoint_H = 0.0;
    double adjoint_L = 0.0;
    std::vector<double> boundary;  // q_H(0), q_L(0), q_L(T), q_H(T)
    double conservation_stdev = 0.0;
    double conservation_mean = 0.0;
    double conservation_offset = 0.0;  // |mean - (lambda + r c)|
    double max_u_gap = 0.0;
    double max_v_residual = 0.0;
    double monotonicity = 0.0;
    std::vector<double> hamiltonian;  // H_H at nodes
    bool pass = false;
};

CertificateReport certify(const BilevelSolution& sol, const GamkrelidzeMultipliers& mults, const Scenario& s,
                          CertificateTolerances tol = {});

/// Per-node gap max_u Phi(u) - Phi(u_i) of the lower control maximum condition.
std::vector<double> max_u_gaps(const BilevelSolution& sol, const GamkrelidzeMultipliers& mults, const Scenario& s);

}  // namespace sweep
