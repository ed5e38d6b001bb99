#include "sweep/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sweep {

QuadSup quad_sup(double a, double r) {
    if (a <= 0.0) return {0.0, 0.0};
    if (r <= 0.0) return {a, 1.0};
    if (a <= 2.0 * r) return {a * a / (4.0 * r), a / (2.0 * r)};
    return {a - r, 1.0};
}

double sigma_value(const Vec2& y, const Vec2& x, const Vec2& q_L, double nu_L, double r, const Scenario& s) {
    const Vec2 d = x - y;
    if (norm(d) < s.R1 - s.boundary_tol()) return 0.0;
    const double st = nu_L * s.R1 * s.R1 - dot(q_L, d);
    return quad_sup(s.cone_gain() * st, r).value;
}

double sigma_smooth_value(const Vec2& y, const Vec2& x, const Vec2& p_L, double mu_L, double lambda_bar, double gamma,
                          const Scenario& s) {
    const Vec2 d = x - y;
    const double c = smoothing_coefficient(gamma, x, y, s);
    const double st = mu_L * norm2(d) - dot(p_L, d);
    return quad_sup(c * st, lambda_bar).value;
}

HamiltonianTerms hamiltonian_terms(const Vec2& y, const Vec2& x, const Vec2& v, const Vec2& u, const Vec2& q_H,
                                   const Vec2& q_L, double nu_H, double nu_L, double r, SigmaMode mode, double gamma,
                                   const Scenario& s) {
    HamiltonianTerms h;
    const Vec2 d = x - y;
    const Vec2 f = drift(x, u, s);
    const Vec2 qt = q_L - d * nu_L;
    h.value = dot(q_H - (y - s.q0) * nu_H, v) + nu_L * dot(d, v) - r * norm2(u) + dot(qt, f);
    h.d_y = v * (-(nu_H + nu_L)) + f * nu_L;
    h.d_x = v * nu_L + drift_jacobian(x, u, s).tmul(qt) - f * nu_L;

    Vec2 da_dx;
    double a = 0.0;
    if (mode == SigmaMode::Exact) {
        if (norm(d) >= s.R1 - s.boundary_tol()) {
            const double st = nu_L * s.R1 * s.R1 - dot(q_L, d);
            a = s.cone_gain() * st;
            da_dx = q_L * (-s.cone_gain());
        }
    } else {
        const double cap = s.cone_gain();
        const double e = gamma * h_lower(x, y, s);
        const double raw = e > 700.0 ? std::numeric_limits<double>::infinity() : gamma * std::exp(e);
        const double c = std::min(cap, raw);
        const double st = nu_L * norm2(d) - dot(q_L, d);
        a = c * st;
        da_dx = (d * (2.0 * nu_L) - q_L) * c;
        if (raw < cap) da_dx += d * (gamma * c * st);
    }
    const QuadSup qs = quad_sup(a, r);
    h.sigma = qs.value;
    h.u0_star = qs.argmax;
    h.value += qs.value;
    h.d_x += da_dx * qs.argmax;
    h.d_y -= da_dx * qs.argmax;
    return h;
}

double hamiltonian_upper(const Vec2& y, const Vec2& x, const Vec2& v, const Vec2& u, const Vec2& q_H, const Vec2& q_L,
                         double nu_H, double nu_L, double r, const Scenario& s) {
    return hamiltonian_terms(y, x, v, u, q_H, q_L, nu_H, nu_L, r, SigmaMode::Exact, 0.0, s).value;
}

namespace {

bool node_counts(const ControlProfile& cp, int i) {
    const double wmax = *std::max_element(cp.omega.begin(), cp.omega.end());
    return cp.omega[i] > 1e-9 * std::max(wmax, 1e-300);
}

double dist_to_ray(const Vec2& w, const Vec2& dir) {
    const double p = dot(w, dir);
    if (p <= 0.0) return norm(w);
    return norm(w - dir * p);
}

struct AeSample {
    Vec2 qt;  // q_L - nu_L (x - y)
    double h = 0.0;
};

// Samples for the conditions that hold almost everywhere. Each interval is
// sampled at its midpoint, where nu is constant and q is continuous; a node
// takes the mean of its adjacent intervals, which is the weight the hat basis
// of the controls gives it.
std::vector<AeSample> ae_samples(const BilevelSolution& sol, const GamkrelidzeMultipliers& m, const Scenario& s) {
    const StateTrajectory& tr = sol.traj;
    const ControlProfile& cp = sol.decision.controls;
    const int n = static_cast<int>(tr.x.size());
    std::vector<AeSample> mid(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
        const Vec2 y = (tr.y[i] + tr.y[i + 1]) * 0.5;
        const Vec2 x = (tr.x[i] + tr.x[i + 1]) * 0.5;
        const Vec2 u = (cp.u[i] + cp.u[i + 1]) * 0.5;
        const Vec2 v = (cp.v[i] + cp.v[i + 1]) * 0.5;
        const Vec2 qL = (m.q_L[i] + m.q_L[i + 1]) * 0.5;
        const Vec2 qH = (m.q_H[i] + m.q_H[i + 1]) * 0.5;
        mid[i].qt = qL - (x - y) * m.nu_L[i];
        mid[i].h = hamiltonian_terms(y, x, v, u, qH, qL, m.nu_H[i], m.nu_L[i], m.r, SigmaMode::Smoothed,
                                     sol.gamma_final, s)
                       .value;
    }
    std::vector<AeSample> out(n);
    for (int i = 0; i < n; ++i) {
        if (i == 0) out[i] = mid.front();
        else if (i == n - 1) out[i] = mid.back();
        else out[i] = {(mid[i - 1].qt + mid[i].qt) * 0.5, 0.5 * (mid[i - 1].h + mid[i].h)};
    }
    return out;
}

}  // namespace

GamkrelidzeMultipliers extract_multipliers(const BilevelSolution& sol, const Scenario& s) {
    const Evaluation ev = outer_adjoint(sol, s);
    const StateTrajectory& tr = sol.traj;
    const int n = static_cast<int>(tr.x.size());
    GamkrelidzeMultipliers m;
    m.weight_L.assign(sol.lambda.begin(), sol.lambda.begin() + n);
    m.weight_H.assign(sol.lambda.begin() + n, sol.lambda.begin() + 2 * n);
    m.kappa = sol.lambda[2 * n];
    m.nu_L.assign(n, 0.0);
    m.nu_H.assign(n, 0.0);
    double aL = 0.0, aH = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        m.nu_L[i] = aL;
        m.nu_H[i] = aH;
        aL += m.weight_L[i];
        aH += m.weight_H[i];
    }
    m.q_H.assign(n, Vec2{});
    m.q_L.assign(n, Vec2{});
    for (int i = 0; i < n; ++i) {
        const Vec2 d = tr.x[i] - tr.y[i];
        const double tl = m.nu_L[i] + m.weight_L[i];
        const double th = m.nu_H[i] + m.weight_H[i];
        m.q_L[i] = -ev.a_x[i] + d * tl;
        m.q_H[i] = -ev.a_y[i] - d * tl + (tr.y[i] - s.q0) * th;
    }
    m.lambda = 1.0;
    m.r = sol.rho_final;

    double qmax = 0.0;
    for (int i = 0; i < n; ++i) qmax = std::max({qmax, norm(m.q_H[i]), norm(m.q_L[i])});
    const double total = qmax + aL + aH + m.lambda + m.r;
    if (!(total > 0.0)) return m;
    m.scale = total;
    const double k = 1.0 / total;
    for (int i = 0; i < n; ++i) {
        m.q_H[i] *= k;
        m.q_L[i] *= k;
        m.nu_H[i] *= k;
        m.nu_L[i] *= k;
        m.weight_H[i] *= k;
        m.weight_L[i] *= k;
    }
    m.lambda *= k;
    m.r *= k;
    m.kappa *= k;

    const LowerMultipliers& lm = sol.lower.multipliers;
    m.has_lower = lm.p_H.size() == static_cast<std::size_t>(n);
    if (m.has_lower) {
        m.zeta_v.assign(n, Vec2{});
        for (int i = 0; i < n; ++i) {
            const StateTrajectory& lt = sol.lower.traj;
            const Vec2 psi = lm.p_H[i] - (lt.y[i] - s.q0) * lm.mu_H[i] + (lt.x[i] - lt.y[i]) * lm.mu_L[i];
            m.zeta_v[i] = psi * (-1.0 / lm.lambda_bar);
        }
    }

    double hsum = 0.0;
    for (const AeSample& a : ae_samples(sol, m, s)) hsum += a.h;
    m.c = m.r > 0.0 ? (hsum / n - m.lambda) / m.r : 0.0;
    return m;
}


std::vector<double> max_u_gaps(const BilevelSolution& sol, const GamkrelidzeMultipliers& m, const Scenario& s) {
    const StateTrajectory& tr = sol.traj;
    const ControlProfile& cp = sol.decision.controls;
    const int n = static_cast<int>(tr.x.size());
    std::vector<double> gaps(n, 0.0);
    const std::vector<AeSample> ae = ae_samples(sol, m, s);
    for (int i = 0; i < n; ++i) {
        if (!node_counts(cp, i)) continue;
        const Vec2 qt = ae[i].qt;
        auto phi = [&](const Vec2& u) { return dot(qt, drift(tr.x[i], u, s)) - m.r * norm2(u); };
        const double nq = norm(qt);
        Vec2 ustar;
        if (nq > 0.0) {
            const double k = m.r > 0.0 ? std::min(1.0 / (2.0 * m.r), s.u_bound / nq) : s.u_bound / nq;
            ustar = qt * k;
        }
        gaps[i] = std::max(0.0, phi(ustar) - phi(cp.u[i]));
    }
    return gaps;
}

CertificateReport certify(const BilevelSolution& sol, const GamkrelidzeMultipliers& m, const Scenario& s,
                          CertificateTolerances tol) {
    CertificateReport rep;
    const StateTrajectory& tr = sol.traj;
    const ControlProfile& cp = sol.decision.controls;
    const int n = static_cast<int>(tr.x.size());
    const int N = n - 1;
    const double gamma = sol.gamma_final;
    if (tol.adjoint < 0.0) tol.adjoint = 10.0 / N;

    // 1. Nontriviality.
    double qmax = 0.0, tv = 0.0;
    for (int i = 0; i < n; ++i) {
        qmax = std::max({qmax, norm(m.q_H[i]), norm(m.q_L[i])});
        tv += m.weight_H[i] + m.weight_L[i];
    }
    rep.nontriviality = qmax + tv + m.lambda + m.r;
    rep.conditions.push_back({"1 nontriviality", rep.nontriviality, 0.0, rep.nontriviality > 1e-12, false,
                              "normalized multiplier norm"});

    // 2. Adjoint equations, backward differences in physical time.
    auto terms = [&](int i, int nu_index) {
        return hamiltonian_terms(tr.y[i], tr.x[i], cp.v[i], cp.u[i], m.q_H[i], m.q_L[i], m.nu_H[nu_index],
                                 m.nu_L[nu_index], m.r, SigmaMode::Smoothed, gamma, s);
    };
    for (int i = 1; i < n; ++i) {
        const double dt = tr.t[i] - tr.t[i - 1];
        if (!(dt > 1e-12)) continue;
        const HamiltonianTerms a = terms(i - 1, i - 1);
        const HamiltonianTerms b = terms(i, i - 1);
        const Vec2 qh_dot = (m.q_H[i] - m.q_H[i - 1]) * (1.0 / dt);
        const Vec2 ql_dot = (m.q_L[i] - m.q_L[i - 1]) * (1.0 / dt);
        rep.adjoint_H = std::max(rep.adjoint_H, norm(qh_dot + (a.d_y + b.d_y) * 0.5));
        rep.adjoint_L = std::max(rep.adjoint_L, norm(ql_dot + (a.d_x + b.d_x) * 0.5));
    }
    rep.conditions.push_back({"2 adjoint q_H", rep.adjoint_H, tol.adjoint, rep.adjoint_H <= tol.adjoint, false,
                              "sup |dq_H/dt + d_y H_H|"});
    rep.conditions.push_back({"2 adjoint q_L", rep.adjoint_L, tol.adjoint, rep.adjoint_L <= tol.adjoint, false,
                              "sup |dq_L/dt + d_x H_H|"});

    // 3. Boundary conditions.
    rep.boundary.assign(4, 0.0);
    {
        const Vec2 d0 = tr.x[0] - tr.y[0];
        const Vec2 w = m.q_L[0] - d0 * m.nu_L[0];
        if (norm(d0) >= s.R1 * (1.0 - 1e-6)) rep.boundary[1] = dist_to_ray(w, d0 * (1.0 / norm(d0)));
        else rep.boundary[1] = norm(w);
        const Vec2 dN = tr.x[N] - tr.y[N];
        rep.boundary[2] = norm(m.q_L[N] - dN * m.nu_L[N]);
        const Vec2 wH = m.q_H[N] - (tr.y[N] - s.q0) * m.nu_H[N] + dN * m.nu_L[N];
        const TargetHit hit = target_set(s)->closest(tr.y[N]);
        Vec2 tangent = hit.tangent;
        if (hit.distance > 1e-12 * s.R) {
            const Vec2 nrm = (tr.y[N] - hit.point) * (1.0 / hit.distance);
            tangent = {-nrm.y, nrm.x};
        }
        rep.boundary[3] = std::abs(dot(wH, tangent));
    }
    const char* bnames[4] = {"3 boundary q_H(0)", "3 boundary q_L(0)", "3 boundary q_L(T)", "3 boundary q_H(T)"};
    for (int k = 0; k < 4; ++k)
        rep.conditions.push_back({bnames[k], rep.boundary[k], tol.boundary, rep.boundary[k] <= tol.boundary, false, ""});

    // 4. Conservation law.
    rep.hamiltonian.resize(n);
    {
        const std::vector<AeSample> ae = ae_samples(sol, m, s);
        for (int i = 0; i < n; ++i) rep.hamiltonian[i] = ae[i].h;
    }
    {
        std::vector<double> hv;
        for (int i = 0; i < n; ++i)
            if (node_counts(cp, i)) hv.push_back(rep.hamiltonian[i]);
        const double mean = std::accumulate(hv.begin(), hv.end(), 0.0) / hv.size();
        double var = 0.0;
        for (double h : hv) var += (h - mean) * (h - mean);
        rep.conservation_mean = mean;
        rep.conservation_stdev = std::sqrt(var / hv.size());
        rep.conservation_offset = std::abs(mean - (m.lambda + m.r * m.c));
        const double lim = tol.conservation * (m.lambda + std::abs(m.r * m.c) + 1.0);
        rep.conditions.push_back({"4 conservation stdev", rep.conservation_stdev, lim, rep.conservation_stdev <= lim,
                                  false, "stdev of H_H over nodes"});
    }

    // 5. Lower control maximum condition.
    {
        const std::vector<double> gaps = max_u_gaps(sol, m, s);
        rep.max_u_gap = *std::max_element(gaps.begin(), gaps.end());
        rep.conditions.push_back({"5 max condition u", rep.max_u_gap, tol.max_u, rep.max_u_gap <= tol.max_u, false,
                                  "max_i sup_u Phi - Phi(u_i)"});
    }

    // 6. Upper control maximum condition with the value-function selection.
    if (!m.has_lower) {
        rep.conditions.push_back({"6 max condition v", 0.0, tol.max_v, true, true, "no lower multipliers"});
    } else {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!node_counts(cp, i)) continue;
            const Vec2 d = tr.x[i] - tr.y[i];
            const Vec2 psi = m.q_H[i] - (tr.y[i] - s.q0) * m.nu_H[i] + d * m.nu_L[i];
            const Vec2 w = psi + m.zeta_v[i] * m.r;
            const double nv = norm(cp.v[i]);
            double dist;
            if (s.v_bound > 0.0 && nv >= s.v_bound * (1.0 - 1e-6)) dist = dist_to_ray(w, cp.v[i] * (1.0 / nv));
            else dist = norm(w);
            const double scale = norm(psi) + m.r * norm(m.zeta_v[i]) + 1e-300;
            worst = std::max(worst, dist / scale);
        }
        rep.max_v_residual = worst;
        rep.conditions.push_back({"6 max condition v", worst, tol.max_v, worst <= tol.max_v, false,
                                  "relative distance to N_V(v)"});
    }

    // Monotonicity and constancy off the active sets.
    {
        double viol = 0.0;
        for (int i = 1; i < n; ++i) {
            viol += std::max(0.0, m.nu_L[i] - m.nu_L[i - 1]) + std::max(0.0, m.nu_H[i] - m.nu_H[i - 1]);
        }
        const double tl = 1e-4 * s.R1 * s.R1;
        for (int i = 0; i < n; ++i) {
            if (h_lower(tr.x[i], tr.y[i], s) < -tl) viol += m.weight_L[i];
            if (h_upper(tr.y[i], s) < -tl) viol += m.weight_H[i];
        }
        rep.monotonicity = viol;
        rep.conditions.push_back({"nu monotone/constancy", viol, tol.monotone, viol <= tol.monotone, false, ""});
    }

    rep.pass = true;
    for (const auto& c : rep.conditions)
        if (!c.skipped && !c.pass) rep.pass = false;
    return rep;
}

}  // namespace sweep
