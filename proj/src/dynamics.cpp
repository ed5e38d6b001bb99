#include "sweep/dynamics.hpp"

#include "rk4_detail.hpp"

#include <algorithm>
#include <cmath>

namespace sweep {

ControlProfile ControlProfile::zeros(const TimeGrid& g) {
    ControlProfile cp;
    cp.grid = g;
    const int n = g.nodes();
    cp.v.assign(n, Vec2{});
    cp.u.assign(n, Vec2{});
    cp.u0.assign(n, 0.0);
    cp.omega.assign(n, 0.0);
    return cp;
}

void ControlProfile::check(const Scenario& s, double tol) const {
    const auto n = static_cast<std::size_t>(grid.nodes());
    if (grid.n_intervals < 2) throw std::invalid_argument("control grid needs N >= 2");
    if (v.size() != n || u.size() != n || u0.size() != n || omega.size() != n)
        throw std::invalid_argument("control profile size does not match grid");
    for (std::size_t i = 0; i < n; ++i) {
        const std::string at = " at node " + std::to_string(i);
        if (norm(v[i]) > s.v_bound + tol) throw std::invalid_argument("|v| exceeds b_V" + at);
        if (norm(u[i]) > s.u_bound + tol) throw std::invalid_argument("|u| exceeds b_U" + at);
        if (u0[i] < -tol || u0[i] > 1.0 + tol) throw std::invalid_argument("u0 outside [0,1]" + at);
        if (omega[i] < -tol) throw std::invalid_argument("omega negative" + at);
    }
}

SmoothingSchedule SmoothingSchedule::doubling(const Scenario& s, double max_factor) {
    SmoothingSchedule out;
    for (double f = 2.0; f <= max_factor * (1.0 + 1e-12); f *= 2.0) out.gammas.push_back(f * s.cone_gain());
    return out;
}

void SmoothingSchedule::check(const Scenario& s) const {
    if (gammas.empty()) throw ScheduleError("empty smoothing schedule");
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        if (!(gammas[k] > s.cone_gain())) throw ScheduleError("gamma must exceed M/R1");
        if (k > 0 && !(gammas[k] > gammas[k - 1])) throw ScheduleError("gamma schedule must be strictly increasing");
    }
}

Vec2 drift_unsaturated(const Vec2& x, const Vec2& u, const Scenario& s) {
    if (s.drift.kind == DriftKind::Identity) return u;
    const auto& A = s.drift.A;
    return Vec2{A[0] * x.x + A[1] * x.y, A[2] * x.x + A[3] * x.y} + u;
}

Vec2 drift(const Vec2& x, const Vec2& u, const Scenario& s) {
    if (s.drift.kind == DriftKind::Identity) return u;
    return clip_norm(drift_unsaturated(x, u, s), s.M1);
}

Mat2 drift_jacobian(const Vec2&, const Vec2&, const Scenario& s) {
    if (s.drift.kind == DriftKind::Identity) return {};
    const auto& A = s.drift.A;
    return {A[0], A[1], A[2], A[3]};
}

Vec2 sweeping_field_exact(const Vec2& x, const Vec2& y, const Vec2& u, double u0, const Scenario& s) {
    const double tol = s.boundary_tol();
    const double r = norm(x - y);
    if (r > s.R1 + tol) throw InfeasibleState("x lies outside the small disk");
    const Vec2 f = drift(x, u, s);
    if (r >= s.R1 - tol) return f - (x - y) * (s.cone_gain() * u0);
    return f;
}

double smoothing_coefficient(double gamma, const Vec2& x, const Vec2& y, const Scenario& s) {
    const double cap = s.cone_gain();
    if (!(gamma > cap)) throw ScheduleError("gamma must exceed M/R1");
    const double e = gamma * h_lower(x, y, s);
    if (e > 700.0) return cap;
    return std::min(cap, gamma * std::exp(e));
}

Vec2 sweeping_field_smooth(const Vec2& x, const Vec2& y, const Vec2& u, double u0, double gamma, const Scenario& s) {
    const double c = smoothing_coefficient(gamma, x, y, s);
    return drift(x, u, s) - (x - y) * (u0 * c);
}

namespace {

StateTrajectory empty_like(const ControlProfile& cp, const Scenario& s, const Vec2& x_init) {
    StateTrajectory tr;
    tr.grid = cp.grid;
    const int n = cp.grid.nodes();
    tr.y.assign(n, s.y0);
    tr.x.assign(n, x_init);
    tr.z.assign(n, 0.0);
    tr.t.assign(n, 0.0);
    return tr;
}

void accumulate_quadrature(StateTrajectory& tr, const ControlProfile& cp, const std::vector<double>& u0) {
    const double dt = cp.grid.dt();
    for (int i = 0; i < cp.grid.n_intervals; ++i) {
        const double l0 = (norm2(cp.u[i]) + u0[i] * u0[i]) * cp.omega[i];
        const double l1 = (norm2(cp.u[i + 1]) + u0[i + 1] * u0[i + 1]) * cp.omega[i + 1];
        tr.z[i + 1] = tr.z[i] + 0.5 * dt * (l0 + l1);
        tr.t[i + 1] = tr.t[i] + 0.5 * dt * (cp.omega[i] + cp.omega[i + 1]);
    }
    tr.T = tr.t.back();
}

}  // namespace

int stable_substeps(const ControlProfile& cp, double gamma, const Scenario& s) {
    double wmax = 0.0;
    for (double w : cp.omega) wmax = std::max(wmax, std::abs(w));
    const auto& A = s.drift.A;
    const double lip = s.drift.kind == DriftKind::Affine
                           ? std::sqrt(A[0] * A[0] + A[1] * A[1] + A[2] * A[2] + A[3] * A[3])
                           : 0.0;
    const double stiff = s.cone_gain() * (1.0 + gamma * s.R1 * s.R1) + lip;
    const double m = std::ceil(wmax * cp.grid.dt() * stiff / kRk4StableStep);
    return static_cast<int>(std::clamp(m, 1.0, 4096.0));
}

StateTrajectory integrate_smooth(const ControlProfile& cp, const Vec2& x_init, double gamma, const Scenario& s,
                                 int substeps) {
    StateTrajectory tr = empty_like(cp, s, x_init);
    const int m = substeps > 0 ? substeps : stable_substeps(cp, gamma, s);
    const double h = cp.grid.dt() / m;
    for (int i = 0; i < cp.grid.n_intervals; ++i) {
        const detail::Ctl c0 = detail::ctl_at(cp, i);
        const detail::Ctl c1 = detail::ctl_at(cp, i + 1);
        Vec2 y = tr.y[i], x = tr.x[i];
        for (int k = 0; k < m; ++k) {
            detail::Ctl ca, cm, cb;
            detail::sub_controls(c0, c1, k, m, ca, cm, cb);
            detail::rk4_step(s, gamma, y, x, ca, cm, cb, h, y, x);
        }
        tr.y[i + 1] = y;
        tr.x[i + 1] = x;
    }
    accumulate_quadrature(tr, cp, cp.u0);
    return tr;
}

StateTrajectory integrate_catchup(const ControlProfile& cp, const Vec2& x_init, const Scenario& s) {
    StateTrajectory tr = empty_like(cp, s, x_init);
    const double dt = cp.grid.dt();
    const int n = cp.grid.n_intervals;
    tr.u0_recorded.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const double w = cp.omega[i];
        tr.y[i + 1] = tr.y[i] + cp.v[i] * (w * dt);
        const Vec2 xh = tr.x[i] + drift(tr.x[i], cp.u[i], s) * (w * dt);
        const Vec2 d = xh - tr.y[i + 1];
        const double r = norm(d);
        const double need = r - s.R1;
        if (need <= 0.0) {
            tr.x[i + 1] = xh;
            continue;
        }
        const double budget = s.M * w * dt;
        const double move = std::min(need, budget);
        tr.x[i + 1] = xh - d * (move / r);
        tr.u0_recorded[i] = budget > 0.0 ? move / budget : 0.0;
        if (need > budget * (1.0 + 1e-12) + 1e-15) {
            if (tr.first_violation < 0) {
                tr.first_violation = i + 1;
                tr.warnings.push_back("feasibility loss: required correction " + std::to_string(need) +
                                      " exceeds truncation budget " + std::to_string(budget) + " at node " +
                                      std::to_string(i + 1));
            }
        }
    }
    tr.u0_recorded[n] = tr.u0_recorded[n - 1];
    accumulate_quadrature(tr, cp, tr.u0_recorded);
    return tr;
}

ViolationReport feasibility_monitor(const StateTrajectory& tr, const Scenario& s) {
    ViolationReport rep;
    rep.max_h_lower = -std::numeric_limits<double>::infinity();
    rep.max_h_upper = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tr.x.size(); ++i) {
        const double hl = h_lower(tr.x[i], tr.y[i], s);
        const double hu = h_upper(tr.y[i], s);
        if (hl > rep.max_h_lower) {
            rep.max_h_lower = hl;
            rep.node_h_lower = static_cast<int>(i);
        }
        if (hu > rep.max_h_upper) {
            rep.max_h_upper = hu;
            rep.node_h_upper = static_cast<int>(i);
        }
    }
    rep.terminal_distance = target_distance(tr.y.back(), s);
    return rep;
}

std::vector<double> convergence_study(const ControlProfile& cp, const Vec2& x_init, const SmoothingSchedule& sched,
                                      const Scenario& s) {
    sched.check(s);
    const StateTrajectory ref = integrate_catchup(cp, x_init, s);
    std::vector<double> errs;
    errs.reserve(sched.gammas.size());
    for (double g : sched.gammas) {
        const StateTrajectory tr = integrate_smooth(cp, x_init, g, s);
        double e = 0.0;
        for (std::size_t i = 0; i < tr.x.size(); ++i) e = std::max(e, norm(tr.x[i] - ref.x[i]));
        errs.push_back(e);
    }
    return errs;
}

}  // namespace sweep
