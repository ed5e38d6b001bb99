#include "sweep/transcription.hpp"

#include "rk4_detail.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sweep {

namespace {

using detail::Ctl;

struct CtlBar {
    Vec2 v, u;
    double u0 = 0.0, w = 0.0;
    CtlBar& operator+=(const CtlBar& o) {
        v += o.v;
        u += o.u;
        u0 += o.u0;
        w += o.w;
        return *this;
    }
};

CtlBar scaled(const CtlBar& b, double f) { return {b.v * f, b.u * f, b.u0 * f, b.w * f}; }

struct Rhs {
    const Scenario& s;
    double gamma;

    // Adds J^T (fy, fx) to the state and control adjoints.
    void vjp(const Vec2& y, const Vec2& x, const Ctl& c, const Vec2& fy, const Vec2& fx, Vec2& yb, Vec2& xb,
             CtlBar& cb) const {
        cb.v += fy * c.w;
        cb.w += dot(c.v, fy);

        const Vec2 d = x - y;
        const double cap = s.cone_gain();
        const double e = gamma * h_lower(x, y, s);
        const double raw = e > 700.0 ? std::numeric_limits<double>::infinity() : gamma * std::exp(e);
        const double cc = std::min(cap, raw);
        const Vec2 g = drift(x, c.u, s) - d * (c.u0 * cc);
        cb.w += dot(g, fx);
        const Vec2 gb = fx * c.w;

        xb += drift_jacobian(x, c.u, s).tmul(gb);
        cb.u += gb;
        cb.u0 -= cc * dot(d, gb);

        const Vec2 gp = gb * (-c.u0);
        Vec2 db = gp * cc;
        if (raw < cap) db += d * (gamma * cc * dot(d, gp));
        xb += db;
        yb -= db;
    }
};

}  // namespace

NLPInstance assemble_lower(const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma,
                           const Scenario& s, const TimeGrid& grid) {
    if (!(gamma > s.cone_gain())) throw ScheduleError("gamma must exceed M/R1");
    if (omega.size() != static_cast<std::size_t>(grid.nodes()) || v.size() != omega.size())
        throw std::invalid_argument("assemble_lower: fixed controls do not match grid");
    NLPInstance nlp;
    nlp.kind = NLPInstance::Kind::Lower;
    nlp.scenario = s;
    nlp.grid = grid;
    nlp.gamma = gamma;
    nlp.target_tol = 1e-3 * s.R;
    nlp.omega_fixed = omega;
    nlp.v_fixed = v;
    return nlp;
}

NLPInstance assemble_penalized(double rho, double gamma, const Scenario& s, const TimeGrid& grid,
                               LowerCallback lower_solver) {
    if (rho < 0.0) throw std::invalid_argument("penalty parameter must be nonnegative");
    if (!(gamma > s.cone_gain())) throw ScheduleError("gamma must exceed M/R1");
    NLPInstance nlp;
    nlp.kind = NLPInstance::Kind::Penalized;
    nlp.scenario = s;
    nlp.grid = grid;
    nlp.gamma = gamma;
    nlp.rho = rho;
    nlp.target_tol = 1e-3 * s.R;
    nlp.lower_solver = std::move(lower_solver);
    return nlp;
}

int NLPInstance::variable_count() const {
    const int n = grid.nodes();
    return kind == Kind::Lower ? 2 + 3 * n : 2 + 6 * n;
}

DecisionVector NLPInstance::normalize(const DecisionVector& d) const {
    DecisionVector out = d;
    out.controls.grid = grid;
    if (kind == Kind::Lower) {
        out.controls.omega = omega_fixed;
        out.controls.v = v_fixed;
    }
    return out;
}

double NLPInstance::objective(const DecisionVector& d) const { return evaluate(d, nullptr, false).objective; }

std::vector<double> NLPInstance::residuals(const DecisionVector& d) const {
    return evaluate(d, nullptr, false).residuals;
}

Evaluation NLPInstance::evaluate(const DecisionVector& d, const std::vector<double>* weights, bool gradient) const {
    return evaluate_impl(d, weights, gradient, nullptr);
}

Evaluation NLPInstance::evaluate_al(const DecisionVector& d, const std::vector<double>& lambda, double mu,
                                    const std::vector<char>& mask, bool gradient) const {
    const ALTerms al{&lambda, mu, &mask};
    return evaluate_impl(d, nullptr, gradient, &al);
}

Evaluation NLPInstance::evaluate_impl(const DecisionVector& d_in, const std::vector<double>* weights, bool gradient,
                                      const ALTerms* al) const {
    const DecisionVector d = normalize(d_in);
    const ControlProfile& cp = d.controls;
    const int N = grid.n_intervals;
    const int n = grid.nodes();
    const Scenario& s = scenario;

    Evaluation ev;
    const int m = substeps > 0 ? substeps : stable_substeps(cp, gamma, s);
    ev.traj = integrate_smooth(cp, d.x_init, gamma, s, m);
    const StateTrajectory& tr = ev.traj;
    ev.z_final = tr.z.back();
    ev.t_final = tr.T;

    ev.residuals.resize(residual_count());
    for (int i = 0; i < n; ++i) {
        ev.residuals[i] = h_lower(tr.x[i], tr.y[i], s);
        ev.residuals[n + i] = h_upper(tr.y[i], s);
    }
    const TargetHit hit = target_set(s)->closest(tr.y[N]);
    ev.residuals[2 * n] = hit.distance - target_tol;

    double z_scale = 1.0;
    double t_scale = 0.0;
    ValueGradient vg;
    if (kind == Kind::Lower) {
        ev.objective = ev.z_final;
    } else {
        z_scale = rho;
        t_scale = 1.0;
        ev.objective = ev.t_final;
        if (rho > 0.0) {
            if (!lower_solver) throw std::logic_error("penalized instance needs a lower solver");
            vg = lower_solver(cp.omega, cp.v);
            if (!vg.ok) throw std::runtime_error("lower level solve failed during objective evaluation");
            ev.phi = vg.value;
            ev.objective += rho * (ev.z_final - ev.phi);
        }
    }
    ev.merit = ev.objective;
    if (al) {
        ev.weights.assign(ev.residuals.size(), 0.0);
        for (std::size_t j = 0; j < ev.residuals.size(); ++j) {
            if (!(*al->mask)[j]) continue;
            const double l = (*al->lambda)[j];
            const double m = std::max(0.0, l + al->mu * ev.residuals[j]);
            ev.weights[j] = m;
            ev.merit += (m * m - l * l) / (2.0 * al->mu);
        }
        weights = &ev.weights;
    }
    if (!gradient) return ev;

    ev.has_gradient = true;
    ev.g_v.assign(n, Vec2{});
    ev.g_u.assign(n, Vec2{});
    ev.g_u0.assign(n, 0.0);
    ev.g_omega.assign(n, 0.0);
    ev.a_y.assign(n, Vec2{});
    ev.a_x.assign(n, Vec2{});

    // Quadrature terms.
    for (int i = 0; i < n; ++i) {
        const double w = grid.weight(i);
        const double l = norm2(cp.u[i]) + cp.u0[i] * cp.u0[i];
        ev.g_omega[i] += w * (t_scale + z_scale * l);
        ev.g_u[i] += cp.u[i] * (2.0 * z_scale * w * cp.omega[i]);
        ev.g_u0[i] += 2.0 * z_scale * w * cp.omega[i] * cp.u0[i];
    }
    if (kind == Kind::Penalized && rho > 0.0) {
        for (int i = 0; i < n; ++i) {
            ev.g_omega[i] -= rho * vg.d_omega[i];
            ev.g_v[i] -= vg.d_v[i] * rho;
        }
    }

    auto node_terms = [&](int i, Vec2& ay, Vec2& ax) {
        if (!weights) return;
        const double wl = (*weights)[i];
        const double wu = (*weights)[n + i];
        const Vec2 dd = tr.x[i] - tr.y[i];
        ax += dd * wl;
        ay -= dd * wl;
        ay += (tr.y[i] - s.q0) * wu;
        if (i == N) {
            const double wt = (*weights)[2 * n];
            if (wt != 0.0 && hit.distance > 0.0) ay += (tr.y[N] - hit.point) * (wt / hit.distance);
        }
    };

    Vec2 ay, ax;
    node_terms(N, ay, ax);
    ev.a_y[N] = ay;
    ev.a_x[N] = ax;

    const Rhs rhs{s, gamma};
    const double h = grid.dt() / m;
    std::vector<detail::Stages> stages(m);
    for (int i = N - 1; i >= 0; --i) {
        const Ctl c0 = detail::ctl_at(cp, i);
        const Ctl c1 = detail::ctl_at(cp, i + 1);
        Vec2 y = tr.y[i], x = tr.x[i];
        for (int k = 0; k < m; ++k) {
            Ctl ca, cm, cb;
            detail::sub_controls(c0, c1, k, m, ca, cm, cb);
            detail::rk4_step(s, gamma, y, x, ca, cm, cb, h, y, x, &stages[k]);
        }

        CtlBar b0, b1;
        for (int k = m - 1; k >= 0; --k) {
            const detail::Stages& S = stages[k];
            Ctl ca, cm, cb;
            detail::sub_controls(c0, c1, k, m, ca, cm, cb);
            Vec2 sy = ay, sx = ax;
            Vec2 k1y = ay * (h / 6.0), k1x = ax * (h / 6.0);
            Vec2 k2y = ay * (h / 3.0), k2x = ax * (h / 3.0);
            Vec2 k3y = ay * (h / 3.0), k3x = ax * (h / 3.0);
            const Vec2 k4y = ay * (h / 6.0), k4x = ax * (h / 6.0);
            CtlBar ba, bm, bb;

            Vec2 s4y, s4x;
            rhs.vjp(S.y[3], S.x[3], cb, k4y, k4x, s4y, s4x, bb);
            sy += s4y;
            sx += s4x;
            k3y += s4y * h;
            k3x += s4x * h;

            Vec2 s3y, s3x;
            rhs.vjp(S.y[2], S.x[2], cm, k3y, k3x, s3y, s3x, bm);
            sy += s3y;
            sx += s3x;
            k2y += s3y * (0.5 * h);
            k2x += s3x * (0.5 * h);

            Vec2 s2y, s2x;
            rhs.vjp(S.y[1], S.x[1], cm, k2y, k2x, s2y, s2x, bm);
            sy += s2y;
            sx += s2x;
            k1y += s2y * (0.5 * h);
            k1x += s2x * (0.5 * h);

            rhs.vjp(S.y[0], S.x[0], ca, k1y, k1x, sy, sx, ba);

            const double ta = static_cast<double>(k) / m, tm = (k + 0.5) / m, tb = static_cast<double>(k + 1) / m;
            b0 += scaled(ba, 1.0 - ta);
            b1 += scaled(ba, ta);
            b0 += scaled(bm, 1.0 - tm);
            b1 += scaled(bm, tm);
            b0 += scaled(bb, 1.0 - tb);
            b1 += scaled(bb, tb);
            ay = sy;
            ax = sx;
        }
        ev.g_v[i] += b0.v;
        ev.g_u[i] += b0.u;
        ev.g_u0[i] += b0.u0;
        ev.g_omega[i] += b0.w;
        ev.g_v[i + 1] += b1.v;
        ev.g_u[i + 1] += b1.u;
        ev.g_u0[i + 1] += b1.u0;
        ev.g_omega[i + 1] += b1.w;

        node_terms(i, ay, ax);
        ev.a_y[i] = ay;
        ev.a_x[i] = ax;
    }
    ev.g_x_init = ax;
    return ev;
}

std::vector<double> NLPInstance::pack(const DecisionVector& d_in) const {
    const DecisionVector d = normalize(d_in);
    const int n = grid.nodes();
    std::vector<double> z;
    z.reserve(variable_count());
    z.push_back(d.x_init.x);
    z.push_back(d.x_init.y);
    if (kind == Kind::Penalized) {
        for (int i = 0; i < n; ++i) {
            z.push_back(d.controls.v[i].x);
            z.push_back(d.controls.v[i].y);
        }
    }
    for (int i = 0; i < n; ++i) {
        z.push_back(d.controls.u[i].x);
        z.push_back(d.controls.u[i].y);
    }
    for (int i = 0; i < n; ++i) z.push_back(d.controls.u0[i]);
    if (kind == Kind::Penalized)
        for (int i = 0; i < n; ++i) z.push_back(d.controls.omega[i]);
    return z;
}

DecisionVector NLPInstance::unpack(const std::vector<double>& z) const {
    const int n = grid.nodes();
    DecisionVector d;
    d.controls = ControlProfile::zeros(grid);
    std::size_t k = 0;
    d.x_init = {z[k], z[k + 1]};
    k += 2;
    if (kind == Kind::Penalized) {
        for (int i = 0; i < n; ++i, k += 2) d.controls.v[i] = {z[k], z[k + 1]};
    }
    for (int i = 0; i < n; ++i, k += 2) d.controls.u[i] = {z[k], z[k + 1]};
    for (int i = 0; i < n; ++i) d.controls.u0[i] = z[k++];
    if (kind == Kind::Penalized) {
        for (int i = 0; i < n; ++i) d.controls.omega[i] = z[k++];
    } else {
        d.controls.omega = omega_fixed;
        d.controls.v = v_fixed;
    }
    return d;
}

std::vector<double> NLPInstance::pack_gradient(const Evaluation& e) const {
    const int n = grid.nodes();
    std::vector<double> g;
    g.reserve(variable_count());
    g.push_back(e.g_x_init.x);
    g.push_back(e.g_x_init.y);
    if (kind == Kind::Penalized) {
        for (int i = 0; i < n; ++i) {
            g.push_back(e.g_v[i].x);
            g.push_back(e.g_v[i].y);
        }
    }
    for (int i = 0; i < n; ++i) {
        g.push_back(e.g_u[i].x);
        g.push_back(e.g_u[i].y);
    }
    for (int i = 0; i < n; ++i) g.push_back(e.g_u0[i]);
    if (kind == Kind::Penalized)
        for (int i = 0; i < n; ++i) g.push_back(e.g_omega[i]);
    return g;
}

void NLPInstance::project(std::vector<double>& z) const {
    const int n = grid.nodes();
    const Scenario& s = scenario;
    std::size_t k = 0;
    const Vec2 xi = project_disk({z[0], z[1]}, s.y0, s.R1);
    z[0] = xi.x;
    z[1] = xi.y;
    k = 2;
    auto clip_pairs = [&](double r) {
        for (int i = 0; i < n; ++i, k += 2) {
            const Vec2 p = clip_norm({z[k], z[k + 1]}, r);
            z[k] = p.x;
            z[k + 1] = p.y;
        }
    };
    if (kind == Kind::Penalized) clip_pairs(s.v_bound);
    clip_pairs(s.u_bound);
    for (int i = 0; i < n; ++i, ++k) z[k] = std::clamp(z[k], 0.0, 1.0);
    if (kind == Kind::Penalized)
        for (int i = 0; i < n; ++i, ++k) z[k] = std::clamp(z[k], 0.0, omega_max);
}

Matrix fd_jacobian(const NLPInstance& nlp, const DecisionVector& point, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("fd_jacobian: step must be positive");
    const std::vector<double> z0 = nlp.pack(point);
    Matrix J;
    J.rows = 1 + nlp.residual_count();
    J.cols = static_cast<int>(z0.size());
    J.data.assign(static_cast<std::size_t>(J.rows) * J.cols, 0.0);
    for (int c = 0; c < J.cols; ++c) {
        std::vector<double> zp = z0, zm = z0;
        zp[c] += h;
        zm[c] -= h;
        const Evaluation ep = nlp.evaluate(nlp.unpack(zp), nullptr, false);
        const Evaluation em = nlp.evaluate(nlp.unpack(zm), nullptr, false);
        J(0, c) = (ep.objective - em.objective) / (2.0 * h);
        for (int r = 0; r < nlp.residual_count(); ++r)
            J(r + 1, c) = (ep.residuals[r] - em.residuals[r]) / (2.0 * h);
    }
    return J;
}

}  // namespace sweep
