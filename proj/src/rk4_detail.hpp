#pragma once
// RK4 on the smoothed field with controls interpolated linearly inside each
// interval. Shared by the forward integrator and the discrete adjoint so both
// see bit-identical stage states.

#include "sweep/dynamics.hpp"

namespace sweep::detail {

struct Ctl {
    Vec2 v, u;
    double u0 = 0.0, w = 0.0;
};

inline Ctl ctl_at(const ControlProfile& cp, int i) { return {cp.v[i], cp.u[i], cp.u0[i], cp.omega[i]}; }

inline Ctl ctl_lerp(const Ctl& a, const Ctl& b, double th) {
    const double s = 1.0 - th;
    return {a.v * s + b.v * th, a.u * s + b.u * th, a.u0 * s + b.u0 * th, a.w * s + b.w * th};
}

inline void rhs(const Scenario& s, double gamma, const Vec2& y, const Vec2& x, const Ctl& c, Vec2& dy, Vec2& dx) {
    dy = c.v * c.w;
    dx = sweeping_field_smooth(x, y, c.u, c.u0, gamma, s) * c.w;
}

/// Stage states of one RK4 step of length h.
struct Stages {
    Vec2 y[4], x[4];
    Vec2 ky[4], kx[4];
};

inline void rk4_step(const Scenario& s, double gamma, const Vec2& y, const Vec2& x, const Ctl& ca, const Ctl& cm,
                     const Ctl& cb, double h, Vec2& yn, Vec2& xn, Stages* st = nullptr) {
    Stages loc;
    Stages& S = st ? *st : loc;
    S.y[0] = y;
    S.x[0] = x;
    rhs(s, gamma, S.y[0], S.x[0], ca, S.ky[0], S.kx[0]);
    S.y[1] = S.y[0] + S.ky[0] * (0.5 * h);
    S.x[1] = S.x[0] + S.kx[0] * (0.5 * h);
    rhs(s, gamma, S.y[1], S.x[1], cm, S.ky[1], S.kx[1]);
    S.y[2] = S.y[0] + S.ky[1] * (0.5 * h);
    S.x[2] = S.x[0] + S.kx[1] * (0.5 * h);
    rhs(s, gamma, S.y[2], S.x[2], cm, S.ky[2], S.kx[2]);
    S.y[3] = S.y[0] + S.ky[2] * h;
    S.x[3] = S.x[0] + S.kx[2] * h;
    rhs(s, gamma, S.y[3], S.x[3], cb, S.ky[3], S.kx[3]);
    yn = S.y[0] + (S.ky[0] + S.ky[1] * 2.0 + S.ky[2] * 2.0 + S.ky[3]) * (h / 6.0);
    xn = S.x[0] + (S.kx[0] + S.kx[1] * 2.0 + S.kx[2] * 2.0 + S.kx[3]) * (h / 6.0);
}

/// Controls at the start, middle and end of substep k of m.
inline void sub_controls(const Ctl& c0, const Ctl& c1, int k, int m, Ctl& ca, Ctl& cm, Ctl& cb) {
    ca = ctl_lerp(c0, c1, static_cast<double>(k) / m);
    cm = ctl_lerp(c0, c1, (k + 0.5) / m);
    cb = ctl_lerp(c0, c1, static_cast<double>(k + 1) / m);
}

}  // namespace sweep::detail
