#include "sweep/oracle.hpp"

#include "sweep/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sweep {

namespace {

constexpr std::size_t kMaxCombinations = 10'000'000;
constexpr std::size_t kTopCount = 10;

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

std::vector<double> levels(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = lo + (hi - lo) * k / (n - 1);
    return out;
}

std::vector<Vec2> ball_levels(double bound, int n) {
    std::vector<Vec2> out;
    for (double a : levels(-bound, bound, n))
        for (double b : levels(-bound, bound, n)) out.push_back(clip_norm({a, b}, bound));
    return out;
}

std::vector<Vec2> x_init_grid(const Scenario& s) {
    std::vector<Vec2> out{s.y0};
    for (double rad : {0.5 * s.R1, s.R1})
        for (int k = 0; k < 8; ++k) {
            double a = 2.0 * std::numbers::pi * k / 8;
            out.push_back(s.y0 + rad * Vec2{std::cos(a), std::sin(a)});
        }
    return out;
}

constexpr std::size_t kXInitPoints = 17;

// Smoothed field evaluated independently of the dynamics module.
Vec2 field(const Vec2& x, const Vec2& y, const Vec2& u, double u0, double gamma, const Scenario& s) {
    Vec2 f = u;
    if (s.drift.kind == DriftKind::Affine) {
        const auto& A = s.drift.A;
        f = clip_norm(Vec2{A[0] * x.x + A[1] * x.y, A[2] * x.x + A[3] * x.y} + u, s.M1);
    }
    const double cap = s.M / s.R1;
    const double e = gamma * h_lower(x, y, s);
    const double c = e > 700.0 ? cap : std::min(cap, gamma * std::exp(e));
    return f - (x - y) * (u0 * c);
}

std::vector<Vec2> y_path(const std::vector<double>& omega, const std::vector<Vec2>& v, double dt, const Scenario& s) {
    std::vector<Vec2> y(omega.size() + 1);
    y[0] = s.y0;
    for (std::size_t i = 0; i < omega.size(); ++i) y[i + 1] = y[i] + (dt * omega[i]) * v[i];
    return y;
}

struct LowerSearch {
    const Scenario& s;
    double gamma;
    double dt;
    double h_tol;
    const std::vector<double>& omega;
    const std::vector<Vec2>& y;
    std::vector<Vec2> u_levels;
    std::vector<double> u0_levels;
    bool first_only = false;

    bool found = false;
    std::size_t evaluated = 0;
    std::vector<OracleCandidate> top;
    OracleCandidate cur;

    double bound() const {
        if (top.size() < kTopCount) return std::numeric_limits<double>::infinity();
        return top.back().value;
    }

    void record(double z) {
        ++evaluated;
        found = true;
        OracleCandidate c = cur;
        c.value = z;
        auto it = std::upper_bound(top.begin(), top.end(), z,
                                   [](double v, const OracleCandidate& o) { return v < o.value; });
        top.insert(it, std::move(c));
        if (top.size() > kTopCount) top.pop_back();
    }

    void dfs(std::size_t i, const Vec2& x, double z) {
        if (first_only && found) return;
        if (i == omega.size()) {
            record(z);
            return;
        }
        double h = dt * omega[i];
        for (const Vec2& u : u_levels)
            for (double u0 : u0_levels) {
                double zn = z + h * (norm2(u) + u0 * u0);
                if (zn >= bound()) continue;
                Vec2 xn = x + h * field(x, y[i], u, u0, gamma, s);
                if (h_lower(xn, y[i + 1], s) > h_tol) {
                    ++evaluated;
                    continue;
                }
                cur.u[i] = u;
                cur.u0[i] = u0;
                dfs(i + 1, xn, zn);
                if (first_only && found) return;
            }
    }
};

LowerOracleResult run_lower(const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma,
                            const EnumSpec& spec, const Scenario& s, bool first_only) {
    spec.check();
    if (omega.size() != static_cast<std::size_t>(spec.n_intervals) || v.size() != omega.size())
        throw std::invalid_argument("oracle: omega and v need one value per interval");
    if (!(gamma > s.M / s.R1)) throw ScheduleError("gamma must exceed M/R1");
    const double dt = spec.horizon / spec.n_intervals;
    const std::vector<Vec2> y = y_path(omega, v, dt, s);
    const double h_tol = s.R1 * s.boundary_tol();
    const std::vector<Vec2> u_lv = ball_levels(s.u_bound, spec.levels_per_control);
    const std::vector<double> u0_lv = levels(0.0, 1.0, spec.levels_per_control);

    // One search per initial point; chunks run concurrently and merge in grid order.
    auto search_from = [&](const Vec2& x0) {
        LowerSearch search{s, gamma, dt, h_tol, omega, y, u_lv, u0_lv, first_only, false, 0, {}, {}};
        search.cur.u.assign(omega.size(), Vec2{});
        search.cur.u0.assign(omega.size(), 0.0);
        search.cur.x_init = x0;
        if (h_lower(x0, y[0], s) <= h_tol) search.dfs(0, x0, 0.0);
        return search;
    };
    LowerOracleResult out;
    std::vector<OracleCandidate> pool;
    const std::vector<Vec2> starts = x_init_grid(s);
    if (first_only) {
        for (const Vec2& x0 : starts) {
            LowerSearch r = search_from(x0);
            out.evaluated += r.evaluated;
            if (r.found) {
                out.feasible = true;
                pool = std::move(r.top);
                break;
            }
        }
    } else {
        std::vector<std::future<LowerSearch>> futs;
        for (const Vec2& x0 : starts) futs.push_back(std::async(std::launch::async, search_from, x0));
        for (auto& f : futs) {
            LowerSearch r = f.get();
            out.evaluated += r.evaluated;
            out.feasible = out.feasible || r.found;
            for (OracleCandidate& c : r.top) pool.push_back(std::move(c));
        }
        std::stable_sort(pool.begin(), pool.end(),
                         [](const OracleCandidate& a, const OracleCandidate& b) { return a.value < b.value; });
        if (pool.size() > kTopCount) pool.resize(kTopCount);
    }
    if (out.feasible) {
        out.best = pool.front();
        out.value = out.best.value;
        out.top = std::move(pool);
    }
    return out;
}

}  // namespace

void EnumSpec::check() const {
    if (n_intervals < 1) throw std::invalid_argument("oracle: n_intervals must be positive");
    if (levels_per_control < 2 || levels_per_control > 5)
        throw std::invalid_argument("oracle: levels_per_control must be in [2,5]");
    if (!(horizon > 0.0)) throw std::invalid_argument("oracle: horizon must be positive");
    if (lower_combinations() > kMaxCombinations)
        throw std::invalid_argument("oracle: enumeration exceeds 1e7 combinations");
}

std::size_t EnumSpec::lower_combinations() const {
    std::size_t per = ipow(static_cast<std::size_t>(levels_per_control), 3);
    return ipow(per, n_intervals) * kXInitPoints;
}

LowerOracleResult brute_lower(const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma,
                              const EnumSpec& spec, const Scenario& s) {
    return run_lower(omega, v, gamma, spec, s, false);
}

bool lower_feasible(const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma, const EnumSpec& spec,
                    const Scenario& s) {
    return run_lower(omega, v, gamma, spec, s, true).feasible;
}

ControlProfile hold_profile(const std::vector<double>& omega, const std::vector<Vec2>& v, const std::vector<Vec2>& u,
                            const std::vector<double>& u0, double horizon) {
    int n = static_cast<int>(omega.size());
    ControlProfile cp = ControlProfile::zeros(TimeGrid{n, horizon});
    for (int i = 0; i <= n; ++i) {
        int k = std::min(i, n - 1);
        cp.omega[i] = omega[k];
        cp.v[i] = v[k];
        cp.u[i] = u[k];
        cp.u0[i] = u0[k];
    }
    return cp;
}

StateTrajectory euler_trajectory(const ControlProfile& cp, const Vec2& x_init, double gamma, const Scenario& s) {
    const TimeGrid& g = cp.grid;
    int n = g.n_intervals;
    double dt = g.dt();
    StateTrajectory tr;
    tr.grid = g;
    tr.y.resize(n + 1);
    tr.x.resize(n + 1);
    tr.z.assign(n + 1, 0.0);
    tr.t.assign(n + 1, 0.0);
    tr.y[0] = s.y0;
    tr.x[0] = x_init;
    for (int i = 0; i < n; ++i) {
        double h = dt * cp.omega[i];
        tr.y[i + 1] = tr.y[i] + h * cp.v[i];
        tr.x[i + 1] = tr.x[i] + h * field(tr.x[i], tr.y[i], cp.u[i], cp.u0[i], gamma, s);
        tr.z[i + 1] = tr.z[i] + h * (norm2(cp.u[i]) + cp.u0[i] * cp.u0[i]);
        tr.t[i + 1] = tr.t[i] + h;
    }
    tr.T = tr.t[n];
    return tr;
}

BilevelOracleResult brute_bilevel(const EnumSpec& spec, const Scenario& s, double gamma) {
    spec.check();
    int n = spec.n_intervals;
    int L = spec.levels_per_control;
    double dt = spec.horizon / n;
    double step = spec.omega_step;
    if (step <= 0.0) step = 2.0 * target_distance(s.y0, s) / s.v_bound / (L - 1) / spec.horizon;
    std::vector<Vec2> v_lv = ball_levels(s.v_bound, L);
    std::vector<double> w_lv(L);
    for (int j = 0; j < L; ++j) w_lv[j] = j * step;
    std::size_t per = v_lv.size() * w_lv.size();
    std::size_t total = ipow(per, n);
    if (total > kMaxCombinations) throw std::invalid_argument("oracle: bilevel enumeration exceeds 1e7 combinations");

    BilevelOracleResult out;
    out.grid_step = dt * step;
    out.candidates = total;
    double term_tol = 0.5 * dt * step * s.v_bound;
    double h_tol = s.R1 * s.boundary_tol();

    struct Cand {
        double t;
        std::size_t code;
    };
    std::vector<Cand> feasible;
    std::vector<double> omega(n);
    std::vector<Vec2> v(n);
    auto decode = [&](std::size_t code) {
        for (int i = 0; i < n; ++i) {
            std::size_t c = code % per;
            code /= per;
            v[i] = v_lv[c % v_lv.size()];
            omega[i] = w_lv[c / v_lv.size()];
        }
    };
    for (std::size_t code = 0; code < total; ++code) {
        decode(code);
        Vec2 y = s.y0;
        double t = 0.0;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            y = y + (dt * omega[i]) * v[i];
            t += dt * omega[i];
            ok = h_upper(y, s) <= h_tol;
        }
        if (!ok || target_distance(y, s) > term_tol) continue;
        feasible.push_back({t, code});
    }
    std::stable_sort(feasible.begin(), feasible.end(), [](const Cand& a, const Cand& b) { return a.t < b.t; });
    for (const Cand& c : feasible) {
        decode(c.code);
        ++out.lower_checks;
        if (!lower_feasible(omega, v, gamma, spec, s)) continue;
        out.feasible = true;
        out.T_best = c.t;
        out.omega = omega;
        out.v = v;
        out.phi = brute_lower(omega, v, gamma, spec, s).value;
        break;
    }
    return out;
}

double sigma_sup_oracle_gain(const Vec2& q_L, double nu_L, double r, const Vec2& x, const Vec2& y, double gain,
                             int grid_pts) {
    if (grid_pts < 100) throw std::invalid_argument("oracle: grid_pts must be at least 100");
    Vec2 d = x - y;
    double a = gain * (nu_L * norm2(d) - dot(q_L, d));
    return kernels::active().grid_quad_sup(a, r, static_cast<std::size_t>(grid_pts));
}

double sigma_sup_oracle(const Vec2& q_L, double nu_L, double r, const Vec2& x, const Vec2& y, const Scenario& s,
                        int grid_pts) {
    return sigma_sup_oracle_gain(q_L, nu_L, r, x, y, s.cone_gain(), grid_pts);
}

FDCheckReport fd_check(const std::function<double(const std::vector<double>&)>& fn, const std::vector<double>& point,
                       const std::vector<std::vector<double>>& directions, const std::vector<double>& gradient,
                       double h) {
    FDCheckReport rep;
    std::vector<double> p(point.size());
    for (const auto& dir : directions) {
        if (dir.size() != point.size() || gradient.size() != point.size())
            throw std::invalid_argument("fd_check: dimension mismatch");
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = point[k] + h * dir[k];
        double fp = fn(p);
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = point[k] - h * dir[k];
        double fm = fn(p);
        double fd = (fp - fm) / (2.0 * h);
        double an = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) an += gradient[k] * dir[k];
        double scale = std::max({std::abs(fd), std::abs(an), 1e-12});
        rep.max_rel_error = std::max(rep.max_rel_error, std::abs(fd - an) / scale);
        rep.fd.push_back(fd);
        rep.analytic.push_back(an);
    }
    return rep;
}

}  // namespace sweep
