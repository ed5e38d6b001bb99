#include "sweep/solver.hpp"

#include "sweep/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>

namespace sweep {

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_violation(const std::vector<double>& g, const std::vector<char>& mask) {
    double v = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (mask[j]) v = std::max(v, g[j]);
    return v;
}

struct InnerResult {
    std::vector<double> z;
    double merit = 0.0;
    double pg_norm = 0.0;
    int iterations = 0;
    bool stalled = false;
};

// Projected gradient with Barzilai-Borwein trial steps and monotone Armijo
// backtracking along the projection arc.
InnerResult projected_gradient(const NLPInstance& nlp, std::vector<double> z, const std::vector<double>& lambda,
                               double mu, const std::vector<char>& mask, int max_iters, double tol) {
    InnerResult out;
    Evaluation ev = nlp.evaluate_al(nlp.unpack(z), lambda, mu, mask, true);
    std::vector<double> g = nlp.pack_gradient(ev);
    double f = ev.merit;
    double gmax = 0.0;
    for (double gi : g) gmax = std::max(gmax, std::abs(gi));
    double alpha = gmax > 0.0 ? std::min(1.0, 0.1 / gmax) : 1.0;

    const std::size_t n = z.size();
    std::vector<double> zt(n), zn(n), d(n);
    int it = 0;
    for (; it < max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) zt[i] = z[i] - g[i];
        nlp.project(zt);
        double pgn = 0.0;
        for (std::size_t i = 0; i < n; ++i) pgn = std::max(pgn, std::abs(zt[i] - z[i]));
        out.pg_norm = pgn;
        if (pgn <= tol) break;

        double a = alpha;
        bool accepted = false;
        Evaluation evn;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < n; ++i) zn[i] = z[i] - a * g[i];
            nlp.project(zn);
            for (std::size_t i = 0; i < n; ++i) d[i] = zn[i] - z[i];
            evn = nlp.evaluate_al(nlp.unpack(zn), lambda, mu, mask, true);
            if (std::isfinite(evn.merit) && evn.merit <= f + 1e-4 * dotv(g, d)) {
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        if (!accepted) {
            out.stalled = true;
            break;
        }

        std::vector<double> gn = nlp.pack_gradient(evn);
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double yi = gn[i] - g[i];
            ss += d[i] * d[i];
            sy += d[i] * yi;
        }
        alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : std::min(a * 4.0, 1e12);
        z.swap(zn);
        g.swap(gn);
        const double fprev = f;
        f = evn.merit;
        if (ss == 0.0 || std::abs(fprev - f) <= 1e-16 * std::max(1.0, std::abs(f))) {
            ++it;
            out.stalled = true;
            break;
        }
    }
    out.z = std::move(z);
    out.merit = f;
    out.iterations = it;
    return out;
}

// Penalty weight for warm restarts; larger values stall the inner solver.
constexpr double kWarmMu = 10.0;

Vec2 unit_or(const Vec2& v, const Vec2& fallback) {
    const double n = norm(v);
    return n > 0.0 ? v * (1.0 / n) : fallback;
}

}  // namespace

ALResult augmented_lagrangian(const NLPInstance& nlp, std::vector<double> z0, const std::vector<char>& mask,
                              std::vector<double> lambda0, const ALOptions& opt, double mu_init) {
    ALResult res;
    const int m = nlp.residual_count();
    res.lambda = lambda0.empty() ? std::vector<double>(m, 0.0) : std::move(lambda0);
    for (int j = 0; j < m; ++j)
        if (!mask[j]) res.lambda[j] = 0.0;
    nlp.project(z0);
    res.z = std::move(z0);
    double mu = mu_init > 0.0 ? mu_init : opt.mu0;
    double prev_viol = std::numeric_limits<double>::infinity();
    double prev_obj = std::numeric_limits<double>::infinity();
    double inner_tol = std::max(opt.opt_tol, 1e-4);

    for (int round = 0; round < opt.max_rounds; ++round) {
        InnerResult in = projected_gradient(nlp, res.z, res.lambda, mu, mask, opt.max_inner_iters, inner_tol);
        res.z = std::move(in.z);
        res.iterations += in.iterations;
        res.rounds = round + 1;
        res.stationarity = in.pg_norm;

        const Evaluation ev = nlp.evaluate(nlp.unpack(res.z), nullptr, false);
        res.objective = ev.objective;
        const double viol = max_violation(ev.residuals, mask);
        res.max_violation = viol;
        for (int j = 0; j < m; ++j)
            if (mask[j]) res.lambda[j] = std::max(0.0, res.lambda[j] + mu * ev.residuals[j]);

        if (viol <= opt.feas_tol && in.pg_norm <= std::max(opt.opt_tol, inner_tol)) {
            if (inner_tol <= opt.opt_tol) {
                res.converged = true;
                break;
            }
        }
        const bool flat = std::abs(ev.objective - prev_obj) <= opt.rel_obj_tol * std::max(1.0, std::abs(ev.objective));
        prev_obj = ev.objective;
        if (viol <= opt.feas_tol && (in.stalled || flat)) {
            res.stalled = true;
            break;
        }
        if (viol > opt.feas_tol && viol > 0.25 * prev_viol) mu = std::min(mu * 10.0, opt.mu_max);
        prev_viol = viol;
        inner_tol = std::max(opt.opt_tol, inner_tol * 0.1);
    }
    return res;
}

namespace {

ALOptions al_options(const SolverOptions& o) {
    ALOptions a;
    a.max_inner_iters = o.max_inner_iters;
    a.max_rounds = o.max_al_rounds;
    a.feas_tol = o.feas_tol;
    a.opt_tol = o.opt_tol;
    return a;
}

void fill_lower_multipliers(LowerSolution& sol, const Evaluation& ev, const std::vector<double>& lambda,
                            const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma,
                            const Scenario& s) {
    const int n = static_cast<int>(omega.size());
    LowerMultipliers& lm = sol.multipliers;
    lm.lambda_bar = 1.0;
    lm.weights_L.assign(lambda.begin(), lambda.begin() + n);
    lm.mu_L.assign(n, 0.0);
    lm.mu_H.assign(n, 0.0);
    lm.p_H.assign(n, Vec2{});
    lm.p_L.assign(n, Vec2{});
    double acc = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        lm.mu_L[i] = acc;
        acc += lm.weights_L[i];
    }
    for (int i = 0; i < n; ++i) {
        const Vec2 d = ev.traj.x[i] - ev.traj.y[i];
        const double tot = lm.mu_L[i] + lm.weights_L[i];
        lm.p_L[i] = -ev.a_x[i] + d * tot;
        lm.p_H[i] = -ev.a_y[i] - d * tot;
    }
    const ValueSubgradient vs = value_subgradient(omega, v, sol, s, gamma);
    lm.zeta1 = vs.zeta1;
    lm.zeta2 = vs.zeta2;
}

}  // namespace

LowerSolution solve_lower(const std::vector<double>& omega, const std::vector<Vec2>& v, double gamma,
                          const Scenario& s, const SolverOptions& opts, const LowerSolution* warm) {
    const TimeGrid grid{static_cast<int>(omega.size()) - 1, opts.grid.horizon};
    const NLPInstance nlp = assemble_lower(omega, v, gamma, s, grid);
    const int n = grid.nodes();
    std::vector<char> mask(nlp.residual_count(), 0);
    for (int i = 0; i < n; ++i) mask[i] = 1;

    struct Start {
        DecisionVector d;
        std::vector<double> lambda;
        double mu = 0.0;
    };
    std::vector<Start> starts;
    if (warm && warm->u.size() == static_cast<std::size_t>(n)) {
        Start st;
        st.d.x_init = warm->x_init;
        st.d.controls = ControlProfile::zeros(grid);
        st.d.controls.u = warm->u;
        st.d.controls.u0 = warm->u0;
        st.lambda.assign(nlp.residual_count(), 0.0);
        for (int i = 0; i < n && i < static_cast<int>(warm->multipliers.weights_L.size()); ++i)
            st.lambda[i] = warm->multipliers.weights_L[i];
        st.mu = kWarmMu;
        starts.push_back(std::move(st));
    } else {
        Vec2 mean_v;
        for (const Vec2& vi : v) mean_v += vi;
        const Vec2 e = unit_or(mean_v, {1.0, 0.0});
        for (double side : {0.0, 1.0, -1.0}) {
            Start st;
            st.d.x_init = s.y0 + e * (side * s.R1);
            st.d.controls = ControlProfile::zeros(grid);
            starts.push_back(std::move(st));
        }
    }

    const ALOptions ao = al_options(opts);
    ALResult best;
    bool have = false;
    for (Start& st : starts) {
        ALResult r = augmented_lagrangian(nlp, nlp.pack(st.d), mask, st.lambda, ao, st.mu);
        const bool feas = r.max_violation <= 10.0 * opts.feas_tol;
        const bool best_feas = have && best.max_violation <= 10.0 * opts.feas_tol;
        bool better = !have;
        if (have) {
            if (feas != best_feas) better = feas;
            else if (feas) better = r.objective < best.objective - 1e-12;
            else better = r.max_violation < best.max_violation;
        }
        if (better) {
            best = std::move(r);
            have = true;
        }
    }

    LowerSolution sol;
    const DecisionVector dec = nlp.unpack(best.z);
    sol.x_init = dec.x_init;
    sol.u = dec.controls.u;
    sol.u0 = dec.controls.u0;
    sol.converged = best.converged;
    sol.iterations = best.iterations;
    sol.max_violation = best.max_violation;
    if (best.converged) sol.status = "converged";
    else if (best.max_violation > 10.0 * opts.feas_tol) sol.status = "infeasible";
    else sol.status = best.stalled ? "stalled" : "max_iterations";

    const Evaluation ev = nlp.evaluate(dec, &best.lambda, true);
    sol.value = ev.z_final;
    sol.traj = ev.traj;
    sol.grad_omega = ev.g_omega;
    sol.grad_v = ev.g_v;
    fill_lower_multipliers(sol, ev, best.lambda, omega, v, gamma, s);
    return sol;
}

AdjointArcs adjoint_sweep(const StateTrajectory& tr, const ControlProfile& cp, const Vec2& p_H_final,
                          const Vec2& p_L_final, const std::vector<double>& mu_H, const std::vector<double>& mu_L,
                          double lambda_bar, double gamma, const Scenario& s) {
    const int N = cp.grid.n_intervals;
    AdjointArcs out;
    out.p_H.assign(N + 1, Vec2{});
    out.p_L.assign(N + 1, Vec2{});
    out.p_H[N] = p_H_final;
    out.p_L[N] = p_L_final;
    const double dt = cp.grid.dt();
    for (int i = N; i >= 1; --i) {
        const HamiltonianTerms h =
            hamiltonian_terms(tr.y[i], tr.x[i], cp.v[i], cp.u[i], out.p_H[i], out.p_L[i], mu_H[i - 1], mu_L[i - 1],
                              lambda_bar, SigmaMode::Smoothed, gamma, s);
        out.p_H[i - 1] = out.p_H[i] + h.d_y * (dt * cp.omega[i]);
        out.p_L[i - 1] = out.p_L[i] + h.d_x * (dt * cp.omega[i]);
    }
    return out;
}

ValueSubgradient value_subgradient(const std::vector<double>& omega, const std::vector<Vec2>& v,
                                   const LowerSolution& lower, const Scenario& s, double gamma) {
    const LowerMultipliers& lm = lower.multipliers;
    if (!(lm.lambda_bar > 0.0)) throw std::domain_error("abnormal lower problem: lambda_bar = 0");
    const int n = static_cast<int>(omega.size());
    ValueSubgradient out;
    out.zeta1.assign(n, 0.0);
    out.zeta2.assign(n, Vec2{});
    out.zeta2_raw.assign(n, Vec2{});
    const StateTrajectory& tr = lower.traj;
    for (int i = 0; i < n; ++i) {
        const Vec2 y = tr.y[i], x = tr.x[i];
        const Vec2 psi_y = lm.p_H[i] - (y - s.q0) * lm.mu_H[i] + (x - y) * lm.mu_L[i];
        const Vec2 z2 = psi_y * (-omega[i] / lm.lambda_bar);
        out.zeta2_raw[i] = z2;
        Vec2 zp = z2;
        const double nv = norm(v[i]);
        if (s.v_bound > 0.0 && nv >= s.v_bound * (1.0 - 1e-9)) {
            const Vec2 nrm = v[i] * (1.0 / nv);
            const double comp = dot(zp, nrm);
            if (comp > 0.0) zp -= nrm * comp;
        }
        out.zeta2[i] = zp;
        const HamiltonianTerms h = hamiltonian_terms(y, x, v[i], lower.u[i], lm.p_H[i], lm.p_L[i], lm.mu_H[i],
                                                     lm.mu_L[i], lm.lambda_bar, SigmaMode::Smoothed, gamma, s);
        out.zeta1[i] = -h.value / lm.lambda_bar;
    }
    return out;
}

namespace {

struct StageState {
    std::vector<double> z;
    std::vector<double> lambda;
    double mu = 0.0;
};

DecisionVector initial_guess(const Scenario& s, const TimeGrid& grid, int k, std::uint64_t seed) {
    const TargetHit hit = target_set(s)->closest(s.y0);
    const Vec2 dir = unit_or(hit.point - s.y0, {1.0, 0.0});
    const double travel = s.v_bound > 0.0 ? hit.distance / s.v_bound : 1.0;
    DecisionVector d;
    d.controls = ControlProfile::zeros(grid);
    d.x_init = s.y0;
    const int n = grid.nodes();
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(k));
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
        Vec2 v = dir * s.v_bound;
        Vec2 u = dir * s.u_bound;
        double u0 = 1.0;
        double w = travel * 1.05 / grid.horizon;
        if (k > 0) {
            v = clip_norm(v + Vec2{U(rng), U(rng)} * (0.3 * s.v_bound), s.v_bound);
            u = clip_norm(u + Vec2{U(rng), U(rng)} * (0.3 * s.u_bound), s.u_bound);
            u0 = std::clamp(0.8 + 0.2 * U(rng), 0.0, 1.0);
            w *= 1.0 + 0.2 * U(rng);
        }
        d.controls.v[i] = v;
        d.controls.u[i] = u;
        d.controls.u0[i] = u0;
        d.controls.omega[i] = w;
    }
    if (k > 0) d.x_init = s.y0 + Vec2{U(rng), U(rng)} * (0.3 * s.R1);
    return d;
}

// Lower argmin at the decision's (omega, v); the warm start is kept only when
// it is feasible, otherwise the cold multi-start decides.
LowerSolution lower_at(const DecisionVector& d, double gamma, const Scenario& s, const SolverOptions& opts,
                       const LowerSolution* warm) {
    if (warm) {
        LowerSolution w = solve_lower(d.controls.omega, d.controls.v, gamma, s, opts, warm);
        if (w.max_violation <= 10.0 * opts.feas_tol) return w;
    }
    return solve_lower(d.controls.omega, d.controls.v, gamma, s, opts, nullptr);
}

// Replaces the lower block of the decision by the lower argmin and rescales
// its multipliers into the outer h_lower multipliers.
void install_lower(const NLPInstance& nlp, double rho, StageState& st, const LowerSolution& lo) {
    DecisionVector d = nlp.unpack(st.z);
    d.x_init = lo.x_init;
    d.controls.u = lo.u;
    d.controls.u0 = lo.u0;
    st.z = nlp.pack(d);
    const int n = nlp.grid.nodes();
    for (int i = 0; i < n; ++i) st.lambda[i] = rho * lo.multipliers.weights_L[i];
}

// Model of phi around an anchor: first-order expansion minus a proximal
// term, so the penalized objective gains (kappa rho / 2)|delta|^2.
LowerCallback phi_model(const LowerSolution& anchor, const std::vector<double>& omega0, const std::vector<Vec2>& v0,
                        double kappa) {
    return [anchor, omega0, v0, kappa](const std::vector<double>& omega, const std::vector<Vec2>& v) {
        ValueGradient vg;
        vg.value = anchor.value;
        vg.d_omega.resize(omega.size());
        vg.d_v.resize(v.size());
        for (std::size_t i = 0; i < omega.size(); ++i) {
            const double dw = omega[i] - omega0[i];
            const Vec2 dv = v[i] - v0[i];
            vg.value += anchor.grad_omega[i] * dw + dot(anchor.grad_v[i], dv) - 0.5 * kappa * (dw * dw + norm2(dv));
            vg.d_omega[i] = anchor.grad_omega[i] - kappa * dw;
            vg.d_v[i] = anchor.grad_v[i] - kappa * dv;
        }
        return vg;
    };
}

double control_change(const ControlProfile& a, const ControlProfile& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.omega.size(); ++i) {
        m = std::max(m, std::abs(a.omega[i] - b.omega[i]));
        m = std::max(m, norm(a.v[i] - b.v[i]));
    }
    return m;
}

constexpr int kMaxSyncs = 12;
constexpr int kSyncRounds = 10;
constexpr double kProx = 1.0;

}  // namespace

BilevelSolution solve_bilevel(const Scenario& s, const SolverOptions& opts) {
    const ValidationReport vr = validate(s);
    if (!vr.ok) throw std::invalid_argument("scenario fails validation: " + vr.failures.front().assumption + ": " +
                                            vr.failures.front().message);
    std::vector<double> gammas = opts.gamma_schedule;
    if (gammas.empty()) gammas = SmoothingSchedule::doubling(s, 64.0).gammas;
    SmoothingSchedule{gammas}.check(s);
    std::vector<double> rhos;
    for (double r : opts.rho_schedule)
        if (r > 0.0) rhos.push_back(r);

    const TimeGrid grid = opts.grid;
    const ALOptions ao = al_options(opts);

    BilevelSolution sol;
    StageState st;
    LowerSolution lower;
    bool have_lower = false;

    auto make_nlp = [&](double rho, double gamma, LowerCallback cb) {
        NLPInstance nlp = assemble_penalized(rho, gamma, s, grid, std::move(cb));
        nlp.omega_max = opts.omega_max;
        return nlp;
    };
    const std::vector<char> mask(make_nlp(0.0, gammas.front(), nullptr).residual_count(), 1);

    // Smoothing continuation without the value-function penalty.
    bool first = true;
    for (double gamma : gammas) {
        NLPInstance nlp = make_nlp(0.0, gamma, nullptr);
        StageRecord rec;
        rec.gamma = gamma;
        ALResult r;
        if (first) {
            // Multi-start: seeds run concurrently, merged in seed order.
            const int seeds = std::max(1, opts.seeds);
            std::vector<std::future<ALResult>> futs;
            for (int k = 0; k < seeds; ++k) {
                futs.push_back(std::async(std::launch::async, [&, k] {
                    const DecisionVector d0 = initial_guess(s, grid, k, opts.seed);
                    return augmented_lagrangian(nlp, nlp.pack(d0), mask, {}, ao);
                }));
            }
            bool have = false;
            for (int k = 0; k < seeds; ++k) {
                ALResult rk = futs[k].get();
                const bool feas = rk.max_violation <= 1e-6;
                const bool bfeas = have && r.max_violation <= 1e-6;
                bool better = !have;
                if (have) {
                    if (feas != bfeas) better = feas;
                    else if (feas) better = rk.objective < r.objective - 1e-9;
                    else better = rk.max_violation < r.max_violation;
                }
                if (better) {
                    r = std::move(rk);
                    have = true;
                }
            }
            first = false;
        } else {
            r = augmented_lagrangian(nlp, st.z, mask, st.lambda, ao, st.mu);
        }
        st.z = r.z;
        st.lambda = r.lambda;
        st.mu = kWarmMu;

        const DecisionVector d = nlp.unpack(st.z);
        const Evaluation ev = nlp.evaluate(d, nullptr, false);
        lower = lower_at(d, gamma, s, opts, have_lower ? &lower : nullptr);
        have_lower = true;
        rec.T = ev.t_final;
        rec.objective = ev.objective;
        rec.max_violation = max_violation(ev.residuals, mask);
        rec.iterations = r.iterations;
        rec.converged = r.converged;
        rec.gap_before_sync = ev.z_final - lower.value;
        rec.gap = rec.gap_before_sync;
        rec.incumbents.push_back(ev.objective);
        sol.history.push_back(rec);
        sol.gamma_final = gamma;
        sol.rho_final = 0.0;
    }

    // Penalty ladder at the final smoothing parameter. Each stage alternates a
    // solve against the phi model with a resync of the lower block; a resync
    // is kept only if it lowers the incumbent at a feasible point.
    const double gamma = sol.gamma_final;
    ALOptions sync_ao = ao;
    sync_ao.max_rounds = std::min(ao.max_rounds, kSyncRounds);
    const NLPInstance plain = make_nlp(0.0, gamma, nullptr);
    const double accept_viol = 10.0 * opts.feas_tol;
    for (double rho : rhos) {
        StageRecord rec;
        rec.gamma = gamma;
        rec.rho = rho;
        install_lower(plain, rho, st, lower);
        Evaluation cur = plain.evaluate(plain.unpack(st.z), nullptr, false);
        double best = cur.t_final + rho * (cur.z_final - lower.value);
        bool first_sync = true;
        for (int k = 0; k < kMaxSyncs; ++k) {
            const DecisionVector d0 = plain.unpack(st.z);
            NLPInstance nlp = make_nlp(rho, gamma, phi_model(lower, d0.controls.omega, d0.controls.v, kProx));
            const ALResult r = augmented_lagrangian(nlp, st.z, mask, st.lambda, sync_ao, st.mu);
            rec.iterations += r.iterations;
            ++rec.syncs;

            StageState trial{r.z, r.lambda, st.mu};
            const DecisionVector d1 = nlp.unpack(trial.z);
            const double change = control_change(d0.controls, d1.controls);
            LowerSolution lo = lower_at(d1, gamma, s, opts, &lower);
            const Evaluation pre = plain.evaluate(d1, nullptr, false);
            if (first_sync) rec.gap_before_sync = pre.z_final - lo.value;
            first_sync = false;
            install_lower(plain, rho, trial, lo);
            const Evaluation post = plain.evaluate(plain.unpack(trial.z), nullptr, false);
            const double inc = post.t_final + rho * (post.z_final - lo.value);
            rec.incumbents.push_back(inc);
            if (!(inc < best - 1e-12) || max_violation(post.residuals, mask) > accept_viol) break;
            best = inc;
            st = std::move(trial);
            lower = std::move(lo);
            rec.converged = r.converged;
            if (change <= 1e-9 * std::max(1.0, opts.omega_max * 1e-3)) break;
        }
        const Evaluation ev = plain.evaluate(plain.unpack(st.z), nullptr, false);
        rec.T = ev.t_final;
        rec.gap = ev.z_final - lower.value;
        rec.objective = ev.t_final + rho * rec.gap;
        rec.max_violation = max_violation(ev.residuals, mask);
        sol.history.push_back(rec);
        sol.rho_final = rho;
    }

    NLPInstance fin = make_nlp(0.0, gamma, nullptr);
    sol.decision = fin.unpack(st.z);
    const Evaluation ev = fin.evaluate(sol.decision, nullptr, false);
    sol.traj = ev.traj;
    sol.T_star = ev.t_final;
    sol.lower = lower;
    sol.lambda = st.lambda;
    sol.max_violation = max_violation(ev.residuals, mask);
    sol.feasible = sol.max_violation <= 1e-6;
    sol.status = sol.feasible ? "ok" : "infeasible";
    return sol;
}

double penalty_gap(const BilevelSolution& sol) { return sol.traj.z.back() - sol.lower.value; }

Evaluation outer_adjoint(const BilevelSolution& sol, const Scenario& s) {
    const LowerSolution lower = sol.lower;
    LowerCallback cb = [lower](const std::vector<double>&, const std::vector<Vec2>&) {
        ValueGradient vg;
        vg.value = lower.value;
        vg.d_omega = lower.grad_omega;
        vg.d_v = lower.grad_v;
        return vg;
    };
    const NLPInstance nlp = assemble_penalized(sol.rho_final, sol.gamma_final, s, sol.decision.controls.grid, cb);
    return nlp.evaluate(sol.decision, &sol.lambda, true);
}

}  // namespace sweep
