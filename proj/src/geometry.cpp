#include "sweep/geometry.hpp"

#include "sweep/dynamics.hpp"
#include "sweep/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace sweep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Offset of angle a above lo, wrapped into [0, 2pi).
double wrap_from(double a, double lo) {
    double d = std::fmod(a - lo, kTwoPi);
    if (d < 0.0) d += kTwoPi;
    return d;
}

Vec2 on_circle(const Vec2& c, double r, double a) { return {c.x + r * std::cos(a), c.y + r * std::sin(a)}; }

std::string fmt_point(const Vec2& p) {
    std::ostringstream os;
    os << "(" << p.x << ", " << p.y << ")";
    return os.str();
}

}  // namespace

double h_upper(const Vec2& y, const Scenario& s) {
    const double r = s.R - s.R1;
    return 0.5 * (norm2(y - s.q0) - r * r);
}

double h_lower(const Vec2& x, const Vec2& y, const Scenario& s) {
    return 0.5 * (norm2(x - y) - s.R1 * s.R1);
}

Vec2 project_disk(const Vec2& p, const Vec2& center, double radius) {
    const Vec2 d = p - center;
    const double n = norm(d);
    if (n <= radius) return p;
    return center + d * (radius / n);
}

TruncationBounds truncation_bounds_sampled(const Scenario& s, int samples) {
    TruncationBounds out;
    out.degenerate = s.u_bound == 0.0 && s.v_bound == 0.0;

    std::vector<Vec2> dirs(samples);
    for (int j = 0; j < samples; ++j) {
        const double a = kTwoPi * j / samples;
        dirs[j] = {std::cos(a), std::sin(a)};
    }

    // Points where the bound is evaluated: only the center matters for the
    // identity drift; otherwise a polar grid over Q (x always lies in Q).
    std::vector<Vec2> xs{s.q0};
    if (s.drift.kind != DriftKind::Identity) {
        for (int ir = 1; ir <= 6; ++ir) {
            const double rad = s.R * ir / 6.0;
            for (int ia = 0; ia < 24; ++ia) xs.push_back(on_circle(s.q0, rad, kTwoPi * ia / 24));
        }
    }

    double M_bar = std::numeric_limits<double>::infinity();
    double m_bar = -std::numeric_limits<double>::infinity();
    for (const Vec2& x : xs) {
        double mb = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        for (const Vec2& z : dirs) {
            double fu_max = -std::numeric_limits<double>::infinity();
            double fu_min = std::numeric_limits<double>::infinity();
            double v_max = -std::numeric_limits<double>::infinity();
            double v_min = std::numeric_limits<double>::infinity();
            for (const Vec2& w : dirs) {
                const double fz = dot(z, drift(x, w * s.u_bound, s));
                fu_max = std::max(fu_max, fz);
                fu_min = std::min(fu_min, fz);
                const double vz = dot(z, w * s.v_bound);
                v_max = std::max(v_max, vz);
                v_min = std::min(v_min, vz);
            }
            mb = std::min(mb, fu_max - v_min);
            lb = std::max(lb, fu_min - v_max);
        }
        M_bar = std::min(M_bar, mb);
        m_bar = std::max(m_bar, lb);
    }
    out.M_bar = M_bar;
    out.m_bar = m_bar;
    return out;
}

TruncationBounds truncation_bounds(const Scenario& s, int samples) {
    if (samples < 8) throw std::invalid_argument("truncation_bounds: samples must be >= 8");
    if (s.drift.kind == DriftKind::Identity) {
        TruncationBounds out;
        out.M_bar = s.u_bound + s.v_bound;
        out.m_bar = -(s.u_bound + s.v_bound);
        out.degenerate = s.u_bound == 0.0 && s.v_bound == 0.0;
        return out;
    }
    return truncation_bounds_sampled(s, samples);
}

double distance_to_exit(const Vec2& p, const Scenario& s) {
    const ExitArc& e = s.exit;
    const Vec2 d = p - s.q0;
    const double span = std::min(e.angle_hi - e.angle_lo, kTwoPi);
    const double r = norm(d);
    if (r > 0.0 && wrap_from(std::atan2(d.y, d.x), e.angle_lo) <= span) return std::abs(r - s.R);
    const double a = norm(p - on_circle(s.q0, s.R, e.angle_lo));
    const double b = norm(p - on_circle(s.q0, s.R, e.angle_hi));
    return std::min(a, b);
}

TargetSet::TargetSet(const Scenario& s, int samples) {
    const double tol = 1e-9 * s.R;
    const double span = std::min(s.exit.angle_hi - s.exit.angle_lo, kTwoPi);
    const int n = std::max(samples, 8);

    auto in_region = [&](const Vec2& p) {
        return norm(p - s.q0) <= s.R + tol && distance_to_exit(p, s) <= s.R1 + tol;
    };

    // A candidate curve is sampled and split into runs of points that lie on the
    // region boundary; `closed` joins the last run to the first.
    auto add_runs = [&](const std::vector<Vec2>& pts, const std::vector<bool>& keep, bool closed) {
        std::vector<std::vector<Vec2>> runs;
        std::vector<Vec2> cur;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (keep[i]) {
                cur.push_back(pts[i]);
            } else if (!cur.empty()) {
                runs.push_back(std::move(cur));
                cur.clear();
            }
        }
        if (!cur.empty()) runs.push_back(std::move(cur));
        if (closed && !runs.empty()) {
            const bool all = std::all_of(keep.begin(), keep.end(), [](bool b) { return b; });
            if (all) {
                runs.front().push_back(runs.front().front());
            } else if (runs.size() > 1 && keep.front() && keep.back()) {
                std::vector<Vec2> merged = std::move(runs.back());
                merged.insert(merged.end(), runs.front().begin(), runs.front().end());
                runs.front() = std::move(merged);
                runs.pop_back();
            }
        }
        for (auto& r : runs) pieces_.push_back(std::move(r));
    };

    // Inner arc at radius R - R1 over the exit angles.
    if (span > 0.0 && s.R > s.R1) {
        std::vector<Vec2> pts(n);
        std::vector<bool> keep(n);
        for (int i = 0; i < n; ++i) {
            pts[i] = on_circle(s.q0, s.R - s.R1, s.exit.angle_lo + span * i / (n - 1));
            keep[i] = in_region(pts[i]);
        }
        add_runs(pts, keep, false);
    }

    // Part of the big circle within R1 of E.
    {
        const double alpha = 2.0 * std::asin(std::min(1.0, s.R1 / (2.0 * s.R)));
        const double lo = s.exit.angle_lo - alpha;
        const double width = std::min(span + 2.0 * alpha, kTwoPi);
        const bool closed = width >= kTwoPi;
        const int m = closed ? n : n;
        std::vector<Vec2> pts(m);
        std::vector<bool> keep(m);
        for (int i = 0; i < m; ++i) {
            const double a = closed ? lo + kTwoPi * i / m : lo + width * i / (m - 1);
            pts[i] = on_circle(s.q0, s.R, a);
            keep[i] = in_region(pts[i]);
        }
        add_runs(pts, keep, closed);
    }

    // End caps: circles of radius R1 about the arc endpoints, outside the
    // interior of E + R1 B and inside Q.
    std::vector<double> ends{s.exit.angle_lo};
    if (span > 0.0 && span < kTwoPi) ends.push_back(s.exit.angle_lo + span);
    if (span < kTwoPi) {
        for (double ea : ends) {
            const Vec2 c = on_circle(s.q0, s.R, ea);
            std::vector<Vec2> pts(n);
            std::vector<bool> keep(n);
            for (int i = 0; i < n; ++i) {
                // Start opposite to q0; the kept run then does not wrap.
                const double a = ea + kTwoPi * i / n;
                pts[i] = on_circle(c, s.R1, a);
                keep[i] = norm(pts[i] - s.q0) <= s.R + tol && distance_to_exit(pts[i], s) >= s.R1 - tol;
            }
            add_runs(pts, keep, true);
        }
    }

    for (int pi = 0; pi < static_cast<int>(pieces_.size()); ++pi) {
        const auto& pc = pieces_[pi];
        if (pc.size() == 1) {
            ax_.push_back(pc[0].x);
            ay_.push_back(pc[0].y);
            dx_.push_back(0.0);
            dy_.push_back(0.0);
            inv_len2_.push_back(0.0);
            seg_tangent_.push_back(Vec2{0.0, 0.0});
            seg_piece_.push_back(pi);
            continue;
        }
        for (std::size_t i = 0; i + 1 < pc.size(); ++i) {
            const Vec2 d = pc[i + 1] - pc[i];
            const double l2 = norm2(d);
            ax_.push_back(pc[i].x);
            ay_.push_back(pc[i].y);
            dx_.push_back(d.x);
            dy_.push_back(d.y);
            inv_len2_.push_back(l2 > 0.0 ? 1.0 / l2 : 0.0);
            seg_tangent_.push_back(l2 > 0.0 ? d * (1.0 / std::sqrt(l2)) : Vec2{0.0, 0.0});
            seg_piece_.push_back(pi);
        }
    }
}

std::size_t TargetSet::point_count() const {
    std::size_t n = 0;
    for (const auto& p : pieces_) n += p.size();
    return n;
}

TargetHit TargetSet::closest(const Vec2& p) const {
    TargetHit hit;
    if (ax_.empty()) {
        hit.distance = std::numeric_limits<double>::infinity();
        return hit;
    }
    const kernels::SegmentView view{ax_.data(), ay_.data(), dx_.data(), dy_.data(), inv_len2_.data(), ax_.size()};
    const kernels::SegmentHit sh = kernels::active().min_segment(p.x, p.y, view);
    hit.distance = std::sqrt(sh.dist2);
    hit.point = {ax_[sh.index] + sh.t * dx_[sh.index], ay_[sh.index] + sh.t * dy_[sh.index]};
    hit.tangent = seg_tangent_[sh.index];
    hit.piece = seg_piece_[sh.index];
    return hit;
}

std::shared_ptr<const TargetSet> target_set(const Scenario& s) {
    using Key = std::array<double, 7>;
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<const TargetSet>> cache;
    const Key key{s.q0.x, s.q0.y, s.R, s.R1, s.exit.angle_lo, s.exit.angle_hi, static_cast<double>(s.target_samples)};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto ts = std::make_shared<const TargetSet>(s, s.target_samples);
    cache.emplace(key, ts);
    return ts;
}

double target_distance(const Vec2& y, const Scenario& s) { return target_set(s)->distance(y); }

ValidationReport validate(const Scenario& s) {
    ValidationReport rep;
    auto fail = [&](std::string a, std::string m) {
        rep.ok = false;
        rep.failures.push_back({std::move(a), std::move(m)});
    };

    if (s.dim != 2) fail("geometry", "only dim = 2 is supported");
    if (!(s.R1 > 0.0) || !(s.R > s.R1)) fail("geometry", "require R > R1 > 0");
    if (norm(s.y0 - s.q0) > s.R - s.R1 + 1e-12 * s.R)
        fail("geometry", "initial small disk not contained in Q: |y0 - q0| = " + std::to_string(norm(s.y0 - s.q0)));
    if (s.exit.angle_lo > s.exit.angle_hi) fail("geometry", "exit arc has angle_lo > angle_hi");
    if (s.u_bound < 0.0 || s.v_bound < 0.0) fail("H3", "control set radii must be nonnegative");
    if (!rep.ok) return rep;

    if (target_set(s)->empty()) fail("geometry", "target set is empty");

    // H1: bound and Lipschitz constant, sampled on the working box |x - q0| <= R + R1.
    {
        const double box = s.R + s.R1;
        double worst = 0.0;
        Vec2 worst_x, worst_u;
        double worst_lip = 0.0;
        for (int ix = -8; ix <= 8; ++ix) {
            for (int iy = -8; iy <= 8; ++iy) {
                const Vec2 x = s.q0 + Vec2{box * ix / 8.0, box * iy / 8.0};
                if (norm(x - s.q0) > box) continue;
                for (int k = 0; k < 16; ++k) {
                    const double a = kTwoPi * k / 16;
                    for (double rad : {0.0, 0.5, 1.0}) {
                        const Vec2 u = Vec2{std::cos(a), std::sin(a)} * (rad * s.u_bound);
                        const double f = norm(drift_unsaturated(x, u, s));
                        if (f > worst) {
                            worst = f;
                            worst_x = x;
                            worst_u = u;
                        }
                    }
                }
                const Vec2 x2 = x + Vec2{0.37, -0.21};
                const double lip = norm(drift_unsaturated(x, {}, s) - drift_unsaturated(x2, {}, s)) / norm(x - x2);
                worst_lip = std::max(worst_lip, lip);
            }
        }
        if (worst > s.M1 * (1.0 + 1e-12))
            fail("H1", "|f(x,u)| = " + std::to_string(worst) + " exceeds M1 at x = " + fmt_point(worst_x) +
                           ", u = " + fmt_point(worst_u));
        if (worst_lip > s.K_f * (1.0 + 1e-9) + 1e-12)
            fail("H1", "sampled Lipschitz ratio " + std::to_string(worst_lip) + " exceeds K_f");
    }
    rep.notes.push_back("H2: f(x,U) is a translated ball, closed and convex by construction");
    rep.notes.push_back("H3: U and V are closed balls, compact and convex by construction");

    // H4: delta B ⊂ f(x,U) = A x + b_U B for x in Q.
    if (!(s.delta > 0.0)) {
        fail("H4", "delta must be positive");
    } else if (s.drift.kind == DriftKind::Identity) {
        if (s.delta > s.u_bound) fail("H4", "delta = " + std::to_string(s.delta) + " exceeds b_U = " + std::to_string(s.u_bound));
    } else {
        for (int ir = 0; ir <= 6; ++ir) {
            for (int ia = 0; ia < 24; ++ia) {
                const Vec2 x = on_circle(s.q0, s.R * ir / 6.0, kTwoPi * ia / 24);
                if (norm(drift_unsaturated(x, {}, s)) + s.delta > s.u_bound) {
                    fail("H4", "delta ball not contained in f(x,U) at x = " + fmt_point(x));
                    ir = 7;
                    break;
                }
            }
        }
    }

    rep.bounds = truncation_bounds(s, 256);
    if (rep.bounds.degenerate) fail("H5", "degenerate control sets: b_U = b_V = 0");
    if (!(s.M > 0.0)) {
        fail("H5", "truncation level M = " + std::to_string(s.M) + " must be positive");
    } else if (s.M >= rep.bounds.M_bar) {
        fail("H5", "M = " + std::to_string(s.M) + " >= M_bar = " + std::to_string(rep.bounds.M_bar) +
                       ": strong invariance, bilevel collapses");
    } else if (s.M <= rep.bounds.m_bar) {
        fail("H5", "M = " + std::to_string(s.M) + " <= m_bar = " + std::to_string(rep.bounds.m_bar) +
                       ": lower level feasible set may be empty");
    }
    rep.notes.push_back("H6: non-isolation of the optimum is assumed, not checked");
    return rep;
}

}  // namespace sweep
