#pragma once

#include "sweep/vec2.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace sweep {

/// Exit arc of the big disk, as an angular interval (radians, lo <= hi).
struct ExitArc {
    double angle_lo = 0.0;
    double angle_hi = 0.0;
};

enum class DriftKind { Identity, Affine };

/// f(x,u) = u for Identity, f(x,u) = A x + u for Affine (saturated at M1).
struct DriftSpec {
    DriftKind kind = DriftKind::Identity;
    std::array<double, 4> A{0.0, 0.0, 0.0, 0.0};  // row-major 2x2
};

struct Scenario {
    std::string name = "default";
    int dim = 2;
    Vec2 q0{0.0, 0.0};
    double R = 10.0;
    double R1 = 1.0;
    Vec2 y0{0.0, 0.0};
    ExitArc exit{};
    double M = 1.5;
    double u_bound = 1.0;  // b_U
    double v_bound = 1.0;  // b_V
    DriftSpec drift{};
    double M1 = 1.0;
    double K_f = 0.0;
    double delta = 1.0;
    int target_samples = 2048;

    double cone_gain() const { return M / R1; }
    double boundary_tol() const { return 1e-9 * R1; }
};

struct TruncationBounds {
    double M_bar = 0.0;
    double m_bar = 0.0;
    bool degenerate = false;  // both control sets reduce to a point
};

double h_upper(const Vec2& y, const Scenario& s);
double h_lower(const Vec2& x, const Vec2& y, const Scenario& s);
Vec2 project_disk(const Vec2& p, const Vec2& center, double radius);

/// Closed forms for ball sets with identity drift, sampled minimax otherwise.
TruncationBounds truncation_bounds(const Scenario& s, int samples = 256);

/// Sampled minimax over `samples` directions regardless of drift family.
TruncationBounds truncation_bounds_sampled(const Scenario& s, int samples);

/// Closest point of the target curve to a query.
struct TargetHit {
    double distance = 0.0;
    Vec2 point;
    Vec2 tangent;  // unit, from the finite-difference tangent of the sample polyline
    int piece = -1;
};

/// Dense polyline sampling of the target curve, the boundary of
/// (E + R1 B) ∩ Q. Immutable once built.
class TargetSet {
public:
    TargetSet(const Scenario& s, int samples);

    TargetHit closest(const Vec2& p) const;
    double distance(const Vec2& p) const { return closest(p).distance; }

    const std::vector<std::vector<Vec2>>& pieces() const { return pieces_; }
    std::size_t point_count() const;
    bool empty() const { return ax_.empty(); }

private:
    std::vector<std::vector<Vec2>> pieces_;
    // Segment soup (SoA) for the distance kernel.
    std::vector<double> ax_, ay_, dx_, dy_, inv_len2_;
    std::vector<Vec2> seg_tangent_;
    std::vector<int> seg_piece_;
};

/// Cached per geometry; safe to call concurrently.
std::shared_ptr<const TargetSet> target_set(const Scenario& s);

double target_distance(const Vec2& y, const Scenario& s);

/// Distance from p to the exit arc E itself.
double distance_to_exit(const Vec2& p, const Scenario& s);

struct ValidationIssue {
    std::string assumption;  // "H1" .. "H6" or "geometry"
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    TruncationBounds bounds;
    std::vector<ValidationIssue> failures;
    std::vector<std::string> notes;
};

ValidationReport validate(const Scenario& s);

}  // namespace sweep
