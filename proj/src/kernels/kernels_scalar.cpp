#include "kernels_impl.hpp"

#include <algorithm>
#include <limits>

namespace sweep::kernels::detail {

SegmentHit min_segment_scalar(double px, double py, const SegmentView& s) {
    SegmentHit best{std::numeric_limits<double>::infinity(), 0, 0.0};
    for (std::size_t i = 0; i < s.count; ++i) {
        const double rx = px - s.ax[i];
        const double ry = py - s.ay[i];
        double t = (rx * s.dx[i] + ry * s.dy[i]) * s.inv_len2[i];
        t = std::min(std::max(t, 0.0), 1.0);
        const double ex = rx - t * s.dx[i];
        const double ey = ry - t * s.dy[i];
        const double d2 = ex * ex + ey * ey;
        if (d2 < best.dist2) best = {d2, i, t};
    }
    return best;
}

double grid_quad_sup_scalar(double a, double r, std::size_t n) {
    const double h = 1.0 / static_cast<double>(n - 1);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double u = static_cast<double>(k) * h;
        const double val = a * u - (r * u) * u;
        best = std::max(best, val);
    }
    return best;
}

double max_half_gap_scalar(const double* px, const double* py, const double* cx,
                           const double* cy, double radius, std::size_t n) {
    double best = -std::numeric_limits<double>::infinity();
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < n; ++i) {
        const double ex = px[i] - cx[i];
        const double ey = py[i] - cy[i];
        best = std::max(best, 0.5 * ((ex * ex + ey * ey) - r2));
    }
    return best;
}

} // namespace sweep::kernels::detail
