// Compiled with -mavx2 only; the dispatcher calls into this file after a CPUID check.
#include "kernels_impl.hpp"

#include <immintrin.h>

#include <algorithm>
#include <limits>

namespace sweep::kernels::detail {

namespace {

inline double hmax(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
}

} // namespace

SegmentHit min_segment_avx2(double px, double py, const SegmentView& s) {
    const std::size_t n = s.count;
    const std::size_t vec_end = n - n % 4;

    const __m256d vpx = _mm256_set1_pd(px);
    const __m256d vpy = _mm256_set1_pd(py);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d four = _mm256_set1_pd(4.0);

    __m256d best_d2 = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d best_idx = _mm256_setzero_pd();
    __m256d best_t = _mm256_setzero_pd();
    __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);

    for (std::size_t i = 0; i < vec_end; i += 4) {
        const __m256d dx = _mm256_loadu_pd(s.dx + i);
        const __m256d dy = _mm256_loadu_pd(s.dy + i);
        const __m256d rx = _mm256_sub_pd(vpx, _mm256_loadu_pd(s.ax + i));
        const __m256d ry = _mm256_sub_pd(vpy, _mm256_loadu_pd(s.ay + i));
        __m256d t = _mm256_add_pd(_mm256_mul_pd(rx, dx), _mm256_mul_pd(ry, dy));
        t = _mm256_mul_pd(t, _mm256_loadu_pd(s.inv_len2 + i));
        t = _mm256_min_pd(_mm256_max_pd(t, zero), one);
        const __m256d ex = _mm256_sub_pd(rx, _mm256_mul_pd(t, dx));
        const __m256d ey = _mm256_sub_pd(ry, _mm256_mul_pd(t, dy));
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey));

        const __m256d lt = _mm256_cmp_pd(d2, best_d2, _CMP_LT_OQ);
        best_d2 = _mm256_blendv_pd(best_d2, d2, lt);
        best_idx = _mm256_blendv_pd(best_idx, idx, lt);
        best_t = _mm256_blendv_pd(best_t, t, lt);
        idx = _mm256_add_pd(idx, four);
    }

    alignas(32) double ld[4], li[4], lt[4];
    _mm256_store_pd(ld, best_d2);
    _mm256_store_pd(li, best_idx);
    _mm256_store_pd(lt, best_t);

    SegmentHit best{std::numeric_limits<double>::infinity(), 0, 0.0};
    for (int k = 0; k < 4; ++k) {
        const auto lane_idx = static_cast<std::size_t>(li[k]);
        if (ld[k] < best.dist2 || (ld[k] == best.dist2 && lane_idx < best.index)) {
            best = {ld[k], lane_idx, lt[k]};
        }
    }

    for (std::size_t i = vec_end; i < n; ++i) {
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

double grid_quad_sup_avx2(double a, double r, std::size_t n) {
    const double h = 1.0 / static_cast<double>(n - 1);
    const std::size_t vec_end = n - n % 4;
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vr = _mm256_set1_pd(r);
    const __m256d vh = _mm256_set1_pd(h);
    const __m256d four = _mm256_set1_pd(4.0);
    __m256d k = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    __m256d best = _mm256_set1_pd(-std::numeric_limits<double>::infinity());

    for (std::size_t i = 0; i < vec_end; i += 4) {
        const __m256d u = _mm256_mul_pd(k, vh);
        const __m256d val = _mm256_sub_pd(_mm256_mul_pd(va, u), _mm256_mul_pd(_mm256_mul_pd(vr, u), u));
        best = _mm256_max_pd(best, val);
        k = _mm256_add_pd(k, four);
    }
    double out = hmax(best);
    for (std::size_t i = vec_end; i < n; ++i) {
        const double u = static_cast<double>(i) * h;
        out = std::max(out, a * u - (r * u) * u);
    }
    return out;
}

double max_half_gap_avx2(const double* px, const double* py, const double* cx,
                         const double* cy, double radius, std::size_t n) {
    const std::size_t vec_end = n - n % 4;
    const __m256d r2 = _mm256_set1_pd(radius * radius);
    const __m256d half = _mm256_set1_pd(0.5);
    __m256d best = _mm256_set1_pd(-std::numeric_limits<double>::infinity());

    for (std::size_t i = 0; i < vec_end; i += 4) {
        const __m256d ex = _mm256_sub_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(cx + i));
        const __m256d ey = _mm256_sub_pd(_mm256_loadu_pd(py + i), _mm256_loadu_pd(cy + i));
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey));
        best = _mm256_max_pd(best, _mm256_mul_pd(half, _mm256_sub_pd(d2, r2)));
    }
    double out = hmax(best);
    const double r2s = radius * radius;
    for (std::size_t i = vec_end; i < n; ++i) {
        const double ex = px[i] - cx[i];
        const double ey = py[i] - cy[i];
        out = std::max(out, 0.5 * ((ex * ex + ey * ey) - r2s));
    }
    return out;
}

} // namespace sweep::kernels::detail
