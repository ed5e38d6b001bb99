#pragma once
// Data-parallel inner loops. Each kernel has a scalar reference and, on x86-64,
// an AVX2 variant; kernels() picks one at first use from CPUID. Setting the
// environment variable SWEEP_SIMD=scalar forces the reference path.

#include <cstddef>
#include <string_view>

namespace sweep::kernels {

/// Closest segment of a polyline to a query point.
struct SegmentHit {
    double dist2 = 0.0;   // squared distance to the closest point
    std::size_t index = 0;  // segment index (lowest index on ties)
    double t = 0.0;       // parameter of the closest point along the segment, in [0,1]
};

/// Segment soup in structure-of-arrays form. inv_len2[i] is 1/|b-a|^2, or 0
/// for a degenerate segment (which then behaves as the point a).
struct SegmentView {
    const double* ax;
    const double* ay;
    const double* dx;  // b - a
    const double* dy;
    const double* inv_len2;
    std::size_t count;
};

using MinSegmentFn = SegmentHit (*)(double px, double py, const SegmentView& segs);

/// max_{k=0..n-1} a*u_k - r*u_k^2 with u_k = k/(n-1), n >= 2.
using GridQuadSupFn = double (*)(double a, double r, std::size_t n);

/// max_i 0.5*(|p_i - c_i|^2 - radius^2) over n node pairs (SoA).
using MaxHalfGapFn = double (*)(const double* px, const double* py, const double* cx,
                                const double* cy, double radius, std::size_t n);

struct KernelTable {
    std::string_view name;
    MinSegmentFn min_segment;
    GridQuadSupFn grid_quad_sup;
    MaxHalfGapFn max_half_gap;
};

const KernelTable& scalar_table();

/// Null when the build or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// Table selected for this process.
const KernelTable& active();

} // namespace sweep::kernels
