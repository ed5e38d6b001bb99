#pragma once

#include "sweep/kernels.hpp"

namespace sweep::kernels::detail {

SegmentHit min_segment_scalar(double px, double py, const SegmentView& s);
double grid_quad_sup_scalar(double a, double r, std::size_t n);
double max_half_gap_scalar(const double* px, const double* py, const double* cx,
                           const double* cy, double radius, std::size_t n);

#if defined(SWEEP_HAVE_AVX2_TU)
SegmentHit min_segment_avx2(double px, double py, const SegmentView& s);
double grid_quad_sup_avx2(double a, double r, std::size_t n);
double max_half_gap_avx2(const double* px, const double* py, const double* cx,
                         const double* cy, double radius, std::size_t n);
#endif

} // namespace sweep::kernels::detail
