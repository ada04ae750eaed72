#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace metgeo::kernels {

// Per-cell map kernels come in lanes: a scalar reference implementation and
// a vectorized variant (AVX2 on x86-64) selected at runtime.  Both lanes are
// written operation-for-operation identically and the build disables FP
// contraction, so results are bit-identical; the test suite asserts that.
// Reductions deliberately have a single (scalar, fixed-order pairwise tree)
// implementation so sums never depend on the lane.
enum class Lane { scalar, avx2 };

Lane active_lane();
bool lane_available(Lane lane);
void force_lane(Lane lane);  // test hook; throws InvalidArgumentError if unavailable
const char* lane_name(Lane lane);

// --- per-cell maps over SoA component arrays (upper-triangle packed) -------

// det of symmetric 2x2 per cell: out = a00*a11 - a01^2.
void det_sym2(const double* a00, const double* a01, const double* a11,
              std::size_t count, double* out);

// det of symmetric 3x3 per cell.
void det_sym3(const double* a00, const double* a01, const double* a02,
              const double* a11, const double* a12, const double* a22,
              std::size_t count, double* out);

// sqrt(max(x, 0)) per cell; negative and -0 inputs map to +0.
void sqrt_clamped(const double* x, std::size_t count, double* out);

// Frobenius norm squared of the difference in an orthonormal frame:
// out = (da00)^2 + (da11)^2 + 2 (da01)^2 per cell.
void frob2_diff_sym2(const double* a00, const double* a01, const double* a11,
                     const double* b00, const double* b01, const double* b11,
                     std::size_t count, double* out);

void frob2_diff_sym3(const double* a[6], const double* b[6],
                     std::size_t count, double* out);

// out = alpha*x + beta*y per entry.
void axpby(double alpha, const double* x, double beta, const double* y,
           std::size_t count, double* out);

// Per-cell term of one segment of the discretized L2 length functional for
// n = 2 fields (see field_path.hpp for the rule):
//   s = 8 (p1 - p0)^2 + (tr(W^2) - tr(W)^2/2) sqrt(det Mbar)
// with p = det^{1/4}, Mbar the entrywise midpoint and W = Mbar^{-1} (B - A).
// Cells with B == A exactly contribute 0 (covers jointly deflated cells).
void seg_terms_sym2(const double* a00, const double* a01, const double* a11,
                    const double* b00, const double* b01, const double* b11,
                    std::size_t count, double* out);

// --- deterministic reductions (lane-independent) ---------------------------

// Fixed-order pairwise tree sum; identical result for any lane / thread count.
double pairwise_sum(std::span<const double> x);

// Fixed-order pairwise tree over x[i]*y[i].
double pairwise_dot(std::span<const double> x, std::span<const double> y);

}  // namespace metgeo::kernels
