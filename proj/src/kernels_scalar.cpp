// Scalar reference lane.  The AVX2 lane mirrors these expressions
// operation-for-operation; keep the two files in sync (the equivalence tests
// assert bit-identical outputs).

#include <cmath>

#include "kernels_detail.hpp"

namespace metgeo::kernels::detail {
namespace {

inline double clamp0(double x) { return x > 0.0 ? x : 0.0; }

void det_sym2_scalar(const double* a00, const double* a01, const double* a11,
                     std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i)
    out[i] = a00[i] * a11[i] - a01[i] * a01[i];
}

void det_sym3_scalar(const double* a00, const double* a01, const double* a02,
                     const double* a11, const double* a12, const double* a22,
                     std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    const double t1 = a11[i] * a22[i] - a12[i] * a12[i];
    const double t2 = a01[i] * a22[i] - a02[i] * a12[i];
    const double t3 = a01[i] * a12[i] - a02[i] * a11[i];
    out[i] = (a00[i] * t1 - a01[i] * t2) + a02[i] * t3;
  }
}

void sqrt_clamped_scalar(const double* x, std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i) out[i] = std::sqrt(clamp0(x[i]));
}

void frob2_diff_sym2_scalar(const double* a00, const double* a01, const double* a11,
                            const double* b00, const double* b01, const double* b11,
                            std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    const double d00 = b00[i] - a00[i];
    const double d01 = b01[i] - a01[i];
    const double d11 = b11[i] - a11[i];
    out[i] = (d00 * d00 + d11 * d11) + 2.0 * (d01 * d01);
  }
}

void axpby_scalar(double alpha, const double* x, double beta, const double* y,
                  std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i) out[i] = alpha * x[i] + beta * y[i];
}

void seg_terms_sym2_scalar(const double* a00, const double* a01, const double* a11,
                           const double* b00, const double* b01, const double* b11,
                           std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    const double d00 = b00[i] - a00[i];
    const double d01 = b01[i] - a01[i];
    const double d11 = b11[i] - a11[i];
    const double m00 = 0.5 * (a00[i] + b00[i]);
    const double m01 = 0.5 * (a01[i] + b01[i]);
    const double m11 = 0.5 * (a11[i] + b11[i]);
    const double det_a = a00[i] * a11[i] - a01[i] * a01[i];
    const double det_b = b00[i] * b11[i] - b01[i] * b01[i];
    const double pa = std::sqrt(std::sqrt(clamp0(det_a)));
    const double pb = std::sqrt(std::sqrt(clamp0(det_b)));
    const double dp = pb - pa;
    const double det_m = m00 * m11 - m01 * m01;
    // P = adj(Mbar) * D, so W = Mbar^{-1} D = P / det(Mbar).
    const double p00 = m11 * d00 - m01 * d01;
    const double p01 = m11 * d01 - m01 * d11;
    const double p10 = m00 * d01 - m01 * d00;
    const double p11 = m00 * d11 - m01 * d01;
    const double inv_det = 1.0 / det_m;
    const double tr_w = (p00 + p11) * inv_det;
    const double tr_w2 = ((p00 * p00 + p11 * p11) + 2.0 * (p01 * p10)) * (inv_det * inv_det);
    const double traceless = clamp0(tr_w2 - 0.5 * (tr_w * tr_w)) * std::sqrt(clamp0(det_m));
    const double s = 8.0 * (dp * dp) + traceless;
    const bool same = (d00 == 0.0) && (d01 == 0.0) && (d11 == 0.0);
    out[i] = same ? 0.0 : s;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{
      det_sym2_scalar,     det_sym3_scalar, sqrt_clamped_scalar,
      frob2_diff_sym2_scalar, axpby_scalar, seg_terms_sym2_scalar,
  };
  return t;
}

}  // namespace metgeo::kernels::detail
