// AVX2 lane.  Mirrors kernels_scalar.cpp operation-for-operation: same
// multiply/add/divide order, IEEE sqrt and division, clamping via mask-and.
// With FP contraction off the two lanes are bit-identical.

#include "kernels_detail.hpp"

#if defined(METGEO_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
#define METGEO_AVX2_LANE 1
#include <immintrin.h>
#endif

namespace metgeo::kernels::detail {

#if METGEO_AVX2_LANE

namespace {

inline __m256d clamp0(__m256d x) {
  const __m256d zero = _mm256_setzero_pd();
  return _mm256_and_pd(x, _mm256_cmp_pd(x, zero, _CMP_GT_OQ));
}

void det_sym2_avx2(const double* a00, const double* a01, const double* a11,
                   std::size_t count, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d x00 = _mm256_loadu_pd(a00 + i);
    const __m256d x01 = _mm256_loadu_pd(a01 + i);
    const __m256d x11 = _mm256_loadu_pd(a11 + i);
    const __m256d d = _mm256_sub_pd(_mm256_mul_pd(x00, x11), _mm256_mul_pd(x01, x01));
    _mm256_storeu_pd(out + i, d);
  }
  if (i < count) scalar_table().det_sym2(a00 + i, a01 + i, a11 + i, count - i, out + i);
}

void det_sym3_avx2(const double* a00, const double* a01, const double* a02,
                   const double* a11, const double* a12, const double* a22,
                   std::size_t count, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d x00 = _mm256_loadu_pd(a00 + i);
    const __m256d x01 = _mm256_loadu_pd(a01 + i);
    const __m256d x02 = _mm256_loadu_pd(a02 + i);
    const __m256d x11 = _mm256_loadu_pd(a11 + i);
    const __m256d x12 = _mm256_loadu_pd(a12 + i);
    const __m256d x22 = _mm256_loadu_pd(a22 + i);
    const __m256d t1 = _mm256_sub_pd(_mm256_mul_pd(x11, x22), _mm256_mul_pd(x12, x12));
    const __m256d t2 = _mm256_sub_pd(_mm256_mul_pd(x01, x22), _mm256_mul_pd(x02, x12));
    const __m256d t3 = _mm256_sub_pd(_mm256_mul_pd(x01, x12), _mm256_mul_pd(x02, x11));
    const __m256d d = _mm256_add_pd(
        _mm256_sub_pd(_mm256_mul_pd(x00, t1), _mm256_mul_pd(x01, t2)),
        _mm256_mul_pd(x02, t3));
    _mm256_storeu_pd(out + i, d);
  }
  if (i < count)
    scalar_table().det_sym3(a00 + i, a01 + i, a02 + i, a11 + i, a12 + i, a22 + i,
                            count - i, out + i);
}

void sqrt_clamped_avx2(const double* x, std::size_t count, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(clamp0(_mm256_loadu_pd(x + i))));
  if (i < count) scalar_table().sqrt_clamped(x + i, count - i, out + i);
}

void frob2_diff_sym2_avx2(const double* a00, const double* a01, const double* a11,
                          const double* b00, const double* b01, const double* b11,
                          std::size_t count, double* out) {
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d d00 = _mm256_sub_pd(_mm256_loadu_pd(b00 + i), _mm256_loadu_pd(a00 + i));
    const __m256d d01 = _mm256_sub_pd(_mm256_loadu_pd(b01 + i), _mm256_loadu_pd(a01 + i));
    const __m256d d11 = _mm256_sub_pd(_mm256_loadu_pd(b11 + i), _mm256_loadu_pd(a11 + i));
    const __m256d s = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(d00, d00), _mm256_mul_pd(d11, d11)),
        _mm256_mul_pd(two, _mm256_mul_pd(d01, d01)));
    _mm256_storeu_pd(out + i, s);
  }
  if (i < count)
    scalar_table().frob2_diff_sym2(a00 + i, a01 + i, a11 + i, b00 + i, b01 + i,
                                   b11 + i, count - i, out + i);
}

void axpby_avx2(double alpha, const double* x, double beta, const double* y,
                std::size_t count, double* out) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d s = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                    _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(out + i, s);
  }
  if (i < count) scalar_table().axpby(alpha, x + i, beta, y + i, count - i, out + i);
}

void seg_terms_sym2_avx2(const double* a00, const double* a01, const double* a11,
                         const double* b00, const double* b01, const double* b11,
                         std::size_t count, double* out) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d eight = _mm256_set1_pd(8.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d xa00 = _mm256_loadu_pd(a00 + i), xb00 = _mm256_loadu_pd(b00 + i);
    const __m256d xa01 = _mm256_loadu_pd(a01 + i), xb01 = _mm256_loadu_pd(b01 + i);
    const __m256d xa11 = _mm256_loadu_pd(a11 + i), xb11 = _mm256_loadu_pd(b11 + i);
    const __m256d d00 = _mm256_sub_pd(xb00, xa00);
    const __m256d d01 = _mm256_sub_pd(xb01, xa01);
    const __m256d d11 = _mm256_sub_pd(xb11, xa11);
    const __m256d m00 = _mm256_mul_pd(half, _mm256_add_pd(xa00, xb00));
    const __m256d m01 = _mm256_mul_pd(half, _mm256_add_pd(xa01, xb01));
    const __m256d m11 = _mm256_mul_pd(half, _mm256_add_pd(xa11, xb11));
    const __m256d det_a = _mm256_sub_pd(_mm256_mul_pd(xa00, xa11), _mm256_mul_pd(xa01, xa01));
    const __m256d det_b = _mm256_sub_pd(_mm256_mul_pd(xb00, xb11), _mm256_mul_pd(xb01, xb01));
    const __m256d pa = _mm256_sqrt_pd(_mm256_sqrt_pd(clamp0(det_a)));
    const __m256d pb = _mm256_sqrt_pd(_mm256_sqrt_pd(clamp0(det_b)));
    const __m256d dp = _mm256_sub_pd(pb, pa);
    const __m256d det_m = _mm256_sub_pd(_mm256_mul_pd(m00, m11), _mm256_mul_pd(m01, m01));
    const __m256d p00 = _mm256_sub_pd(_mm256_mul_pd(m11, d00), _mm256_mul_pd(m01, d01));
    const __m256d p01 = _mm256_sub_pd(_mm256_mul_pd(m11, d01), _mm256_mul_pd(m01, d11));
    const __m256d p10 = _mm256_sub_pd(_mm256_mul_pd(m00, d01), _mm256_mul_pd(m01, d00));
    const __m256d p11 = _mm256_sub_pd(_mm256_mul_pd(m00, d11), _mm256_mul_pd(m01, d01));
    const __m256d inv_det = _mm256_div_pd(one, det_m);
    const __m256d tr_w = _mm256_mul_pd(_mm256_add_pd(p00, p11), inv_det);
    const __m256d tr_w2 = _mm256_mul_pd(
        _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(p00, p00), _mm256_mul_pd(p11, p11)),
            _mm256_mul_pd(two, _mm256_mul_pd(p01, p10))),
        _mm256_mul_pd(inv_det, inv_det));
    const __m256d traceless = _mm256_mul_pd(
        clamp0(_mm256_sub_pd(tr_w2, _mm256_mul_pd(half, _mm256_mul_pd(tr_w, tr_w)))),
        _mm256_sqrt_pd(clamp0(det_m)));
    const __m256d s = _mm256_add_pd(_mm256_mul_pd(eight, _mm256_mul_pd(dp, dp)), traceless);
    const __m256d same = _mm256_and_pd(
        _mm256_and_pd(_mm256_cmp_pd(d00, zero, _CMP_EQ_OQ), _mm256_cmp_pd(d01, zero, _CMP_EQ_OQ)),
        _mm256_cmp_pd(d11, zero, _CMP_EQ_OQ));
    _mm256_storeu_pd(out + i, _mm256_andnot_pd(same, s));
  }
  if (i < count)
    scalar_table().seg_terms_sym2(a00 + i, a01 + i, a11 + i, b00 + i, b01 + i,
                                  b11 + i, count - i, out + i);
}

const KernelTable avx2_kernels{
    det_sym2_avx2,     det_sym3_avx2, sqrt_clamped_avx2,
    frob2_diff_sym2_avx2, axpby_avx2, seg_terms_sym2_avx2,
};

}  // namespace

const KernelTable* avx2_table_or_null() {
  return __builtin_cpu_supports("avx2") ? &avx2_kernels : nullptr;
}

#else

const KernelTable* avx2_table_or_null() { return nullptr; }

#endif  // METGEO_AVX2_LANE

}  // namespace metgeo::kernels::detail
