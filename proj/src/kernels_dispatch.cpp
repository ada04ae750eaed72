#include "metgeo/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_detail.hpp"
#include "metgeo/errors.hpp"

namespace metgeo::kernels {
namespace {

using detail::KernelTable;

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Lane> g_lane{Lane::scalar};

// METGEO_KERNEL_LANE overrides auto-detection ("scalar" or "avx2"); an
// unavailable or unrecognized value falls back to the detected lane.
const KernelTable* lane_from_env() {
  const char* env = std::getenv("METGEO_KERNEL_LANE");
  if (!env) return nullptr;
  if (std::strcmp(env, "scalar") == 0) {
    g_lane.store(Lane::scalar, std::memory_order_relaxed);
    return &detail::scalar_table();
  }
  if (std::strcmp(env, "avx2") == 0) {
    if (const KernelTable* avx2 = detail::avx2_table_or_null()) {
      g_lane.store(Lane::avx2, std::memory_order_relaxed);
      return avx2;
    }
  }
  return nullptr;
}

const KernelTable& table() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (!t) {
    t = lane_from_env();
    if (!t) {
      if (const KernelTable* avx2 = detail::avx2_table_or_null()) {
        g_lane.store(Lane::avx2, std::memory_order_relaxed);
        t = avx2;
      } else {
        g_lane.store(Lane::scalar, std::memory_order_relaxed);
        t = &detail::scalar_table();
      }
    }
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

double tree_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return tree_sum(x, h) + tree_sum(x + h, n - h);
}

double tree_dot(const double* x, const double* y, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
  }
  const std::size_t h = n / 2;
  return tree_dot(x, y, h) + tree_dot(x + h, y + h, n - h);
}

}  // namespace

Lane active_lane() {
  table();  // ensure selection happened
  return g_lane.load(std::memory_order_relaxed);
}

bool lane_available(Lane lane) {
  if (lane == Lane::scalar) return true;
  return detail::avx2_table_or_null() != nullptr;
}

void force_lane(Lane lane) {
  if (lane == Lane::scalar) {
    g_table.store(&detail::scalar_table(), std::memory_order_release);
    g_lane.store(Lane::scalar, std::memory_order_relaxed);
    return;
  }
  const KernelTable* avx2 = detail::avx2_table_or_null();
  if (!avx2) throw InvalidArgumentError("force_lane: avx2 lane unavailable on this host");
  g_table.store(avx2, std::memory_order_release);
  g_lane.store(Lane::avx2, std::memory_order_relaxed);
}

const char* lane_name(Lane lane) { return lane == Lane::avx2 ? "avx2" : "scalar"; }

void det_sym2(const double* a00, const double* a01, const double* a11,
              std::size_t count, double* out) {
  table().det_sym2(a00, a01, a11, count, out);
}

void det_sym3(const double* a00, const double* a01, const double* a02,
              const double* a11, const double* a12, const double* a22,
              std::size_t count, double* out) {
  table().det_sym3(a00, a01, a02, a11, a12, a22, count, out);
}

void sqrt_clamped(const double* x, std::size_t count, double* out) {
  table().sqrt_clamped(x, count, out);
}

void frob2_diff_sym2(const double* a00, const double* a01, const double* a11,
                     const double* b00, const double* b01, const double* b11,
                     std::size_t count, double* out) {
  table().frob2_diff_sym2(a00, a01, a11, b00, b01, b11, count, out);
}

// n = 3 differences are off the hot path; single scalar implementation.
void frob2_diff_sym3(const double* a[6], const double* b[6],
                     std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    double diag = 0.0, off = 0.0;
    for (int k : {0, 3, 5}) {
      const double d = b[k][i] - a[k][i];
      diag += d * d;
    }
    for (int k : {1, 2, 4}) {
      const double d = b[k][i] - a[k][i];
      off += d * d;
    }
    out[i] = diag + 2.0 * off;
  }
}

void axpby(double alpha, const double* x, double beta, const double* y,
           std::size_t count, double* out) {
  table().axpby(alpha, x, beta, y, count, out);
}

void seg_terms_sym2(const double* a00, const double* a01, const double* a11,
                    const double* b00, const double* b01, const double* b11,
                    std::size_t count, double* out) {
  table().seg_terms_sym2(a00, a01, a11, b00, b01, b11, count, out);
}

double pairwise_sum(std::span<const double> x) { return tree_sum(x.data(), x.size()); }

double pairwise_dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgumentError("pairwise_dot: size mismatch");
  return tree_dot(x.data(), y.data(), x.size());
}

}  // namespace metgeo::kernels
