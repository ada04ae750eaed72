#pragma once

#include <cstddef>

// Internal lane plumbing for the runtime-dispatched kernels.  Each lane fills
// a KernelTable with the same entry points; dispatch picks a table once at
// startup (or when force_lane is called from tests).

namespace metgeo::kernels::detail {

struct KernelTable {
  void (*det_sym2)(const double*, const double*, const double*, std::size_t, double*);
  void (*det_sym3)(const double*, const double*, const double*, const double*,
                   const double*, const double*, std::size_t, double*);
  void (*sqrt_clamped)(const double*, std::size_t, double*);
  void (*frob2_diff_sym2)(const double*, const double*, const double*,
                          const double*, const double*, const double*,
                          std::size_t, double*);
  void (*axpby)(double, const double*, double, const double*, std::size_t, double*);
  void (*seg_terms_sym2)(const double*, const double*, const double*,
                         const double*, const double*, const double*,
                         std::size_t, double*);
};

const KernelTable& scalar_table();

// Null when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_table_or_null();

}  // namespace metgeo::kernels::detail
