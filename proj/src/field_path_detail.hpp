#pragma once

#include <vector>

#include "metgeo/field.hpp"

// Shared internals of the discretized L2 length functional on paths of
// fields (used by path_length_L2 and the d_upper path optimizer).

namespace metgeo::detail {

// [comp][cell] raw node storage.
using Comps = std::vector<std::vector<double>>;

// Per-cell segment term for fiber dim 3 (dim-2 cells go through the
// dispatched kernel): (16/3)(dp)^2 + clamp0(tr W^2 - (tr W)^2/3) sqrt(det Mbar).
double seg_term_cell3(const SymTensor& a, const SymTensor& b);

// Inner sum Sum_j s_j mu_g(cell j) of one segment given raw component
// pointers; scratch is resized to the cell count.
double seg_inner_sum(const GridDomain& dom, int n, const double* const* a,
                     const double* const* b, std::vector<double>& scratch);

// Single-cell segment term at cell j (bit-consistent with the bulk kernels).
double seg_term_at(const GridDomain& dom, int n, const double* const* a,
                   const double* const* b, std::size_t j);

}  // namespace metgeo::detail
