#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "metgeo/grid.hpp"

namespace metgeo {

// Measurable semimetric field: per cell either an SPD tensor (in the
// g-orthonormal frame) or the deflated boundary representative, stored
// canonically as the zero tensor with the cell marked in deflated_mask.
// Components are SoA (one array per packed entry) for the kernel lanes.
// Immutable after construction; determinant and Radon-Nikodym derivative
// sqrt(det) are cached at build time.
class SemimetricField {
 public:
  // Build from a per-cell generator (called with cell indices and center
  // coordinates).  Tensors with min eigenvalue <= eps_pd are deflated to the
  // canonical zero; tensors with an eigenvalue below -eps_indefinite raise
  // InvalidArgumentError.
  static SemimetricField build(DomainPtr dom,
                               const std::function<SymTensor(int ix, int iy, double x, double y)>& f,
                               double eps_pd = kEpsPd);

  // Build from raw SoA components (same validation).
  static SemimetricField from_components(DomainPtr dom, std::vector<std::vector<double>> comps,
                                         double eps_pd = kEpsPd);

  static SemimetricField constant(DomainPtr dom, const SymTensor& a, double eps_pd = kEpsPd);
  static SemimetricField identity(DomainPtr dom);
  static SemimetricField zero(DomainPtr dom);

  const DomainPtr& domain() const { return dom_; }
  int fiber_dim() const { return dom_->fiber_dim(); }
  std::size_t n_cells() const { return dom_->n_cells(); }
  int n_comps() const { return packed_size(dom_->fiber_dim()); }

  SymTensor cell(std::size_t j) const;
  bool deflated(std::size_t j) const { return mask_.raw()[j] != 0; }
  const CellMask& deflated_mask() const { return mask_; }
  bool is_metric() const { return mask_.count() == 0; }

  std::span<const double> comp(int k) const { return comps_[static_cast<std::size_t>(k)]; }
  const double* comp_data(int k) const { return comps_[static_cast<std::size_t>(k)].data(); }
  std::span<const double> det() const { return det_; }
  std::span<const double> radon_nikodym() const { return rn_; }

 private:
  SemimetricField(DomainPtr dom, std::vector<std::vector<double>> comps, double eps_pd);

  DomainPtr dom_;
  std::vector<std::vector<double>> comps_;
  CellMask mask_;
  std::vector<double> det_;
  std::vector<double> rn_;
};

// A field whose every cell is SPD.  Enforced at use sites via
// require_metric(); the storage type is shared.
using MetricField = SemimetricField;

// Throws DegenerateBaseError when f has deflated cells.
void require_metric(const SemimetricField& f, const char* where);

// Throws DomainMismatchError unless both fields share one grid layout.
void require_same_domain(const SemimetricField& a, const SemimetricField& b, const char* where);

// Total volume Vol(Y, f) = integral over Y of the Radon-Nikodym derivative
// sqrt(det) d mu_g; Y = everything when no mask is given.
double volume(const SemimetricField& f);
double volume(const SemimetricField& f, const CellMask& region);

// Cells at the fiber boundary (det <= eps_pd); equals the stored mask.
CellMask deflated_set(const SemimetricField& f);

// Cells where the two fields differ beyond eps_eq (any packed component).
CellMask carrier(const SemimetricField& f0, const SemimetricField& f1, double eps_eq = 0.0);

// Flat L2 norm of the difference in the g-frame:
// sqrt( Sum_j |f1 - f0|_g^2(j) mu_g(cell j) ).  This is the paper-level
// ||.||_g norm on tensor fields, not the geodesic distance d.
double l2_distance(const SemimetricField& f0, const SemimetricField& f1);

// (sup coefficient bound C, min eigenvalue bound zeta) over all cells.
// Requires a genuine metric field (no deflated cells).
std::pair<double, double> amenability_bounds(const MetricField& f);

// Equality as semimetric fields: identical deflation pattern and equal
// tensors (within eps_eq per component) on non-deflated cells.
bool semimetric_equiv(const SemimetricField& f0, const SemimetricField& f1, double eps_eq = 0.0);

}  // namespace metgeo
