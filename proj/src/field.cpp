#include "metgeo/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "metgeo/kernels.hpp"

namespace metgeo {
namespace {

// Relative slack below which a negative eigenvalue is treated as numerical
// PSD noise (cell deflates) rather than an indefinite-input error.
constexpr double kIndefiniteRel = 1e-9;

}  // namespace

SemimetricField::SemimetricField(DomainPtr dom, std::vector<std::vector<double>> comps,
                                 double eps_pd)
    : dom_(std::move(dom)), comps_(std::move(comps)) {
  const std::size_t nc = dom_->n_cells();
  const int m = packed_size(dom_->fiber_dim());
  if (static_cast<int>(comps_.size()) != m)
    throw InvalidArgumentError("SemimetricField: wrong component count");
  for (const auto& c : comps_)
    if (c.size() != nc) throw InvalidArgumentError("SemimetricField: component size mismatch");

  mask_ = CellMask(nc);
  const int n = dom_->fiber_dim();
  for (std::size_t j = 0; j < nc; ++j) {
    SymTensor a(n);
    double scale = 1.0;
    for (int k = 0; k < m; ++k) {
      a[k] = comps_[static_cast<std::size_t>(k)][j];
      scale = std::max(scale, std::abs(a[k]));
    }
    const double lo = a.min_eigenvalue();
    if (lo <= eps_pd) {
      if (lo < -kIndefiniteRel * scale)
        throw InvalidArgumentError("SemimetricField: indefinite tensor in cell");
      // Canonical boundary representative: zero tensor + mask bit.
      mask_.set(j, true);
      for (int k = 0; k < m; ++k) comps_[static_cast<std::size_t>(k)][j] = 0.0;
    }
  }

  det_.resize(nc);
  rn_.resize(nc);
  if (n == 2) {
    kernels::det_sym2(comps_[0].data(), comps_[1].data(), comps_[2].data(), nc, det_.data());
  } else {
    kernels::det_sym3(comps_[0].data(), comps_[1].data(), comps_[2].data(), comps_[3].data(),
                      comps_[4].data(), comps_[5].data(), nc, det_.data());
  }
  kernels::sqrt_clamped(det_.data(), nc, rn_.data());
}

SemimetricField SemimetricField::build(
    DomainPtr dom, const std::function<SymTensor(int, int, double, double)>& f, double eps_pd) {
  const int m = packed_size(dom->fiber_dim());
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(m));
  for (auto& c : comps) c.resize(dom->n_cells());
  const auto res = dom->res();
  for (int iy = 0; iy < res[1]; ++iy) {
    const double y = dom->center(1, iy);
    for (int ix = 0; ix < res[0]; ++ix) {
      const double x = dom->center(0, ix);
      const SymTensor a = f(ix, iy, x, y);
      if (a.dim() != dom->fiber_dim())
        throw InvalidArgumentError("SemimetricField::build: tensor dim != fiber_dim");
      const std::size_t j = dom->cell_index(ix, iy);
      for (int k = 0; k < m; ++k) comps[static_cast<std::size_t>(k)][j] = a[k];
    }
  }
  return SemimetricField(std::move(dom), std::move(comps), eps_pd);
}

SemimetricField SemimetricField::from_components(DomainPtr dom,
                                                 std::vector<std::vector<double>> comps,
                                                 double eps_pd) {
  return SemimetricField(std::move(dom), std::move(comps), eps_pd);
}

SemimetricField SemimetricField::constant(DomainPtr dom, const SymTensor& a, double eps_pd) {
  const int m = packed_size(dom->fiber_dim());
  if (a.dim() != dom->fiber_dim())
    throw InvalidArgumentError("SemimetricField::constant: tensor dim != fiber_dim");
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) comps[static_cast<std::size_t>(k)].assign(dom->n_cells(), a[k]);
  return SemimetricField(std::move(dom), std::move(comps), eps_pd);
}

SemimetricField SemimetricField::identity(DomainPtr dom) {
  const SymTensor id = SymTensor::identity(dom->fiber_dim());
  return constant(std::move(dom), id);
}

SemimetricField SemimetricField::zero(DomainPtr dom) {
  const SymTensor z = SymTensor::zero(dom->fiber_dim());
  return constant(std::move(dom), z);
}

SymTensor SemimetricField::cell(std::size_t j) const {
  SymTensor a(dom_->fiber_dim());
  for (int k = 0; k < n_comps(); ++k) a[k] = comps_[static_cast<std::size_t>(k)][j];
  return a;
}

void require_metric(const SemimetricField& f, const char* where) {
  if (!f.is_metric())
    throw DegenerateBaseError(std::string(where) + ": field has deflated cells");
}

void require_same_domain(const SemimetricField& a, const SemimetricField& b, const char* where) {
  if (!a.domain()->same_layout(*b.domain()))
    throw DomainMismatchError(std::string(where) + ": fields live on different grids");
}

double volume(const SemimetricField& f) { return f.domain()->weighted_sum(f.radon_nikodym()); }

double volume(const SemimetricField& f, const CellMask& region) {
  if (region.size() != f.n_cells()) throw InvalidArgumentError("volume: mask size mismatch");
  return f.domain()->weighted_sum(f.radon_nikodym(), region.bytes());
}

CellMask deflated_set(const SemimetricField& f) { return f.deflated_mask(); }

CellMask carrier(const SemimetricField& f0, const SemimetricField& f1, double eps_eq) {
  require_same_domain(f0, f1, "carrier");
  const std::size_t nc = f0.n_cells();
  CellMask r(nc);
  for (int k = 0; k < f0.n_comps(); ++k) {
    const double* a = f0.comp_data(k);
    const double* b = f1.comp_data(k);
    for (std::size_t j = 0; j < nc; ++j)
      if (std::abs(b[j] - a[j]) > eps_eq) r.set(j, true);
  }
  return r;
}

double l2_distance(const SemimetricField& f0, const SemimetricField& f1) {
  require_same_domain(f0, f1, "l2_distance");
  const std::size_t nc = f0.n_cells();
  std::vector<double> sq(nc);
  if (f0.fiber_dim() == 2) {
    kernels::frob2_diff_sym2(f0.comp_data(0), f0.comp_data(1), f0.comp_data(2),
                             f1.comp_data(0), f1.comp_data(1), f1.comp_data(2), nc, sq.data());
  } else {
    const double* a[6];
    const double* b[6];
    for (int k = 0; k < 6; ++k) {
      a[k] = f0.comp_data(k);
      b[k] = f1.comp_data(k);
    }
    kernels::frob2_diff_sym3(a, b, nc, sq.data());
  }
  return std::sqrt(f0.domain()->weighted_sum(sq));
}

std::pair<double, double> amenability_bounds(const MetricField& f) {
  require_metric(f, "amenability_bounds");
  double sup_coeff = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  const std::size_t nc = f.n_cells();
  for (std::size_t j = 0; j < nc; ++j) {
    const SymTensor a = f.cell(j);
    for (int k = 0; k < a.packed(); ++k) sup_coeff = std::max(sup_coeff, std::abs(a[k]));
    min_eig = std::min(min_eig, a.min_eigenvalue());
  }
  return {sup_coeff, min_eig};
}

bool semimetric_equiv(const SemimetricField& f0, const SemimetricField& f1, double eps_eq) {
  require_same_domain(f0, f1, "semimetric_equiv");
  if (!(f0.deflated_mask() == f1.deflated_mask())) return false;
  const std::size_t nc = f0.n_cells();
  for (int k = 0; k < f0.n_comps(); ++k) {
    const double* a = f0.comp_data(k);
    const double* b = f1.comp_data(k);
    for (std::size_t j = 0; j < nc; ++j) {
      if (f0.deflated(j)) continue;
      if (std::abs(b[j] - a[j]) > eps_eq) return false;
    }
  }
  return true;
}

}  // namespace metgeo
