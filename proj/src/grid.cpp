#include "metgeo/grid.hpp"

#include <cmath>
#include <numeric>

#include "metgeo/kernels.hpp"

namespace metgeo {

GrefSpec GrefSpec::make_constant(const SymTensor& g) {
  if (!is_spd(g)) throw DegenerateBaseError("GrefSpec: reference metric must be SPD");
  GrefSpec s;
  s.kind = Kind::constant;
  s.constant = g;
  return s;
}

GrefSpec GrefSpec::make_per_cell(std::vector<SymTensor> g) {
  for (const SymTensor& t : g)
    if (!is_spd(t)) throw DegenerateBaseError("GrefSpec: reference metric must be SPD in every cell");
  GrefSpec s;
  s.kind = Kind::per_cell;
  s.cells = std::move(g);
  return s;
}

GridDomain::GridDomain(int dim, std::array<int, 2> res, int fiber_dim, GrefSpec gref)
    : dim_(dim), fiber_dim_(fiber_dim), res_(res), gref_(std::move(gref)) {
  if (dim != 2) throw InvalidArgumentError("GridDomain: only dim = 2 (torus) is supported");
  if (fiber_dim != 2 && fiber_dim != 3)
    throw InvalidArgumentError("GridDomain: fiber_dim must be 2 or 3");
  if (res[0] < 1 || res[1] < 1) throw InvalidArgumentError("GridDomain: resolution must be positive");
  n_cells_ = static_cast<std::size_t>(res[0]) * static_cast<std::size_t>(res[1]);
  cell_area_ = dx(0) * dx(1);

  switch (gref_.kind) {
    case GrefSpec::Kind::identity:
      uniform_cell_measure_ = cell_area_;
      total_measure_ = cell_area_ * static_cast<double>(n_cells_);
      break;
    case GrefSpec::Kind::constant: {
      if (gref_.constant.dim() != fiber_dim)
        throw InvalidArgumentError("GridDomain: gref dim != fiber_dim");
      uniform_cell_measure_ = cell_area_ * std::sqrt(gref_.constant.det());
      total_measure_ = uniform_cell_measure_ * static_cast<double>(n_cells_);
      break;
    }
    case GrefSpec::Kind::per_cell: {
      if (gref_.cells.size() != n_cells_)
        throw InvalidArgumentError("GridDomain: per-cell gref size != cell count");
      cell_measure_.resize(n_cells_);
      for (std::size_t j = 0; j < n_cells_; ++j) {
        if (gref_.cells[j].dim() != fiber_dim)
          throw InvalidArgumentError("GridDomain: gref dim != fiber_dim");
        cell_measure_[j] = cell_area_ * std::sqrt(gref_.cells[j].det());
      }
      total_measure_ = kernels::pairwise_sum(cell_measure_);
      break;
    }
  }
}

double GridDomain::weighted_sum(std::span<const double> values) const {
  if (values.size() != n_cells_) throw InvalidArgumentError("weighted_sum: size mismatch");
  if (uniform_measure()) return kernels::pairwise_sum(values) * uniform_cell_measure_;
  return kernels::pairwise_dot(values, cell_measure_);
}

double GridDomain::weighted_sum(std::span<const double> values,
                                std::span<const std::uint8_t> mask) const {
  if (values.size() != n_cells_ || mask.size() != n_cells_)
    throw InvalidArgumentError("weighted_sum: size mismatch");
  std::vector<double> masked(n_cells_);
  for (std::size_t j = 0; j < n_cells_; ++j) masked[j] = mask[j] ? values[j] : 0.0;
  return weighted_sum(masked);
}

double GridDomain::mask_measure(std::span<const std::uint8_t> mask) const {
  if (mask.size() != n_cells_) throw InvalidArgumentError("mask_measure: size mismatch");
  if (uniform_measure()) {
    std::size_t c = 0;
    for (std::uint8_t b : mask) c += b ? 1u : 0u;
    return static_cast<double>(c) * uniform_cell_measure_;
  }
  std::vector<double> masked(n_cells_);
  for (std::size_t j = 0; j < n_cells_; ++j) masked[j] = mask[j] ? cell_measure_[j] : 0.0;
  return kernels::pairwise_sum(masked);
}

bool GridDomain::same_layout(const GridDomain& o) const {
  if (dim_ != o.dim_ || fiber_dim_ != o.fiber_dim_ || res_ != o.res_) return false;
  if (gref_.kind != o.gref_.kind) return false;
  if (gref_.kind == GrefSpec::Kind::constant && !(gref_.constant == o.gref_.constant)) return false;
  if (gref_.kind == GrefSpec::Kind::per_cell) {
    for (std::size_t j = 0; j < n_cells_; ++j)
      if (!(gref_.cells[j] == o.gref_.cells[j])) return false;
  }
  return true;
}

DomainPtr make_grid(int dim, std::array<int, 2> resolution, GrefSpec gref, int fiber_dim) {
  if (fiber_dim == 0) fiber_dim = dim;
  return std::make_shared<const GridDomain>(dim, resolution, fiber_dim, std::move(gref));
}

std::size_t CellMask::count() const {
  std::size_t c = 0;
  for (std::uint8_t b : bits_) c += b ? 1u : 0u;
  return c;
}

namespace {
CellMask zip_mask(const CellMask& a, const CellMask& b, bool (*f)(bool, bool)) {
  if (a.size() != b.size()) throw InvalidArgumentError("CellMask: size mismatch");
  CellMask r(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) r.set(j, f(a[j], b[j]));
  return r;
}
}  // namespace

CellMask CellMask::operator&(const CellMask& o) const {
  return zip_mask(*this, o, [](bool x, bool y) { return x && y; });
}
CellMask CellMask::operator|(const CellMask& o) const {
  return zip_mask(*this, o, [](bool x, bool y) { return x || y; });
}
CellMask CellMask::operator^(const CellMask& o) const {
  return zip_mask(*this, o, [](bool x, bool y) { return x != y; });
}
CellMask CellMask::operator~() const {
  CellMask r(size());
  for (std::size_t j = 0; j < size(); ++j) r.set(j, !(*this)[j]);
  return r;
}
CellMask CellMask::minus(const CellMask& o) const {
  return zip_mask(*this, o, [](bool x, bool y) { return x && !y; });
}

}  // namespace metgeo
