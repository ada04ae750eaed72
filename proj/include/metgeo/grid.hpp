#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "metgeo/sym_tensor.hpp"

namespace metgeo {

// Reference metric g on the grid.  Fields store their tensors in a
// g-orthonormal frame per cell, so g enters computations only through the
// cell measures (and through the frame semantics of stored coordinates).
struct GrefSpec {
  enum class Kind { identity, constant, per_cell };
  Kind kind = Kind::identity;
  SymTensor constant;               // used when kind == constant
  std::vector<SymTensor> cells;     // used when kind == per_cell (row-major)

  static GrefSpec identity() { return {}; }
  static GrefSpec make_constant(const SymTensor& g);
  static GrefSpec make_per_cell(std::vector<SymTensor> g);
};

// Uniform periodic grid over the fixed chart [-1,1]^2 (flat torus, the
// single chart playing the role of an amenable atlas).  Cells are indexed
// row-major with x fastest: j = iy * res_x + ix; centers at
// x = -1 + (ix + 1/2) dx.
class GridDomain {
 public:
  GridDomain(int dim, std::array<int, 2> res, int fiber_dim, GrefSpec gref);

  int dim() const { return dim_; }
  int fiber_dim() const { return fiber_dim_; }
  std::array<int, 2> res() const { return res_; }
  std::size_t n_cells() const { return n_cells_; }
  double dx(int axis) const { return 2.0 / res_[static_cast<std::size_t>(axis)]; }
  double cell_area() const { return cell_area_; }  // Lebesgue area of one cell

  double center(int axis, int index) const {
    return -1.0 + (index + 0.5) * dx(axis);
  }
  std::size_t cell_index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(res_[0]) +
           static_cast<std::size_t>(ix);
  }

  const GrefSpec& gref() const { return gref_; }
  bool uniform_measure() const { return gref_.kind != GrefSpec::Kind::per_cell; }

  // mu_g measure of one cell / of a cell subset / of everything.
  double cell_measure(std::size_t j) const {
    return uniform_measure() ? uniform_cell_measure_ : cell_measure_[j];
  }
  double total_measure() const { return total_measure_; }

  // Deterministic Sum_j values[j] * cell_measure(j) (fixed-order tree).
  double weighted_sum(std::span<const double> values) const;
  // Same restricted to mask (mask[j] != 0).
  double weighted_sum(std::span<const double> values, std::span<const std::uint8_t> mask) const;
  // mu_g measure of a mask.
  double mask_measure(std::span<const std::uint8_t> mask) const;

  bool same_layout(const GridDomain& o) const;

 private:
  int dim_;
  int fiber_dim_;
  std::array<int, 2> res_;
  std::size_t n_cells_;
  double cell_area_;
  GrefSpec gref_;
  double uniform_cell_measure_ = 0.0;
  double total_measure_ = 0.0;
  std::vector<double> cell_measure_;  // only for per-cell gref
};

using DomainPtr = std::shared_ptr<const GridDomain>;

// dim must be 2 (the discretized torus); fiber_dim in {2, 3}.
DomainPtr make_grid(int dim, std::array<int, 2> resolution, GrefSpec gref = GrefSpec::identity(),
                    int fiber_dim = 0 /* default: = dim */);

// Subset of cells, value-semantic bit vector aligned with a domain's cells.
class CellMask {
 public:
  CellMask() = default;
  explicit CellMask(std::size_t n, bool value = false)
      : bits_(n, value ? std::uint8_t{1} : std::uint8_t{0}) {}

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t j) const { return bits_[j] != 0; }
  void set(std::size_t j, bool v) { bits_[j] = v ? 1 : 0; }
  std::size_t count() const;

  std::span<const std::uint8_t> bytes() const { return bits_; }
  std::vector<std::uint8_t>& raw() { return bits_; }
  const std::vector<std::uint8_t>& raw() const { return bits_; }

  CellMask operator&(const CellMask& o) const;
  CellMask operator|(const CellMask& o) const;
  CellMask operator^(const CellMask& o) const;
  CellMask operator~() const;
  // this AND NOT o
  CellMask minus(const CellMask& o) const;
  bool operator==(const CellMask& o) const { return bits_ == o.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace metgeo
