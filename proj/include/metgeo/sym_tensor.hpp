#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <variant>

#include "metgeo/errors.hpp"

namespace metgeo {

// Default spectral floor: tensors with an eigenvalue at or below this are
// treated as boundary (deflated) representatives rather than SPD points.
inline constexpr double kEpsPd = 1e-12;

inline constexpr int packed_size(int n) { return n * (n + 1) / 2; }

// Symmetric n x n tensor, n in {2, 3}, packed upper triangle row-major:
//   n = 2: [a00, a01, a11]
//   n = 3: [a00, a01, a02, a11, a12, a22]
// Values are coordinates in a fixed g-orthonormal frame, so the reference
// metric never appears explicitly in fiber computations.
class SymTensor {
 public:
  SymTensor() : n_(2), v_{} {}
  explicit SymTensor(int n) : n_(n), v_{} {
    if (n != 2 && n != 3) throw InvalidArgumentError("SymTensor: dim must be 2 or 3");
  }

  static SymTensor identity(int n) {
    SymTensor t(n);
    for (int i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
  }
  static SymTensor zero(int n) { return SymTensor(n); }

  int dim() const { return n_; }
  int packed() const { return packed_size(n_); }

  double& operator[](int k) { return v_[static_cast<std::size_t>(k)]; }
  double operator[](int k) const { return v_[static_cast<std::size_t>(k)]; }

  // (i, j) accessors through the packed upper triangle.
  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(flat(i, j))]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(flat(i, j))]; }

  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }

  SymTensor operator+(const SymTensor& o) const { return zip(o, [](double a, double b) { return a + b; }); }
  SymTensor operator-(const SymTensor& o) const { return zip(o, [](double a, double b) { return a - b; }); }
  SymTensor operator*(double s) const {
    SymTensor r(n_);
    for (int k = 0; k < packed(); ++k) r[k] = v_[static_cast<std::size_t>(k)] * s;
    return r;
  }
  friend SymTensor operator*(double s, const SymTensor& t) { return t * s; }

  bool operator==(const SymTensor& o) const {
    if (n_ != o.n_) return false;
    for (int k = 0; k < packed(); ++k)
      if (v_[static_cast<std::size_t>(k)] != o.v_[static_cast<std::size_t>(k)]) return false;
    return true;
  }

  double trace() const {
    return n_ == 2 ? v_[0] + v_[2] : v_[0] + v_[3] + v_[5];
  }

  double det() const {
    if (n_ == 2) return v_[0] * v_[2] - v_[1] * v_[1];
    // n = 3, packed [a,b,c; b,d,e; c,e,f] upper triangle [a,b,c,d,e,f].
    const double a = v_[0], b = v_[1], c = v_[2], d = v_[3], e = v_[4], f = v_[5];
    return a * (d * f - e * e) - b * (b * f - c * e) + c * (b * e - c * d);
  }

  // Smallest eigenvalue; closed form for n = 2, (see .cpp) for n = 3.
  double min_eigenvalue() const;
  double max_eigenvalue() const;

  // Frobenius inner product tr(AB) of the dense symmetric matrices
  // (off-diagonal entries count twice).
  double frob_dot(const SymTensor& o) const {
    double s = 0.0;
    if (n_ == 2) {
      s = v_[0] * o.v_[0] + v_[2] * o.v_[2] + 2.0 * v_[1] * o.v_[1];
    } else {
      s = v_[0] * o.v_[0] + v_[3] * o.v_[3] + v_[5] * o.v_[5] +
          2.0 * (v_[1] * o.v_[1] + v_[2] * o.v_[2] + v_[4] * o.v_[4]);
    }
    return s;
  }
  double frob_norm() const { return std::sqrt(frob_dot(*this)); }

 private:
  int flat(int i, int j) const {
    if (i > j) { const int t = i; i = j; j = t; }
    return n_ == 2 ? (i == 0 ? j : 2) : (i == 0 ? j : (i == 1 ? 2 + j : 5));
  }
  template <class F>
  SymTensor zip(const SymTensor& o, F f) const {
    if (n_ != o.n_) throw InvalidArgumentError("SymTensor: dim mismatch");
    SymTensor r(n_);
    for (int k = 0; k < packed(); ++k)
      r[k] = f(v_[static_cast<std::size_t>(k)], o.v_[static_cast<std::size_t>(k)]);
    return r;
  }

  int n_;
  std::array<double, 6> v_;
};

inline bool is_spd(const SymTensor& a, double eps_pd = kEpsPd) {
  return a.min_eigenvalue() > eps_pd;
}

// Validated SPD tensor: min eigenvalue strictly above eps_pd.
class SpdTensor {
 public:
  explicit SpdTensor(const SymTensor& a, double eps_pd = kEpsPd) : a_(a) {
    if (!is_spd(a, eps_pd)) throw DegenerateBaseError("SpdTensor: tensor is not SPD above eps_pd");
  }
  const SymTensor& sym() const { return a_; }
  int dim() const { return a_.dim(); }
  double det() const { return a_.det(); }
  operator const SymTensor&() const { return a_; }

 private:
  SymTensor a_;
};

// Point of the fiber completion cl(M_x): either an interior SPD tensor or
// the single boundary equivalence class (all degenerate limits collapse to
// one point at distance 0 from each other).
struct BoundaryClass {
  int n = 2;
};
using CompletionPoint = std::variant<SpdTensor, BoundaryClass>;

inline bool is_boundary(const CompletionPoint& p) { return std::holds_alternative<BoundaryClass>(p); }
inline int completion_dim(const CompletionPoint& p) {
  return is_boundary(p) ? std::get<BoundaryClass>(p).n : std::get<SpdTensor>(p).dim();
}

// A^{-1} B for packed symmetric A (SPD), B; result is a dense (generally
// non-symmetric) matrix returned in row-major order.
void solve_spd(const SymTensor& a, const SymTensor& b, double* out_rowmajor);

// Matrix logarithm / exponential of a symmetric tensor via eigendecomposition.
SymTensor log_sym(const SymTensor& a);   // requires a SPD
SymTensor exp_sym(const SymTensor& x);

// log with eigenvalues clamped below at floor_value.  Used when
// re-expressing optimizer-produced nodes in log coordinates: a node driven
// arbitrarily close to the fiber boundary still has finite log coordinates,
// whereas log_sym (correctly) rejects it.
SymTensor log_sym_floored(const SymTensor& a, double floor_value = 1e-300);

}  // namespace metgeo
