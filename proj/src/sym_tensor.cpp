#include "metgeo/sym_tensor.hpp"

#include <Eigen/Dense>

namespace metgeo {
namespace {

Eigen::Matrix2d to_eigen2(const SymTensor& a) {
  Eigen::Matrix2d m;
  m << a[0], a[1], a[1], a[2];
  return m;
}

Eigen::Matrix3d to_eigen3(const SymTensor& a) {
  Eigen::Matrix3d m;
  m << a[0], a[1], a[2], a[1], a[3], a[4], a[2], a[4], a[5];
  return m;
}

SymTensor from_eigen2(const Eigen::Matrix2d& m) {
  SymTensor t(2);
  t[0] = m(0, 0);
  t[1] = 0.5 * (m(0, 1) + m(1, 0));
  t[2] = m(1, 1);
  return t;
}

SymTensor from_eigen3(const Eigen::Matrix3d& m) {
  SymTensor t(3);
  t[0] = m(0, 0);
  t[1] = 0.5 * (m(0, 1) + m(1, 0));
  t[2] = 0.5 * (m(0, 2) + m(2, 0));
  t[3] = m(1, 1);
  t[4] = 0.5 * (m(1, 2) + m(2, 1));
  t[5] = m(2, 2);
  return t;
}

template <class F>
SymTensor spectral_map(const SymTensor& a, F f) {
  if (a.dim() == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(to_eigen2(a));
    Eigen::Vector2d lam = es.eigenvalues();
    Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
    d(0, 0) = f(lam(0));
    d(1, 1) = f(lam(1));
    return from_eigen2(es.eigenvectors() * d * es.eigenvectors().transpose());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen3(a));
  Eigen::Vector3d lam = es.eigenvalues();
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) d(i, i) = f(lam(i));
  return from_eigen3(es.eigenvectors() * d * es.eigenvectors().transpose());
}

}  // namespace

double SymTensor::min_eigenvalue() const {
  if (n_ == 2) {
    const double tr = v_[0] + v_[2];
    const double diff = v_[0] - v_[2];
    const double disc = std::sqrt(diff * diff + 4.0 * v_[1] * v_[1]);
    return 0.5 * (tr - disc);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen3(*this), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double SymTensor::max_eigenvalue() const {
  if (n_ == 2) {
    const double tr = v_[0] + v_[2];
    const double diff = v_[0] - v_[2];
    const double disc = std::sqrt(diff * diff + 4.0 * v_[1] * v_[1]);
    return 0.5 * (tr + disc);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen3(*this), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(2);
}

void solve_spd(const SymTensor& a, const SymTensor& b, double* out_rowmajor) {
  if (a.dim() != b.dim()) throw InvalidArgumentError("solve_spd: dim mismatch");
  if (a.dim() == 2) {
    Eigen::Matrix2d r = to_eigen2(a).ldlt().solve(to_eigen2(b));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out_rowmajor[2 * i + j] = r(i, j);
    return;
  }
  Eigen::Matrix3d r = to_eigen3(a).ldlt().solve(to_eigen3(b));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out_rowmajor[3 * i + j] = r(i, j);
}

SymTensor log_sym(const SymTensor& a) {
  if (!is_spd(a)) throw DegenerateBaseError("log_sym: tensor is not SPD");
  return spectral_map(a, [](double l) { return std::log(l); });
}

SymTensor exp_sym(const SymTensor& x) {
  return spectral_map(x, [](double l) { return std::exp(l); });
}

SymTensor log_sym_floored(const SymTensor& a, double floor_value) {
  return spectral_map(a, [floor_value](double l) { return std::log(std::max(l, floor_value)); });
}

}  // namespace metgeo
