#include "metgeo/distances.hpp"

#include <cmath>

#include "field_path_detail.hpp"
#include "metgeo/kernels.hpp"

namespace metgeo {
namespace detail {
namespace {

inline double clamp0(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

double seg_term_cell3(const SymTensor& a, const SymTensor& b) {
  bool same = true;
  for (int k = 0; k < 6; ++k)
    if (a[k] != b[k]) { same = false; break; }
  if (same) return 0.0;
  const SymTensor mbar = (a + b) * 0.5;
  const SymTensor d = b - a;
  double w[9];
  solve_spd(mbar, d, w);
  double tr_w = 0.0, tr_w2 = 0.0;
  for (int i = 0; i < 3; ++i) tr_w += w[i * 3 + i];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tr_w2 += w[i * 3 + j] * w[j * 3 + i];
  const double pa = std::sqrt(std::sqrt(clamp0(a.det())));
  const double pb = std::sqrt(std::sqrt(clamp0(b.det())));
  const double dp = pb - pa;
  const double traceless = clamp0(tr_w2 - tr_w * tr_w / 3.0) * std::sqrt(clamp0(mbar.det()));
  return (16.0 / 3.0) * dp * dp + traceless;
}

double seg_inner_sum(const GridDomain& dom, int n, const double* const* a,
                     const double* const* b, std::vector<double>& scratch) {
  const std::size_t nc = dom.n_cells();
  scratch.resize(nc);
  if (n == 2) {
    kernels::seg_terms_sym2(a[0], a[1], a[2], b[0], b[1], b[2], nc, scratch.data());
  } else {
    for (std::size_t j = 0; j < nc; ++j) {
      SymTensor ta(3), tb(3);
      for (int k = 0; k < 6; ++k) {
        ta[k] = a[k][j];
        tb[k] = b[k][j];
      }
      scratch[j] = seg_term_cell3(ta, tb);
    }
  }
  return clamp0(dom.weighted_sum(scratch));
}

double seg_term_at(const GridDomain& dom, int n, const double* const* a,
                   const double* const* b, std::size_t j) {
  (void)dom;
  if (n == 2) {
    double out;
    kernels::seg_terms_sym2(a[0] + j, a[1] + j, a[2] + j, b[0] + j, b[1] + j, b[2] + j, 1, &out);
    return out;
  }
  SymTensor ta(3), tb(3);
  for (int k = 0; k < 6; ++k) {
    ta[k] = a[k][j];
    tb[k] = b[k][j];
  }
  return seg_term_cell3(ta, tb);
}

}  // namespace detail

double path_length_L2(const FieldPath& p) {
  if (p.nodes.size() < 2) throw InvalidPathError("path_length_L2: need at least 2 nodes");
  const GridDomain& dom = *p.nodes.front().domain();
  const int n = dom.fiber_dim();
  const int m = packed_size(n);
  for (const SemimetricField& f : p.nodes)
    if (!f.domain()->same_layout(dom))
      throw DomainMismatchError("path_length_L2: nodes on different grids");

  std::vector<double> scratch;
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < p.nodes.size(); ++t) {
    const double* a[6];
    const double* b[6];
    for (int k = 0; k < m; ++k) {
      a[k] = p.nodes[t].comp_data(k);
      b[k] = p.nodes[t + 1].comp_data(k);
    }
    const double inner = detail::seg_inner_sum(dom, n, a, b, scratch);
    if (!std::isfinite(inner)) throw InvalidPathError("path_length_L2: segment not evaluable");
    total += std::sqrt(inner);
  }
  return total;
}

SemimetricField conformal_geodesic(const MetricField& f0, const std::vector<double>& rho, double t) {
  require_metric(f0, "conformal_geodesic");
  const GridDomain& dom = *f0.domain();
  if (rho.size() != dom.n_cells())
    throw InvalidArgumentError("conformal_geodesic: rho size mismatch");
  const int n = dom.fiber_dim();
  const int m = packed_size(n);
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) comps[static_cast<std::size_t>(k)].resize(dom.n_cells());
  for (std::size_t j = 0; j < dom.n_cells(); ++j) {
    const double phi = 1.0 + n * t * rho[j] / 4.0;
    const double factor = phi > 0.0 ? std::pow(phi, 4.0 / n) : 0.0;  // deflate at phi <= 0
    for (int k = 0; k < m; ++k)
      comps[static_cast<std::size_t>(k)][j] = factor * f0.comp(k)[j];
  }
  return SemimetricField::from_components(f0.domain(), std::move(comps));
}

namespace {

SemimetricField psi_apply(const MetricField& f, const std::vector<double>* zeta_field,
                          double zeta_scalar) {
  require_metric(f, "psi_map");
  const GridDomain& dom = *f.domain();
  const int n = dom.fiber_dim();
  const int m = packed_size(n);
  const double floor_zeta = -4.0 / n;
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) comps[static_cast<std::size_t>(k)].resize(dom.n_cells());
  for (std::size_t j = 0; j < dom.n_cells(); ++j) {
    const double z = zeta_field ? (*zeta_field)[j] : zeta_scalar;
    if (z < floor_zeta - 1e-12)
      throw InvalidArgumentError("psi_map: zeta below -4/n");
    const double base = std::max(0.0, 1.0 + (n / 4.0) * z);
    const double factor = std::pow(base, 4.0 / n);
    for (int k = 0; k < m; ++k)
      comps[static_cast<std::size_t>(k)][j] = factor * f.comp(k)[j];
  }
  return SemimetricField::from_components(f.domain(), std::move(comps));
}

}  // namespace

SemimetricField psi_map(const MetricField& f, double zeta) { return psi_apply(f, nullptr, zeta); }

SemimetricField psi_map(const MetricField& f, const std::vector<double>& zeta) {
  if (zeta.size() != f.n_cells()) throw InvalidArgumentError("psi_map: zeta size mismatch");
  return psi_apply(f, &zeta, 0.0);
}

}  // namespace metgeo
