#include "metgeo/torus_examples.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace metgeo {
namespace {

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

void require_flat_chart(const GridDomain& dom, const char* where) {
  if (dom.fiber_dim() != 2)
    throw InvalidArgumentError(std::string(where) + ": needs fiber dim 2");
  if (dom.gref().kind != GrefSpec::Kind::identity)
    throw InvalidArgumentError(std::string(where) + ": needs the identity reference metric");
}

int wrap_index(int i, int res) {
  i %= res;
  return i < 0 ? i + res : i;
}

// cell index containing chart coordinate x (periodic)
int containing_index(double x, int res) {
  const double u = (x + 1.0) / (2.0 / res);
  return wrap_index(static_cast<int>(std::floor(u)), res);
}

// nearest cell center to chart coordinate x (periodic)
int nearest_index(double x, int res) {
  const double u = (x + 1.0) / (2.0 / res) - 0.5;
  return wrap_index(static_cast<int>(std::llround(u)), res);
}

}  // namespace

double cusp_profile(double x, int k) {
  const double s = 1.0 / k;
  const double amp = std::pow(static_cast<double>(k), 4) - 1.0;  // s^{-4} - 1
  return 1.0 + amp * smoothstep((2.0 * s - std::abs(x)) / s);
}

MetricField cusp_metric(DomainPtr dom, int k) {
  require_flat_chart(*dom, "cusp_metric");
  if (k < 2) throw InvalidArgumentError("cusp_metric: k must be >= 2");
  if (dom->res()[0] < 8 * k)
    throw InvalidArgumentError("cusp_metric: band under-resolved (need res_x >= 8k)");
  return SemimetricField::build(dom, [k](int, int, double x, double) {
    const double f = cusp_profile(x, k);
    SymTensor a(2);
    a[0] = f;
    a[1] = 0.0;
    a[2] = 1.0 / f;
    return a;
  });
}

double inj_profile(double x, double y, int k) {
  const double wx = smoothstep((7.0 / 8.0 - std::abs(x)) / (1.0 / 8.0));
  const double wy = smoothstep((9.0 / (8.0 * k) - std::abs(y)) / (1.0 / (8.0 * k)));
  return 1.0 + (1.0 / k - 1.0) * wx * wy;
}

MetricField inj_metric(DomainPtr dom, int k) {
  require_flat_chart(*dom, "inj_metric");
  if (k < 4) throw InvalidArgumentError("inj_metric: k must be >= 4");
  if (dom->res()[1] < 4 * k)
    throw InvalidArgumentError("inj_metric: strip under-resolved (need res_y >= 4k)");
  return SemimetricField::build(dom, [k](int, int, double x, double y) {
    const double h = inj_profile(x, y, k);
    SymTensor a(2);
    a[0] = h;
    a[1] = 0.0;
    a[2] = 1.0 / h;
    return a;
  });
}

CellMask rect_mask(const GridDomain& dom, double x0, double x1, double y0, double y1) {
  CellMask mask(dom.n_cells());
  const double tol = 1e-12;
  for (int iy = 0; iy < dom.res()[1]; ++iy) {
    const double y = dom.center(1, iy);
    if (y < y0 - tol || y > y1 + tol) continue;
    for (int ix = 0; ix < dom.res()[0]; ++ix) {
      const double x = dom.center(0, ix);
      if (x < x0 - tol || x > x1 + tol) continue;
      mask.set(dom.cell_index(ix, iy), true);
    }
  }
  return mask;
}

double curve_length(const MetricField& f, const Polyline& poly) {
  require_metric(f, "curve_length");
  require_flat_chart(*f.domain(), "curve_length");
  if (poly.size() < 2) return 0.0;
  const GridDomain& dom = *f.domain();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const double vx = poly[i + 1][0] - poly[i][0];
    const double vy = poly[i + 1][1] - poly[i][1];
    const double mx = 0.5 * (poly[i][0] + poly[i + 1][0]);
    const double my = 0.5 * (poly[i][1] + poly[i + 1][1]);
    const std::size_t j = dom.cell_index(containing_index(mx, dom.res()[0]),
                                         containing_index(my, dom.res()[1]));
    const SymTensor g = f.cell(j);
    const double q = g[0] * vx * vx + 2.0 * g[1] * vx * vy + g[2] * vy * vy;
    total += std::sqrt(std::max(q, 0.0));
  }
  return total;
}

namespace {

// 16-neighbor stencil: axis, diagonal, and knight moves.
constexpr int kOffsets[16][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},  {1, -1},
                                 {-1, 1}, {-1, -1}, {1, 2},  {1, -2}, {-1, 2}, {-1, -2},
                                 {2, 1},  {2, -1}, {-2, 1}, {-2, -1}};

std::vector<double> dijkstra_from(const MetricField& f, std::size_t src, Wrap wrap) {
  const GridDomain& dom = *f.domain();
  const int rx = dom.res()[0], ry = dom.res()[1];
  const double dx = dom.dx(0), dy = dom.dx(1);
  const double* g00 = f.comp_data(0);
  const double* g01 = f.comp_data(1);
  const double* g11 = f.comp_data(2);

  std::vector<double> dist(dom.n_cells(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  dist[src] = 0.0;
  queue.push({0.0, src});
  while (!queue.empty()) {
    const auto [d, j] = queue.top();
    queue.pop();
    if (d > dist[j]) continue;
    const int ix = static_cast<int>(j) % rx;
    const int iy = static_cast<int>(j) / rx;
    for (const auto& off : kOffsets) {
      int nx = ix + off[0], ny = iy + off[1];
      if (wrap.x) {
        nx = wrap_index(nx, rx);
      } else if (nx < 0 || nx >= rx) {
        continue;
      }
      if (wrap.y) {
        ny = wrap_index(ny, ry);
      } else if (ny < 0 || ny >= ry) {
        continue;
      }
      const std::size_t nj = dom.cell_index(nx, ny);
      const double vx = off[0] * dx, vy = off[1] * dy;
      const double m00 = 0.5 * (g00[j] + g00[nj]);
      const double m01 = 0.5 * (g01[j] + g01[nj]);
      const double m11 = 0.5 * (g11[j] + g11[nj]);
      const double q = m00 * vx * vx + 2.0 * m01 * vx * vy + m11 * vy * vy;
      const double nd = d + std::sqrt(std::max(q, 0.0));
      if (nd < dist[nj]) {
        dist[nj] = nd;
        queue.push({nd, nj});
      }
    }
  }
  return dist;
}

std::size_t snap(const GridDomain& dom, std::array<double, 2> p) {
  return dom.cell_index(nearest_index(p[0], dom.res()[0]), nearest_index(p[1], dom.res()[1]));
}

}  // namespace

std::vector<double> distance_field(const MetricField& f, std::array<double, 2> p, Wrap wrap) {
  require_metric(f, "distance_field");
  require_flat_chart(*f.domain(), "distance_field");
  return dijkstra_from(f, snap(*f.domain(), p), wrap);
}

double surface_distance(const MetricField& f, std::array<double, 2> p, std::array<double, 2> q,
                        Wrap wrap) {
  require_metric(f, "surface_distance");
  require_flat_chart(*f.domain(), "surface_distance");
  const GridDomain& dom = *f.domain();
  std::size_t a = snap(dom, p);
  std::size_t b = snap(dom, q);
  if (a == b) return 0.0;
  if (b < a) std::swap(a, b);  // canonical order: exact symmetry in (p, q)
  return dijkstra_from(f, a, wrap)[b];
}

std::vector<double> gaussian_curvature(const MetricField& f) {
  require_metric(f, "gaussian_curvature");
  require_flat_chart(*f.domain(), "gaussian_curvature");
  const GridDomain& dom = *f.domain();
  const int rx = dom.res()[0], ry = dom.res()[1];
  if (rx < 32 || ry < 32)
    throw InvalidArgumentError("gaussian_curvature: needs resolution >= 32 per axis");
  const double dx = dom.dx(0), dy = dom.dx(1);
  const double* E = f.comp_data(0);
  const double* F = f.comp_data(1);
  const double* G = f.comp_data(2);

  const auto at = [&](const double* c, int ix, int iy) {
    return c[dom.cell_index(wrap_index(ix, rx), wrap_index(iy, ry))];
  };
  const auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };

  std::vector<double> curvature(dom.n_cells());
  for (int iy = 0; iy < ry; ++iy) {
    for (int ix = 0; ix < rx; ++ix) {
      const auto d_x = [&](const double* c) { return (at(c, ix + 1, iy) - at(c, ix - 1, iy)) / (2.0 * dx); };
      const auto d_y = [&](const double* c) { return (at(c, ix, iy + 1) - at(c, ix, iy - 1)) / (2.0 * dy); };
      const double e = at(E, ix, iy), ff = at(F, ix, iy), g = at(G, ix, iy);
      const double e_x = d_x(E), e_y = d_y(E);
      const double f_x = d_x(F), f_y = d_y(F);
      const double g_x = d_x(G), g_y = d_y(G);
      const double e_yy = (at(E, ix, iy + 1) - 2.0 * e + at(E, ix, iy - 1)) / (dy * dy);
      const double g_xx = (at(G, ix + 1, iy) - 2.0 * g + at(G, ix - 1, iy)) / (dx * dx);
      const double f_xy = (at(F, ix + 1, iy + 1) - at(F, ix + 1, iy - 1) - at(F, ix - 1, iy + 1) +
                           at(F, ix - 1, iy - 1)) /
                          (4.0 * dx * dy);

      const double m1[3][3] = {
          {-0.5 * e_yy + f_xy - 0.5 * g_xx, 0.5 * e_x, f_x - 0.5 * e_y},
          {f_y - 0.5 * g_x, e, ff},
          {0.5 * g_y, ff, g}};
      const double m2[3][3] = {{0.0, 0.5 * e_y, 0.5 * g_x}, {0.5 * e_y, e, ff}, {0.5 * g_x, ff, g}};
      const double denom = e * g - ff * ff;
      curvature[dom.cell_index(ix, iy)] = (det3(m1) - det3(m2)) / (denom * denom);
    }
  }
  return curvature;
}

double diameter_estimate(const MetricField& f, int samples, Wrap wrap) {
  require_metric(f, "diameter_estimate");
  require_flat_chart(*f.domain(), "diameter_estimate");
  if (samples < 4) throw InvalidArgumentError("diameter_estimate: needs samples >= 4");
  const GridDomain& dom = *f.domain();
  const int s = static_cast<int>(std::floor(std::sqrt(static_cast<double>(samples))));
  double best = 0.0;
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      const int ix = wrap_index(a * dom.res()[0] / s, dom.res()[0]);
      const int iy = wrap_index(b * dom.res()[1] / s, dom.res()[1]);
      const std::vector<double> dist = dijkstra_from(f, dom.cell_index(ix, iy), wrap);
      for (double d : dist)
        if (std::isfinite(d)) best = std::max(best, d);
    }
  }
  return best;
}

ProbeResult example1_probe(const std::string& probe, const std::vector<int>& ks, int res) {
  if (ks.empty()) throw InvalidArgumentError("example1_probe: empty k list");
  DomainPtr dom = make_grid(2, {res, res});
  const MetricField flat = SemimetricField::identity(dom);
  const Wrap cut_x{false, true};

  ProbeResult result;
  result.quantity = probe;
  result.ks = ks;

  const auto sup_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  const auto gamma = [&]() {
    Polyline p;
    const int pieces = 4 * res;
    p.reserve(pieces + 1);
    for (int i = 0; i <= pieces; ++i)
      p.push_back({-1.0 + 2.0 * i / pieces, 0.0});
    return p;
  };

  if (probe == "curvature") {
    result.flat_value = sup_abs(gaussian_curvature(flat));
    for (int k : ks) result.values.push_back(sup_abs(gaussian_curvature(cusp_metric(dom, k))));
  } else if (probe == "distance") {
    const std::array<double, 2> p{-0.5, 0.0}, q{0.5, 0.0};
    result.flat_value = surface_distance(flat, p, q, cut_x);
    for (int k : ks) result.values.push_back(surface_distance(cusp_metric(dom, k), p, q, cut_x));
  } else if (probe == "diameter") {
    result.flat_value = diameter_estimate(flat, 16, cut_x);
    for (int k : ks) result.values.push_back(diameter_estimate(cusp_metric(dom, k), 16, cut_x));
  } else if (probe == "injectivity") {
    const Polyline loop = gamma();
    result.flat_value = curve_length(flat, loop);
    for (int k : ks) result.values.push_back(curve_length(inj_metric(dom, k), loop));
  } else {
    throw InvalidArgumentError("example1_probe: unknown probe '" + probe + "'");
  }

  // Diverging: the gap to the flat value grows monotonically and ends at
  // least 1.5x where it started (and is not merely noise).
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < result.values.size(); ++i)
    if (std::abs(result.values[i + 1] - result.flat_value) <
        std::abs(result.values[i] - result.flat_value))
      monotone = false;
  const double first_gap = std::abs(result.values.front() - result.flat_value);
  const double last_gap = std::abs(result.values.back() - result.flat_value);
  result.diverging = monotone && last_gap >= 1.5 * first_gap &&
                     last_gap >= 0.05 * std::max(1.0, std::abs(result.flat_value));
  return result;
}

}  // namespace metgeo
