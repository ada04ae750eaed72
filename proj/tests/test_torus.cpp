#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <vector>

#include "metgeo/torus_examples.hpp"
#include "support/test_rng.hpp"

using namespace metgeo;
namespace ts = metgeo::test_support;

namespace {

const double kPi = 3.14159265358979323846;

// Composite Simpson quadrature, independent of the library's sampling.
template <class F>
double simpson(F f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

Polyline horizontal_line(double y, int pieces) {
  Polyline p;
  for (int i = 0; i <= pieces; ++i)
    p.push_back({-1.0 + 2.0 * i / pieces, y});
  return p;
}

// True flat-torus distance between chart points.
double flat_torus_dist(std::array<double, 2> p, std::array<double, 2> q) {
  const double dx = std::min(std::abs(p[0] - q[0]), 2.0 - std::abs(p[0] - q[0]));
  const double dy = std::min(std::abs(p[1] - q[1]), 2.0 - std::abs(p[1] - q[1]));
  return std::hypot(dx, dy);
}

}  // namespace

TEST_CASE("cusp_profile interpolates 1 to k^4 through the smoothstep") {
  for (int k : {2, 4, 8}) {
    const double k4 = std::pow(static_cast<double>(k), 4);
    CHECK(cusp_profile(0.0, k) == k4);
    CHECK(cusp_profile(0.99 / k, k) == k4);               // inner plateau
    CHECK(cusp_profile(2.01 / k, k) == 1.0);              // outside the band
    CHECK(cusp_profile(-2.01 / k, k) == 1.0);             // even in x
    // Midpoint of the transition: u = 1/2, w = 1/2.
    CHECK(cusp_profile(1.5 / k, k) == doctest::Approx(1.0 + (k4 - 1.0) * 0.5).epsilon(1e-13));
    CHECK(cusp_profile(1.5 / k, k) == cusp_profile(-1.5 / k, k));
  }
}

TEST_CASE("cusp_metric: frozen cells, unit determinant, preconditions") {
  const DomainPtr dom = make_grid(2, {256, 256});
  const MetricField f = cusp_metric(dom, 2);
  // Cell just right of x = 0 sits on the inner plateau: diag(16, 1/16).
  const std::size_t j0 = dom->cell_index(128, 17);
  CHECK(f.cell(j0)(0, 0) == doctest::Approx(16.0).epsilon(1e-13));
  CHECK(f.cell(j0)(1, 1) == doctest::Approx(1.0 / 16.0).epsilon(1e-13));
  CHECK(f.cell(j0)(0, 1) == 0.0);
  for (std::size_t j = 0; j < f.n_cells(); j += 997)
    CHECK(f.det()[j] == doctest::Approx(1.0).epsilon(1e-13));

  // k = 4 leaves |x| >= 1/2 exactly flat.
  const MetricField f4 = cusp_metric(dom, 4);
  const std::size_t j_out = dom->cell_index(16, 100);  // x ~ -0.87
  CHECK(f4.cell(j_out) == SymTensor::identity(2));

  CHECK_THROWS_AS(cusp_metric(dom, 1), InvalidArgumentError);
  CHECK_THROWS_AS(cusp_metric(make_grid(2, {16, 16}), 4), InvalidArgumentError);  // res_x < 8k
  CHECK_THROWS_AS(cusp_metric(make_grid(2, {256, 256}, GrefSpec::identity(), 3), 2),
                  InvalidArgumentError);
}

TEST_CASE("inj_metric: E_k plateau, exact strip volume, preconditions") {
  const DomainPtr dom = make_grid(2, {256, 256});
  const MetricField f = inj_metric(dom, 4);
  // Center of E_4: h = 1/4, tensor diag(1/4, 4).
  const std::size_t j0 = dom->cell_index(128, 128);
  CHECK(f.cell(j0)(0, 0) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(f.cell(j0)(1, 1) == doctest::Approx(4.0).epsilon(1e-13));
  // Outside U_4 (|y| > 9/32 or |x| > 7/8) the field is exactly flat.
  CHECK(f.cell(dom->cell_index(128, 20)) == SymTensor::identity(2));
  for (std::size_t j = 0; j < f.n_cells(); j += 997)
    CHECK(f.det()[j] == doctest::Approx(1.0).epsilon(1e-13));

  // Vol(E_k, g0) = 3/k exactly when the strip edges land on cell boundaries:
  // k = 6 at res 240 gives 0.5.
  const DomainPtr dom240 = make_grid(2, {240, 240});
  const MetricField f6 = inj_metric(dom240, 6);
  const CellMask ek = rect_mask(*dom240, -0.75, 0.75, -1.0 / 6, 1.0 / 6);
  CHECK(volume(f6, ek) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(inj_metric(dom, 2), InvalidArgumentError);                  // k < 4
  CHECK_THROWS_AS(inj_metric(make_grid(2, {256, 128}), 64), InvalidArgumentError);  // res_y < 4k
}

TEST_CASE("rect_mask selects cells by center with closed bounds") {
  const DomainPtr dom = make_grid(2, {8, 8});
  CHECK(rect_mask(*dom, -1.0, 0.0, -1.0, 0.0).count() == 16);
  CHECK(rect_mask(*dom, -1.0, 1.0, -1.0, 1.0).count() == 64);
  // A band capturing exactly one row of centers.
  CHECK(rect_mask(*dom, -1.0, 1.0, -0.875, -0.875).count() == 8);
  CHECK(rect_mask(*dom, 0.3, 0.2, -1.0, 1.0).count() == 0);
}

TEST_CASE("curve_length: exact on flat lines, matches quadrature on the cusp") {
  const DomainPtr dom = make_grid(2, {256, 256});
  const MetricField flat = SemimetricField::identity(dom);
  CHECK(curve_length(flat, horizontal_line(0.0, 1024)) == doctest::Approx(2.0).epsilon(1e-12));
  const Polyline diag{{0.0, 0.0}, {0.6, 0.8}};
  CHECK(curve_length(flat, diag) == doctest::Approx(1.0).epsilon(1e-12));

  for (int k : {2, 4, 8}) {
    const MetricField cusp = cusp_metric(dom, k);
    const double len = curve_length(cusp, horizontal_line(0.0, 4 * 256));
    const double oracle =
        simpson([&](double x) { return std::sqrt(cusp_profile(x, k)); }, -1.0, 1.0, 20000);
    CHECK(len == doctest::Approx(oracle).epsilon(1e-2));
    CHECK(len >= 2.0 * k - 1.0);  // the inner band alone contributes ~2k
  }

  // Injectivity family: the central loop collapses; frozen criterion value
  // at k = 64 is <= 0.7.
  const MetricField inj = inj_metric(dom, 64);
  const double loop = curve_length(inj, horizontal_line(0.0, 4 * 256));
  CHECK(loop <= 0.7);
  CHECK(loop >= 0.25);  // sqrt(h) >= 1/8 along the loop
}

TEST_CASE("surface_distance: flat calibration within the 16-neighbor bound") {
  const DomainPtr dom = make_grid(2, {128, 128});
  const MetricField flat = SemimetricField::identity(dom);

  const double d = surface_distance(flat, {0.0, 0.0}, {0.5, 0.0});
  CHECK(d >= 0.5 - 1e-9);
  CHECK(d <= 0.5 * 1.03 + 0.03);

  // Wraparound: (-0.9, 0) to (0.9, 0) is 0.2 across the seam...
  const double dw = surface_distance(flat, {-0.9, 0.0}, {0.9, 0.0});
  CHECK(dw <= 0.2 * 1.03 + 0.04);
  // ...but 1.8 when the x-axis is cut.
  const double dc = surface_distance(flat, {-0.9, 0.0}, {0.9, 0.0}, Wrap{false, true});
  CHECK(dc >= 1.8 - 0.04);
  CHECK(dc <= 1.8 * 1.03 + 0.04);

  // Full-field calibration from an exact cell center: the 16-neighbor
  // stencil's worst direction costs a factor 1/cos(atan(1/2)/2) ~ 1.0274,
  // plus a few steps of quantization slack; never below the true distance.
  const std::array<double, 2> src{dom->center(0, 64), dom->center(1, 64)};
  const std::vector<double> df = distance_field(flat, src);
  const double snap = std::hypot(dom->dx(0), dom->dx(1));
  for (int iy = 0; iy < 128; ++iy)
    for (int ix = 0; ix < 128; ++ix) {
      const double truth = flat_torus_dist({dom->center(0, ix), dom->center(1, iy)}, src);
      const double got = df[dom->cell_index(ix, iy)];
      CHECK(got >= truth - 1e-9);
      CHECK(got <= truth * 1.0275 + 3.0 * snap);
    }

  // Graph metric axioms: exact symmetry and the triangle inequality.
  ts::Rng rng(601);
  const MetricField cusp = cusp_metric(dom, 4);
  for (int rep = 0; rep < 5; ++rep) {
    const std::array<double, 2> p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const std::array<double, 2> q{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const std::array<double, 2> r{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    CHECK(surface_distance(cusp, p, q) == surface_distance(cusp, q, p));
    CHECK(surface_distance(cusp, p, r) <=
          surface_distance(cusp, p, q) + surface_distance(cusp, q, r) + 1e-9);
  }
}

TEST_CASE("crossing the pinched band costs at least 1.8k on the cut cylinder") {
  const DomainPtr dom = make_grid(2, {256, 256});
  for (int k : {2, 4, 8}) {
    const MetricField cusp = cusp_metric(dom, k);
    const double crossing =
        surface_distance(cusp, {-0.5, 0.0}, {0.5, 0.0}, Wrap{false, true});
    CHECK(crossing >= 1.8 * k);
    // Upper sanity: the straight y = 0 route caps the graph distance.
    const double straight = simpson(
        [&](double x) { return std::sqrt(cusp_profile(x, k)); }, -0.5, 0.5, 20000);
    CHECK(crossing <= straight * 1.03 + 0.05);

    // On the full torus the flat wraparound bypasses the band entirely
    // (for k >= 4 the region |x| >= 1/2 is exactly flat).
    if (k >= 4) {
      const double wrapped = surface_distance(cusp, {-0.5, 0.0}, {0.5, 0.0});
      CHECK(wrapped <= 1.0 * 1.03 + 0.05);
    }
  }
}

TEST_CASE("gaussian_curvature: zero on flat, conformal and cusp oracles") {
  const DomainPtr dom = make_grid(2, {256, 256});

  // Constant field: periodic central differences vanish identically.
  for (double kv : gaussian_curvature(SemimetricField::identity(dom)))
    CHECK(kv == 0.0);

  // Conformal metric e^{2u} I with u = a sin(pi x) sin(pi y):
  // K = -e^{-2u} (u_xx + u_yy) = 2 pi^2 u e^{-2u}.
  const double a = 0.1;
  auto u_of = [&](double x, double y) { return a * std::sin(kPi * x) * std::sin(kPi * y); };
  const MetricField conf = SemimetricField::build(dom, [&](int, int, double x, double y) {
    const double c = std::exp(2.0 * u_of(x, y));
    SymTensor t(2);
    t(0, 0) = c;
    t(1, 1) = c;
    return t;
  });
  const std::vector<double> kc = gaussian_curvature(conf);
  double sup_err = 0.0, sup_true = 0.0;
  for (int iy = 0; iy < 256; ++iy)
    for (int ix = 0; ix < 256; ++ix) {
      const double u = u_of(dom->center(0, ix), dom->center(1, iy));
      const double truth = 2.0 * kPi * kPi * u * std::exp(-2.0 * u);
      sup_true = std::max(sup_true, std::abs(truth));
      sup_err = std::max(sup_err, std::abs(kc[dom->cell_index(ix, iy)] - truth));
    }
  CHECK(sup_err <= 0.05 * sup_true);

  // Cusp metric diag(f(x), 1/f(x)): K = -(1/2) (1/f)''(x), via an
  // independent 1-D finite-difference oracle on the profile.  The smoothstep
  // is only C^1 at the band edges, so stencil cells straddling a kink carry
  // an O(1) jump error; compare away from the four kink abscissae.
  const int k = 2;
  const MetricField cusp = cusp_metric(dom, k);
  const std::vector<double> kk = gaussian_curvature(cusp);
  auto oracle = [&](double x) {
    const double h = 1e-4;
    const double s =
        1.0 / cusp_profile(x + h, k) - 2.0 / cusp_profile(x, k) + 1.0 / cusp_profile(x - h, k);
    return -0.5 * s / (h * h);
  };
  auto near_kink = [&](double x) {
    const double guard = 3.0 * dom->dx(0);
    for (double edge : {1.0 / k, 2.0 / k})
      if (std::abs(std::abs(x) - edge) < guard) return true;
    return false;
  };
  double sup_o = 0.0;
  for (int ix = 0; ix < 256; ++ix) sup_o = std::max(sup_o, std::abs(oracle(dom->center(0, ix))));
  CHECK(sup_o > 10.0);  // the band really is curved
  int compared = 0;
  for (int ix = 0; ix < 256; ix += 3) {
    const double x = dom->center(0, ix);
    if (near_kink(x)) continue;
    ++compared;
    const double got = kk[dom->cell_index(ix, 77)];  // any row: K depends on x only
    CHECK(std::abs(got - oracle(x)) <= 0.05 * sup_o);
  }
  CHECK(compared > 60);

  CHECK_THROWS_AS(gaussian_curvature(SemimetricField::identity(make_grid(2, {16, 16}))),
                  InvalidArgumentError);
}

TEST_CASE("diameter_estimate: flat torus near sqrt 2, exact homothety scaling") {
  const DomainPtr dom = make_grid(2, {128, 128});
  const MetricField flat = SemimetricField::identity(dom);
  const double d = diameter_estimate(flat, 16);
  CHECK(d >= std::sqrt(2.0) * 0.97);
  CHECK(d <= std::sqrt(2.0) * 1.04);

  SymTensor four(2);
  four(0, 0) = 4.0;
  four(1, 1) = 4.0;
  const double d4 = diameter_estimate(SemimetricField::constant(dom, four), 16);
  CHECK(d4 == doctest::Approx(2.0 * d).epsilon(1e-12));

  CHECK_THROWS_AS(diameter_estimate(flat, 2), InvalidArgumentError);
}

TEST_CASE("example1_probe tracks the diverging geometry of both families") {
  const std::vector<int> ks{2, 4};
  // Curvature needs the full res: the Brioschi stencil on an under-resolved
  // steep band is noise-dominated.
  const ProbeResult curv = example1_probe("curvature", {2, 8}, 256);
  CHECK(curv.quantity == "curvature");
  REQUIRE(curv.values.size() == 2);
  CHECK(curv.flat_value == 0.0);
  CHECK(curv.values[1] > 10.0 * curv.values[0]);
  CHECK(curv.diverging);

  const ProbeResult dist = example1_probe("distance", ks, 64);
  CHECK(dist.values[0] >= 1.8 * 2);
  CHECK(dist.values[1] >= 1.8 * 4);
  CHECK(dist.values[1] > dist.values[0]);
  CHECK(dist.diverging);
  CHECK(dist.flat_value == doctest::Approx(1.0).epsilon(0.08));

  const ProbeResult diam = example1_probe("diameter", ks, 64);
  CHECK(diam.values[1] > diam.values[0]);
  CHECK(diam.diverging);

  // The loop length saturates near its floor, so the 1.5x gap-growth rule
  // behind `diverging` needs a wide k range.
  const ProbeResult inj = example1_probe("injectivity", {4, 16, 64}, 256);
  CHECK(inj.values[2] < inj.values[1]);
  CHECK(inj.values[1] < inj.values[0]);
  CHECK(inj.values[2] < 0.7);
  CHECK(inj.diverging);
  CHECK(inj.flat_value == doctest::Approx(2.0).epsilon(1e-9));

  CHECK_THROWS_AS(example1_probe("torsion", ks, 64), InvalidArgumentError);
}
