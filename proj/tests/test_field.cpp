#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "metgeo/field.hpp"
#include "support/test_rng.hpp"

using namespace metgeo;
namespace ts = metgeo::test_support;

namespace {

SymTensor diag2(double a, double b) {
  SymTensor t(2);
  t(0, 0) = a;
  t(1, 1) = b;
  return t;
}

const double kSqrt2 = std::sqrt(2.0);

}  // namespace

TEST_CASE("grid layout: centers, measures, and gref weighting") {
  const DomainPtr dom = make_grid(2, {8, 8});
  CHECK(dom->n_cells() == 64);
  CHECK(dom->dx(0) == doctest::Approx(0.25));
  CHECK(dom->center(0, 0) == doctest::Approx(-0.875));
  CHECK(dom->center(1, 7) == doctest::Approx(0.875));
  CHECK(dom->cell_index(3, 2) == 2 * 8 + 3);
  // mu_g of the whole torus with the identity reference metric.
  CHECK(dom->total_measure() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(dom->cell_measure(0) == doctest::Approx(4.0 / 64).epsilon(1e-15));

  // Constant gref 2I: sqrt(det) = 2 doubles every measure.
  const DomainPtr dom2 = make_grid(2, {8, 8}, GrefSpec::make_constant(diag2(2.0, 2.0)));
  CHECK(dom2->total_measure() == doctest::Approx(8.0).epsilon(1e-14));

  // Per-cell gref alternating I / 4I: sqrt(det) weights {1, 4}.
  std::vector<SymTensor> cells(64);
  for (std::size_t j = 0; j < 64; ++j)
    cells[j] = (j % 2 == 0) ? SymTensor::identity(2) : diag2(4.0, 4.0);
  const DomainPtr dom3 = make_grid(2, {8, 8}, GrefSpec::make_per_cell(cells));
  CHECK(!dom3->uniform_measure());
  CHECK(dom3->cell_measure(0) == doctest::Approx(4.0 / 64));
  CHECK(dom3->cell_measure(1) == doctest::Approx(16.0 / 64));
  CHECK(dom3->total_measure() == doctest::Approx(10.0).epsilon(1e-14));

  // Masked measure: first row of cells.
  CellMask row(dom->n_cells());
  for (int ix = 0; ix < 8; ++ix) row.set(dom->cell_index(ix, 0), true);
  CHECK(dom->mask_measure(row.bytes()) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("make_grid rejects unsupported shapes") {
  CHECK_THROWS_AS(make_grid(3, {8, 8}), InvalidArgumentError);
  CHECK_THROWS_AS(make_grid(2, {0, 8}), InvalidArgumentError);
  CHECK_THROWS_AS(make_grid(2, {8, 8}, GrefSpec::identity(), 4), InvalidArgumentError);
}

TEST_CASE("volume integrates the Radon-Nikodym derivative") {
  const DomainPtr dom = make_grid(2, {16, 16});
  // Frozen: identity field has rn = 1, Vol = mu_g(M) = 4.
  CHECK(volume(SemimetricField::identity(dom)) == doctest::Approx(4.0).epsilon(1e-15));
  // Constant c*I has rn = c (n = 2).
  const auto f = SemimetricField::constant(dom, diag2(2.5, 2.5));
  CHECK(volume(f) == doctest::Approx(10.0).epsilon(1e-14));
  for (double rn : f.radon_nikodym()) CHECK(rn == doctest::Approx(2.5).epsilon(1e-15));

  // Restriction to a mask is additive with its complement.
  CellMask half(dom->n_cells());
  for (std::size_t j = 0; j < dom->n_cells() / 2; ++j) half.set(j, true);
  CHECK(volume(f, half) + volume(f, ~half) == doctest::Approx(volume(f)).epsilon(1e-14));

  // Zero field: everything deflated, volume 0.
  CHECK(volume(SemimetricField::zero(dom)) == 0.0);
}

TEST_CASE("build canonicalizes deflated cells and rejects indefinite ones") {
  const DomainPtr dom = make_grid(2, {4, 4});
  const auto f = SemimetricField::build(dom, [&](int ix, int iy, double, double) {
    if (ix == 0 && iy == 0) return diag2(1.0, 5e-13);  // below eps_pd: deflates
    if (ix == 1 && iy == 0) return SymTensor::zero(2);
    return diag2(2.0, 0.5);
  });
  CHECK(f.deflated(dom->cell_index(0, 0)));
  CHECK(f.deflated(dom->cell_index(1, 0)));
  CHECK(!f.deflated(dom->cell_index(2, 0)));
  CHECK(f.deflated_mask().count() == 2);
  CHECK(!f.is_metric());
  // Canonical zero storage regardless of which degenerate tensor came in.
  CHECK(f.cell(dom->cell_index(0, 0)) == SymTensor::zero(2));
  CHECK(f.det()[dom->cell_index(0, 0)] == 0.0);
  CHECK(f.radon_nikodym()[dom->cell_index(0, 0)] == 0.0);

  CHECK_THROWS_AS(SemimetricField::constant(dom, diag2(1.0, -1.0)), InvalidArgumentError);

  CHECK_THROWS_AS(require_metric(f, "test"), DegenerateBaseError);
  require_metric(SemimetricField::identity(dom), "test");  // no throw

  const DomainPtr other = make_grid(2, {8, 4});
  CHECK_THROWS_AS(
      require_same_domain(f, SemimetricField::identity(other), "test"),
      DomainMismatchError);
}

TEST_CASE("deflated_set and carrier report the right cells") {
  const DomainPtr dom = make_grid(2, {4, 4});
  const auto base = SemimetricField::identity(dom);
  auto bumped = SemimetricField::build(dom, [&](int ix, int iy, double, double) {
    if (ix == iy) return diag2(3.0, 1.0);
    return SymTensor::identity(2);
  });
  CHECK(deflated_set(base).count() == 0);
  const CellMask diff = carrier(base, bumped);
  CHECK(diff.count() == 4);
  for (int i = 0; i < 4; ++i) CHECK(diff[dom->cell_index(i, i)]);

  // eps_eq widens equality: a 1e-9 bump is inside a 1e-6 tolerance.
  auto nudged = SemimetricField::build(dom, [&](int ix, int iy, double, double) {
    if (ix == 0 && iy == 0) return diag2(1.0 + 1e-9, 1.0);
    return SymTensor::identity(2);
  });
  CHECK(carrier(base, nudged).count() == 1);
  CHECK(carrier(base, nudged, 1e-6).count() == 0);
  CHECK(semimetric_equiv(base, nudged, 1e-6));
  CHECK(!semimetric_equiv(base, nudged));
}

TEST_CASE("l2_distance: frozen constant value, axioms on random fields") {
  const DomainPtr dom = make_grid(2, {16, 16});
  const auto id = SemimetricField::identity(dom);
  const auto four = SemimetricField::constant(dom, diag2(4.0, 4.0));
  // |3I|_F = 3 sqrt 2 per cell, integrated over measure 4: 6 sqrt 2.
  CHECK(l2_distance(id, four) == doctest::Approx(6.0 * kSqrt2).epsilon(1e-14));

  ts::Rng rng(301);
  const DomainPtr small = make_grid(2, {6, 6});
  for (int rep = 0; rep < 10; ++rep) {
    const auto a = ts::random_semimetric_field(rng, small, 0.3, 3.0, 0.1);
    const auto b = ts::random_semimetric_field(rng, small, 0.3, 3.0, 0.1);
    const auto c = ts::random_semimetric_field(rng, small, 0.3, 3.0, 0.1);
    CHECK(l2_distance(a, b) == l2_distance(b, a));
    CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-12);
    CHECK(l2_distance(a, a) == 0.0);
  }
  CHECK(l2_distance(id, id) == 0.0);
}

TEST_CASE("amenability_bounds returns the sup coefficient and min eigenvalue") {
  const DomainPtr dom = make_grid(2, {8, 8});
  const double k = 5.0;
  const auto f = SemimetricField::constant(dom, diag2(1.0 / k, k));
  const auto [c_sup, zeta] = amenability_bounds(f);
  CHECK(c_sup == doctest::Approx(k).epsilon(1e-15));
  CHECK(zeta == doctest::Approx(1.0 / k).epsilon(1e-15));

  // Random fields: C caps every chart coefficient, zeta floors every
  // eigenvalue.
  ts::Rng rng(302);
  const auto g = ts::random_metric_field(rng, dom, 0.4, 2.0);
  const auto [gc, gz] = amenability_bounds(g);
  for (std::size_t j = 0; j < g.n_cells(); ++j) {
    const SymTensor a = g.cell(j);
    CHECK(a.min_eigenvalue() >= gz - 1e-12);
    for (int kc = 0; kc < a.packed(); ++kc) CHECK(std::abs(a[kc]) <= gc + 1e-12);
  }

  CHECK_THROWS_AS(amenability_bounds(SemimetricField::zero(dom)), DegenerateBaseError);
}

TEST_CASE("from_components round-trips build output") {
  const DomainPtr dom = make_grid(2, {5, 3});
  ts::Rng rng(303);
  const auto f = ts::random_semimetric_field(rng, dom, 0.5, 2.0, 0.2);
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(f.n_comps()));
  for (int kc = 0; kc < f.n_comps(); ++kc)
    comps[static_cast<std::size_t>(kc)].assign(f.comp(kc).begin(), f.comp(kc).end());
  const auto g = SemimetricField::from_components(dom, comps);
  CHECK(semimetric_equiv(f, g));
  CHECK(g.deflated_mask() == f.deflated_mask());
}

TEST_CASE("fiber_dim 3 fields work end to end") {
  const DomainPtr dom = make_grid(2, {4, 4}, GrefSpec::identity(), 3);
  CHECK(dom->fiber_dim() == 3);
  const auto f = SemimetricField::identity(dom);
  CHECK(f.n_comps() == 6);
  CHECK(volume(f) == doctest::Approx(4.0).epsilon(1e-15));
  ts::Rng rng(304);
  const auto g = ts::random_metric_field(rng, dom, 0.5, 2.0);
  CHECK(volume(g) > 0.0);
  CHECK(l2_distance(f, g) > 0.0);
}
