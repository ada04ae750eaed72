#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "metgeo/convergence.hpp"
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

// Quarter of the torus: cells with x < 0, y < 0.
bool in_quarter(double x, double y) { return x < 0.0 && y < 0.0; }

// f = value on the quarter, identity elsewhere.
SemimetricField quarter_field(const DomainPtr& dom, const SymTensor& value) {
  return SemimetricField::build(dom, [&](int, int, double x, double y) {
    return in_quarter(x, y) ? value : SymTensor::identity(2);
  });
}

// Field with prescribed per-cell Radon-Nikodym density r: diag(r, r) has
// sqrt(det) = r (r > 0).
SemimetricField density_field(const DomainPtr& dom, const std::vector<double>& r) {
  return SemimetricField::build(dom, [&](int ix, int iy, double, double) {
    const double v = r[dom->cell_index(ix, iy)];
    return diag2(v, v);
  });
}

}  // namespace

TEST_CASE("validate rejects short or mismatched sequences") {
  const DomainPtr dom = make_grid(2, {4, 4});
  MetricSequence s;
  CHECK_THROWS_AS(validate(s, "test"), InvalidArgumentError);
  s.terms.push_back(SemimetricField::identity(dom));
  CHECK_THROWS_AS(validate(s, "test"), InvalidArgumentError);
  s.terms.push_back(SemimetricField::identity(dom));
  validate(s, "test");  // ok
  s.limit_candidate = SemimetricField::identity(make_grid(2, {8, 8}));
  CHECK_THROWS_AS(validate(s, "test"), DomainMismatchError);
}

TEST_CASE("in_measure_gap measures the eps-exceedance set exactly") {
  const DomainPtr dom = make_grid(2, {8, 8});
  const auto id = SemimetricField::identity(dom);
  const auto bumped = quarter_field(dom, diag2(3.0, 3.0));

  CHECK(in_measure_gap(id, id, 0.5) == 0.0);
  // |2I|_F = 2 sqrt 2 exceeds 1 on the quarter (mu_g measure 1).
  CHECK(in_measure_gap(bumped, id, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  // eps above the gap: nothing exceeds it.
  CHECK(in_measure_gap(bumped, id, 3.0) == 0.0);
  CHECK_THROWS_AS(in_measure_gap(bumped, id, 0.0), InvalidArgumentError);
  CHECK_THROWS_AS(in_measure_gap(bumped, id, -1.0), InvalidArgumentError);

  // nu-weighted transfer: the same set weighed by mu_nu.
  const auto nu = quarter_field(dom, diag2(4.0, 4.0));  // rn_nu = 4 there
  CHECK(in_measure_gap(bumped, id, 1.0, nu) == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("uniform_measure_gap equals the exhaustive sign-set supremum") {
  // Frozen small case: rn jumps 1 -> 2 on 4 cells of measure 0.25 each.
  const DomainPtr dom4 = make_grid(2, {4, 4});
  const auto id = SemimetricField::identity(dom4);
  auto two_on_row = SemimetricField::build(dom4, [&](int ix, int iy, double, double) {
    return (iy == 0 && ix < 4) ? diag2(2.0, 2.0) : SymTensor::identity(2);
  });
  CHECK(uniform_measure_gap(two_on_row, id) == doctest::Approx(1.0).epsilon(1e-14));

  // Independent oracle: enumerate every cell subset E of the 4x4 grid and
  // maximize |mu_{f0}(E) - mu_{f1}(E)| directly.
  ts::Rng rng(501);
  const auto r0 = ts::random_density(rng, 16, 0.1, 3.0);
  const auto r1 = ts::random_density(rng, 16, 0.1, 3.0);
  const auto f0 = density_field(dom4, r0);
  const auto f1 = density_field(dom4, r1);
  const double w = dom4->cell_measure(0);
  double sup = 0.0;
  for (unsigned mask = 0; mask < (1u << 16); ++mask) {
    double diff = 0.0;
    for (int j = 0; j < 16; ++j)
      if (mask & (1u << j)) diff += (r0[static_cast<std::size_t>(j)] - r1[static_cast<std::size_t>(j)]) * w;
    sup = std::max(sup, std::abs(diff));
  }
  CHECK(uniform_measure_gap(f1, f0) == doctest::Approx(sup).epsilon(1e-12));
}

TEST_CASE("l1_density_gap: frozen value and the max(P,N) sandwich") {
  const DomainPtr dom = make_grid(2, {8, 8});
  const auto id = SemimetricField::identity(dom);
  const auto four = SemimetricField::constant(dom, diag2(4.0, 4.0));
  // integral |4 - 1| over measure 4.
  CHECK(l1_density_gap(four, id) == doctest::Approx(12.0).epsilon(1e-14));

  ts::Rng rng(502);
  for (int rep = 0; rep < 20; ++rep) {
    const auto r0 = ts::random_density(rng, dom->n_cells(), 0.0, 2.0);
    const auto r1 = ts::random_density(rng, dom->n_cells(), 0.0, 2.0);
    const auto f0 = density_field(dom, r0);
    const auto f1 = density_field(dom, r1);
    const double l1 = l1_density_gap(f1, f0);
    const double u = uniform_measure_gap(f1, f0);
    CHECK(u <= l1 + 1e-12);
    CHECK(l1 <= 2.0 * u + 1e-12);
    // And P + N decomposition is exact.
    double p = 0.0, n = 0.0;
    for (std::size_t j = 0; j < dom->n_cells(); ++j) {
      const double d = (r0[j] - r1[j]) * dom->cell_measure(j);
      (d > 0.0 ? p : n) += std::abs(d);
    }
    CHECK(l1 == doctest::Approx(p + n).epsilon(1e-12));
    CHECK(u == doctest::Approx(std::max(p, n)).epsilon(1e-12));
  }
}

TEST_CASE("uniform_abs_continuity: greedy scan is exact on the grid sigma-algebra") {
  // Resolution chosen so cells of measure 1/400 tile delta = 0.1 exactly.
  const DomainPtr dom = make_grid(2, {40, 40});
  const std::vector<std::vector<double>> family{
      std::vector<double>(dom->n_cells(), 1.0)};
  const std::vector<double> deltas{0.01, 0.1, 1.0};
  const UacTable t = uniform_abs_continuity(*dom, family, deltas);
  REQUIRE(t.worst.size() == 1);
  CHECK(t.worst[0][0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(t.worst[0][1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(t.worst[0][2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.passes(0, 0.02));
  CHECK(!t.passes(1, 0.05));

  // Concentrating family k * chi(measure 1/k) defeats the scan: its worst
  // case is 1 at every delta >= 1/k, so no eps < 1 ever passes there.
  const DomainPtr dom8 = make_grid(2, {8, 8});
  const double w = dom8->cell_measure(0);  // 1/16
  std::vector<double> spike(dom8->n_cells(), 0.0);
  const double k = 1.0 / (8.0 * w);  // mass 1 on 8 cells of total measure 1/2
  for (int j = 0; j < 8; ++j) spike[static_cast<std::size_t>(j)] = k;
  const std::vector<double> d2{0.5, 1.0, 2.0};
  const UacTable t2 = uniform_abs_continuity(*dom8, {spike}, d2);
  CHECK(t2.worst[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t2.worst[0][1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!t2.passes(0, 0.99));

  // Brute-force oracle on a 3x3 grid: the greedy value equals the true
  // supremum over all subsets within the measure budget.
  const DomainPtr dom3 = make_grid(2, {3, 3});
  ts::Rng rng(503);
  const auto dens = ts::random_density(rng, 9, 0.0, 5.0);
  const double w3 = dom3->cell_measure(0);
  for (double delta : {w3, 2.5 * w3, 4.0 * w3, 9.0 * w3}) {
    const UacTable tb = uniform_abs_continuity(*dom3, {dens}, std::vector<double>{delta});
    double best = 0.0;
    for (unsigned m = 0; m < (1u << 9); ++m) {
      double mass = 0.0, meas = 0.0;
      for (int j = 0; j < 9; ++j)
        if (m & (1u << j)) {
          mass += dens[static_cast<std::size_t>(j)] * w3;
          meas += w3;
        }
      if (meas <= delta * (1.0 + 1e-12)) best = std::max(best, mass);
    }
    CHECK(tb.worst[0][0] == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("theta_cauchy_report on a geometric conformal sequence") {
  const DomainPtr dom = make_grid(2, {8, 8});
  MetricSequence s;
  for (int k = 0; k <= 5; ++k) {
    const double c = 1.0 + std::pow(2.0, -k);
    s.terms.push_back(SemimetricField::constant(dom, diag2(c, c)));
  }
  const ThetaCauchyReport r = theta_cauchy_report(s);
  REQUIRE(r.consecutive.size() == 5);
  // Theta(c_k I, c_{k+1} I) = 4 sqrt 2 |c_k - c_{k+1}| = 4 sqrt 2 2^{-k-1}.
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(r.consecutive[k] ==
          doctest::Approx(4.0 * kSqrt2 * std::pow(2.0, -static_cast<double>(k) - 1)).epsilon(1e-12));
  }
  // Exact halving: the stored ratio is a power of two.
  for (std::size_t k = 0; k + 1 < 5; ++k)
    CHECK(r.consecutive[k + 1] / r.consecutive[k] == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(r.partial_sums.size() == 5);
  CHECK(r.partial_sums.back() ==
        doctest::Approx(4.0 * kSqrt2 * (1.0 - std::pow(2.0, -5))).epsilon(1e-12));
  // Geometric pairs (0, 1), (0, 2), (0, 4): Theta = 4 sqrt 2 (1 - 2^{-m}).
  REQUIRE(r.geometric.size() == 3);
  for (const auto& gp : r.geometric) {
    CHECK(gp.a == 0);
    const double expect = 4.0 * kSqrt2 * (1.0 - std::pow(2.0, -static_cast<double>(gp.b)));
    CHECK(gp.theta == doctest::Approx(expect).epsilon(1e-9));
  }

  // Constant sequence: all steps zero.
  MetricSequence c;
  c.terms = {SemimetricField::identity(dom), SemimetricField::identity(dom),
             SemimetricField::identity(dom)};
  const ThetaCauchyReport rc = theta_cauchy_report(c);
  for (double v : rc.consecutive) CHECK(v == 0.0);
}

TEST_CASE("classify_trend verdicts on canned series") {
  const TrendOptions opts;
  const std::vector<double> geo{1.0, 0.5, 0.25, 0.125, 0.0625};
  CHECK(classify_trend(geo, opts) == Trend::vanishing);
  const std::vector<double> flat{1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK(classify_trend(flat, opts) == Trend::bounded_away);
  // Oscillating but pinned away from zero still counts as bounded away.
  const std::vector<double> osc{0.5, 1.0, 0.5, 1.0, 0.5, 1.0};
  CHECK(classify_trend(osc, opts) == Trend::bounded_away);
  // Dipping to zero and ending high is genuinely undecidable.
  const std::vector<double> spiky{0.0, 1.0, 0.0, 1.0};
  CHECK(classify_trend(spiky, opts) == Trend::inconclusive);
  // Last value at tolerance wins regardless of shape.
  const std::vector<double> late{1.0, 3.0, 2.0, 0.0};
  CHECK(classify_trend(late, opts) == Trend::vanishing);
  // Slow monotone decay (ratio above decay_ratio, below flat_ratio).
  const std::vector<double> slow{1.0, 0.95, 0.9025, 0.857375, 0.81450625};
  CHECK(classify_trend(slow, opts) == Trend::inconclusive);
  CHECK(std::string(trend_name(Trend::vanishing)) == "vanishing");
}

TEST_CASE("classifier: converged / not converged / inconclusive on synthetic sequences") {
  const DomainPtr dom = make_grid(2, {8, 8});
  const auto id = SemimetricField::identity(dom);

  // Shrinking conformal bump on the quarter: converges in measure and in
  // volume, so Theorem-1 says d-converged.
  MetricSequence conv;
  conv.limit_candidate = id;
  for (int k = 0; k <= 12; ++k) {
    const double s = std::pow(2.0, -k);
    conv.terms.push_back(quarter_field(dom, diag2(1.0 + s, 1.0 + s)));
  }
  ClassifyOptions opts;
  opts.with_theta = false;
  const ConvergenceReport rc = classify_d_convergence(conv, opts);
  CHECK(rc.verdict == Verdict::converged);
  CHECK(rc.tol_meas == doctest::Approx(0.04));  // default 1e-2 * mu_g(M)
  CHECK(rc.tol_vol == doctest::Approx(0.04));
  CHECK(!rc.theta_fallback);
  CHECK(!rc.rationale.empty());
  for (Trend t : rc.in_measure_trends) CHECK(t == Trend::vanishing);
  CHECK(rc.uniform_trend == Trend::vanishing);

  // Exploding determinant on the quarter: gaps bounded away -> not converged.
  MetricSequence bad;
  bad.limit_candidate = id;
  for (int k = 1; k <= 6; ++k) {
    const double kk = static_cast<double>(k * k);
    bad.terms.push_back(quarter_field(dom, diag2(kk, kk)));
  }
  const ConvergenceReport rb = classify_d_convergence(bad, opts);
  CHECK(rb.verdict == Verdict::not_converged);

  // Oscillating anisotropy with unit determinant: in-measure column flips
  // 0/1 (inconclusive) while the volume columns are identically zero.
  MetricSequence osc;
  osc.limit_candidate = id;
  for (int k = 0; k < 6; ++k) {
    osc.terms.push_back(k % 2 == 0 ? id : quarter_field(dom, diag2(2.0, 0.5)));
  }
  const ConvergenceReport ro = classify_d_convergence(osc, opts);
  CHECK(ro.verdict == Verdict::inconclusive);
  CHECK(ro.uniform_trend == Trend::vanishing);

  // Contract checks.
  MetricSequence missing;
  missing.terms = conv.terms;
  CHECK_THROWS_AS(classify_d_convergence(missing, opts), InvalidArgumentError);
  ClassifyOptions bad_eps = opts;
  bad_eps.eps_grid = {0.1, -0.5};
  CHECK_THROWS_AS(classify_d_convergence(conv, bad_eps), InvalidArgumentError);
  bad_eps.eps_grid.clear();
  CHECK_THROWS_AS(classify_d_convergence(conv, bad_eps), InvalidArgumentError);
}

TEST_CASE("classifier falls back to the Theta trend for deflated limits") {
  const DomainPtr dom = make_grid(2, {8, 8});
  MetricSequence s;
  s.limit_candidate = SemimetricField::zero(dom);
  for (int k = 1; k <= 6; ++k) {
    const double c = std::pow(2.0, -k);
    s.terms.push_back(SemimetricField::constant(dom, diag2(c, c)));
  }
  const ConvergenceReport r = classify_d_convergence(s);
  CHECK(r.theta_fallback);
  CHECK(r.verdict == Verdict::converged);
  CHECK(r.rationale.find("Theta") != std::string::npos);
  REQUIRE(!r.theta_gaps.empty());
  // Theta(c I, 0) = 4 sqrt 2 c: a clean halving series.
  CHECK(r.theta_gaps.front() == doctest::Approx(4.0 * kSqrt2 * 0.5).epsilon(1e-12));
}

TEST_CASE("bounded test functions transfer along L1 density convergence (Lemma-9 style)") {
  const DomainPtr dom = make_grid(2, {8, 8});
  const auto id = SemimetricField::identity(dom);
  ts::Rng rng(504);
  std::vector<double> lam(dom->n_cells());
  for (auto& v : lam) v = rng.uniform(-2.0, 2.0);
  double sup_lam = 0.0;
  for (double v : lam) sup_lam = std::max(sup_lam, std::abs(v));

  for (int k = 1; k <= 5; ++k) {
    const double c = 1.0 + std::pow(2.0, -k);
    const auto fk = SemimetricField::constant(dom, diag2(c, c));
    // integral lambda (d mu_{g_k} - d mu_{g_0}).
    std::vector<double> delta(dom->n_cells());
    for (std::size_t j = 0; j < dom->n_cells(); ++j)
      delta[j] = lam[j] * (fk.radon_nikodym()[j] - id.radon_nikodym()[j]);
    const double transfer = std::abs(dom->weighted_sum(delta));
    CHECK(transfer <= sup_lam * l1_density_gap(fk, id) + 1e-12);
  }
}

TEST_CASE("omega_report: constant, deflating, and oscillating sequences") {
  const DomainPtr dom = make_grid(2, {8, 8});
  const auto id = SemimetricField::identity(dom);

  // Constant sequence: everything passes trivially.
  MetricSequence c;
  c.limit_candidate = id;
  for (int k = 0; k < 5; ++k) c.terms.push_back(id);
  const OmegaReport rc = omega_report(c);
  CHECK(rc.all_pass);
  CHECK(rc.cauchy_pass);
  CHECK(rc.deflation_pass);
  CHECK(rc.pointwise_pass);
  CHECK(rc.summable_pass);
  CHECK(rc.mismatch_measure == 0.0);
  CHECK(!rc.note.empty());

  // Geometric full deflation: the estimated deflation set is the whole
  // torus, matching the zero limit.
  MetricSequence d;
  d.limit_candidate = SemimetricField::zero(dom);
  for (int k = 1; k <= 7; ++k) {
    const double s = std::pow(2.0, -k);
    d.terms.push_back(SemimetricField::constant(dom, diag2(s, s)));
  }
  const OmegaReport rd = omega_report(d);
  CHECK(rd.all_pass);
  CHECK(rd.deflation_estimate.count() == dom->n_cells());
  CHECK(rd.limit_deflated.count() == dom->n_cells());
  CHECK(rd.mismatch_measure == 0.0);
  CHECK(rd.theta_partial_sum ==
        doctest::Approx(4.0 * kSqrt2 * (0.5 - std::pow(2.0, -7))).epsilon(1e-9));

  // Oscillation off the deflation set: cellwise convergence (iii) fails.
  MetricSequence o;
  o.limit_candidate = id;
  for (int k = 0; k < 6; ++k)
    o.terms.push_back(k % 2 == 0 ? id : quarter_field(dom, diag2(2.0, 0.5)));
  const OmegaReport ro = omega_report(o);
  CHECK(!ro.pointwise_pass);
  CHECK(!ro.all_pass);

  // Limit deflated on the quarter but the sequence never approaches it:
  // the deflation estimate misses X_{g0} by the quarter's measure.
  MetricSequence m;
  m.limit_candidate = SemimetricField::build(dom, [&](int, int, double x, double y) {
    return in_quarter(x, y) ? SymTensor::zero(2) : SymTensor::identity(2);
  });
  for (int k = 0; k < 5; ++k) m.terms.push_back(id);
  const OmegaReport rm = omega_report(m);
  CHECK(!rm.deflation_pass);
  CHECK(rm.mismatch_measure == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!rm.all_pass);
}
