#include "metgeo/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "metgeo/kernels.hpp"

namespace metgeo {
namespace {

inline double clamp0(double x) { return x > 0.0 ? x : 0.0; }

double default_tol(double requested, const GridDomain& dom) {
  return requested < 0.0 ? 1e-2 * dom.total_measure() : requested;
}

std::string format_eps(double eps) {
  std::ostringstream os;
  os << eps;
  return os.str();
}

}  // namespace

void validate(const MetricSequence& s, const char* where) {
  if (s.terms.size() < 2)
    throw InvalidArgumentError(std::string(where) + ": need at least 2 sequence terms");
  const GridDomain& dom = *s.terms.front().domain();
  for (const SemimetricField& f : s.terms)
    if (!f.domain()->same_layout(dom))
      throw DomainMismatchError(std::string(where) + ": sequence terms on different grids");
  if (s.limit_candidate && !s.limit_candidate->domain()->same_layout(dom))
    throw DomainMismatchError(std::string(where) + ": limit candidate on a different grid");
}

std::vector<double> frob_gap_cells(const SemimetricField& f, const SemimetricField& h) {
  require_same_domain(f, h, "frob_gap_cells");
  const std::size_t nc = f.n_cells();
  std::vector<double> out(nc);
  if (f.fiber_dim() == 2) {
    kernels::frob2_diff_sym2(f.comp_data(0), f.comp_data(1), f.comp_data(2), h.comp_data(0),
                             h.comp_data(1), h.comp_data(2), nc, out.data());
  } else {
    const double* a[6];
    const double* b[6];
    for (int k = 0; k < 6; ++k) {
      a[k] = f.comp_data(k);
      b[k] = h.comp_data(k);
    }
    kernels::frob2_diff_sym3(a, b, nc, out.data());
  }
  kernels::sqrt_clamped(out.data(), nc, out.data());
  return out;
}

double in_measure_gap(const SemimetricField& f_k, const SemimetricField& f0, double eps) {
  if (!(eps > 0.0)) throw InvalidArgumentError("in_measure_gap: eps must be > 0");
  const std::vector<double> gap = frob_gap_cells(f0, f_k);
  std::vector<std::uint8_t> mask(gap.size());
  for (std::size_t j = 0; j < gap.size(); ++j) mask[j] = gap[j] >= eps ? 1 : 0;
  return f0.domain()->mask_measure(mask);
}

double in_measure_gap(const SemimetricField& f_k, const SemimetricField& f0, double eps,
                      const SemimetricField& nu) {
  if (!(eps > 0.0)) throw InvalidArgumentError("in_measure_gap: eps must be > 0");
  require_same_domain(f0, nu, "in_measure_gap");
  const std::vector<double> gap = frob_gap_cells(f0, f_k);
  std::vector<double> weighted(gap.size(), 0.0);
  const std::span<const double> rn = nu.radon_nikodym();
  for (std::size_t j = 0; j < gap.size(); ++j)
    if (gap[j] >= eps) weighted[j] = rn[j];
  return f0.domain()->weighted_sum(weighted);
}

double uniform_measure_gap(const SemimetricField& f_k, const SemimetricField& f0) {
  require_same_domain(f_k, f0, "uniform_measure_gap");
  const std::span<const double> rk = f_k.radon_nikodym();
  const std::span<const double> r0 = f0.radon_nikodym();
  const std::size_t nc = f0.n_cells();
  std::vector<double> pos(nc), neg(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    const double d = r0[j] - rk[j];
    pos[j] = clamp0(d);
    neg[j] = clamp0(-d);
  }
  const GridDomain& dom = *f0.domain();
  return std::max(dom.weighted_sum(pos), dom.weighted_sum(neg));
}

double l1_density_gap(const SemimetricField& f_k, const SemimetricField& f0) {
  require_same_domain(f_k, f0, "l1_density_gap");
  const std::span<const double> rk = f_k.radon_nikodym();
  const std::span<const double> r0 = f0.radon_nikodym();
  const std::size_t nc = f0.n_cells();
  std::vector<double> diff(nc);
  for (std::size_t j = 0; j < nc; ++j) diff[j] = std::abs(rk[j] - r0[j]);
  return f0.domain()->weighted_sum(diff);
}

bool UacTable::passes(std::size_t d, double eps) const {
  for (const std::vector<double>& row : worst)
    if (!(row[d] < eps)) return false;
  return true;
}

UacTable uniform_abs_continuity(const GridDomain& dom,
                                const std::vector<std::vector<double>>& family,
                                std::span<const double> delta_grid) {
  if (family.empty()) throw InvalidArgumentError("uniform_abs_continuity: empty family");
  for (const std::vector<double>& f : family)
    if (f.size() != dom.n_cells())
      throw InvalidArgumentError("uniform_abs_continuity: member size mismatch");

  UacTable table;
  table.deltas.assign(delta_grid.begin(), delta_grid.end());
  table.worst.resize(family.size());

  std::vector<std::size_t> order(dom.n_cells());
  for (std::size_t m = 0; m < family.size(); ++m) {
    const std::vector<double>& dens = family[m];
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (dens[a] != dens[b]) return dens[a] > dens[b];
      return a < b;  // deterministic tie-break
    });
    table.worst[m].resize(table.deltas.size());
    for (std::size_t d = 0; d < table.deltas.size(); ++d) {
      const double budget = table.deltas[d] * (1.0 + 1e-12);
      double used = 0.0, total = 0.0;
      for (std::size_t j : order) {
        if (dens[j] <= 0.0) break;  // remaining cells cannot increase the integral
        const double w = dom.cell_measure(j);
        if (used + w > budget) continue;
        used += w;
        total += dens[j] * w;
      }
      table.worst[m][d] = total;
    }
  }
  return table;
}

ThetaCauchyReport theta_cauchy_report(const MetricSequence& s, const ThetaOptions& opts) {
  validate(s, "theta_cauchy_report");
  ThetaCauchyReport rep;
  const std::size_t k_max = s.terms.size();
  double running = 0.0;
  for (std::size_t k = 0; k + 1 < k_max; ++k) {
    const double step = theta_M(s.terms[k], s.terms[k + 1], opts);
    rep.consecutive.push_back(step);
    running += step;
    rep.partial_sums.push_back(running);
  }
  for (std::size_t stride = 1; stride < k_max; stride *= 2)
    rep.geometric.push_back({0, stride, theta_M(s.terms[0], s.terms[stride], opts)});
  return rep;
}

Trend classify_trend(std::span<const double> values, const TrendOptions& opts) {
  if (values.empty()) return Trend::inconclusive;
  const std::size_t tail_len =
      std::min<std::size_t>(values.size(), static_cast<std::size_t>(std::max(opts.tail, 1)));
  const std::span<const double> tail = values.subspan(values.size() - tail_len);

  if (tail.back() <= opts.tol) return Trend::vanishing;

  bool monotone = true;
  double log_sum = 0.0;
  int ratio_count = 0;
  double tail_min = tail.front();
  for (std::size_t i = 0; i + 1 < tail.size(); ++i) {
    if (tail[i + 1] > tail[i] * (1.0 + 1e-12)) monotone = false;
    if (tail[i] > 0.0 && tail[i + 1] > 0.0) {
      log_sum += std::log(tail[i + 1] / tail[i]);
      ++ratio_count;
    }
    tail_min = std::min(tail_min, tail[i + 1]);
  }
  const double ratio = ratio_count > 0 ? std::exp(log_sum / ratio_count) : 1.0;

  if (monotone && ratio <= opts.decay_ratio) return Trend::vanishing;
  if (tail_min >= opts.tol && ratio >= opts.flat_ratio) return Trend::bounded_away;
  return Trend::inconclusive;
}

const char* trend_name(Trend t) {
  switch (t) {
    case Trend::vanishing: return "vanishing";
    case Trend::bounded_away: return "bounded_away";
    default: return "inconclusive";
  }
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::converged: return "Converged";
    case Verdict::not_converged: return "NotConverged";
    default: return "Inconclusive";
  }
}

ConvergenceReport classify_d_convergence(const MetricSequence& s, const ClassifyOptions& opts) {
  validate(s, "classify_d_convergence");
  if (!s.limit_candidate)
    throw InvalidArgumentError("classify_d_convergence: missing limit candidate");
  if (opts.eps_grid.empty())
    throw InvalidArgumentError("classify_d_convergence: empty eps grid");
  for (double eps : opts.eps_grid)
    if (!(eps > 0.0)) throw InvalidArgumentError("classify_d_convergence: eps must be > 0");

  const SemimetricField& g0 = *s.limit_candidate;
  const GridDomain& dom = *g0.domain();
  const std::size_t k_max = s.terms.size();

  ConvergenceReport rep;
  rep.eps_grid = opts.eps_grid;
  rep.tol_meas = default_tol(opts.tol_meas, dom);
  rep.tol_vol = default_tol(opts.tol_vol, dom);

  const bool need_theta = opts.with_theta || !g0.is_metric();
  for (std::size_t k = 0; k < k_max; ++k) {
    const SemimetricField& gk = s.terms[k];
    std::vector<double> row;
    row.reserve(opts.eps_grid.size());
    for (double eps : opts.eps_grid) row.push_back(in_measure_gap(gk, g0, eps));
    rep.in_measure_gaps.push_back(std::move(row));
    rep.uniform_measure_gaps.push_back(uniform_measure_gap(gk, g0));
    rep.l1_density_gaps.push_back(l1_density_gap(gk, g0));
    if (need_theta) rep.theta_gaps.push_back(theta_M(gk, g0, opts.theta));
  }

  TrendOptions meas_trend{rep.tol_meas, opts.tail, opts.decay_ratio, opts.flat_ratio};
  TrendOptions vol_trend{rep.tol_vol, opts.tail, opts.decay_ratio, opts.flat_ratio};

  std::ostringstream why;
  if (!g0.is_metric()) {
    // Outside the theorem's hypotheses (g0 must be a genuine metric): the
    // Theta_M gap, the equivalent metric on the completion, decides.
    rep.theta_fallback = true;
    const Trend t = classify_trend(rep.theta_gaps, meas_trend);
    switch (t) {
      case Trend::vanishing: rep.verdict = Verdict::converged; break;
      case Trend::bounded_away: rep.verdict = Verdict::not_converged; break;
      default: rep.verdict = Verdict::inconclusive; break;
    }
    why << "limit candidate has deflated cells; Theta_M gap trend is " << trend_name(t);
    rep.rationale = why.str();
    return rep;
  }

  std::vector<double> series(k_max);
  bool all_vanish = true;
  bool any_bounded = false;
  std::string detail;
  for (std::size_t e = 0; e < opts.eps_grid.size(); ++e) {
    for (std::size_t k = 0; k < k_max; ++k) series[k] = rep.in_measure_gaps[k][e];
    const Trend t = classify_trend(series, meas_trend);
    rep.in_measure_trends.push_back(t);
    if (t != Trend::vanishing) all_vanish = false;
    if (t == Trend::bounded_away) {
      any_bounded = true;
      if (detail.empty())
        detail = "in-measure gap at eps=" + format_eps(opts.eps_grid[e]) +
                 " stays bounded away from 0";
    } else if (t == Trend::inconclusive && detail.empty()) {
      detail = "in-measure gap trend at eps=" + format_eps(opts.eps_grid[e]) + " is inconclusive";
    }
  }
  rep.uniform_trend = classify_trend(rep.uniform_measure_gaps, vol_trend);
  if (rep.uniform_trend != Trend::vanishing) all_vanish = false;
  if (rep.uniform_trend == Trend::bounded_away) {
    any_bounded = true;
    if (detail.empty()) detail = "uniform measure gap stays bounded away from 0";
  } else if (rep.uniform_trend == Trend::inconclusive && detail.empty()) {
    detail = "uniform measure gap trend is inconclusive";
  }

  if (all_vanish) {
    rep.verdict = Verdict::converged;
    why << "in-measure gaps vanish at every eps and the volume measures converge uniformly";
  } else if (any_bounded) {
    rep.verdict = Verdict::not_converged;
    why << detail;
  } else {
    rep.verdict = Verdict::inconclusive;
    why << detail;
  }
  rep.rationale = why.str();
  return rep;
}

OmegaReport omega_report(const MetricSequence& s, const OmegaOptions& opts) {
  validate(s, "omega_report");
  if (!s.limit_candidate) throw InvalidArgumentError("omega_report: missing limit candidate");
  const SemimetricField& g0 = *s.limit_candidate;
  const GridDomain& dom = *g0.domain();
  const std::size_t k_max = s.terms.size();
  const double tol_step = default_tol(opts.tol_step, dom);

  OmegaReport rep;

  // (i) Cauchy behavior of the Theta_M steps.
  for (std::size_t k = 0; k + 1 < k_max; ++k)
    rep.theta_steps.push_back(theta_M(s.terms[k], s.terms[k + 1], opts.theta));
  rep.theta_partial_sum = kernels::pairwise_sum(rep.theta_steps);
  TrendOptions step_trend{tol_step, opts.tail, opts.decay_ratio, opts.flat_ratio};
  rep.cauchy_pass = classify_trend(rep.theta_steps, step_trend) == Trend::vanishing;

  // (ii) deflation estimate: cells whose densities vanish along the tail.
  rep.deflation_estimate = CellMask(dom.n_cells());
  TrendOptions rn_trend{opts.rn_vanish_eps, opts.tail, opts.rn_decay_ratio, opts.flat_ratio};
  std::vector<double> rn_series(k_max);
  for (std::size_t j = 0; j < dom.n_cells(); ++j) {
    for (std::size_t k = 0; k < k_max; ++k) rn_series[k] = s.terms[k].radon_nikodym()[j];
    rep.deflation_estimate.set(j, classify_trend(rn_series, rn_trend) == Trend::vanishing);
  }
  rep.limit_deflated = g0.deflated_mask();
  rep.mismatch_measure = dom.mask_measure((rep.deflation_estimate ^ rep.limit_deflated).bytes());
  rep.deflation_pass = rep.mismatch_measure == 0.0;

  // (iii) cellwise convergence off the deflating region.
  const CellMask off = ~(rep.deflation_estimate | rep.limit_deflated);
  for (std::size_t k = 0; k < k_max; ++k) {
    const std::vector<double> gap = frob_gap_cells(s.terms[k], g0);
    double sup = 0.0;
    for (std::size_t j = 0; j < gap.size(); ++j)
      if (off[j]) sup = std::max(sup, gap[j]);
    rep.offd_sup_gaps.push_back(sup);
  }
  TrendOptions point_trend{opts.tol_pointwise, opts.tail, opts.decay_ratio, opts.flat_ratio};
  rep.pointwise_pass = classify_trend(rep.offd_sup_gaps, point_trend) == Trend::vanishing;

  // (iv) summability proxy: geometric tail decay of the steps, or a tail
  // whose whole contribution is below the step tolerance.
  {
    const std::size_t tail_len = std::min<std::size_t>(
        rep.theta_steps.size(), static_cast<std::size_t>(std::max(opts.tail, 1)));
    double tail_sum = 0.0;
    for (std::size_t i = rep.theta_steps.size() - tail_len; i < rep.theta_steps.size(); ++i)
      tail_sum += rep.theta_steps[i];
    double log_sum = 0.0;
    int count = 0;
    bool grew = false;
    for (std::size_t i = rep.theta_steps.size() - tail_len; i + 1 < rep.theta_steps.size(); ++i) {
      const double a = rep.theta_steps[i], b = rep.theta_steps[i + 1];
      if (a > 0.0 && b > 0.0) {
        log_sum += std::log(b / a);
        ++count;
      }
      if (b > a * (1.0 + 1e-12)) grew = true;
    }
    const double ratio = count > 0 ? std::exp(log_sum / count) : 0.0;
    rep.summable_pass = tail_sum <= tol_step || (!grew && ratio <= 0.95);
  }

  rep.all_pass = rep.cauchy_pass && rep.deflation_pass && rep.pointwise_pass && rep.summable_pass;
  rep.note =
      "Theta_M partial sums stand in for the d-sums of the omega-convergence "
      "definition (equivalent Cauchy structure, different numeric series)";
  return rep;
}

}  // namespace metgeo
