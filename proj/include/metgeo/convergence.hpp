#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metgeo/distances.hpp"

namespace metgeo {

// Ordered sequence {g_k} on a common domain, with an optional limit
// candidate g0 (required by the classifier and the omega report).
struct MetricSequence {
  std::vector<SemimetricField> terms;
  std::optional<SemimetricField> limit_candidate;
};

// Throws InvalidArgumentError / DomainMismatchError unless the sequence has
// >= 2 terms on one grid (and the limit, when present, matches it).
void validate(const MetricSequence& s, const char* where);

// Per-cell pointwise gap |f - h|_g (Frobenius norm of the difference in the
// g-orthonormal frame).
std::vector<double> frob_gap_cells(const SemimetricField& f, const SemimetricField& h);

// mu_g-measure of { x : |f0 - f_k|_g(x) >= eps }.  Throws on eps <= 0.
double in_measure_gap(const SemimetricField& f_k, const SemimetricField& f0, double eps);

// Same gap measured under mu_nu (d mu_nu = rn_nu d mu_g) for a fixed
// finite-volume field nu: the transfer direction of the nu-measure lemma.
double in_measure_gap(const SemimetricField& f_k, const SemimetricField& f0, double eps,
                      const SemimetricField& nu);

// sup over measurable cell sets E of |mu_{f0}(E) - mu_{f_k}(E)|; attained on
// the sign sets of the density difference, so this is exactly
// max( integral (rn0 - rn_k)+ , integral (rn_k - rn0)+ ) d mu_g.
double uniform_measure_gap(const SemimetricField& f_k, const SemimetricField& f0);

// L1 gap of the Radon-Nikodym densities: integral |rn_k - rn0| d mu_g.
// Satisfies max(P,N) <= l1 <= 2 max(P,N) against uniform_measure_gap.
double l1_density_gap(const SemimetricField& f_k, const SemimetricField& f0);

// Uniform absolute continuity scan: for each delta, the worst-case integral
// of each member density over the greedy-largest-density cell set of
// mu_g-measure <= delta (exact on the grid sigma-algebra).
struct UacTable {
  std::vector<double> deltas;
  // worst[member][delta index]
  std::vector<std::vector<double>> worst;
  // true when every member's worst case at deltas[d] is < eps
  bool passes(std::size_t d, double eps) const;
};
UacTable uniform_abs_continuity(const GridDomain& dom,
                                const std::vector<std::vector<double>>& family,
                                std::span<const double> delta_grid);

// Theta_M gaps along the sequence: consecutive steps with running partial
// sums, plus first-vs-2^m geometric index pairs.
struct ThetaCauchyReport {
  std::vector<double> consecutive;   // Theta_M(g_k, g_{k+1})
  std::vector<double> partial_sums;  // running sums of `consecutive`
  struct IndexPair {
    std::size_t a = 0, b = 0;
    double theta = 0.0;
  };
  std::vector<IndexPair> geometric;  // (0, 1), (0, 2), (0, 4), ...
};
ThetaCauchyReport theta_cauchy_report(const MetricSequence& s,
                                      const ThetaOptions& opts = ThetaOptions::field_budget());

// --- trend machinery --------------------------------------------------------

// Finite-tail verdict on a nonnegative gap series.  `vanishing` when the
// last value is already <= tol, or the tail is monotone nonincreasing with
// geometric-mean ratio <= decay_ratio; `bounded_away` when the tail stays
// >= tol with ratio >= flat_ratio; `inconclusive` otherwise.
enum class Trend { vanishing, bounded_away, inconclusive };

struct TrendOptions {
  double tol = 1e-9;
  int tail = 4;
  double decay_ratio = 0.8;
  double flat_ratio = 0.97;
};

Trend classify_trend(std::span<const double> values, const TrendOptions& opts);
const char* trend_name(Trend t);

// --- Theorem-1 classifier ---------------------------------------------------

enum class Verdict { converged, not_converged, inconclusive };
const char* verdict_name(Verdict v);

struct ClassifyOptions {
  std::vector<double> eps_grid{1e-3, 1e-2, 1e-1, 1.0};
  double tol_meas = -1.0;  // < 0: default 1e-2 * mu_g(M)
  double tol_vol = -1.0;   // < 0: default 1e-2 * mu_g(M)
  int tail = 4;
  double decay_ratio = 0.8;
  double flat_ratio = 0.97;
  bool with_theta = true;  // corroborating Theta_M(g_k, g0) column
  ThetaOptions theta = ThetaOptions::field_budget();
};

struct ConvergenceReport {
  std::vector<double> eps_grid;
  // in_measure_gaps[term][eps index]
  std::vector<std::vector<double>> in_measure_gaps;
  std::vector<double> uniform_measure_gaps;
  std::vector<double> l1_density_gaps;
  std::vector<double> theta_gaps;  // empty when with_theta = false
  std::vector<Trend> in_measure_trends;  // one per eps
  Trend uniform_trend = Trend::inconclusive;
  Verdict verdict = Verdict::inconclusive;
  double tol_meas = 0.0, tol_vol = 0.0;
  bool theta_fallback = false;  // limit had deflated cells: Theta trend only
  std::string rationale;
};

// Theorem-1 dichotomy: converged iff the tensors converge in measure (every
// eps in the grid) and the volume measures converge uniformly.  A limit
// candidate with deflated cells is outside the theorem's hypotheses; the
// classifier then falls back to the Theta_M-gap trend (the topologically
// equivalent metric on the completion) and says so in the rationale.
ConvergenceReport classify_d_convergence(const MetricSequence& s,
                                         const ClassifyOptions& opts = {});

// --- omega-convergence report ----------------------------------------------

struct OmegaOptions {
  double tol_step = -1.0;        // < 0: default 1e-2 * mu_g(M); Theta-step scale
  double tol_pointwise = 1e-2;   // sup-norm tolerance off the deflated estimate
  double rn_vanish_eps = 1e-6;   // density value treated as already deflated
  double rn_decay_ratio = 0.9;   // geometric decay accepted as deflation
  int tail = 4;
  double decay_ratio = 0.8;
  double flat_ratio = 0.97;
  ThetaOptions theta = ThetaOptions::field_budget();
};

// Diagnostic for the paper's omega-convergence package: (i) Cauchy behavior
// of the Theta_M steps, (ii) agreement of the estimated deflation set with
// the limit's deflated set, (iii) cellwise convergence off that set,
// (iv) summability of the steps.  Theta_M partial sums stand in for the
// d-sums of the definition (equivalent Cauchy structure, different numeric
// series); `note` records the substitution.
struct OmegaReport {
  std::vector<double> theta_steps;  // Theta_M(g_k, g_{k+1})
  double theta_partial_sum = 0.0;
  bool cauchy_pass = false;       // (i)
  CellMask deflation_estimate;    // cells whose densities deflate along the tail
  CellMask limit_deflated;        // X_{g0}
  double mismatch_measure = 0.0;  // mu_g(estimate symmetric-difference X_{g0})
  bool deflation_pass = false;    // (ii)
  std::vector<double> offd_sup_gaps;  // sup off the estimate of |g_k - g0|_g
  bool pointwise_pass = false;        // (iii)
  bool summable_pass = false;         // (iv)
  bool all_pass = false;
  std::string note;
};

OmegaReport omega_report(const MetricSequence& s, const OmegaOptions& opts = {});

}  // namespace metgeo
