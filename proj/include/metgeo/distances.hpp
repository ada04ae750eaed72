#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "metgeo/fiber.hpp"
#include "metgeo/field.hpp"

namespace metgeo {

// Discrete path of semimetric fields (T = nodes.size()-1 segments).
// Canonical zero storage of deflated cells makes every segment evaluable:
// a cell with nonzero difference always has an SPD entrywise midpoint.
struct FieldPath {
  std::vector<SemimetricField> nodes;
};

// Discretized L2 (Ebin) length functional: per segment
//   sqrt( Sum_cells [ (16/n)(dp)^2 + (tr W^2 - (tr W)^2/n) sqrt(det Mbar) ] mu_g(cell) )
// summed over segments, with p = det^{1/4} per cell (trace part integrated in
// closed form, traceless remainder at the entrywise midpoint -- same rule as
// the fiber segment norm, with the sqrt(det) field weight).  Reversal
// invariant up to roundoff and exact on per-cell conformal segments.
double path_length_L2(const FieldPath& p);

// Prop.-8 style conformal geodesic through f0 with direction rho * f0:
// per cell g_t = (1 + n t rho/4)^{4/n} f0, clamped to the deflated
// representative where the factor reaches zero.
SemimetricField conformal_geodesic(const MetricField& f0, const std::vector<double>& rho, double t);

// psi_{f}(zeta) = (1 + (n/4) zeta)^{4/n} f; zeta >= -4/n (per cell when zeta
// is a field).  Throws InvalidArgumentError below -4/n - tol.
SemimetricField psi_map(const MetricField& f, double zeta);
SemimetricField psi_map(const MetricField& f, const std::vector<double>& zeta);

// Inverse of the conformal factor: psi(psi_inverse(rho, n)) scales by rho.
inline double psi_inverse(double rho, int n) {
  return (4.0 / n) * (std::pow(rho, n / 4.0) - 1.0);
}

// --- Theta over a region ----------------------------------------------------

struct ThetaFieldResult {
  double value = 0.0;               // integral of per-cell theta over Y
  std::vector<double> cell_theta;   // unweighted per-cell theta (0 outside Y)
  std::size_t cells_in_region = 0;
  std::size_t boundary_routed = 0;  // cells whose best candidate passes through the boundary
  bool all_converged = true;
};

// Theta_Y(f0, f1) = integral over Y of theta(f0(x), f1(x)) d mu_g.  Y
// defaults to the carrier of f1 - f0 (cells off the carrier contribute 0).
// Per-cell estimates are upper bounds (candidate paths + optional
// refinement); the total is therefore an upper estimate of record.
ThetaFieldResult theta_Y(const SemimetricField& f0, const SemimetricField& f1,
                         const std::optional<CellMask>& region = std::nullopt,
                         const ThetaOptions& opts = ThetaOptions::field_budget());

inline double theta_M(const SemimetricField& f0, const SemimetricField& f1,
                      const ThetaOptions& opts = ThetaOptions::field_budget()) {
  return theta_Y(f0, f1, std::nullopt, opts).value;
}

// --- two-sided bounds on the geodesic distance d ----------------------------

struct DBoundOptions {
  std::vector<int> t_schedule{8, 16, 32};  // path nodes, warm-started
  int max_iterations = 200;
  double rel_change_tol = 1e-6;
  ThetaOptions theta = ThetaOptions::field_budget();
};

struct DBoundResult {
  double lower = 0.0;
  double upper = 0.0;
  // lower-bound breakdown
  double lower_volume = 0.0;  // best (4/sqrt n)|sqrt Vol(Y,f1) - sqrt Vol(Y,f0)|
  double lower_eq32 = 0.0;    // inversion of the Theta <= d(sqrt n d + 2 sqrt V0) bound
  // upper-bound diagnostics
  const char* upper_candidate = "";
  bool converged = true;
  int iterations = 0;
  FieldPath witness;
  double gap() const { return upper - lower; }
};

// Upper bound: best over admissible candidate paths (entrywise linear,
// per-cell log-linear, conformal profile when f1 is a per-cell scalar
// multiple of f0), refined by quasi-Newton descent on interior nodes in
// per-cell log coordinates over the T schedule.
DBoundResult d_upper(const SemimetricField& f0, const SemimetricField& f1,
                     const DBoundOptions& opts = {});

// Lower bound only (cheap).
double d_lower(const SemimetricField& f0, const SemimetricField& f1,
               const ThetaOptions& theta_opts = ThetaOptions::field_budget());

// Both bounds in one result.
DBoundResult d_bounds(const SemimetricField& f0, const SemimetricField& f1,
                      const DBoundOptions& opts = {});

}  // namespace metgeo
