#pragma once

#include <vector>

#include "metgeo/sym_tensor.hpp"

namespace metgeo {

// Trace product tr_a(bc) = tr(A^{-1} B A^{-1} C) in the g-orthonormal frame.
double trace_product(const SpdTensor& a, const SymTensor& b, const SymTensor& c);

// Fiber norm |b|^0_a = sqrt( tr_a(b^2) * det A ).  Note the det A weight:
// this is the pointwise metric whose geodesic distance theta integrates to
// the L1-type distance on fields, distinct from the sqrt(det) weight of the
// L2 length functional on paths of fields.
double fiber_norm0(const SpdTensor& a, const SymTensor& b);

// Exact distance from a to the (single) boundary class of the fiber
// completion, attained along the conformal deflation ray:
//   dist = (2/sqrt(n)) sqrt(det A).
double dist_to_boundary(const SpdTensor& a);

// Discrete path in one fiber.  Interior nodes must be SPD; the first/last
// node may be degenerate (boundary approach, canonical zero tensor).
struct FiberPath {
  std::vector<SymTensor> nodes;
};

// One segment of the discrete length rule.  The difference tensor is split
// at the entrywise midpoint into its conformal (trace) component and the
// traceless remainder; the conformal part is integrated in closed form via
// q = sqrt(det), which keeps the rule second-order accurate (and exact on
// conformal segments) even when one endpoint is deflated:
//   seg^2 = (4/n) (q1 - q0)^2 + [tr(W^2) - tr(W)^2/n] det(Mbar),
// with Mbar the entrywise midpoint and W = Mbar^{-1} (b - a).
double fiber_segment_norm(const SymTensor& a, const SymTensor& b, double eps_pd = kEpsPd);

// Sum of segment norms; throws InvalidPathError on contract violations
// (fewer than 2 nodes, non-SPD interior node, segment with nonzero
// difference between two degenerate nodes).
double fiber_path_length(const FiberPath& p, double eps_pd = kEpsPd);

struct ThetaOptions {
  // K refinement schedule for the discrete path, warm-started between stages.
  std::vector<int> node_schedule{16, 64, 256};
  int max_iterations = 500;
  double rel_change_tol = 1e-8;
  bool refine = true;  // quasi-Newton refinement of each seed
  double eps_pd = kEpsPd;

  static ThetaOptions standard() { return {}; }
  // Budget used per cell when integrating theta over a field: closed-form
  // candidates plus unrefined seeds at K = 16.
  static ThetaOptions field_budget() {
    ThetaOptions o;
    o.node_schedule = {16};
    o.refine = false;
    return o;
  }
};

enum class ThetaRoute {
  coincident,         // arguments equal (or both boundary)
  boundary_endpoint,  // one argument is the boundary class: conformal ray
  interior,           // optimized interior path won
  boundary_detour,    // through-boundary candidate r0 + r1 won
};

struct ThetaResult {
  double value = 0.0;
  bool converged = true;  // optimizer met its tolerance (closed forms: true)
  ThetaRoute route = ThetaRoute::coincident;
  int iterations = 0;
};

// Completion distance estimate (always an upper bound on the true infimum):
// min over the optimized interior candidates (seeds: entrywise linear,
// log-linear, conformal-through-common-determinant) and the through-boundary
// detour dist_to_boundary(a0) + dist_to_boundary(a1).  Exactly symmetric in
// its arguments (canonical argument ordering).
ThetaResult theta_distance(const CompletionPoint& p0, const CompletionPoint& p1,
                           const ThetaOptions& opts = ThetaOptions::standard());

inline double theta(const CompletionPoint& p0, const CompletionPoint& p1,
                    const ThetaOptions& opts = ThetaOptions::standard()) {
  return theta_distance(p0, p1, opts).value;
}

// Runs the interior-path optimizer even when a closed-form short-circuit
// exists (e.g. against the boundary class); diagnostic hook used to validate
// the optimizer against the exact conformal-ray distance.
ThetaResult theta_via_optimizer(const CompletionPoint& p0, const CompletionPoint& p1,
                                const ThetaOptions& opts = ThetaOptions::standard());

}  // namespace metgeo
