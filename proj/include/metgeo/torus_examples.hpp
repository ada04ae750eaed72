#pragma once

#include <array>
#include <string>
#include <vector>

#include "metgeo/field.hpp"

namespace metgeo {

// Generators and probes for the degenerating torus families: a cusp family
// that pinches a vertical band and an injectivity-radius family that
// shrinks a horizontal loop, plus the grid-geometry probes (curve length,
// graph geodesics, curvature, diameter) used to watch geometric quantities
// jump while the fields converge in measure.

// Cusp profile f(x) for the band family: 1 outside |x| >= 2/k, k^4 inside
// |x| <= 1/k, smoothstep-interpolated in between: 1 <= f <= k^4.
double cusp_profile(double x, int k);

// diag(f(x), 1/f(x)) with the cusp profile; det == 1 everywhere.  Requires
// identity reference metric, fiber dim 2, and res_x >= 8k (>= 8 cells across
// the inner band).
MetricField cusp_metric(DomainPtr dom, int k);

// Transition factor h(x, y) for the injectivity family: k^{-1} on
// E_k = [-3/4, 3/4] x [-1/k, 1/k], 1 outside U_k = [-7/8, 7/8] x
// [-9/(8k), 9/(8k)], separable smoothstep in between; h <= 1.
double inj_profile(double x, double y, int k);

// diag(h, 1/h) with the transition factor; det == 1, so the volume measure
// equals the flat one.  Requires identity reference metric, fiber dim 2,
// k >= 4 and res_y >= 4k.
MetricField inj_metric(DomainPtr dom, int k);

// Cells whose center lies in [x0, x1] x [y0, y1] (closed, 1e-12 slack).
CellMask rect_mask(const GridDomain& dom, double x0, double x1, double y0, double y1);

using Polyline = std::vector<std::array<double, 2>>;

// Sum over straight chart segments of sqrt(g(v, v)), the metric sampled at
// the cell containing each segment midpoint.  The caller subdivides; no
// periodic shortcuts are taken.  Requires identity reference metric.
double curve_length(const MetricField& f, const Polyline& poly);

// Which axes of the chart are glued.  The default is the full torus; probes
// that measure crossings of the pinched band cut the x-axis (the paper's
// "lines passing all the way through the cylindrical region"), since on the
// torus proper a flat wraparound would bypass the band.
struct Wrap {
  bool x = true;
  bool y = true;
};

// Shortest-path length between the cells nearest p and q in the 16-neighbor
// grid graph, edges weighted by the metric at the edge midpoint (average of
// the endpoint tensors).  Upper-bounds the continuous distance; metrication
// overestimate <= 3% on flat metrics at res >= 128.  Exactly symmetric
// (canonical argument order) and a graph metric.
double surface_distance(const MetricField& f, std::array<double, 2> p, std::array<double, 2> q,
                        Wrap wrap = {});

// Full distance field from the cell nearest p (building block of the probes).
std::vector<double> distance_field(const MetricField& f, std::array<double, 2> p, Wrap wrap = {});

// Gaussian curvature per cell via the Brioschi formula with periodic central
// differences; exactly 0 on constant fields.  Requires res >= 32 per axis.
std::vector<double> gaussian_curvature(const MetricField& f);

// Max over sampled source cells (floor(sqrt(samples))^2 of them on a coarse
// subgrid) of the max graph distance to any cell; lower-bounds the true
// diameter up to metrication.  Requires samples >= 4.
double diameter_estimate(const MetricField& f, int samples, Wrap wrap = {});

// One geometric quantity watched along a k-indexed family.
struct ProbeResult {
  std::string quantity;
  std::vector<int> ks;
  std::vector<double> values;  // one per requested k
  double flat_value = 0.0;     // same probe on the flat metric
  bool diverging = false;      // values move monotonically away from flat_value
};

// probe in {"curvature", "distance", "diameter", "injectivity"}:
//   curvature    sup |K| of the cusp family
//   distance     crossing distance (-1/2,0) -> (1/2,0), x-axis cut
//   diameter     diameter estimate of the cusp family, x-axis cut
//   injectivity  length of the loop gamma(t) = (t, 0) under the inj family
ProbeResult example1_probe(const std::string& probe, const std::vector<int>& ks, int res);

}  // namespace metgeo
