#include "metgeo/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metgeo/lbfgs.hpp"

namespace metgeo {
namespace {

inline double clamp0(double x) { return x > 0.0 ? x : 0.0; }

inline double sqrt_det(const SymTensor& a) { return std::sqrt(clamp0(a.det())); }

bool packed_equal(const SymTensor& a, const SymTensor& b) {
  for (int k = 0; k < a.packed(); ++k)
    if (a[k] != b[k]) return false;
  return true;
}

bool packed_less(const SymTensor& a, const SymTensor& b) {
  for (int k = 0; k < a.packed(); ++k) {
    if (a[k] < b[k]) return true;
    if (a[k] > b[k]) return false;
  }
  return false;
}

}  // namespace

double trace_product(const SpdTensor& a, const SymTensor& b, const SymTensor& c) {
  const int n = a.dim();
  if (b.dim() != n || c.dim() != n) throw InvalidArgumentError("trace_product: dim mismatch");
  double wb[9], wc[9];
  solve_spd(a.sym(), b, wb);
  solve_spd(a.sym(), c, wc);
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += wb[i * n + j] * wc[j * n + i];
  return s;
}

double fiber_norm0(const SpdTensor& a, const SymTensor& b) {
  return std::sqrt(clamp0(trace_product(a, b, b)) * a.det());
}

double dist_to_boundary(const SpdTensor& a) {
  const double n = static_cast<double>(a.dim());
  return (2.0 / std::sqrt(n)) * sqrt_det(a.sym());
}

double fiber_segment_norm(const SymTensor& a, const SymTensor& b, double eps_pd) {
  if (a.dim() != b.dim()) throw InvalidArgumentError("fiber_segment_norm: dim mismatch");
  if (packed_equal(a, b)) return 0.0;
  const int n = a.dim();
  const SymTensor mbar = (a + b) * 0.5;
  if (!(mbar.min_eigenvalue() > eps_pd))
    throw InvalidPathError("fiber_segment_norm: midpoint degenerate with nonzero difference");
  const SymTensor d = b - a;
  double w[9];
  solve_spd(mbar, d, w);
  double tr_w = 0.0, tr_w2 = 0.0;
  for (int i = 0; i < n; ++i) tr_w += w[i * n + i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) tr_w2 += w[i * n + j] * w[j * n + i];
  const double nn = static_cast<double>(n);
  const double dq = sqrt_det(b) - sqrt_det(a);
  const double traceless = clamp0(tr_w2 - tr_w * tr_w / nn) * clamp0(mbar.det());
  return std::sqrt((4.0 / nn) * dq * dq + traceless);
}

double fiber_path_length(const FiberPath& p, double eps_pd) {
  const std::size_t k = p.nodes.size();
  if (k < 2) throw InvalidPathError("fiber_path_length: need at least 2 nodes");
  const int n = p.nodes.front().dim();
  for (const SymTensor& a : p.nodes)
    if (a.dim() != n) throw InvalidPathError("fiber_path_length: mixed dims");
  for (std::size_t i = 1; i + 1 < k; ++i)
    if (!(p.nodes[i].min_eigenvalue() > eps_pd))
      throw InvalidPathError("fiber_path_length: interior node not SPD");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i)
    total += fiber_segment_norm(p.nodes[i], p.nodes[i + 1], eps_pd);
  return total;
}

namespace {

// ---- seed paths ------------------------------------------------------------

FiberPath seed_linear(const SymTensor& a0, const SymTensor& a1, int k) {
  FiberPath p;
  p.nodes.reserve(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) {
    const double t = static_cast<double>(i) / k;
    p.nodes.push_back(a0 * (1.0 - t) + a1 * t);
  }
  return p;
}

FiberPath seed_loglinear(const SymTensor& a0, const SymTensor& a1, int k, double eps_pd) {
  if (!(a0.min_eigenvalue() > eps_pd) || !(a1.min_eigenvalue() > eps_pd))
    return seed_linear(a0, a1, k);  // degenerate endpoint: log undefined
  const SymTensor x0 = log_sym(a0), x1 = log_sym(a1);
  FiberPath p;
  p.nodes.reserve(static_cast<std::size_t>(k) + 1);
  p.nodes.push_back(a0);
  for (int i = 1; i < k; ++i) {
    const double t = static_cast<double>(i) / k;
    p.nodes.push_back(exp_sym(x0 * (1.0 - t) + x1 * t));
  }
  p.nodes.push_back(a1);
  return p;
}

// Conformal prefix bringing det(A0) to det(A1) with the q = sqrt(det)
// profile linear (exact under the segment rule), then a constant-determinant
// log-linear leg to A1.  Degenerates to the pure conformal ray when one
// endpoint is deflated and to plain log-linear when the dets already agree.
FiberPath seed_conformal_det(const SymTensor& a0, const SymTensor& a1, int k, double eps_pd) {
  const int n = a0.dim();
  const double q0 = sqrt_det(a0), q1 = sqrt_det(a1);
  const bool d0 = !(a0.min_eigenvalue() > eps_pd);
  const bool d1 = !(a1.min_eigenvalue() > eps_pd);
  if (d0 && d1) return seed_linear(a0, a1, k);
  if (d0 || d1) {
    // Pure conformal deflation ray from the SPD endpoint, q linear to 0.
    const SymTensor& base = d0 ? a1 : a0;
    const double qb = d0 ? q1 : q0;
    FiberPath p;
    p.nodes.reserve(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) {
      const double t = static_cast<double>(i) / k;
      const double q = d0 ? t * qb : (1.0 - t) * qb;
      p.nodes.push_back(base * std::pow(q / qb, 2.0 / n));
    }
    return p;
  }
  if (q0 == q1) return seed_loglinear(a0, a1, k, eps_pd);

  const int k1 = std::max(1, k / 2);
  const int k2 = std::max(1, k - k1);
  const double c = std::pow(q1 / q0, 2.0 / n);  // det(c*A0) = det(A1)
  FiberPath p;
  p.nodes.reserve(static_cast<std::size_t>(k1 + k2) + 1);
  for (int i = 0; i <= k1; ++i) {
    const double t = static_cast<double>(i) / k1;
    const double q = (1.0 - t) * q0 + t * q1;
    p.nodes.push_back(a0 * std::pow(q / q0, 2.0 / n));
  }
  const SymTensor mid = a0 * c;
  const SymTensor xm = log_sym(mid), x1 = log_sym(a1);
  for (int i = 1; i <= k2; ++i) {
    const double t = static_cast<double>(i) / k2;
    p.nodes.push_back(i == k2 ? a1 : exp_sym(xm * (1.0 - t) + x1 * t));
  }
  return p;
}

// ---- quasi-Newton refinement in log coordinates ----------------------------

// Line-search trial steps can push log coordinates far enough that exp_sym
// overflows; report such segments as infinitely bad instead of throwing so
// the Armijo backtracking simply rejects the step.
double safe_segment_norm(const SymTensor& a, const SymTensor& b, double eps_pd) {
  for (int k = 0; k < a.packed(); ++k)
    if (!std::isfinite(a[k]) || !std::isfinite(b[k]))
      return std::numeric_limits<double>::infinity();
  try {
    return fiber_segment_norm(a, b, eps_pd);
  } catch (const InvalidPathError&) {
    return std::numeric_limits<double>::infinity();
  }
}

class FiberPathProblem : public LbfgsProblem {
 public:
  FiberPathProblem(SymTensor e0, SymTensor e1, int k, double eps_pd)
      : e0_(std::move(e0)), e1_(std::move(e1)), k_(k), eps_pd_(eps_pd),
        m_(packed_size(e0_.dim())) {}

  int dim_x() const { return (k_ - 1) * m_; }

  std::vector<double> pack(const FiberPath& p) const {
    std::vector<double> x(static_cast<std::size_t>(dim_x()));
    for (int i = 1; i < k_; ++i) {
      const SymTensor lg = log_sym_floored(p.nodes[static_cast<std::size_t>(i)]);
      for (int c = 0; c < m_; ++c) x[static_cast<std::size_t>((i - 1) * m_ + c)] = lg[c];
    }
    return x;
  }

  FiberPath unpack(std::span<const double> x) const {
    FiberPath p;
    p.nodes.reserve(static_cast<std::size_t>(k_) + 1);
    p.nodes.push_back(e0_);
    for (int i = 1; i < k_; ++i) {
      SymTensor lg(e0_.dim());
      for (int c = 0; c < m_; ++c) lg[c] = x[static_cast<std::size_t>((i - 1) * m_ + c)];
      p.nodes.push_back(exp_sym(lg));
    }
    p.nodes.push_back(e1_);
    return p;
  }

  double value(std::span<const double> x) override {
    refresh(x);
    return total_;
  }

  void gradient(std::span<const double> x, std::span<double> grad) override {
    refresh(x);
    const double h = 1e-6;
    for (int i = 1; i < k_; ++i) {
      for (int c = 0; c < m_; ++c) {
        const std::size_t xi = static_cast<std::size_t>((i - 1) * m_ + c);
        double f[2];
        for (int s = 0; s < 2; ++s) {
          SymTensor lg(e0_.dim());
          for (int cc = 0; cc < m_; ++cc) lg[cc] = x[static_cast<std::size_t>((i - 1) * m_ + cc)];
          lg[c] += (s == 0 ? h : -h);
          const SymTensor node = exp_sym(lg);
          const double s_left = safe_segment_norm(path_.nodes[static_cast<std::size_t>(i - 1)], node, eps_pd_);
          const double s_right = safe_segment_norm(node, path_.nodes[static_cast<std::size_t>(i + 1)], eps_pd_);
          f[s] = total_ - segs_[static_cast<std::size_t>(i - 1)] - segs_[static_cast<std::size_t>(i)] +
                 s_left + s_right;
        }
        grad[xi] = (f[0] - f[1]) / (2.0 * h);
      }
    }
  }

  const FiberPath& current_path(std::span<const double> x) {
    refresh(x);
    return path_;
  }

 private:
  void refresh(std::span<const double> x) {
    if (!cache_.empty() && std::equal(cache_.begin(), cache_.end(), x.begin(), x.end())) return;
    cache_.assign(x.begin(), x.end());
    path_ = unpack(x);
    segs_.resize(static_cast<std::size_t>(k_));
    total_ = 0.0;
    for (int i = 0; i < k_; ++i) {
      segs_[static_cast<std::size_t>(i)] = safe_segment_norm(
          path_.nodes[static_cast<std::size_t>(i)], path_.nodes[static_cast<std::size_t>(i + 1)], eps_pd_);
      total_ += segs_[static_cast<std::size_t>(i)];
    }
  }

  SymTensor e0_, e1_;
  int k_;
  double eps_pd_;
  int m_;
  std::vector<double> cache_;
  FiberPath path_;
  std::vector<double> segs_;
  double total_ = 0.0;
};

FiberPath resample(const FiberPath& p, int k_new) {
  const int k_old = static_cast<int>(p.nodes.size()) - 1;
  FiberPath r;
  r.nodes.reserve(static_cast<std::size_t>(k_new) + 1);
  for (int i = 0; i <= k_new; ++i) {
    const double u = static_cast<double>(i) * k_old / k_new;
    const int i0 = std::min(static_cast<int>(u), k_old - 1);
    const double frac = u - i0;
    r.nodes.push_back(p.nodes[static_cast<std::size_t>(i0)] * (1.0 - frac) +
                      p.nodes[static_cast<std::size_t>(i0 + 1)] * frac);
  }
  return r;
}

struct SeedOutcome {
  double value = 0.0;
  int iterations = 0;
  bool converged = true;
};

SeedOutcome refine_seed(FiberPath seed, const SymTensor& e0, const SymTensor& e1,
                        const ThetaOptions& opts) {
  SeedOutcome out;
  out.value = fiber_path_length(seed, opts.eps_pd);
  if (!opts.refine) return out;
  for (std::size_t stage = 0; stage < opts.node_schedule.size(); ++stage) {
    const int k = opts.node_schedule[stage];
    if (static_cast<int>(seed.nodes.size()) - 1 != k) seed = resample(seed, k);
    FiberPathProblem problem(e0, e1, k, opts.eps_pd);
    std::vector<double> x = problem.pack(seed);
    LbfgsOptions lopts;
    lopts.max_iterations = opts.max_iterations;
    lopts.rel_change_tol = opts.rel_change_tol;
    const LbfgsReport rep = lbfgs_minimize(problem, x, lopts);
    seed = problem.current_path(x);
    out.value = rep.value;
    out.iterations += rep.iterations;
    out.converged = rep.converged;
  }
  return out;
}

// Best interior-path estimate over the three seed families (deterministic
// candidate order; strict improvement keeps the earlier winner on ties).
SeedOutcome optimize_interior(const SymTensor& a0, const SymTensor& a1, const ThetaOptions& opts) {
  const int k0 = opts.node_schedule.front();
  SeedOutcome best;
  bool have = false;
  int total_iters = 0;
  const FiberPath seeds[3] = {
      seed_linear(a0, a1, k0),
      seed_loglinear(a0, a1, k0, opts.eps_pd),
      seed_conformal_det(a0, a1, k0, opts.eps_pd),
  };
  for (const FiberPath& s : seeds) {
    SeedOutcome o = refine_seed(s, a0, a1, opts);
    total_iters += o.iterations;
    if (!have || o.value < best.value) {
      best = o;
      have = true;
    }
  }
  best.iterations = total_iters;
  return best;
}

}  // namespace

ThetaResult theta_distance(const CompletionPoint& p0, const CompletionPoint& p1,
                           const ThetaOptions& opts) {
  const int n0 = completion_dim(p0), n1 = completion_dim(p1);
  if (n0 != n1) throw InvalidArgumentError("theta_distance: dim mismatch");
  ThetaResult r;
  if (is_boundary(p0) && is_boundary(p1)) {
    r.route = ThetaRoute::coincident;
    return r;  // one boundary class: distance 0
  }
  if (is_boundary(p0) || is_boundary(p1)) {
    const SpdTensor& a = std::get<SpdTensor>(is_boundary(p0) ? p1 : p0);
    r.value = dist_to_boundary(a);
    r.route = ThetaRoute::boundary_endpoint;
    return r;
  }
  SymTensor a0 = std::get<SpdTensor>(p0).sym();
  SymTensor a1 = std::get<SpdTensor>(p1).sym();
  if (packed_equal(a0, a1)) {
    r.route = ThetaRoute::coincident;
    return r;
  }
  if (packed_less(a1, a0)) std::swap(a0, a1);  // exact symmetry in the arguments

  const SeedOutcome interior = optimize_interior(a0, a1, opts);
  const double nn = static_cast<double>(a0.dim());
  const double detour = (2.0 / std::sqrt(nn)) * (sqrt_det(a0) + sqrt_det(a1));

  r.iterations = interior.iterations;
  if (interior.value <= detour) {
    r.value = interior.value;
    r.converged = interior.converged;
    r.route = ThetaRoute::interior;
  } else {
    r.value = detour;
    r.converged = true;
    r.route = ThetaRoute::boundary_detour;
  }
  return r;
}

ThetaResult theta_via_optimizer(const CompletionPoint& p0, const CompletionPoint& p1,
                                const ThetaOptions& opts) {
  const int n0 = completion_dim(p0), n1 = completion_dim(p1);
  if (n0 != n1) throw InvalidArgumentError("theta_via_optimizer: dim mismatch");
  ThetaResult r;
  if (is_boundary(p0) && is_boundary(p1)) return r;
  SymTensor a0 = is_boundary(p0) ? SymTensor::zero(n0) : SymTensor(std::get<SpdTensor>(p0).sym());
  SymTensor a1 = is_boundary(p1) ? SymTensor::zero(n1) : SymTensor(std::get<SpdTensor>(p1).sym());
  if (packed_equal(a0, a1)) return r;
  if (packed_less(a1, a0)) std::swap(a0, a1);
  const SeedOutcome interior = optimize_interior(a0, a1, opts);
  r.value = interior.value;
  r.converged = interior.converged;
  r.iterations = interior.iterations;
  r.route = ThetaRoute::interior;
  return r;
}

}  // namespace metgeo
