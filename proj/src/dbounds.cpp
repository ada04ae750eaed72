#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <optional>

#include "field_path_detail.hpp"
#include "metgeo/distances.hpp"
#include "metgeo/kernels.hpp"
#include "metgeo/lbfgs.hpp"

namespace metgeo {
namespace {

using detail::Comps;

inline double clamp0(double x) { return x > 0.0 ? x : 0.0; }

// ---- Theta over a region ---------------------------------------------------

CompletionPoint completion_at(const SemimetricField& f, std::size_t j, double eps_pd) {
  if (f.deflated(j)) return BoundaryClass{f.fiber_dim()};
  return SpdTensor(f.cell(j), eps_pd);
}

// ---- raw candidate paths for d_upper ---------------------------------------

struct RawPath {
  DomainPtr dom;
  std::vector<Comps> nodes;  // [t][comp][cell]
  int segments() const { return static_cast<int>(nodes.size()) - 1; }
};

double raw_length(const RawPath& p, std::vector<double>& scratch) {
  const GridDomain& dom = *p.dom;
  const int n = dom.fiber_dim();
  const int m = packed_size(n);
  double total = 0.0;
  for (int t = 0; t < p.segments(); ++t) {
    const double* a[6];
    const double* b[6];
    for (int k = 0; k < m; ++k) {
      a[k] = p.nodes[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)].data();
      b[k] = p.nodes[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(k)].data();
    }
    total += std::sqrt(detail::seg_inner_sum(dom, n, a, b, scratch));
  }
  return total;
}

RawPath path_linear(const SemimetricField& f0, const SemimetricField& f1, int t_segments) {
  RawPath p;
  p.dom = f0.domain();
  const int m = f0.n_comps();
  const std::size_t nc = f0.n_cells();
  p.nodes.resize(static_cast<std::size_t>(t_segments) + 1);
  for (int t = 0; t <= t_segments; ++t) {
    const double s = static_cast<double>(t) / t_segments;
    Comps node(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      node[static_cast<std::size_t>(k)].resize(nc);
      kernels::axpby(1.0 - s, f0.comp_data(k), s, f1.comp_data(k), nc,
                     node[static_cast<std::size_t>(k)].data());
    }
    p.nodes[static_cast<std::size_t>(t)] = std::move(node);
  }
  return p;
}

// Per-cell log-linear where both endpoints are SPD, entrywise linear
// elsewhere (deflating cells).
RawPath path_loglinear(const SemimetricField& f0, const SemimetricField& f1, int t_segments) {
  RawPath p = path_linear(f0, f1, t_segments);
  const int m = f0.n_comps();
  const std::size_t nc = f0.n_cells();
  for (std::size_t j = 0; j < nc; ++j) {
    if (f0.deflated(j) || f1.deflated(j)) continue;
    const SymTensor x0 = log_sym(f0.cell(j));
    const SymTensor x1 = log_sym(f1.cell(j));
    for (int t = 1; t < t_segments; ++t) {
      const double s = static_cast<double>(t) / t_segments;
      const SymTensor a = exp_sym(x0 * (1.0 - s) + x1 * s);
      for (int k = 0; k < m; ++k)
        p.nodes[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)][j] = a[k];
    }
  }
  return p;
}

// f1 == rho * f0 cellwise (rho >= 0, deflated cells matching)?
std::optional<std::vector<double>> conformal_ratios(const SemimetricField& f0,
                                                    const SemimetricField& f1) {
  const std::size_t nc = f0.n_cells();
  const int m = f0.n_comps();
  std::vector<double> rho(nc, 0.0);
  for (std::size_t j = 0; j < nc; ++j) {
    if (f0.deflated(j)) {
      if (!f1.deflated(j)) return std::nullopt;
      continue;  // rho = 0, unused
    }
    int k_star = 0;
    double best = 0.0;
    double scale = 1.0;
    for (int k = 0; k < m; ++k) {
      const double av = std::abs(f0.comp(k)[j]);
      if (av > best) {
        best = av;
        k_star = k;
      }
      scale = std::max({scale, av, std::abs(f1.comp(k)[j])});
    }
    const double r = f1.comp(k_star)[j] / f0.comp(k_star)[j];
    if (!(r >= 0.0)) return std::nullopt;
    for (int k = 0; k < m; ++k)
      if (std::abs(f1.comp(k)[j] - r * f0.comp(k)[j]) > 1e-12 * scale) return std::nullopt;
    rho[j] = r;
  }
  return rho;
}

// Conformal profile with p = det^{1/4} linear per cell (exact under the
// segment rule; the Prop.-8 geodesic profile for conformal pairs).
RawPath path_conformal(const SemimetricField& f0, const std::vector<double>& rho, int t_segments) {
  RawPath p;
  p.dom = f0.domain();
  const int n = f0.fiber_dim();
  const int m = f0.n_comps();
  const std::size_t nc = f0.n_cells();
  p.nodes.resize(static_cast<std::size_t>(t_segments) + 1);
  for (int t = 0; t <= t_segments; ++t) {
    const double s = static_cast<double>(t) / t_segments;
    Comps node(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) node[static_cast<std::size_t>(k)].resize(nc);
    for (std::size_t j = 0; j < nc; ++j) {
      const double pr = std::pow(rho[j], n / 4.0);
      const double factor = std::pow((1.0 - s) + s * pr, 4.0 / n);
      for (int k = 0; k < m; ++k)
        node[static_cast<std::size_t>(k)][j] = factor * f0.comp(k)[j];
    }
    p.nodes[static_cast<std::size_t>(t)] = std::move(node);
  }
  return p;
}

RawPath resample_raw(const RawPath& p, int t_new) {
  const int t_old = p.segments();
  RawPath r;
  r.dom = p.dom;
  const std::size_t m = p.nodes.front().size();
  const std::size_t nc = p.nodes.front().front().size();
  r.nodes.resize(static_cast<std::size_t>(t_new) + 1);
  for (int i = 0; i <= t_new; ++i) {
    const double u = static_cast<double>(i) * t_old / t_new;
    const int i0 = std::min(static_cast<int>(u), t_old - 1);
    const double frac = u - i0;
    Comps node(m);
    for (std::size_t k = 0; k < m; ++k) {
      node[k].resize(nc);
      kernels::axpby(1.0 - frac, p.nodes[static_cast<std::size_t>(i0)][k].data(), frac,
                     p.nodes[static_cast<std::size_t>(i0) + 1][k].data(), nc, node[k].data());
    }
    r.nodes[static_cast<std::size_t>(i)] = std::move(node);
  }
  return r;
}

// ---- quasi-Newton refinement over interior nodes (per-cell log coords) ----

class FieldPathProblem : public LbfgsProblem {
 public:
  FieldPathProblem(RawPath path, std::vector<std::size_t> active)
      : path_(std::move(path)), active_(std::move(active)) {
    dom_ = path_.dom.get();
    n_ = dom_->fiber_dim();
    m_ = packed_size(n_);
    t_ = path_.segments();
  }

  std::size_t dim_x() const {
    return static_cast<std::size_t>(t_ - 1) * active_.size() * static_cast<std::size_t>(m_);
  }

  std::vector<double> pack() const {
    std::vector<double> x(dim_x());
    std::size_t idx = 0;
    for (int t = 1; t < t_; ++t)
      for (std::size_t r = 0; r < active_.size(); ++r) {
        const SymTensor lg = log_sym_floored(cell_of(t, active_[r]));
        for (int c = 0; c < m_; ++c) x[idx++] = lg[c];
      }
    return x;
  }

  double value(std::span<const double> x) override {
    refresh(x);
    return total_;
  }

  void gradient(std::span<const double> x, std::span<double> grad) override {
    refresh(x);
    const double h = 1e-6;
    std::size_t idx = 0;
    for (int t = 1; t < t_; ++t) {
      for (std::size_t r = 0; r < active_.size(); ++r) {
        const std::size_t j = active_[r];
        const double w = dom_->cell_measure(j);
        const double s_old_l = seg_term(t - 1, t, j);
        const double s_old_r = seg_term(t, t + 1, j);
        SymTensor lg(n_);
        for (int c = 0; c < m_; ++c) lg[c] = x[idx + static_cast<std::size_t>(c)];
        for (int c = 0; c < m_; ++c) {
          double f[2];
          for (int s = 0; s < 2; ++s) {
            SymTensor lp = lg;
            lp[c] += (s == 0 ? h : -h);
            const SymTensor node = exp_sym(lp);
            const double s_new_l = seg_term_vs(t - 1, j, node, /*node_second=*/true);
            const double s_new_r = seg_term_vs(t + 1, j, node, /*node_second=*/false);
            const double inner_l = clamp0(inner_[static_cast<std::size_t>(t - 1)] + w * (s_new_l - s_old_l));
            const double inner_r = clamp0(inner_[static_cast<std::size_t>(t)] + w * (s_new_r - s_old_r));
            f[s] = total_ - len_[static_cast<std::size_t>(t - 1)] - len_[static_cast<std::size_t>(t)] +
                   std::sqrt(inner_l) + std::sqrt(inner_r);
          }
          grad[idx + static_cast<std::size_t>(c)] = (f[0] - f[1]) / (2.0 * h);
        }
        idx += static_cast<std::size_t>(m_);
      }
    }
  }

  RawPath take_path(std::span<const double> x) {
    refresh(x);
    return path_;
  }

 private:
  SymTensor cell_of(int t, std::size_t j) const {
    SymTensor a(n_);
    for (int k = 0; k < m_; ++k) a[k] = path_.nodes[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)][j];
    return a;
  }

  double seg_term(int ta, int tb, std::size_t j) const {
    const double* a[6];
    const double* b[6];
    for (int k = 0; k < m_; ++k) {
      a[k] = path_.nodes[static_cast<std::size_t>(ta)][static_cast<std::size_t>(k)].data();
      b[k] = path_.nodes[static_cast<std::size_t>(tb)][static_cast<std::size_t>(k)].data();
    }
    return detail::seg_term_at(*dom_, n_, a, b, j);
  }

  // term of segment (t_other, node) or (node, t_other) at cell j
  double seg_term_vs(int t_other, std::size_t j, const SymTensor& node, bool node_second) const {
    const SymTensor other = cell_of(t_other, j);
    double buf_a[6], buf_b[6];
    const double* a[6];
    const double* b[6];
    for (int k = 0; k < m_; ++k) {
      buf_a[k] = node_second ? other[k] : node[k];
      buf_b[k] = node_second ? node[k] : other[k];
      a[k] = &buf_a[k];
      b[k] = &buf_b[k];
    }
    return detail::seg_term_at(*dom_, n_, a, b, 0);
  }

  void refresh(std::span<const double> x) {
    if (!cache_.empty() && cache_.size() == x.size() &&
        std::memcmp(cache_.data(), x.data(), x.size() * sizeof(double)) == 0)
      return;
    cache_.assign(x.begin(), x.end());
    std::size_t idx = 0;
    for (int t = 1; t < t_; ++t)
      for (std::size_t r = 0; r < active_.size(); ++r) {
        SymTensor lg(n_);
        for (int c = 0; c < m_; ++c) lg[c] = x[idx++];
        const SymTensor a = exp_sym(lg);
        for (int k = 0; k < m_; ++k)
          path_.nodes[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)][active_[r]] = a[k];
      }
    inner_.assign(static_cast<std::size_t>(t_), 0.0);
    len_.assign(static_cast<std::size_t>(t_), 0.0);
    total_ = 0.0;
    for (int t = 0; t < t_; ++t) {
      const double* a[6];
      const double* b[6];
      for (int k = 0; k < m_; ++k) {
        a[k] = path_.nodes[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)].data();
        b[k] = path_.nodes[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(k)].data();
      }
      inner_[static_cast<std::size_t>(t)] = detail::seg_inner_sum(*dom_, n_, a, b, scratch_);
      len_[static_cast<std::size_t>(t)] = std::sqrt(inner_[static_cast<std::size_t>(t)]);
      total_ += len_[static_cast<std::size_t>(t)];
    }
  }

  RawPath path_;
  std::vector<std::size_t> active_;
  const GridDomain* dom_;
  int n_, m_, t_;
  std::vector<double> cache_;
  std::vector<double> inner_, len_, scratch_;
  double total_ = 0.0;
};

FieldPath to_field_path(const RawPath& p) {
  FieldPath fp;
  fp.nodes.reserve(p.nodes.size());
  for (const Comps& node : p.nodes)
    fp.nodes.push_back(SemimetricField::from_components(p.dom, node));
  return fp;
}

// Best volume bound over Y in {M, carrier, one-sided deflated differences}
// (restricting the integrand to Y keeps the reverse-triangle argument valid).
double lower_volume_bound(const SemimetricField& f0, const SemimetricField& f1) {
  const double coef = 4.0 / std::sqrt(static_cast<double>(f0.fiber_dim()));
  const CellMask x0 = f0.deflated_mask();
  const CellMask x1 = f1.deflated_mask();
  const CellMask masks[4] = {CellMask(f0.n_cells(), true), carrier(f0, f1), x0.minus(x1),
                             x1.minus(x0)};
  double best = 0.0;
  for (const CellMask& y : masks)
    best = std::max(best,
                    coef * std::abs(std::sqrt(volume(f1, y)) - std::sqrt(volume(f0, y))));
  return best;
}

// Inversion of Theta_M <= d (sqrt(n) d + 2 sqrt(min V)) (the Eq.-32 shape).
double lower_eq32_bound(const SemimetricField& f0, const SemimetricField& f1,
                        double theta_total) {
  const double rn = std::sqrt(static_cast<double>(f0.fiber_dim()));
  const double v0 = std::min(volume(f0), volume(f1));
  return (std::sqrt(v0 + rn * theta_total) - std::sqrt(v0)) / rn;
}

}  // namespace

ThetaFieldResult theta_Y(const SemimetricField& f0, const SemimetricField& f1,
                         const std::optional<CellMask>& region, const ThetaOptions& opts) {
  require_same_domain(f0, f1, "theta_Y");
  const GridDomain& dom = *f0.domain();
  const CellMask y = region ? *region : carrier(f0, f1);
  if (y.size() != dom.n_cells()) throw InvalidArgumentError("theta_Y: mask size mismatch");

  ThetaFieldResult r;
  r.cell_theta.assign(dom.n_cells(), 0.0);
  r.cells_in_region = y.count();
  for (std::size_t j = 0; j < dom.n_cells(); ++j) {
    if (!y[j]) continue;
    const ThetaResult tr =
        theta_distance(completion_at(f0, j, opts.eps_pd), completion_at(f1, j, opts.eps_pd), opts);
    r.cell_theta[j] = tr.value;
    if (tr.route == ThetaRoute::boundary_detour || tr.route == ThetaRoute::boundary_endpoint)
      ++r.boundary_routed;
    if (!tr.converged) r.all_converged = false;
  }
  r.value = dom.weighted_sum(r.cell_theta);
  return r;
}

double d_lower(const SemimetricField& f0, const SemimetricField& f1,
               const ThetaOptions& theta_opts) {
  require_same_domain(f0, f1, "d_lower");
  const double theta_total = theta_M(f0, f1, theta_opts);
  return std::max(lower_volume_bound(f0, f1), lower_eq32_bound(f0, f1, theta_total));
}

DBoundResult d_upper(const SemimetricField& f0, const SemimetricField& f1,
                     const DBoundOptions& opts) {
  require_same_domain(f0, f1, "d_upper");
  if (opts.t_schedule.empty()) throw InvalidArgumentError("d_upper: empty T schedule");
  const int t0 = opts.t_schedule.front();
  if (t0 < 1) throw InvalidArgumentError("d_upper: T must be >= 1");

  // Active cells: SPD at both endpoints; deflating cells keep their seed
  // profile (already optimal for the conformal family).
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < f0.n_cells(); ++j)
    if (!f0.deflated(j) && !f1.deflated(j)) active.push_back(j);

  struct CandidateGen {
    const char* name;
    std::function<RawPath(int)> make;
  };
  std::vector<CandidateGen> gens;
  gens.push_back({"linear", [&](int t) { return path_linear(f0, f1, t); }});
  gens.push_back({"log_linear", [&](int t) { return path_loglinear(f0, f1, t); }});
  const auto rho = conformal_ratios(f0, f1);
  if (rho) gens.push_back({"conformal", [&](int t) { return path_conformal(f0, *rho, t); }});

  DBoundResult result;
  result.upper = std::numeric_limits<double>::infinity();
  std::vector<double> scratch;
  for (const CandidateGen& gen : gens) {
    // Seeds are rebuilt natively at every stage: entrywise resampling of a
    // curved profile (e.g. the conformal factor) would otherwise lose the
    // closed-form exactness of the seed.  The refined path from the previous
    // stage is still used as a warm start when it is shorter.
    RawPath best_path;
    double best_len = std::numeric_limits<double>::infinity();
    RawPath prev_opt;
    bool have_prev = false;
    bool converged = true;
    int iters = 0;
    for (int t_target : opts.t_schedule) {
      RawPath start = gen.make(t_target);
      double start_len = raw_length(start, scratch);
      if (have_prev) {
        RawPath warm = resample_raw(prev_opt, t_target);
        const double warm_len = raw_length(warm, scratch);
        if (warm_len < start_len) {
          start = std::move(warm);
          start_len = warm_len;
        }
      }
      FieldPathProblem problem(std::move(start), active);
      std::vector<double> x = problem.pack();
      LbfgsOptions lopts;
      lopts.max_iterations = opts.max_iterations;
      lopts.rel_change_tol = opts.rel_change_tol;
      const LbfgsReport rep = lbfgs_minimize(problem, x, lopts);
      prev_opt = problem.take_path(x);
      have_prev = true;
      converged = rep.converged;
      iters += rep.iterations;
      if (rep.value < best_len) {
        best_len = rep.value;
        best_path = prev_opt;
      }
    }
    result.iterations += iters;
    if (best_len < result.upper) {
      result.upper = best_len;
      result.upper_candidate = gen.name;
      result.converged = converged;
      result.witness = to_field_path(best_path);
    }
  }
  return result;
}

DBoundResult d_bounds(const SemimetricField& f0, const SemimetricField& f1,
                      const DBoundOptions& opts) {
  DBoundResult r = d_upper(f0, f1, opts);
  r.lower_volume = lower_volume_bound(f0, f1);
  r.lower_eq32 = lower_eq32_bound(f0, f1, theta_M(f0, f1, opts.theta));
  r.lower = std::max(r.lower_volume, r.lower_eq32);
  return r;
}

}  // namespace metgeo
