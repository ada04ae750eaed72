#include "metgeo/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace metgeo {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

LbfgsReport lbfgs_minimize(LbfgsProblem& problem, std::vector<double>& x,
                           const LbfgsOptions& opts) {
  const std::size_t d = x.size();
  LbfgsReport report;
  if (d == 0) {
    report.value = problem.value(x);
    report.converged = true;
    return report;
  }

  std::vector<double> g(d), g_new(d), dir(d), x_new(d);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  double f = problem.value(x);
  problem.gradient(x, g);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    report.iterations = iter + 1;
    const double gnorm = norm2(g);
    if (gnorm <= opts.grad_tol) {
      report.converged = true;
      break;
    }

    // Two-loop recursion for dir = -H g.
    std::copy(g.begin(), g.end(), dir.begin());
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
      for (std::size_t i = 0; i < d; ++i) dir[i] -= alpha[k] * y_hist[k][i];
    }
    if (!s_hist.empty()) {
      const double yy = dot(y_hist.back(), y_hist.back());
      const double sy = 1.0 / rho_hist.back();
      const double gamma = yy > 0.0 ? sy / yy : 1.0;
      for (double& v : dir) v *= gamma;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      for (std::size_t i = 0; i < d; ++i) dir[i] += (alpha[k] - beta) * s_hist[k][i];
    }
    for (double& v : dir) v = -v;

    double slope = dot(g, dir);
    if (slope >= 0.0) {  // not a descent direction: restart with steepest descent
      for (std::size_t i = 0; i < d; ++i) dir[i] = -g[i];
      slope = -gnorm * gnorm;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Armijo backtracking.
    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < d; ++i) x_new[i] = x[i] + step * dir[i];
      f_new = problem.value(x_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled; report best point found

    problem.gradient(x_new, g_new);

    std::vector<double> s(d), y(d);
    for (std::size_t i = 0; i < d; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * norm2(s) * norm2(y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double df = std::abs(f - f_new);
    x.swap(x_new);
    f = f_new;
    g.swap(g_new);

    if (df <= opts.rel_change_tol * std::max(1.0, std::abs(f))) {
      report.converged = true;
      break;
    }
  }

  report.value = f;
  return report;
}

}  // namespace metgeo
