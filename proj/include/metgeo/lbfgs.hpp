#pragma once

#include <span>
#include <vector>

namespace metgeo {

// Minimal L-BFGS (two-loop recursion, Armijo backtracking) for the discrete
// path-length objectives.  Problems provide their own gradient; the path
// objectives implement it with central differences that only re-evaluate the
// two segments adjacent to the perturbed node, which is what makes the
// optimizer affordable at K = 256.
class LbfgsProblem {
 public:
  virtual ~LbfgsProblem() = default;
  virtual double value(std::span<const double> x) = 0;
  virtual void gradient(std::span<const double> x, std::span<double> grad) = 0;
};

struct LbfgsOptions {
  int max_iterations = 500;
  double rel_change_tol = 1e-8;  // stop when |f_prev - f| <= tol * max(1, |f|)
  double grad_tol = 1e-12;
  int history = 8;
};

struct LbfgsReport {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

LbfgsReport lbfgs_minimize(LbfgsProblem& problem, std::vector<double>& x,
                           const LbfgsOptions& opts);

}  // namespace metgeo
