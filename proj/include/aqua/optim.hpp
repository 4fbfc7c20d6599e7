#pragma once

#include <Eigen/Core>
#include <functional>

namespace aqua {

struct ScalarMinResult {
    double x = 0.0;
    double f = 0.0;
    int evals = 0;
    bool converged = false;
};

// Brent's method on a bracketing interval [lo, hi] (parabolic steps with a
// golden-section safeguard).  `tol` is an absolute tolerance on x.
ScalarMinResult brent_minimize(const std::function<double(double)>& f, double lo,
                               double hi, double tol = 1e-8, int max_iter = 200);

struct SimplexMinResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int evals = 0;
    bool converged = false;
};

// Nelder-Mead with box clamping.  The simplex is built from x0 with per-axis
// steps; every trial point is projected into [lower, upper] before
// evaluation.  Stops when the simplex f-spread falls below ftol or the
// evaluation budget runs out; the budget is checked between iterations, so
// the last one may overshoot it by up to dim + 2 evaluations.
SimplexMinResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             double ftol = 1e-10, int max_evals = 2000);

}  // namespace aqua
