#pragma once

#include <Eigen/Core>
#include <vector>

#include "aqua/biology.hpp"
#include "aqua/ingest.hpp"
#include "aqua/rng.hpp"

namespace aqua {

// Uniform simulation grid: 10*n_dates points covering [0, T], so the step is
// T / (10*n_dates - 1) and both endpoints are grid points.
Eigen::VectorXd euler_grid(double horizon, int n_dates);

struct LambdaFit {
    double lambda = 0.0;
    double sse = 0.0;        // sum of squared residuals at the optimum
    int n_points = 0;        // observations entering the fit
    int n_segments = 0;
    int evals = 0;
    bool converged = false;
};

// Least-squares fit of the parasite reproduction rate to lpf observations
// before the first removal.  The no-treatment ratio curve is integrated on
// `grid` (extended at the same step when an observation lies beyond it) and
// evaluated at observation times by linear interpolation; the single free
// parameter is bracketed by a coarse scan and polished with Brent.
LambdaFit fit_lambda(const std::vector<GreenSegment>& segments, const BioParams& bp,
                     const Eigen::VectorXd& grid, double lambda_lo = 1e-3,
                     double lambda_hi = 50.0);

struct BetaFit {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double objective = 0.0;
    double model_mean = 0.0;   // removal count moments at the fit time
    double model_stddev = 0.0;
    int evals = 0;
    bool converged = false;
    bool at_bound = false;     // optimum hit the shape-parameter box
};

// Match mean and standard deviation of the cumulative removal count at
// `target.t`: minimize |m - m*|^zeta + |s - s*|^zeta over the beta shape
// parameters.  Every objective evaluation reuses the same path substreams
// (common random numbers), and treatment draws come from inverse-CDF
// sampling, so the objective is a deterministic, nearly smooth function and
// a Nelder-Mead in log-parameter space is dependable.
BetaFit fit_beta(const RemovalDistribution& target, const BioParams& bp,
                 const ThresholdFn& threshold, const Eigen::VectorXd& grid,
                 int n_paths, double zeta, const RngStream& stream,
                 double beta_lo = 1e-3, double beta_hi = 10.0);

// Removal-count mean and stddev across simulated paths at time t (nearest
// grid point).
std::pair<double, double> removal_moments(const BioParams& bp,
                                          const ThresholdFn& threshold,
                                          const Eigen::VectorXd& grid, int n_paths,
                                          double t, const RngStream& stream);

}  // namespace aqua
