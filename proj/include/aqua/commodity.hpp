#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "aqua/rng.hpp"

namespace aqua {

// Two-factor commodity model under the pricing measure:
//
//   dS/S   = (r - delta) dt + spot_vol dW1
//   ddelta = (kappa (alpha - delta) - risk_premium) dt + yield_vol dW2
//   d<W1,W2> = rho dt
//
// The pair (ln S, delta) is jointly Gaussian over any horizon, so paths are
// advanced with the exact transition rather than an Euler scheme.
struct CommodityParams {
    double s0 = 1.0;          // spot at t = 0
    double delta0 = 0.0;      // convenience yield at t = 0
    double spot_vol = 0.0;    // sigma of dS/S
    double yield_vol = 0.0;   // sigma of ddelta
    double kappa = 1.0;       // mean reversion speed of delta
    double alpha = 0.0;       // long-run yield level under the physical measure
    double risk_premium = 0.0;
    double rho = 0.0;         // instantaneous correlation of the two factors

    // Long-run yield level under the pricing measure: alpha - risk_premium/kappa.
    double risk_neutral_mean() const { return alpha - risk_premium / kappa; }

    void validate() const;  // throws std::invalid_argument
};

// Conditional first and second moments of (ln S_{t+h}, delta_{t+h}) given
// (ln S_t, delta_t) = (x0, d0).
struct TwoFactorMoments {
    double mean_log_spot = 0.0;
    double mean_yield = 0.0;
    double var_log_spot = 0.0;
    double var_yield = 0.0;
    double cov = 0.0;
};

TwoFactorMoments transition_moments(const CommodityParams& p, double r, double x0,
                                    double d0, double h);

// One-step affine update x' = ax + x + bx*d0 + sd_x*z1, d' = ad + bd*d0 + ...,
// precomputed per step length so path loops do no transcendental work.
struct TransitionCoef {
    double ax = 0.0, bx = 0.0;   // mean of x' is x + ax + bx * d0
    double ad = 0.0, bd = 0.0;   // mean of d' is ad + bd * d0
    double sd_x = 0.0;           // stdev of x'
    double l21 = 0.0, l22 = 0.0; // Cholesky row for d' | z1, z2
};

TransitionCoef transition_coef(const CommodityParams& p, double r, double h);

// Time grid validation shared by the simulators: finite, starts at 0,
// strictly increasing.
void validate_grid(const Eigen::VectorXd& grid);

// Simulated paths.  Layout is time-major: row i = grid point i, column j =
// path j, so a path is a contiguous column.
struct CommodityPathSet {
    Eigen::VectorXd grid;
    Eigen::ArrayXXd spot;        // n_grid x n_paths
    Eigen::ArrayXXd conv_yield;  // n_grid x n_paths
};

// Advance one path over the whole grid.  Consumes exactly two normals per
// step in a fixed order, including degenerate (zero-volatility) steps, so
// draw alignment never depends on parameters.
void simulate_two_factor_path(const std::vector<TransitionCoef>& coef,
                              double x0, double d0, PathRng& rng,
                              double* spot_col, double* yield_col);

// Paths first_path, ..., first_path + n_paths - 1 of the stream.  Calling
// this twice with adjacent ranges concatenates to a single larger call.
CommodityPathSet simulate_two_factor(const CommodityParams& p, double r,
                                     const Eigen::VectorXd& grid, int n_paths,
                                     const RngStream& stream,
                                     std::int64_t first_path = 0);

// E[S_t] from the closed-form log-spot moments.
double expected_spot(const CommodityParams& p, double r, double t);

// (mean, variance) of ln S_t.
std::pair<double, double> log_spot_moments(const CommodityParams& p, double r,
                                           double t);

// E[S_t] / s0 on a grid; equals 1 at t = 0.
Eigen::ArrayXd mean_relative_spot_curve(const CommodityParams& p, double r,
                                        const Eigen::VectorXd& grid);

}  // namespace aqua
