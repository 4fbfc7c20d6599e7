#include "aqua/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aqua/commodity.hpp"  // validate_grid
#include "aqua/optim.hpp"

namespace aqua {

Eigen::VectorXd euler_grid(double horizon, int n_dates) {
    if (!(horizon > 0.0)) throw std::invalid_argument("euler_grid: horizon must be > 0");
    if (n_dates < 1) throw std::invalid_argument("euler_grid: n_dates must be >= 1");
    const int n = 10 * n_dates;
    const double dt = horizon / (n - 1);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = i * dt;
    g[n - 1] = horizon;  // exact right endpoint
    return g;
}

namespace {

Eigen::VectorXd extend_grid(const Eigen::VectorXd& grid, double t_max) {
    if (grid[grid.size() - 1] >= t_max) return grid;
    const double dt = grid[1] - grid[0];
    const int extra =
        static_cast<int>(std::ceil((t_max - grid[grid.size() - 1]) / dt));
    Eigen::VectorXd g(grid.size() + extra);
    g.head(grid.size()) = grid;
    for (int i = 0; i < extra; ++i)
        g[grid.size() + i] = grid[grid.size() - 1] + (i + 1) * dt;
    return g;
}

double interp(const Eigen::VectorXd& x, const Eigen::ArrayXd& y, double t) {
    if (t <= x[0]) return y[0];
    const Eigen::Index n = x.size();
    if (t >= x[n - 1]) return y[n - 1];
    Eigen::Index lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const Eigen::Index mid = (lo + hi) / 2;
        if (x[mid] <= t)
            lo = mid;
        else
            hi = mid;
    }
    const double w = (t - x[lo]) / (x[hi] - x[lo]);
    return (1.0 - w) * y[lo] + w * y[hi];
}

}  // namespace

LambdaFit fit_lambda(const std::vector<GreenSegment>& segments, const BioParams& bp,
                     const Eigen::VectorXd& grid, double lambda_lo,
                     double lambda_hi) {
    bp.validate();
    validate_grid(grid);
    if (!(lambda_lo > 0.0) || !(lambda_hi > lambda_lo))
        throw std::invalid_argument("fit_lambda: need 0 < lambda_lo < lambda_hi");
    if (segments.empty()) throw std::invalid_argument("fit_lambda: no segments");

    double t_max = 0.0;
    int n_points = 0;
    for (const GreenSegment& s : segments) {
        if (s.times.size() != s.lpf.size())
            throw std::invalid_argument("fit_lambda: malformed segment");
        for (std::size_t i = 0; i < s.times.size(); ++i) {
            if (!(s.times[i] >= 0.0) || !(s.lpf[i] >= 0.0))
                throw std::invalid_argument("fit_lambda: negative time or lpf");
            t_max = std::max(t_max, s.times[i]);
            ++n_points;
        }
    }
    if (n_points == 0) throw std::invalid_argument("fit_lambda: no observations");

    const Eigen::VectorXd g = extend_grid(grid, t_max);
    int evals = 0;
    const auto sse = [&](double lambda) {
        ++evals;
        const Eigen::ArrayXd curve = deterministic_lice_ratio(bp, lambda, g);
        double acc = 0.0;
        for (const GreenSegment& s : segments)
            for (std::size_t i = 0; i < s.times.size(); ++i) {
                const double rsd = s.lpf[i] - interp(g, curve, s.times[i]);
                acc += rsd * rsd;
            }
        return acc;
    };

    // Coarse scan to bracket the minimum, then Brent inside the bracket.
    constexpr int n_scan = 64;
    double best = lambda_lo, best_f = sse(lambda_lo);
    std::vector<double> xs(n_scan), fs(n_scan);
    for (int i = 0; i < n_scan; ++i) {
        // log-spaced scan: the response to lambda is exponential
        const double x = lambda_lo * std::pow(lambda_hi / lambda_lo,
                                              static_cast<double>(i) / (n_scan - 1));
        xs[static_cast<std::size_t>(i)] = x;
        const double f = sse(x);
        fs[static_cast<std::size_t>(i)] = f;
        if (f < best_f) {
            best_f = f;
            best = x;
        }
    }
    double lo = lambda_lo, hi = lambda_hi;
    for (int i = 0; i < n_scan; ++i) {
        if (xs[static_cast<std::size_t>(i)] == best) {
            lo = xs[static_cast<std::size_t>(std::max(0, i - 1))];
            hi = xs[static_cast<std::size_t>(std::min(n_scan - 1, i + 1))];
            break;
        }
    }
    const ScalarMinResult r = brent_minimize(sse, lo, hi, 1e-10, 200);

    LambdaFit fit;
    fit.lambda = (r.f <= best_f) ? r.x : best;
    fit.sse = std::min(r.f, best_f);
    fit.n_points = n_points;
    fit.n_segments = static_cast<int>(segments.size());
    fit.evals = evals;
    fit.converged = r.converged;
    return fit;
}

std::pair<double, double> removal_moments(const BioParams& bp,
                                          const ThresholdFn& threshold,
                                          const Eigen::VectorXd& grid, int n_paths,
                                          double t, const RngStream& stream) {
    validate_grid(grid);
    if (n_paths < 2) throw std::invalid_argument("removal_moments: need >= 2 paths");
    Eigen::Index row = 0;
    double best = std::fabs(grid[0] - t);
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        const double d = std::fabs(grid[i] - t);
        if (d < best) {
            best = d;
            row = i;
        }
    }
    const HostParasitePathSet paths =
        simulate_host_parasite(bp, threshold, grid, n_paths, stream);
    const Eigen::ArrayXd counts = paths.removals.row(row).transpose();
    const double m = counts.mean();
    const double var =
        (counts - m).square().sum() / static_cast<double>(n_paths - 1);
    return {m, std::sqrt(var)};
}

BetaFit fit_beta(const RemovalDistribution& target, const BioParams& bp,
                 const ThresholdFn& threshold, const Eigen::VectorXd& grid,
                 int n_paths, double zeta, const RngStream& stream,
                 double beta_lo, double beta_hi) {
    bp.validate();
    threshold.validate();
    validate_grid(grid);
    if (!(zeta > 0.0)) throw std::invalid_argument("fit_beta: zeta must be > 0");
    if (n_paths < 2) throw std::invalid_argument("fit_beta: need >= 2 paths");
    if (!(beta_lo > 0.0) || !(beta_hi > beta_lo))
        throw std::invalid_argument("fit_beta: need 0 < beta_lo < beta_hi");
    if (target.counts.empty())
        throw std::invalid_argument("fit_beta: empty target distribution");

    const auto objective = [&](const Eigen::VectorXd& u) {
        BioParams b = bp;
        b.beta1 = std::exp(u[0]);
        b.beta2 = std::exp(u[1]);
        const auto [m, s] =
            removal_moments(b, threshold, grid, n_paths, target.t, stream);
        return std::pow(std::fabs(m - target.mean), zeta) +
               std::pow(std::fabs(s - target.stddev), zeta);
    };

    Eigen::VectorXd x0(2), step(2), lo(2), hi(2);
    x0 << std::log(0.1), std::log(0.1);
    step << 1.0, 1.0;
    lo << std::log(beta_lo), std::log(beta_lo);
    hi << std::log(beta_hi), std::log(beta_hi);
    const SimplexMinResult r = nelder_mead(objective, x0, step, lo, hi, 1e-9, 300);

    BetaFit fit;
    fit.beta1 = std::exp(r.x[0]);
    fit.beta2 = std::exp(r.x[1]);
    fit.objective = r.f;
    fit.evals = r.evals;
    fit.converged = r.converged;
    constexpr double edge = 1e-9;
    fit.at_bound = (r.x[0] - lo[0] < edge) || (hi[0] - r.x[0] < edge) ||
                   (r.x[1] - lo[1] < edge) || (hi[1] - r.x[1] < edge);
    BioParams b = bp;
    b.beta1 = fit.beta1;
    b.beta2 = fit.beta2;
    const auto [m, s] = removal_moments(b, threshold, grid, n_paths, target.t, stream);
    fit.model_mean = m;
    fit.model_stddev = s;
    return fit;
}

}  // namespace aqua
