#include "aqua/commodity.hpp"

#include <cmath>
#include <stdexcept>

namespace aqua {

void CommodityParams::validate() const {
    const auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(s0) || bad(delta0) || bad(spot_vol) || bad(yield_vol) || bad(kappa) ||
        bad(alpha) || bad(risk_premium) || bad(rho))
        throw std::invalid_argument("CommodityParams: non-finite field");
    if (!(s0 > 0.0)) throw std::invalid_argument("CommodityParams: s0 must be > 0");
    if (spot_vol < 0.0 || yield_vol < 0.0)
        throw std::invalid_argument("CommodityParams: volatilities must be >= 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("CommodityParams: kappa must be > 0");
    if (std::fabs(rho) > 1.0)
        throw std::invalid_argument("CommodityParams: |rho| must be <= 1");
}

TwoFactorMoments transition_moments(const CommodityParams& p, double r, double x0,
                                    double d0, double h) {
    if (!(h >= 0.0) || !std::isfinite(h))
        throw std::invalid_argument("transition_moments: h must be >= 0");
    const double k = p.kappa;
    const double theta = p.risk_neutral_mean();
    const double om1 = -std::expm1(-k * h);       // 1 - e^{-kh}
    const double om2 = -std::expm1(-2.0 * k * h); // 1 - e^{-2kh}
    const double s1 = p.spot_vol, s2 = p.yield_vol, rho = p.rho;

    TwoFactorMoments m;
    m.mean_yield = theta + (d0 - theta) * (1.0 - om1);
    m.var_yield = s2 * s2 * om2 / (2.0 * k);
    m.mean_log_spot =
        x0 + (r - 0.5 * s1 * s1 - theta) * h - (d0 - theta) * om1 / k;
    m.var_log_spot = s1 * s1 * h -
                     2.0 * rho * s1 * s2 / k * (h - om1 / k) +
                     s2 * s2 / (k * k) * (h - 2.0 * om1 / k + om2 / (2.0 * k));
    m.cov = rho * s1 * s2 * om1 / k - s2 * s2 / k * (om1 / k - om2 / (2.0 * k));
    return m;
}

TransitionCoef transition_coef(const CommodityParams& p, double r, double h) {
    const TwoFactorMoments m0 = transition_moments(p, r, 0.0, 0.0, h);
    const TwoFactorMoments m1 = transition_moments(p, r, 0.0, 1.0, h);

    TransitionCoef c;
    c.ax = m0.mean_log_spot;
    c.bx = m1.mean_log_spot - m0.mean_log_spot;
    c.ad = m0.mean_yield;
    c.bd = m1.mean_yield - m0.mean_yield;
    c.sd_x = std::sqrt(std::max(m0.var_log_spot, 0.0));
    if (c.sd_x > 0.0) {
        c.l21 = m0.cov / c.sd_x;
        c.l22 = std::sqrt(std::max(m0.var_yield - c.l21 * c.l21, 0.0));
    } else {
        c.l21 = 0.0;
        c.l22 = std::sqrt(std::max(m0.var_yield, 0.0));
    }
    return c;
}

void validate_grid(const Eigen::VectorXd& grid) {
    if (grid.size() < 1) throw std::invalid_argument("grid: empty");
    if (!grid.allFinite()) throw std::invalid_argument("grid: non-finite entry");
    if (grid[0] != 0.0) throw std::invalid_argument("grid: must start at 0");
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("grid: must be strictly increasing");
}

void simulate_two_factor_path(const std::vector<TransitionCoef>& coef,
                              double x0, double d0, PathRng& rng,
                              double* spot_col, double* yield_col) {
    double x = x0, d = d0;
    spot_col[0] = std::exp(x);
    yield_col[0] = d;
    for (std::size_t i = 0; i < coef.size(); ++i) {
        const TransitionCoef& c = coef[i];
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        const double xn = x + c.ax + c.bx * d + c.sd_x * z1;
        const double dn = c.ad + c.bd * d + c.l21 * z1 + c.l22 * z2;
        x = xn;
        d = dn;
        spot_col[i + 1] = std::exp(x);
        yield_col[i + 1] = d;
    }
}

CommodityPathSet simulate_two_factor(const CommodityParams& p, double r,
                                     const Eigen::VectorXd& grid, int n_paths,
                                     const RngStream& stream,
                                     std::int64_t first_path) {
    p.validate();
    validate_grid(grid);
    if (n_paths < 1) throw std::invalid_argument("simulate_two_factor: n_paths < 1");
    if (first_path < 0)
        throw std::invalid_argument("simulate_two_factor: first_path < 0");

    const Eigen::Index n_grid = grid.size();
    std::vector<TransitionCoef> coef;
    coef.reserve(static_cast<std::size_t>(n_grid - 1));
    for (Eigen::Index i = 1; i < n_grid; ++i)
        coef.push_back(transition_coef(p, r, grid[i] - grid[i - 1]));

    CommodityPathSet out;
    out.grid = grid;
    out.spot.resize(n_grid, n_paths);
    out.conv_yield.resize(n_grid, n_paths);
    const double x0 = std::log(p.s0);
    for (int j = 0; j < n_paths; ++j) {
        PathRng rng = stream.path(static_cast<std::uint64_t>(first_path + j));
        simulate_two_factor_path(coef, x0, p.delta0, rng, out.spot.col(j).data(),
                                 out.conv_yield.col(j).data());
    }
    return out;
}

std::pair<double, double> log_spot_moments(const CommodityParams& p, double r,
                                           double t) {
    p.validate();
    if (!(t >= 0.0)) throw std::invalid_argument("log_spot_moments: t must be >= 0");
    const TwoFactorMoments m =
        transition_moments(p, r, std::log(p.s0), p.delta0, t);
    return {m.mean_log_spot, m.var_log_spot};
}

double expected_spot(const CommodityParams& p, double r, double t) {
    const auto [m, v] = log_spot_moments(p, r, t);
    return std::exp(m + 0.5 * v);
}

Eigen::ArrayXd mean_relative_spot_curve(const CommodityParams& p, double r,
                                        const Eigen::VectorXd& grid) {
    validate_grid(grid);
    Eigen::ArrayXd out(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        out[i] = expected_spot(p, r, grid[i]) / p.s0;
    return out;
}

}  // namespace aqua
