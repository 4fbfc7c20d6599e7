#include "aqua/biology.hpp"

#include <cmath>
#include <stdexcept>

#include "aqua/commodity.hpp"  // validate_grid
#include "aqua/special.hpp"

namespace aqua {

void GrowthParams::validate() const {
    if (!(a > 0.0) || !(b >= 0.0) || !(c > 0.0) || !(w_inf > 0.0))
        throw std::invalid_argument("GrowthParams: need a > 0, b >= 0, c > 0, w_inf > 0");
    if (a < b)
        throw std::invalid_argument("GrowthParams: a < b gives negative weight at t = 0");
}

double bertalanffy_weight(double t, const GrowthParams& g) {
    const double base = g.a - g.b * std::exp(-g.c * t);
    return g.w_inf * base * base * base;
}

double bertalanffy_weight_rate(double t, const GrowthParams& g) {
    const double e = g.b * std::exp(-g.c * t);
    const double base = g.a - e;
    return g.w_inf * 3.0 * base * base * g.c * e;
}

Eigen::ArrayXd bertalanffy_weight(const Eigen::ArrayXd& t, const GrowthParams& g) {
    const Eigen::ArrayXd base = g.a - g.b * (-g.c * t).exp();
    return g.w_inf * base.cube();
}

Eigen::ArrayXd bertalanffy_weight_rate(const Eigen::ArrayXd& t, const GrowthParams& g) {
    const Eigen::ArrayXd e = g.b * (-g.c * t).exp();
    const Eigen::ArrayXd base = g.a - e;
    return g.w_inf * 3.0 * g.c * base.square() * e;
}

double deterministic_host(double t, double h0, double m) {
    if (!(h0 > 0.0)) throw std::invalid_argument("deterministic_host: h0 must be > 0");
    if (!(t >= 0.0)) throw std::invalid_argument("deterministic_host: t must be >= 0");
    return h0 * std::exp(-m * t);
}

void BioParams::validate() const {
    const auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(mu) || bad(alpha) || bad(b) || bad(lambda) || bad(h0) || bad(lpf0) ||
        bad(x_low) || bad(y_floor) || bad(y_range) || bad(beta1) || bad(beta2))
        throw std::invalid_argument("BioParams: non-finite field");
    if (mu < 0.0 || alpha < 0.0 || b < 0.0 || lambda < 0.0)
        throw std::invalid_argument("BioParams: rates must be >= 0");
    if (!(h0 > 0.0)) throw std::invalid_argument("BioParams: h0 must be > 0");
    if (!(lpf0 > 0.0)) throw std::invalid_argument("BioParams: lpf0 must be > 0");
    if (!(x_low > 0.0 && x_low <= 1.0))
        throw std::invalid_argument("BioParams: x_low must lie in (0,1]");
    if (y_floor < 0.0 || y_range < 0.0 || y_floor + y_range > 1.0)
        throw std::invalid_argument("BioParams: treatment factor must stay in [0,1]");
    if (!(beta1 > 0.0) || !(beta2 > 0.0))
        throw std::invalid_argument("BioParams: beta shapes must be > 0");
}

double ThresholdFn::operator()(double t) const {
    std::size_t i = 0;
    while (i + 1 < times.size() && t >= times[i + 1]) ++i;
    return levels[i];
}

void ThresholdFn::validate() const {
    if (times.empty() || times.size() != levels.size())
        throw std::invalid_argument("ThresholdFn: times/levels size mismatch");
    if (times[0] != 0.0) throw std::invalid_argument("ThresholdFn: must start at t = 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("ThresholdFn: times must increase");
    for (double l : levels)
        if (!(l > 0.0) || !std::isfinite(l))
            throw std::invalid_argument("ThresholdFn: levels must be > 0");
}

void simulate_host_parasite_path(const BioParams& bp, const ThresholdFn& l,
                                 const Eigen::VectorXd& grid, PathRng& event_rng,
                                 double* host_col, double* parasite_col,
                                 double* removals_col,
                                 std::vector<TreatmentEvent>* events,
                                 std::int64_t* overshoots) {
    double h = bp.h0;
    double p = bp.lpf0 * bp.h0;
    double n = 0.0;
    host_col[0] = h;
    parasite_col[0] = p;
    removals_col[0] = n;

    const Eigen::Index n_grid = grid.size();
    for (Eigen::Index i = 1; i < n_grid; ++i) {
        const double dt = grid[i] - grid[i - 1];
        const double ratio = p / h;
        const double dh = -(bp.mu + bp.alpha * ratio) * h;
        const double dp = (bp.lambda * h / bp.h0 - (bp.b + bp.mu) - bp.alpha * ratio) * p;
        h += dt * dh;
        p += dt * dp;
        if (!(h > 0.0) || p < 0.0)
            throw std::runtime_error(
                "simulate_host_parasite: Euler step left the positive cone; "
                "refine the grid or check the rates");

        const double t = grid[i];
        const double level = l(t);
        if (p / h >= level) {
            if (overshoots && p / h >= 2.0 * level) ++*overshoots;
            const double ux = event_rng.uniform01();
            const double uy = event_rng.uniform01();
            const double x = bp.x_low + (1.0 - bp.x_low) * ux;
            const double y =
                bp.y_floor + bp.y_range * beta_quantile(bp.beta1, bp.beta2, uy);
            if (events) events->push_back({t, x, y});
            h *= x;
            p *= y;
            n += 1.0;
        }
        host_col[i] = h;
        parasite_col[i] = p;
        removals_col[i] = n;
    }
}

HostParasitePathSet simulate_host_parasite(const BioParams& bp, const ThresholdFn& l,
                                           const Eigen::VectorXd& grid, int n_paths,
                                           const RngStream& stream,
                                           std::int64_t first_path) {
    bp.validate();
    l.validate();
    validate_grid(grid);
    if (n_paths < 1) throw std::invalid_argument("simulate_host_parasite: n_paths < 1");
    if (first_path < 0)
        throw std::invalid_argument("simulate_host_parasite: first_path < 0");
    if (!(bp.lpf0 < l(0.0)))
        throw std::invalid_argument(
            "simulate_host_parasite: initial lice per fish already at the threshold");

    const Eigen::Index n_grid = grid.size();
    HostParasitePathSet out;
    out.grid = grid;
    out.host.resize(n_grid, n_paths);
    out.parasite.resize(n_grid, n_paths);
    out.removals.resize(n_grid, n_paths);
    out.events.resize(static_cast<std::size_t>(n_paths));
    for (int j = 0; j < n_paths; ++j) {
        PathRng rng = stream.path(static_cast<std::uint64_t>(first_path + j));
        simulate_host_parasite_path(bp, l, grid, rng, out.host.col(j).data(),
                                    out.parasite.col(j).data(),
                                    out.removals.col(j).data(),
                                    &out.events[static_cast<std::size_t>(j)],
                                    &out.overshoots);
    }
    return out;
}

Eigen::ArrayXd deterministic_lice_ratio(const BioParams& bp, double lambda,
                                        const Eigen::VectorXd& grid) {
    bp.validate();
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("deterministic_lice_ratio: lambda must be >= 0");
    validate_grid(grid);

    Eigen::ArrayXd out(grid.size());
    double h = bp.h0;
    double p = bp.lpf0 * bp.h0;
    out[0] = p / h;
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        const double dt = grid[i] - grid[i - 1];
        const double ratio = p / h;
        const double dh = -(bp.mu + bp.alpha * ratio) * h;
        const double dp = (lambda * h / bp.h0 - (bp.b + bp.mu) - bp.alpha * ratio) * p;
        h += dt * dh;
        p += dt * dp;
        if (!(h > 0.0) || p < 0.0)
            throw std::runtime_error("deterministic_lice_ratio: step left the positive cone");
        out[i] = p / h;
    }
    return out;
}

DeterministicCounterpart deterministic_counterpart(const HostParasitePathSet& paths) {
    if (paths.host.size() == 0)
        throw std::invalid_argument("deterministic_counterpart: empty path set");
    DeterministicCounterpart out;
    out.grid = paths.grid;
    out.mean_host = paths.host.rowwise().mean();
    out.mean_removals = paths.removals.rowwise().mean();
    return out;
}

Eigen::ArrayXd biomass(const Eigen::ArrayXd& host, const Eigen::ArrayXd& weight) {
    if (host.size() != weight.size())
        throw std::invalid_argument("biomass: host and weight grids differ");
    return host * weight;
}

}  // namespace aqua
