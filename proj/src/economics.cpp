#include "aqua/economics.hpp"

#include <cmath>
#include <stdexcept>

namespace aqua {

void CostParams::validate() const {
    const auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
    if (bad(spot_ref) || bad(production) || bad(harvest) || bad(feed_base) ||
        bad(setup) || bad(feed_conversion) || bad(treatment_rate))
        throw std::invalid_argument("CostParams: fields must be finite and >= 0");
    if (!(spot_ref > 0.0))
        throw std::invalid_argument("CostParams: spot_ref must be > 0");
    if (!(feed_conversion > 0.0))
        throw std::invalid_argument("CostParams: feed_conversion must be > 0");
}

CostParams CostParams::scaled_from(double spot_ref_price) {
    if (!(spot_ref_price > 0.0))
        throw std::invalid_argument("CostParams: reference price must be > 0");
    CostParams cp;
    cp.spot_ref = spot_ref_price;
    cp.production = 0.5 * spot_ref_price;
    cp.harvest = 0.1 * cp.production;
    cp.feed_base = 0.25 * cp.production;
    cp.setup = 0.3 * cp.production;
    return cp;
}

double adjusted_initial_spot(const CostParams& cp) {
    cp.validate();
    const double s = cp.spot_ref - cp.production + cp.harvest + cp.feed_base + cp.setup;
    if (!(s > 0.0))
        throw std::invalid_argument("adjusted_initial_spot: adjustment is not positive");
    return s;
}

double treatment_cost_fraction(double removals, double rate) {
    if (removals < 0.0 || rate < 0.0)
        throw std::invalid_argument("treatment_cost_fraction: negative input");
    return std::min(1.0, rate * removals);
}

Eigen::ArrayXd treatment_cost_fraction(const Eigen::ArrayXd& removals, double rate) {
    if (rate < 0.0 || (removals < 0.0).any())
        throw std::invalid_argument("treatment_cost_fraction: negative input");
    return (rate * removals).min(1.0);
}

Eigen::ArrayXXd treatment_cost_fraction(const Eigen::ArrayXXd& removals, double rate) {
    if (rate < 0.0 || (removals < 0.0).any())
        throw std::invalid_argument("treatment_cost_fraction: negative input");
    return (rate * removals).min(1.0);
}

namespace {

void check_relative_price_start(double first) {
    if (std::fabs(first - 1.0) > 1e-9)
        throw std::invalid_argument("feeding_cost_curve: relative price must start at 1");
}

}  // namespace

Eigen::ArrayXd feeding_cost_curve(const Eigen::ArrayXd& relative_price,
                                  double feed_base) {
    if (!(feed_base >= 0.0))
        throw std::invalid_argument("feeding_cost_curve: feed_base must be >= 0");
    if (relative_price.size() == 0 || (relative_price <= 0.0).any())
        throw std::invalid_argument("feeding_cost_curve: relative prices must be > 0");
    check_relative_price_start(relative_price[0]);
    return feed_base * relative_price;
}

Eigen::ArrayXXd feeding_cost_curve(const Eigen::ArrayXXd& relative_price,
                                   double feed_base) {
    if (!(feed_base >= 0.0))
        throw std::invalid_argument("feeding_cost_curve: feed_base must be >= 0");
    if (relative_price.size() == 0 || (relative_price <= 0.0).any())
        throw std::invalid_argument("feeding_cost_curve: relative prices must be > 0");
    for (Eigen::Index j = 0; j < relative_price.cols(); ++j)
        check_relative_price_start(relative_price(0, j));
    return feed_base * relative_price;
}

Eigen::ArrayXXd cumulative_feeding(const Eigen::VectorXd& grid,
                                   const Eigen::ArrayXXd& feed_cost,
                                   const Eigen::ArrayXXd& host,
                                   const GrowthParams& g, double feed_conversion,
                                   double r) {
    validate_grid(grid);
    g.validate();
    if (!(feed_conversion > 0.0))
        throw std::invalid_argument("cumulative_feeding: feed_conversion must be > 0");
    const Eigen::Index n = grid.size();
    if (feed_cost.rows() != n || host.rows() != n)
        throw std::invalid_argument("cumulative_feeding: row count must match grid");
    const Eigen::Index nf = feed_cost.cols(), nh = host.cols();
    if (nf != nh && nf != 1 && nh != 1)
        throw std::invalid_argument("cumulative_feeding: column counts incompatible");
    const Eigen::Index n_paths = std::max(nf, nh);

    // Discounted instantaneous cost, then a running trapezoid sum.
    Eigen::ArrayXd weight_factor(n);
    for (Eigen::Index i = 0; i < n; ++i)
        weight_factor[i] = std::exp(-r * grid[i]) * feed_conversion *
                           bertalanffy_weight_rate(grid[i], g);

    Eigen::ArrayXXd out(n, n_paths);
    for (Eigen::Index j = 0; j < n_paths; ++j) {
        const Eigen::Index jf = (nf == 1) ? 0 : j;
        const Eigen::Index jh = (nh == 1) ? 0 : j;
        double acc = 0.0;
        double prev = weight_factor[0] * feed_cost(0, jf) * host(0, jh);
        out(0, j) = 0.0;
        for (Eigen::Index i = 1; i < n; ++i) {
            const double cur = weight_factor[i] * feed_cost(i, jf) * host(i, jh);
            acc += 0.5 * (prev + cur) * (grid[i] - grid[i - 1]);
            out(i, j) = acc;
            prev = cur;
        }
    }
    return out;
}

Eigen::ArrayXd cumulative_feeding(const Eigen::VectorXd& grid,
                                  const Eigen::ArrayXd& feed_cost,
                                  const Eigen::ArrayXd& host,
                                  const GrowthParams& g, double feed_conversion,
                                  double r) {
    const Eigen::ArrayXXd f = feed_cost;
    const Eigen::ArrayXXd h = host;
    return cumulative_feeding(grid, f, h, g, feed_conversion, r).col(0);
}

std::vector<Eigen::Index> locate_dates(const Eigen::VectorXd& grid,
                                       const Eigen::VectorXd& dates, double tol) {
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<std::size_t>(dates.size()));
    Eigen::Index i = 0;
    for (Eigen::Index k = 0; k < dates.size(); ++k) {
        while (i < grid.size() && grid[i] < dates[k] - tol) ++i;
        if (i >= grid.size() || std::fabs(grid[i] - dates[k]) > tol)
            throw std::invalid_argument("locate_dates: date is not a grid point");
        idx.push_back(i);
    }
    return idx;
}

ExercisePayoffMatrix exercise_payoff(const CommodityPathSet& salmon,
                                     const CommodityPathSet* soy,
                                     const Eigen::ArrayXXd& host,
                                     const Eigen::ArrayXXd* parasite,
                                     const Eigen::ArrayXXd& treat_frac,
                                     const Eigen::ArrayXXd& cum_feed,
                                     const GrowthParams& g, const CostParams& cp,
                                     double r, const Eigen::VectorXd& exercise_dates,
                                     const StateSpec& spec) {
    g.validate();
    cp.validate();
    validate_grid(salmon.grid);
    if (exercise_dates.size() == 0)
        throw std::invalid_argument("exercise_payoff: no exercise dates");
    for (Eigen::Index k = 1; k < exercise_dates.size(); ++k)
        if (!(exercise_dates[k] > exercise_dates[k - 1]))
            throw std::invalid_argument("exercise_payoff: dates must increase");
    if (!(exercise_dates[0] > 0.0))
        throw std::invalid_argument("exercise_payoff: dates must be > 0");

    const Eigen::Index n_grid = salmon.grid.size();
    const Eigen::Index n_paths = salmon.spot.cols();
    const auto expect_shape = [&](const Eigen::ArrayXXd& a, const char* what,
                                  bool allow_one_col) {
        if (a.rows() != n_grid ||
            (a.cols() != n_paths && !(allow_one_col && a.cols() == 1)))
            throw std::invalid_argument(std::string("exercise_payoff: bad shape for ") +
                                        what);
    };
    expect_shape(host, "host", true);
    expect_shape(treat_frac, "treat_frac", true);
    expect_shape(cum_feed, "cum_feed", true);
    if (spec.feed_factors) {
        if (!soy) throw std::invalid_argument("exercise_payoff: soy paths required");
        if (soy->spot.rows() != n_grid || soy->spot.cols() != n_paths)
            throw std::invalid_argument("exercise_payoff: bad shape for soy");
    }
    if (spec.biology) {
        if (!parasite)
            throw std::invalid_argument("exercise_payoff: parasite paths required");
        expect_shape(*parasite, "parasite", true);
    }

    ExercisePayoffMatrix out;
    out.dates = exercise_dates;
    out.date_index = locate_dates(salmon.grid, exercise_dates);
    out.spec = spec;
    const Eigen::Index n_dates = exercise_dates.size();
    out.payoff.resize(n_paths, n_dates);
    out.state.reserve(static_cast<std::size_t>(n_dates));

    const auto bcast = [](const Eigen::ArrayXXd& a, Eigen::Index i, Eigen::Index j) {
        return a(i, a.cols() == 1 ? 0 : j);
    };

    for (Eigen::Index k = 0; k < n_dates; ++k) {
        const Eigen::Index i = out.date_index[k];
        const double t = salmon.grid[i];
        const double disc = std::exp(-r * t);
        const double w = bertalanffy_weight(t, g);
        Eigen::MatrixXd st(n_paths, spec.dim());
        for (Eigen::Index j = 0; j < n_paths; ++j) {
            const double s1 = salmon.spot(i, j);
            const double b = bcast(host, i, j) * w;
            const double ct = bcast(treat_frac, i, j);
            const double cf = bcast(cum_feed, i, j);
            out.payoff(j, k) = disc * ((1.0 - ct) * s1 * b - cp.harvest * b) - cf;
            int c = 0;
            st(j, c++) = s1;
            st(j, c++) = salmon.conv_yield(i, j);
            if (spec.feed_factors) {
                st(j, c++) = soy->spot(i, j);
                st(j, c++) = soy->conv_yield(i, j);
            }
            if (spec.biology) {
                st(j, c++) = bcast(host, i, j);
                st(j, c++) = bcast(*parasite, i, j);
            }
        }
        out.state.push_back(std::move(st));
    }
    return out;
}

}  // namespace aqua
