#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aqua/commodity.hpp"

using namespace aqua;

namespace {

CommodityParams salmon_params() {
    CommodityParams p;
    p.s0 = 78.375;
    p.delta0 = 0.57;
    p.spot_vol = 0.23;
    p.yield_vol = 0.75;
    p.kappa = 2.6;
    p.alpha = 0.02;
    p.risk_premium = 0.2;
    p.rho = 0.9;
    return p;
}

CommodityParams soy_params() {
    CommodityParams p;
    p.s0 = 1.0;
    p.delta0 = 0.0;
    p.spot_vol = 1.0;
    p.yield_vol = 0.4;
    p.kappa = 1.2;
    p.alpha = 0.06;
    p.risk_premium = 0.14;
    p.rho = 0.44;
    return p;
}

constexpr double kRate = 0.0303;

// Independent check on E[S_T]: the futures price of the two-factor model in
// closed form.  Under the pricing measure the futures price equals the
// expected spot, and this expression shares no code with the moment-based
// path the library uses.
double futures_price(const CommodityParams& p, double r, double T) {
    const double ah = p.alpha - p.risk_premium / p.kappa;
    const double k = p.kappa, s1 = p.spot_vol, s2 = p.yield_vol, rho = p.rho;
    const double ekt = std::exp(-k * T);
    const double A = (r - ah + 0.5 * s2 * s2 / (k * k) - s1 * s2 * rho / k) * T +
                     0.25 * s2 * s2 * (1.0 - std::exp(-2.0 * k * T)) / (k * k * k) +
                     (ah * k + s1 * s2 * rho - s2 * s2 / k) * (1.0 - ekt) / (k * k);
    return p.s0 * std::exp(-p.delta0 * (1.0 - ekt) / k + A);
}

Eigen::VectorXd uniform_grid(double T, int n) {
    return Eigen::VectorXd::LinSpaced(n, 0.0, T);
}

}  // namespace

TEST_CASE("expected spot equals the closed-form futures price") {
    for (const auto& p : {salmon_params(), soy_params()}) {
        for (const double t : {0.1, 0.5, 1.0, 1.77, 2.0, 3.0}) {
            CHECK(expected_spot(p, kRate, t) ==
                  doctest::Approx(futures_price(p, kRate, t)).epsilon(1e-12));
        }
        CHECK(expected_spot(p, kRate, 0.0) == doctest::Approx(p.s0).epsilon(1e-14));
    }
}

TEST_CASE("expected spot matches high-precision reference values") {
    // Fixed points from a 30-digit evaluation of the futures formula.
    const auto sal = salmon_params();
    CHECK(expected_spot(sal, kRate, 0.5) ==
          doctest::Approx(68.134587490893588).epsilon(1e-13));
    CHECK(expected_spot(sal, kRate, 1.0) ==
          doctest::Approx(67.154550151167998).epsilon(1e-13));
    CHECK(expected_spot(sal, kRate, 3.0) ==
          doctest::Approx(75.701351695004399).epsilon(1e-13));
    const auto soy = soy_params();
    CHECK(expected_spot(soy, kRate, 1.0) ==
          doctest::Approx(1.0046205876960303).epsilon(1e-13));
    CHECK(expected_spot(soy, kRate, 3.0) ==
          doctest::Approx(0.99360616338288595).epsilon(1e-13));
}

TEST_CASE("one-step moments compose across a split step") {
    // The transition is exact, so moments over h must equal the two-stage
    // composition over h/2 + h/2 by the laws of total mean and variance.
    const auto p = salmon_params();
    const double x0 = std::log(p.s0), d0 = p.delta0, h = 0.37;

    const TwoFactorMoments full = transition_moments(p, kRate, x0, d0, h);
    const TwoFactorMoments first = transition_moments(p, kRate, x0, d0, 0.5 * h);

    // Affine propagation of the second stage: x2 = x1 + ax + bx d1 + ex,
    // d2 = ad + bd d1 + ed with (ex, ed) independent of stage one.
    const TransitionCoef c = transition_coef(p, kRate, 0.5 * h);
    const TwoFactorMoments stage =
        transition_moments(p, kRate, 0.0, 0.0, 0.5 * h);  // shock covariances
    const double var_ex = stage.var_log_spot, var_ed = stage.var_yield;
    const double cov_e = stage.cov;

    const double mean_x2 = first.mean_log_spot + c.ax + c.bx * first.mean_yield;
    const double mean_d2 = c.ad + c.bd * first.mean_yield;
    const double var_x2 = first.var_log_spot + c.bx * c.bx * first.var_yield +
                          2.0 * c.bx * first.cov + var_ex;
    const double var_d2 = c.bd * c.bd * first.var_yield + var_ed;
    const double cov_2 = c.bd * (first.cov + c.bx * first.var_yield) + cov_e;

    CHECK(mean_x2 == doctest::Approx(full.mean_log_spot).epsilon(1e-13));
    CHECK(mean_d2 == doctest::Approx(full.mean_yield).epsilon(1e-13));
    CHECK(var_x2 == doctest::Approx(full.var_log_spot).epsilon(1e-12));
    CHECK(var_d2 == doctest::Approx(full.var_yield).epsilon(1e-12));
    CHECK(cov_2 == doctest::Approx(full.cov).epsilon(1e-12));
}

TEST_CASE("zero volatility collapses paths onto the mean") {
    CommodityParams p = salmon_params();
    p.spot_vol = 0.0;
    p.yield_vol = 0.0;
    const Eigen::VectorXd grid = uniform_grid(3.0, 25);
    const CommodityPathSet set =
        simulate_two_factor(p, kRate, grid, 3, {1234, rng_stream::salmon});
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const auto [mx, vx] = log_spot_moments(p, kRate, grid[i]);
        CHECK(vx == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
        for (int j = 0; j < 3; ++j) {
            CHECK(set.spot(i, j) == doctest::Approx(std::exp(mx)).epsilon(1e-12));
        }
    }
}

TEST_CASE("Monte Carlo mean tracks the closed form") {
    const Eigen::VectorXd grid = uniform_grid(3.0, 31);
    const int n = 20000;
    for (const auto& p : {salmon_params(), soy_params()}) {
        const CommodityPathSet set =
            simulate_two_factor(p, kRate, grid, n, {777, rng_stream::salmon});
        for (const Eigen::Index i : {10L, 20L, 30L}) {
            const double t = grid[i];
            const auto [mx, vx] = log_spot_moments(p, kRate, t);
            const double target = expected_spot(p, kRate, t);
            const double mc = set.spot.row(i).mean();
            // SE of the mean of lognormals: sqrt((e^{v}-1)) * E[S] / sqrt(n).
            const double se = target * std::sqrt((std::exp(vx) - 1.0) / n);
            CHECK(std::fabs(mc - target) < 4.0 * se);
        }
    }
}

TEST_CASE("log-spot sample variance tracks the closed form") {
    const Eigen::VectorXd grid = uniform_grid(2.0, 21);
    const auto p = salmon_params();
    const int n = 20000;
    const CommodityPathSet set =
        simulate_two_factor(p, kRate, grid, n, {31415, rng_stream::salmon});
    const Eigen::ArrayXd logs = set.spot.row(20).log();
    const double mean = logs.mean();
    const double var = (logs - mean).square().sum() / (n - 1);
    const auto [mx, vx] = log_spot_moments(p, kRate, 2.0);
    CHECK(mean == doctest::Approx(mx).epsilon(4.0 * std::sqrt(vx / n) / std::fabs(mx)));
    CHECK(var == doctest::Approx(vx).epsilon(4.0 * std::sqrt(2.0 / n)));
}

TEST_CASE("path blocks concatenate bit-identically") {
    const Eigen::VectorXd grid = uniform_grid(1.0, 11);
    const auto p = soy_params();
    const RngStream stream{2718, rng_stream::training_block | rng_stream::soy};
    const CommodityPathSet whole = simulate_two_factor(p, kRate, grid, 64, stream);
    const CommodityPathSet lo = simulate_two_factor(p, kRate, grid, 40, stream, 0);
    const CommodityPathSet hi = simulate_two_factor(p, kRate, grid, 24, stream, 40);
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        for (int j = 0; j < 40; ++j) CHECK(whole.spot(i, j) == lo.spot(i, j));
        for (int j = 0; j < 24; ++j) {
            CHECK(whole.spot(i, 40 + j) == hi.spot(i, j));
            CHECK(whole.conv_yield(i, 40 + j) == hi.conv_yield(i, j));
        }
    }
}

TEST_CASE("draw order is fixed even for degenerate volatilities") {
    // A zero-volatility factor must still consume its normals, otherwise
    // draw alignment would depend on the parameters.
    const Eigen::VectorXd grid = uniform_grid(1.0, 5);
    CommodityParams p = salmon_params();
    PathRng a(5, 6, 7), b(5, 6, 7);
    std::vector<double> spot_a(5), yield_a(5), spot_b(5), yield_b(5);

    std::vector<TransitionCoef> coef;
    for (Eigen::Index i = 0; i + 1 < grid.size(); ++i)
        coef.push_back(transition_coef(p, kRate, grid[i + 1] - grid[i]));
    simulate_two_factor_path(coef, std::log(p.s0), p.delta0, a, spot_a.data(),
                             yield_a.data());
    const double next_a = a.uniform01();

    CommodityParams q = p;
    q.spot_vol = 0.0;
    q.yield_vol = 0.0;
    std::vector<TransitionCoef> coef_q;
    for (Eigen::Index i = 0; i + 1 < grid.size(); ++i)
        coef_q.push_back(transition_coef(q, kRate, grid[i + 1] - grid[i]));
    simulate_two_factor_path(coef_q, std::log(q.s0), q.delta0, b, spot_b.data(),
                             yield_b.data());
    const double next_b = b.uniform01();
    CHECK(next_a == next_b);  // both consumed 2 normals per step
}

TEST_CASE("mean relative spot curve matches the expectation ratio") {
    const auto p = soy_params();
    const Eigen::VectorXd grid = uniform_grid(3.0, 16);
    const Eigen::ArrayXd curve = mean_relative_spot_curve(p, kRate, grid);
    CHECK(curve[0] == 1.0);
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        CHECK(curve[i] ==
              doctest::Approx(expected_spot(p, kRate, grid[i]) / p.s0).epsilon(1e-12));
    }
}

TEST_CASE("grid and parameter validation") {
    Eigen::VectorXd bad1(3);
    bad1 << 0.0, 0.5, 0.5;  // not strictly increasing
    CHECK_THROWS(validate_grid(bad1));
    Eigen::VectorXd bad2(2);
    bad2 << 0.1, 0.5;  // does not start at zero
    CHECK_THROWS(validate_grid(bad2));
    Eigen::VectorXd good(3);
    good << 0.0, 0.5, 1.25;
    CHECK_NOTHROW(validate_grid(good));

    CommodityParams p = salmon_params();
    p.kappa = 0.0;
    CHECK_THROWS(p.validate());
    p = salmon_params();
    p.rho = 1.5;
    CHECK_THROWS(p.validate());
    p = salmon_params();
    p.s0 = -1.0;
    CHECK_THROWS(p.validate());
    p = salmon_params();
    p.spot_vol = -0.2;
    CHECK_THROWS(p.validate());
    CHECK_NOTHROW(salmon_params().validate());
}
