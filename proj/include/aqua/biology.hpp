#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "aqua/rng.hpp"

namespace aqua {

// Bertalanffy growth: w(t) = w_inf * (a - b * exp(-c t))^3.
struct GrowthParams {
    double a = 1.113;
    double b = 1.097;
    double c = 1.43;
    double w_inf = 6.0;  // asymptotic weight, kg

    void validate() const;
};

double bertalanffy_weight(double t, const GrowthParams& g);
double bertalanffy_weight_rate(double t, const GrowthParams& g);  // dw/dt
Eigen::ArrayXd bertalanffy_weight(const Eigen::ArrayXd& t, const GrowthParams& g);
Eigen::ArrayXd bertalanffy_weight_rate(const Eigen::ArrayXd& t, const GrowthParams& g);

// Constant-mortality benchmark: H(t) = h0 * exp(-m t).
double deterministic_host(double t, double h0, double m);

// Coupled host/parasite dynamics between treatments:
//   H' = -(mu + alpha P/H) H
//   P' = (lambda H/H0 - (b + mu) - alpha P/H) P
// A treatment fires at a grid point where P/H >= l(t): H scales by
// X ~ unif(x_low, 1), P scales by Y = y_floor + y_range * Beta(beta1, beta2),
// and the removal counter increments.
struct BioParams {
    double mu = 0.05;         // intrinsic host mortality
    double alpha = 0.1;       // parasite-driven host mortality per lpf unit
    double b = 0.05;          // intrinsic parasite mortality
    double lambda = 7.0143;   // parasite reproduction rate at full stocking
    double h0 = 10000.0;      // initial host count
    double lpf0 = 0.001;      // initial parasites per host
    double x_low = 0.995;     // worst-case host survival per treatment
    double y_floor = 0.1;     // treatment leaves at least this parasite fraction
    double y_range = 0.8;     // ... and at most y_floor + y_range
    double beta1 = 0.0829;    // treatment effectiveness shape parameters
    double beta2 = 0.0281;

    void validate() const;
};

// Piecewise-constant treatment threshold l(t); level i applies on
// [times[i], times[i+1]).  Default: constant 0.5 lice per fish.
struct ThresholdFn {
    std::vector<double> times{0.0};
    std::vector<double> levels{0.5};

    static ThresholdFn constant(double level) { return {{0.0}, {level}}; }
    double operator()(double t) const;
    void validate() const;
};

struct TreatmentEvent {
    double time = 0.0;
    double host_factor = 1.0;      // realized X
    double parasite_factor = 1.0;  // realized Y
};

// Time-major layout as in CommodityPathSet: row = grid point, column = path.
struct HostParasitePathSet {
    Eigen::VectorXd grid;
    Eigen::ArrayXXd host;      // n_grid x n_paths
    Eigen::ArrayXXd parasite;  // n_grid x n_paths
    Eigen::ArrayXXd removals;  // cumulative treatment count, integer-valued
    std::vector<std::vector<TreatmentEvent>> events;  // per path
    // Grid points where the ratio overshot twice the threshold before the
    // treatment fired; nonzero values mean the grid is too coarse.
    std::int64_t overshoots = 0;
};

// Single-path kernel.  Treatment draws come from a dedicated event stream:
// event k consumes uniforms (2k-1, 2k) of `event_rng`, so the dynamics stay
// deterministic between events and a path's k-th treatment sees the same
// randomness regardless of when it fires.  Outputs are written at stride 1.
void simulate_host_parasite_path(const BioParams& bp, const ThresholdFn& l,
                                 const Eigen::VectorXd& grid, PathRng& event_rng,
                                 double* host_col, double* parasite_col,
                                 double* removals_col,
                                 std::vector<TreatmentEvent>* events,
                                 std::int64_t* overshoots);

HostParasitePathSet simulate_host_parasite(const BioParams& bp, const ThresholdFn& l,
                                           const Eigen::VectorXd& grid, int n_paths,
                                           const RngStream& stream,
                                           std::int64_t first_path = 0);

// No-treatment ratio curve P_t/H_t on the grid (explicit Euler), with the
// reproduction rate passed explicitly; this is the model half of the
// reproduction-rate fit.
Eigen::ArrayXd deterministic_lice_ratio(const BioParams& bp, double lambda,
                                        const Eigen::VectorXd& grid);

// Cross-path means of the jump model: the deterministic counterpart used by
// the benchmark harvesting rule.
struct DeterministicCounterpart {
    Eigen::VectorXd grid;
    Eigen::ArrayXd mean_host;
    Eigen::ArrayXd mean_removals;
};

DeterministicCounterpart deterministic_counterpart(const HostParasitePathSet& paths);

// Pointwise biomass H_t * w(t); both curves must share a grid.
Eigen::ArrayXd biomass(const Eigen::ArrayXd& host, const Eigen::ArrayXd& weight);

}  // namespace aqua
