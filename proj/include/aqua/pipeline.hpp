#pragma once

#include <string>

#include "aqua/config.hpp"
#include "aqua/stopping.hpp"

namespace aqua {

// Cross-path biology curves for the deterministic benchmark.  The raw
// removal counts are retained so the mean treatment-cost fraction can be
// formed for any treatment rate without resimulating.
struct DetermCurves {
    Eigen::VectorXd grid;
    Eigen::ArrayXd mean_host;
    Eigen::ArrayXXd removals;  // n_grid x n_paths
    int n_paths = 0;

    Eigen::ArrayXd mean_treat_frac(double rate) const;
};

// Estimated from a dedicated path block (independent of training and
// evaluation paths); n_paths = 0 uses the training path count.
DetermCurves estimate_determ_curves(const FarmConfig& cfg, int n_paths = 0);

// Everything the payoff needs at the decision dates, one row per path.
// Simulation runs in blocks over the fine grid; only these snapshots are
// kept, and per-path substreams make the result independent of the block
// size.  Matrices are empty when a factor is not simulated (soy under
// deterministic feeding, biology when with_biology = false).
struct RawSnapshots {
    Eigen::VectorXd dates;
    std::vector<Eigen::Index> date_index;
    FeedingModel feeding = FeedingModel::stochastic;
    int n_paths = 0;

    Eigen::MatrixXd salmon_spot, salmon_yield;   // n_paths x n_dates
    Eigen::MatrixXd soy_spot, soy_yield;
    Eigen::MatrixXd host, parasite, removals;
    Eigen::MatrixXd cum_feed;         // feeding integral with the simulated host
    Eigen::MatrixXd cum_feed_determ;  // ... with the mean host curve
};

RawSnapshots simulate_snapshots(const FarmConfig& cfg, FeedingModel feeding,
                                bool with_biology, const DetermCurves& curves,
                                int n_paths, std::uint64_t stream_block);

// Payoff and regression state from snapshots.  Stochastic mortality prices
// the simulated biology path by path; deterministic mortality prices the
// mean curves (host, treatment fraction) against the same market paths, and
// its state carries market factors only.
ExercisePayoffMatrix assemble_payoff(const RawSnapshots& snaps,
                                     const DetermCurves& curves,
                                     const FarmConfig& cfg, MortalityModel mortality,
                                     double treatment_rate);

struct ScenarioOutcome {
    FeedingModel feeding = FeedingModel::stochastic;
    double treatment_rate = 0.0;
    StoppingRule rule_stoch;
    StoppingRule rule_determ;
    ComparisonReport report;
};

// Simulates the three worlds for one feeding mode (two independent training
// blocks and the evaluation block), then answers per-treatment-rate
// questions by reassembling payoffs, retraining and recomparing; the
// expensive path simulation happens once.
class ScenarioEngine {
  public:
    ScenarioEngine(const FarmConfig& cfg, FeedingModel feeding);

    ScenarioOutcome run(double treatment_rate) const;
    ScenarioOutcome run() const;  // the configured rate

    const DetermCurves& curves() const { return curves_; }
    const RawSnapshots& eval_snapshots() const { return eval_; }

  private:
    FarmConfig cfg_;
    FeedingModel feeding_;
    DetermCurves curves_;
    RawSnapshots train_stoch_;
    RawSnapshots train_determ_;
    RawSnapshots eval_;
};

// Weekly lice export in the public-data column format, generated from the
// host-parasite model with per-farm variation, observation noise, and the
// warts the selector must handle (other regions, medicinal treatments,
// reporting gaps).
void write_synthetic_lice_csv(const std::string& path, const FarmConfig& cfg,
                              int n_farms, std::uint64_t seed);

}  // namespace aqua
