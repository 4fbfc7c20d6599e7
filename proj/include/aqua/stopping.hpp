#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "aqua/economics.hpp"
#include "aqua/rng.hpp"

namespace aqua {

enum class MortalityModel { stochastic, deterministic };
enum class FeedingModel { stochastic, deterministic };

struct SolverConfig {
    double svd_threshold = 1e-8;  // relative singular-value cutoff in the solve
    double ridge = 0.0;           // optional Tikhonov strength; 0 = plain SVD
    bool payoff_feature = true;   // append the standardized payoff to the basis

    void validate() const;
};

// Regression data for one exercise date.  Raw inputs (state columns then
// payoff) are standardized with the training moments; zero-variance columns
// keep scale 1.  The basis is [1, z, {z_i z_j, i <= j}, payoff_z].
struct DateRule {
    Eigen::VectorXd mean;   // d (+1 with payoff feature)
    Eigen::VectorXd scale;
    Eigen::VectorXd coef;   // empty = always stop (the final date)
};

struct StoppingRule {
    Eigen::VectorXd dates;
    std::vector<DateRule> per_date;
    SolverConfig solver;
    int state_dim = 0;
    int training_paths = 0;
    double training_value = 0.0;   // in-sample estimate, time-0 money
    double training_stderr = 0.0;
    // Which world the rule was trained for; metadata carried into rule files.
    MortalityModel mortality = MortalityModel::stochastic;
    FeedingModel feeding = FeedingModel::stochastic;

    // Fitted continuation value; must not be called on the final date.
    double continuation(Eigen::Index date, const Eigen::RowVectorXd& state,
                        double payoff) const;
    // Exercise decision: payoff >= continuation, always true on the final date.
    bool stop(Eigen::Index date, const Eigen::RowVectorXd& state, double payoff) const;
};

// Longstaff-Schwartz backward induction over all paths.  Payoffs are already
// discounted to time 0, so realized downstream values regress directly.
StoppingRule solve_rule(const ExercisePayoffMatrix& training,
                        const SolverConfig& cfg = {});

struct EvaluationResult {
    double value = 0.0;      // mean payoff at the rule's stopping time
    double stderr_ = 0.0;
    double mean_stop_time = 0.0;
    Eigen::VectorXd stop_time;   // per path
    Eigen::VectorXi stop_index;  // per path
};

EvaluationResult evaluate_rule(const StoppingRule& rule,
                               const ExercisePayoffMatrix& eval);

// Decide on one world, collect value from another: the benchmark rule sees
// its own (deterministic-mortality) payoffs while the realized value comes
// from the world that actually unfolded.  Shapes must match path for path.
EvaluationResult evaluate_rule_cross(const StoppingRule& rule,
                                     const ExercisePayoffMatrix& decision_world,
                                     const Eigen::MatrixXd& value_payoff);

struct ComparisonReport {
    double value_stoch = 0.0, stderr_stoch = 0.0;
    double value_determ = 0.0, stderr_determ = 0.0;
    double mean_tau_stoch = 0.0, mean_tau_determ = 0.0;
    double improvement = 0.0;  // value_stoch / value_determ
    int n_paths = 0;
};

// Both rules on a common evaluation world; the benchmark rule decides on its
// own payoff matrix but is valued on the realized one.
ComparisonReport compare_rules(const StoppingRule& stoch_rule,
                               const StoppingRule& determ_rule,
                               const ExercisePayoffMatrix& eval_stoch,
                               const ExercisePayoffMatrix& eval_determ);

// Finite-state verification problems: a Markov chain with per-date payoffs,
// solved exactly by backward induction.
struct ChainProblem {
    Eigen::MatrixXd transition;  // n_states x n_states, rows sum to 1
    Eigen::MatrixXd payoff;      // n_dates x n_states, discounted to time 0
    Eigen::VectorXd initial;     // state distribution at the first date

    void validate() const;
};

struct ChainSolution {
    double value = 0.0;
    Eigen::MatrixXd state_value;    // n_dates x n_states
    Eigen::MatrixXd continuation;   // n_dates x n_states (0 on the last date)
};

ChainSolution dp_oracle(const ChainProblem& chain);

// Chain paths encoded for the regression solver: one-hot states (so the
// basis spans the exact conditional expectations and the normal matrix is
// deliberately rank-deficient) and dates 1..n_dates.
ExercisePayoffMatrix sample_chain_paths(const ChainProblem& chain, int n_paths,
                                        const RngStream& stream);

// Exact value of a fitted rule on the chain: the decision at (date, state)
// is read off the rule, then the stopped value is computed by forward
// induction, so no Monte Carlo noise enters the comparison.
double chain_rule_value(const ChainProblem& chain, const StoppingRule& rule);

}  // namespace aqua
