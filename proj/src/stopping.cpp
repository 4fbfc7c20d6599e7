#include "aqua/stopping.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace aqua {

void SolverConfig::validate() const {
    if (!(svd_threshold > 0.0) || !std::isfinite(svd_threshold))
        throw std::invalid_argument("SolverConfig: svd_threshold must be > 0");
    if (ridge < 0.0 || !std::isfinite(ridge))
        throw std::invalid_argument("SolverConfig: ridge must be >= 0");
}

namespace {

int feature_count(int d, bool payoff_feature) {
    return 1 + d + d * (d + 1) / 2 + (payoff_feature ? 1 : 0);
}

// z-scores of raw inputs, quadratic cross terms, optional payoff feature.
void fill_feature_row(const Eigen::RowVectorXd& state, double payoff,
                      const DateRule& dr, bool payoff_feature, double* row) {
    const int d = static_cast<int>(state.size());
    int c = 0;
    row[c++] = 1.0;
    for (int i = 0; i < d; ++i)
        row[c++] = (state[i] - dr.mean[i]) / dr.scale[i];
    for (int i = 0; i < d; ++i) {
        const double zi = (state[i] - dr.mean[i]) / dr.scale[i];
        for (int j = i; j < d; ++j)
            row[c++] = zi * (state[j] - dr.mean[j]) / dr.scale[j];
    }
    if (payoff_feature) {
        const double zp = (payoff - dr.mean[d]) / dr.scale[d];
        row[c++] = zp;
    }
}

DateRule standardization(const Eigen::MatrixXd& state, const Eigen::VectorXd& payoff,
                         bool payoff_feature) {
    const Eigen::Index n = state.rows();
    const int d = static_cast<int>(state.cols());
    DateRule dr;
    dr.mean.resize(d + (payoff_feature ? 1 : 0));
    dr.scale.resize(dr.mean.size());
    for (int i = 0; i < d; ++i) {
        const double m = state.col(i).mean();
        const double var = (state.col(i).array() - m).square().sum() /
                           static_cast<double>(n);
        dr.mean[i] = m;
        dr.scale[i] = (var > 0.0) ? std::sqrt(var) : 1.0;  // constant column guard
    }
    if (payoff_feature) {
        const double m = payoff.mean();
        const double var = (payoff.array() - m).square().sum() / static_cast<double>(n);
        dr.mean[d] = m;
        dr.scale[d] = (var > 0.0) ? std::sqrt(var) : 1.0;
    }
    return dr;
}

Eigen::MatrixXd build_design(const Eigen::MatrixXd& state,
                             const Eigen::VectorXd& payoff, const DateRule& dr,
                             bool payoff_feature) {
    const Eigen::Index n = state.rows();
    const int d = static_cast<int>(state.cols());
    Eigen::MatrixXd X(n, feature_count(d, payoff_feature));
    Eigen::RowVectorXd row(d);
    std::vector<double> buf(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < n; ++j) {
        row = state.row(j);
        fill_feature_row(row, payoff[j], dr, payoff_feature, buf.data());
        for (Eigen::Index c = 0; c < X.cols(); ++c) X(j, c) = buf[static_cast<std::size_t>(c)];
    }
    return X;
}

Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const SolverConfig& cfg) {
    if (cfg.ridge > 0.0) {
        Eigen::MatrixXd normal = X.transpose() * X;
        normal.diagonal().array() += cfg.ridge;
        return normal.ldlt().solve(X.transpose() * y);
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(cfg.svd_threshold);
    return svd.solve(y);
}

}  // namespace

double StoppingRule::continuation(Eigen::Index date, const Eigen::RowVectorXd& state,
                                  double payoff) const {
    const DateRule& dr = per_date[static_cast<std::size_t>(date)];
    if (dr.coef.size() == 0)
        throw std::logic_error("StoppingRule: no continuation on the final date");
    if (state.size() != state_dim)
        throw std::invalid_argument("StoppingRule: state dimension mismatch");
    std::vector<double> buf(static_cast<std::size_t>(dr.coef.size()));
    fill_feature_row(state, payoff, dr, solver.payoff_feature, buf.data());
    double v = 0.0;
    for (Eigen::Index c = 0; c < dr.coef.size(); ++c)
        v += dr.coef[c] * buf[static_cast<std::size_t>(c)];
    return v;
}

bool StoppingRule::stop(Eigen::Index date, const Eigen::RowVectorXd& state,
                        double payoff) const {
    if (date + 1 == static_cast<Eigen::Index>(per_date.size())) return true;
    return payoff >= continuation(date, state, payoff);
}

StoppingRule solve_rule(const ExercisePayoffMatrix& training, const SolverConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = training.payoff.rows();
    const Eigen::Index n_dates = training.payoff.cols();
    if (n_dates == 0 || training.state.size() != static_cast<std::size_t>(n_dates))
        throw std::invalid_argument("solve_rule: malformed training set");
    if (n < 2) throw std::invalid_argument("solve_rule: need at least 2 paths");
    const int d = static_cast<int>(training.state[0].cols());
    for (const auto& s : training.state)
        if (s.rows() != n || s.cols() != d)
            throw std::invalid_argument("solve_rule: state block shape mismatch");
    if (feature_count(d, cfg.payoff_feature) > n)
        throw std::invalid_argument("solve_rule: more features than paths");

    StoppingRule rule;
    rule.dates = training.dates;
    rule.solver = cfg;
    rule.state_dim = d;
    rule.training_paths = static_cast<int>(n);
    rule.per_date.resize(static_cast<std::size_t>(n_dates));

    // Final date: mandatory exercise.
    Eigen::VectorXd value = training.payoff.col(n_dates - 1);

    for (Eigen::Index k = n_dates - 2; k >= 0; --k) {
        const Eigen::VectorXd payoff = training.payoff.col(k);
        DateRule dr = standardization(training.state[static_cast<std::size_t>(k)],
                                      payoff, cfg.payoff_feature);
        const Eigen::MatrixXd X = build_design(
            training.state[static_cast<std::size_t>(k)], payoff, dr,
            cfg.payoff_feature);
        dr.coef = solve_least_squares(X, value, cfg);
        const Eigen::VectorXd cont = X * dr.coef;
        for (Eigen::Index j = 0; j < n; ++j)
            if (payoff[j] >= cont[j]) value[j] = payoff[j];
        rule.per_date[static_cast<std::size_t>(k)] = std::move(dr);
    }

    rule.training_value = value.mean();
    const double var =
        (value.array() - rule.training_value).square().sum() / static_cast<double>(n - 1);
    rule.training_stderr = std::sqrt(var / static_cast<double>(n));
    return rule;
}

namespace {

EvaluationResult run_rule(const StoppingRule& rule, const ExercisePayoffMatrix& world,
                          const Eigen::MatrixXd* value_payoff) {
    const Eigen::Index n = world.payoff.rows();
    const Eigen::Index n_dates = world.payoff.cols();
    if (rule.per_date.size() != static_cast<std::size_t>(n_dates))
        throw std::invalid_argument("evaluate_rule: date count mismatch");
    if (world.state.size() != static_cast<std::size_t>(n_dates))
        throw std::invalid_argument("evaluate_rule: malformed world");
    if (static_cast<int>(world.state[0].cols()) != rule.state_dim)
        throw std::invalid_argument("evaluate_rule: state dimension mismatch");
    if (value_payoff &&
        (value_payoff->rows() != n || value_payoff->cols() != n_dates))
        throw std::invalid_argument("evaluate_rule: value payoff shape mismatch");

    EvaluationResult res;
    res.stop_time.resize(n);
    res.stop_index.resize(n);
    double sum = 0.0, sumsq = 0.0, tsum = 0.0;
    Eigen::RowVectorXd state(rule.state_dim);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index k = 0;
        for (; k < n_dates; ++k) {
            state = world.state[static_cast<std::size_t>(k)].row(j);
            if (rule.stop(k, state, world.payoff(j, k))) break;
        }
        if (k == n_dates) k = n_dates - 1;  // defensive; final date always stops
        const double v = value_payoff ? (*value_payoff)(j, k) : world.payoff(j, k);
        res.stop_index[j] = static_cast<int>(k);
        res.stop_time[j] = world.dates[k];
        sum += v;
        sumsq += v * v;
        tsum += world.dates[k];
    }
    const double nn = static_cast<double>(n);
    res.value = sum / nn;
    const double var = (sumsq - nn * res.value * res.value) / (nn - 1.0);
    res.stderr_ = std::sqrt(std::max(var, 0.0) / nn);
    res.mean_stop_time = tsum / nn;
    return res;
}

}  // namespace

EvaluationResult evaluate_rule(const StoppingRule& rule,
                               const ExercisePayoffMatrix& eval) {
    return run_rule(rule, eval, nullptr);
}

EvaluationResult evaluate_rule_cross(const StoppingRule& rule,
                                     const ExercisePayoffMatrix& decision_world,
                                     const Eigen::MatrixXd& value_payoff) {
    return run_rule(rule, decision_world, &value_payoff);
}

ComparisonReport compare_rules(const StoppingRule& stoch_rule,
                               const StoppingRule& determ_rule,
                               const ExercisePayoffMatrix& eval_stoch,
                               const ExercisePayoffMatrix& eval_determ) {
    if (eval_stoch.payoff.rows() != eval_determ.payoff.rows() ||
        eval_stoch.payoff.cols() != eval_determ.payoff.cols())
        throw std::invalid_argument("compare_rules: evaluation worlds differ in shape");

    const EvaluationResult a = evaluate_rule(stoch_rule, eval_stoch);
    const EvaluationResult b =
        evaluate_rule_cross(determ_rule, eval_determ, eval_stoch.payoff);

    ComparisonReport rep;
    rep.value_stoch = a.value;
    rep.stderr_stoch = a.stderr_;
    rep.value_determ = b.value;
    rep.stderr_determ = b.stderr_;
    rep.mean_tau_stoch = a.mean_stop_time;
    rep.mean_tau_determ = b.mean_stop_time;
    if (b.value == 0.0)
        throw std::runtime_error("compare_rules: benchmark value is zero");
    rep.improvement = a.value / b.value;
    rep.n_paths = static_cast<int>(eval_stoch.payoff.rows());
    return rep;
}

void ChainProblem::validate() const {
    const Eigen::Index s = transition.rows();
    if (s == 0 || transition.cols() != s)
        throw std::invalid_argument("ChainProblem: transition must be square");
    if (payoff.rows() == 0 || payoff.cols() != s)
        throw std::invalid_argument("ChainProblem: payoff shape mismatch");
    if (initial.size() != s)
        throw std::invalid_argument("ChainProblem: initial size mismatch");
    for (Eigen::Index i = 0; i < s; ++i) {
        if ((transition.row(i).array() < 0.0).any() ||
            std::fabs(transition.row(i).sum() - 1.0) > 1e-12)
            throw std::invalid_argument("ChainProblem: rows must be distributions");
    }
    if ((initial.array() < 0.0).any() || std::fabs(initial.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("ChainProblem: initial must be a distribution");
}

ChainSolution dp_oracle(const ChainProblem& chain) {
    chain.validate();
    const Eigen::Index n_dates = chain.payoff.rows();
    const Eigen::Index s = chain.transition.rows();

    ChainSolution sol;
    sol.state_value.resize(n_dates, s);
    sol.continuation = Eigen::MatrixXd::Zero(n_dates, s);
    sol.state_value.row(n_dates - 1) = chain.payoff.row(n_dates - 1);
    for (Eigen::Index k = n_dates - 2; k >= 0; --k) {
        sol.continuation.row(k) =
            (chain.transition * sol.state_value.row(k + 1).transpose()).transpose();
        sol.state_value.row(k) =
            chain.payoff.row(k).cwiseMax(sol.continuation.row(k));
    }
    sol.value = chain.initial.dot(sol.state_value.row(0));
    return sol;
}

ExercisePayoffMatrix sample_chain_paths(const ChainProblem& chain, int n_paths,
                                        const RngStream& stream) {
    chain.validate();
    if (n_paths < 1) throw std::invalid_argument("sample_chain_paths: n_paths < 1");
    const Eigen::Index n_dates = chain.payoff.rows();
    const Eigen::Index s = chain.transition.rows();

    ExercisePayoffMatrix out;
    out.dates.resize(n_dates);
    for (Eigen::Index k = 0; k < n_dates; ++k) out.dates[k] = static_cast<double>(k + 1);
    out.date_index.resize(static_cast<std::size_t>(n_dates));
    for (Eigen::Index k = 0; k < n_dates; ++k)
        out.date_index[static_cast<std::size_t>(k)] = k;
    out.payoff.resize(n_paths, n_dates);
    out.state.assign(static_cast<std::size_t>(n_dates),
                     Eigen::MatrixXd::Zero(n_paths, s));

    const auto draw = [&](const Eigen::VectorXd& dist, double u) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < dist.size(); ++i) {
            acc += dist[i];
            if (u <= acc) return i;
        }
        return dist.size() - 1;
    };

    for (int j = 0; j < n_paths; ++j) {
        PathRng rng = stream.path(static_cast<std::uint64_t>(j));
        Eigen::Index st = draw(chain.initial, rng.uniform01());
        for (Eigen::Index k = 0; k < n_dates; ++k) {
            if (k > 0) st = draw(chain.transition.row(st).transpose(), rng.uniform01());
            out.state[static_cast<std::size_t>(k)](j, st) = 1.0;
            out.payoff(j, k) = chain.payoff(k, st);
        }
    }
    return out;
}

double chain_rule_value(const ChainProblem& chain, const StoppingRule& rule) {
    chain.validate();
    const Eigen::Index n_dates = chain.payoff.rows();
    const Eigen::Index s = chain.transition.rows();
    if (rule.per_date.size() != static_cast<std::size_t>(n_dates) ||
        rule.state_dim != static_cast<int>(s))
        throw std::invalid_argument("chain_rule_value: rule does not fit the chain");

    // Decision table from the fitted rule.
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> stops(n_dates, s);
    Eigen::RowVectorXd onehot(s);
    for (Eigen::Index k = 0; k < n_dates; ++k)
        for (Eigen::Index i = 0; i < s; ++i) {
            onehot.setZero();
            onehot[i] = 1.0;
            stops(k, i) = rule.stop(k, onehot, chain.payoff(k, i));
        }

    // Forward induction over the not-yet-stopped distribution.
    Eigen::VectorXd alive = chain.initial;
    double value = 0.0;
    for (Eigen::Index k = 0; k < n_dates; ++k) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(s);
        for (Eigen::Index i = 0; i < s; ++i) {
            if (alive[i] == 0.0) continue;
            if (stops(k, i) || k == n_dates - 1)
                value += alive[i] * chain.payoff(k, i);
            else
                next += alive[i] * chain.transition.row(i).transpose();
        }
        alive.swap(next);
    }
    return value;
}

}  // namespace aqua
