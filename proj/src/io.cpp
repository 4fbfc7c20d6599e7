#include "aqua/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace aqua {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd json_to_vec(const json& a) {
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i];
    return v;
}

void dump(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

json slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

const char* mortality_name(MortalityModel m) {
    return m == MortalityModel::stochastic ? "stochastic" : "deterministic";
}

const char* feeding_name(FeedingModel m) {
    return m == FeedingModel::stochastic ? "stochastic" : "deterministic";
}

}  // namespace

void save_rule_json(const std::string& path, const StoppingRule& rule) {
    json j;
    j["kind"] = "harvest_rule";
    j["mortality"] = mortality_name(rule.mortality);
    j["feeding"] = feeding_name(rule.feeding);
    j["dates"] = vec_to_json(rule.dates);
    j["state_dim"] = rule.state_dim;
    j["solver"] = {{"svd_threshold", rule.solver.svd_threshold},
                   {"ridge", rule.solver.ridge},
                   {"payoff_feature", rule.solver.payoff_feature}};
    j["training"] = {{"paths", rule.training_paths},
                     {"value", rule.training_value},
                     {"stderr", rule.training_stderr}};
    json dates = json::array();
    for (const DateRule& d : rule.per_date) {
        json e;
        e["mean"] = vec_to_json(d.mean);
        e["scale"] = vec_to_json(d.scale);
        e["coef"] = vec_to_json(d.coef);
        dates.push_back(std::move(e));
    }
    j["per_date"] = std::move(dates);
    dump(path, j);
}

StoppingRule load_rule_json(const std::string& path) {
    const json j = slurp(path);
    if (j.value("kind", "") != "harvest_rule")
        throw std::runtime_error(path + ": not a harvest rule file");
    StoppingRule rule;
    rule.mortality = j.at("mortality") == "stochastic" ? MortalityModel::stochastic
                                                       : MortalityModel::deterministic;
    rule.feeding = j.at("feeding") == "stochastic" ? FeedingModel::stochastic
                                                   : FeedingModel::deterministic;
    rule.dates = json_to_vec(j.at("dates"));
    rule.state_dim = j.at("state_dim");
    rule.solver.svd_threshold = j.at("solver").at("svd_threshold");
    rule.solver.ridge = j.at("solver").at("ridge");
    rule.solver.payoff_feature = j.at("solver").at("payoff_feature");
    rule.training_paths = j.at("training").at("paths");
    rule.training_value = j.at("training").at("value");
    rule.training_stderr = j.at("training").at("stderr");
    for (const json& e : j.at("per_date")) {
        DateRule d;
        d.mean = json_to_vec(e.at("mean"));
        d.scale = json_to_vec(e.at("scale"));
        d.coef = json_to_vec(e.at("coef"));
        rule.per_date.push_back(std::move(d));
    }
    if (rule.per_date.size() != static_cast<std::size_t>(rule.dates.size()))
        throw std::runtime_error(path + ": per-date block count mismatch");
    if (!rule.per_date.empty() && rule.per_date.back().coef.size() != 0)
        throw std::runtime_error(path + ": final date must be a mandatory stop");
    rule.solver.validate();
    return rule;
}

void save_removal_distribution_json(const std::string& path,
                                    const RemovalDistribution& d) {
    json j;
    j["kind"] = "removal_distribution";
    j["t"] = d.t;
    j["counts"] = d.counts;
    j["mean"] = d.mean;
    j["stddev"] = d.stddev;
    dump(path, j);
}

RemovalDistribution load_removal_distribution_json(const std::string& path) {
    const json j = slurp(path);
    if (j.value("kind", "") != "removal_distribution")
        throw std::runtime_error(path + ": not a removal distribution file");
    RemovalDistribution d;
    d.t = j.at("t");
    d.counts = j.at("counts").get<std::vector<int>>();
    d.mean = j.at("mean");
    d.stddev = j.at("stddev");
    return d;
}

void save_lambda_fit_json(const std::string& path, const LambdaFit& fit) {
    json j;
    j["kind"] = "lambda_fit";
    j["lambda"] = fit.lambda;
    j["sse"] = fit.sse;
    j["n_points"] = fit.n_points;
    j["n_segments"] = fit.n_segments;
    j["evals"] = fit.evals;
    j["converged"] = fit.converged;
    dump(path, j);
}

void save_beta_fit_json(const std::string& path, const BetaFit& fit,
                        double lambda_used) {
    json j;
    j["kind"] = "beta_fit";
    j["beta1"] = fit.beta1;
    j["beta2"] = fit.beta2;
    j["lambda"] = lambda_used;
    j["objective"] = fit.objective;
    j["model_mean"] = fit.model_mean;
    j["model_stddev"] = fit.model_stddev;
    j["evals"] = fit.evals;
    j["converged"] = fit.converged;
    j["at_bound"] = fit.at_bound;
    dump(path, j);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size())
        throw std::invalid_argument("write_csv: header/column count mismatch");
    std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns)
        if (c.size() != rows) throw std::invalid_argument("write_csv: ragged columns");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? ',' : '\n');
    char buf[40];
    for (std::size_t rIdx = 0; rIdx < rows; ++rIdx) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", columns[c][rIdx]);
            out << buf << (c + 1 < columns.size() ? ',' : '\n');
        }
    }
}

void write_path_summary_csv(const std::string& path, const Eigen::VectorXd& grid,
                            const Eigen::ArrayXXd& values, const std::string& name) {
    const Eigen::Index n = grid.size();
    if (values.rows() != n)
        throw std::invalid_argument("write_path_summary_csv: grid/rows mismatch");
    const Eigen::Index m = values.cols();
    std::vector<std::vector<double>> cols(6, std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<double> row(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) row[static_cast<std::size_t>(j)] = values(i, j);
        std::sort(row.begin(), row.end());
        const double mean = values.row(i).mean();
        const double sd =
            m > 1 ? std::sqrt((values.row(i) - mean).square().sum() /
                              static_cast<double>(m - 1))
                  : 0.0;
        const auto quant = [&](double q) {
            const double pos = q * static_cast<double>(m - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            const std::size_t hi = std::min(lo + 1, row.size() - 1);
            const double w = pos - static_cast<double>(lo);
            return (1.0 - w) * row[lo] + w * row[hi];
        };
        cols[0][static_cast<std::size_t>(i)] = grid[i];
        cols[1][static_cast<std::size_t>(i)] = mean;
        cols[2][static_cast<std::size_t>(i)] = sd;
        cols[3][static_cast<std::size_t>(i)] = quant(0.05);
        cols[4][static_cast<std::size_t>(i)] = quant(0.5);
        cols[5][static_cast<std::size_t>(i)] = quant(0.95);
    }
    write_csv(path, {"t", name + "_mean", name + "_sd", name + "_q05", name + "_q50",
                     name + "_q95"},
              cols);
}

void write_paths_csv(const std::string& path, const Eigen::VectorXd& grid,
                     const std::vector<const Eigen::ArrayXXd*>& arrays,
                     const std::vector<std::string>& names) {
    if (arrays.empty() || arrays.size() != names.size())
        throw std::invalid_argument("write_paths_csv: arrays/names mismatch");
    const Eigen::Index n = grid.size();
    const Eigen::Index m = arrays[0]->cols();
    for (const auto* a : arrays)
        if (a->rows() != n || a->cols() != m)
            throw std::invalid_argument("write_paths_csv: shape mismatch");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "path,t";
    for (const std::string& s : names) out << ',' << s;
    out << '\n';
    char buf[40];
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            out << j << ',';
            std::snprintf(buf, sizeof buf, "%.17g", grid[i]);
            out << buf;
            for (const auto* a : arrays) {
                std::snprintf(buf, sizeof buf, "%.17g", (*a)(i, j));
                out << ',' << buf;
            }
            out << '\n';
        }
}

void RunManifest::save(const std::string& path) const {
    json j;
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config_path;
    j["files"] = files;
    json notes_json = json::object();
    for (const auto& [k, v] : notes) notes_json[k] = v;
    j["notes"] = notes_json;
    dump(path, j);
}

}  // namespace aqua
