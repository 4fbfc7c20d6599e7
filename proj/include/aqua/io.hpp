#pragma once

#include <string>
#include <vector>

#include "aqua/calibrate.hpp"
#include "aqua/ingest.hpp"
#include "aqua/stopping.hpp"

namespace aqua {

// Fitted harvesting rules round-trip through JSON so `solve` output feeds
// `compare`.  Loading re-validates shapes.
void save_rule_json(const std::string& path, const StoppingRule& rule);
StoppingRule load_rule_json(const std::string& path);

void save_removal_distribution_json(const std::string& path,
                                    const RemovalDistribution& d);
RemovalDistribution load_removal_distribution_json(const std::string& path);

void save_lambda_fit_json(const std::string& path, const LambdaFit& fit);
void save_beta_fit_json(const std::string& path, const BetaFit& fit,
                        double lambda_used);

// Columnar CSV with a fixed column count; numbers print round-trip exact.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

// Per-date cross-path summary (mean, stddev, and quantiles) of a path array.
void write_path_summary_csv(const std::string& path, const Eigen::VectorXd& grid,
                            const Eigen::ArrayXXd& values, const std::string& name);

// Long-format dump of full paths; meant for small path counts.
void write_paths_csv(const std::string& path, const Eigen::VectorXd& grid,
                     const std::vector<const Eigen::ArrayXXd*>& arrays,
                     const std::vector<std::string>& names);

// Run manifest: what ran, with which seed and config, producing which files.
struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_path;
    std::vector<std::string> files;
    std::vector<std::pair<std::string, std::string>> notes;

    void save(const std::string& path) const;
};

}  // namespace aqua
