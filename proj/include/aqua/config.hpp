#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aqua/biology.hpp"
#include "aqua/commodity.hpp"
#include "aqua/economics.hpp"
#include "aqua/stopping.hpp"

namespace aqua {

struct GlobalConfig {
    double r = 0.0303;        // continuously compounded interest rate
    double horizon = 3.0;     // farming horizon in years
    int n_dates = 72;         // harvest decision dates
    int train_paths = 4096;
    int eval_paths = 81920;
    int block_paths = 2048;   // streaming block size; result-invariant
    std::uint64_t seed = 20240901;

    void validate() const;
};

struct CalibrationConfig {
    double zeta = 2.0;        // moment-matching exponent
    double t_match = 1.77;    // removal-distribution time for the beta fit
    int n_paths = 1000;
    double lambda_lo = 1e-3;
    double lambda_hi = 50.0;
    double beta_lo = 1e-3;
    double beta_hi = 10.0;

    void validate() const;
};

struct IngestConfig {
    std::string region = "Trondelag";
    int gap_weeks = 4;

    void validate() const;
};

// Everything a run needs, assembled from defaults and an optional INI-style
// file.  Sections: [global], [commodity.salmon], [commodity.soy], [growth],
// [biology], [threshold], [costs], [stopping], [calibration], [ingest].
struct FarmConfig {
    GlobalConfig global;
    CommodityParams salmon;
    CommodityParams soy;
    GrowthParams growth;
    BioParams bio;
    ThresholdFn threshold;
    CostParams costs;
    SolverConfig solver;
    CalibrationConfig calibration;
    IngestConfig ingest;

    // Built-in defaults: the salmon s0 is the margin-adjusted price from the
    // cost block unless the file pins it explicitly.
    static FarmConfig defaults();
    static FarmConfig from_ini(const std::string& path);

    void validate() const;

    // Simulation grid (10 * n_dates points) and the decision dates, which sit
    // on the grid at indices 10k - 1, k = 1..n_dates.
    Eigen::VectorXd fine_grid() const;
    Eigen::VectorXd exercise_dates() const;
    std::vector<Eigen::Index> exercise_indices() const;
};

// Minimal INI reader: '#' or ';' full-line comments, [section] headers,
// key = value pairs.  Unknown sections or keys are errors.
struct IniDoc {
    // section -> key -> raw value
    std::map<std::string, std::map<std::string, std::string>> values;

    static IniDoc parse_file(const std::string& path);
    static IniDoc parse_string(const std::string& text);
};

}  // namespace aqua
