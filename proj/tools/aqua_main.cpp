// Command-line front end: simulate | calibrate | solve | compare | pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "aqua/calibrate.hpp"
#include "aqua/config.hpp"
#include "aqua/io.hpp"
#include "aqua/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> paths;
    std::optional<int> eval_paths;
};

aqua::FarmConfig load_config(const CommonOpts& o) {
    aqua::FarmConfig cfg = o.config_path.empty()
                               ? aqua::FarmConfig::defaults()
                               : aqua::FarmConfig::from_ini(o.config_path);
    if (o.seed) cfg.global.seed = *o.seed;
    if (o.paths) cfg.global.train_paths = *o.paths;
    if (o.eval_paths) cfg.global.eval_paths = *o.eval_paths;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_paths = true) {
    cmd->add_option("--config", o.config_path, "INI configuration file");
    cmd->add_option("--seed", o.seed, "base random seed");
    if (with_paths) {
        cmd->add_option("--paths", o.paths, "training path count");
        cmd->add_option("--eval-paths", o.eval_paths, "evaluation path count");
    }
}

std::string join(const fs::path& dir, const std::string& name) {
    return (dir / name).string();
}

json report_to_json(const aqua::ScenarioOutcome& oc) {
    return json{
        {"feeding",
         oc.feeding == aqua::FeedingModel::stochastic ? "stochastic" : "deterministic"},
        {"treatment_rate", oc.treatment_rate},
        {"value_stoch", oc.report.value_stoch},
        {"stderr_stoch", oc.report.stderr_stoch},
        {"value_determ", oc.report.value_determ},
        {"stderr_determ", oc.report.stderr_determ},
        {"mean_tau_stoch", oc.report.mean_tau_stoch},
        {"mean_tau_determ", oc.report.mean_tau_determ},
        {"improvement", oc.report.improvement},
        {"n_eval_paths", oc.report.n_paths},
        {"training_value_stoch", oc.rule_stoch.training_value},
        {"training_value_determ", oc.rule_determ.training_value},
    };
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

int cmd_simulate(const CommonOpts& common, const std::string& out_dir) {
    aqua::FarmConfig cfg = load_config(common);
    fs::create_directories(out_dir);
    const Eigen::VectorXd grid = cfg.fine_grid();
    const int n = cfg.global.train_paths;

    const aqua::CommodityPathSet salmon = aqua::simulate_two_factor(
        cfg.salmon, cfg.global.r, grid, n,
        {cfg.global.seed, aqua::rng_stream::training_block | aqua::rng_stream::salmon});
    const aqua::CommodityPathSet soy = aqua::simulate_two_factor(
        cfg.soy, cfg.global.r, grid, n,
        {cfg.global.seed, aqua::rng_stream::training_block | aqua::rng_stream::soy});
    const aqua::HostParasitePathSet hp = aqua::simulate_host_parasite(
        cfg.bio, cfg.threshold, grid, n,
        {cfg.global.seed, aqua::rng_stream::training_block | aqua::rng_stream::lice});

    aqua::RunManifest man;
    man.command = "simulate";
    man.seed = cfg.global.seed;
    man.config_path = common.config_path;

    const auto add = [&](const std::string& name) { man.files.push_back(name); };
    aqua::write_path_summary_csv(join(out_dir, "salmon_summary.csv"), grid, salmon.spot,
                                 "spot");
    add("salmon_summary.csv");
    aqua::write_path_summary_csv(join(out_dir, "soy_summary.csv"), grid, soy.spot,
                                 "spot");
    add("soy_summary.csv");
    aqua::write_path_summary_csv(join(out_dir, "host_summary.csv"), grid, hp.host,
                                 "host");
    add("host_summary.csv");
    aqua::write_path_summary_csv(join(out_dir, "removals_summary.csv"), grid,
                                 hp.removals, "removals");
    add("removals_summary.csv");

    if (n <= 128) {  // full dumps only at small scale
        aqua::write_paths_csv(join(out_dir, "salmon_paths.csv"), grid,
                              {&salmon.spot, &salmon.conv_yield}, {"spot", "yield"});
        add("salmon_paths.csv");
        aqua::write_paths_csv(join(out_dir, "soy_paths.csv"), grid,
                              {&soy.spot, &soy.conv_yield}, {"spot", "yield"});
        add("soy_paths.csv");
        aqua::write_paths_csv(join(out_dir, "host_paths.csv"), grid,
                              {&hp.host, &hp.parasite, &hp.removals},
                              {"host", "parasite", "removals"});
        add("host_paths.csv");
    }
    man.notes.emplace_back("paths", std::to_string(n));
    man.notes.emplace_back("overshoots", std::to_string(hp.overshoots));
    man.save(join(out_dir, "manifest.json"));
    std::cout << "simulate: wrote " << man.files.size() << " files to " << out_dir
              << "\n";
    return 0;
}

int cmd_calibrate_lambda(const CommonOpts& common, const std::string& segments_path,
                         const std::string& out_path) {
    aqua::FarmConfig cfg = load_config(common);
    const std::vector<aqua::GreenSegment> segments =
        aqua::read_green_segments_csv(segments_path);
    const aqua::LambdaFit fit =
        aqua::fit_lambda(segments, cfg.bio, cfg.fine_grid(), cfg.calibration.lambda_lo,
                         cfg.calibration.lambda_hi);
    aqua::save_lambda_fit_json(out_path, fit);
    std::cout << "lambda fit: " << fit.lambda << " (sse " << fit.sse << ", "
              << fit.n_points << " points)\n";
    return 0;
}

int cmd_calibrate_beta(const CommonOpts& common, const std::string& target_path,
                       double lambda, double zeta, int paths,
                       const std::string& out_path) {
    aqua::FarmConfig cfg = load_config(common);
    if (lambda > 0.0) cfg.bio.lambda = lambda;
    if (zeta > 0.0) cfg.calibration.zeta = zeta;
    if (paths > 0) cfg.calibration.n_paths = paths;
    const aqua::RemovalDistribution target =
        aqua::load_removal_distribution_json(target_path);
    const aqua::RngStream stream{cfg.global.seed, aqua::rng_stream::calibration_block |
                                                      aqua::rng_stream::lice};
    const aqua::BetaFit fit = aqua::fit_beta(
        target, cfg.bio, cfg.threshold, cfg.fine_grid(), cfg.calibration.n_paths,
        cfg.calibration.zeta, stream, cfg.calibration.beta_lo, cfg.calibration.beta_hi);
    aqua::save_beta_fit_json(out_path, fit, cfg.bio.lambda);
    std::cout << "beta fit: (" << fit.beta1 << ", " << fit.beta2 << "), model moments ("
              << fit.model_mean << ", " << fit.model_stddev << ") vs target ("
              << target.mean << ", " << target.stddev << ")\n";
    return 0;
}

int cmd_solve(const CommonOpts& common, const std::string& mode,
              const std::string& feeding, const std::string& out_path,
              const std::string& report_path) {
    aqua::FarmConfig cfg = load_config(common);
    const auto feed = feeding == "stoch" ? aqua::FeedingModel::stochastic
                                         : aqua::FeedingModel::deterministic;
    const auto mort = mode == "stoch" ? aqua::MortalityModel::stochastic
                                      : aqua::MortalityModel::deterministic;

    const aqua::DetermCurves curves = aqua::estimate_determ_curves(cfg);
    aqua::FarmConfig train_cfg = cfg;
    if (mort == aqua::MortalityModel::deterministic) train_cfg.global.seed += 1;
    const aqua::RawSnapshots train = aqua::simulate_snapshots(
        train_cfg, feed, mort == aqua::MortalityModel::stochastic, curves,
        cfg.global.train_paths, aqua::rng_stream::training_block);
    const aqua::ExercisePayoffMatrix train_pm =
        aqua::assemble_payoff(train, curves, cfg, mort, cfg.costs.treatment_rate);
    aqua::StoppingRule rule = aqua::solve_rule(train_pm, cfg.solver);
    rule.mortality = mort;
    rule.feeding = feed;
    aqua::save_rule_json(out_path, rule);

    const aqua::RawSnapshots eval = aqua::simulate_snapshots(
        cfg, feed, true, curves, cfg.global.eval_paths,
        aqua::rng_stream::evaluation_block);
    const aqua::ExercisePayoffMatrix eval_pm =
        aqua::assemble_payoff(eval, curves, cfg, mort, cfg.costs.treatment_rate);
    const aqua::EvaluationResult res = aqua::evaluate_rule(rule, eval_pm);

    std::cout << "solve(" << mode << ", feeding " << feeding << "): value " << res.value
              << " +- " << res.stderr_ << ", mean stopping time " << res.mean_stop_time
              << "\n";
    if (!report_path.empty())
        write_json(report_path,
                   json{{"mode", mode},
                        {"feeding", feeding},
                        {"value", res.value},
                        {"stderr", res.stderr_},
                        {"mean_stop_time", res.mean_stop_time},
                        {"training_value", rule.training_value},
                        {"n_eval_paths", cfg.global.eval_paths}});
    return 0;
}

int cmd_compare(const CommonOpts& common, const std::vector<std::string>& rule_paths,
                const std::string& out_path, const std::string& tau_csv) {
    aqua::FarmConfig cfg = load_config(common);
    if (rule_paths.size() != 2)
        throw std::runtime_error("compare: exactly two --rules files required");
    aqua::StoppingRule a = aqua::load_rule_json(rule_paths[0]);
    aqua::StoppingRule b = aqua::load_rule_json(rule_paths[1]);
    if (a.feeding != b.feeding)
        throw std::runtime_error("compare: rules use different feeding models");
    if (a.mortality == b.mortality)
        throw std::runtime_error(
            "compare: need one stochastic-mortality and one benchmark rule");
    if (b.mortality == aqua::MortalityModel::stochastic) std::swap(a, b);

    const aqua::DetermCurves curves = aqua::estimate_determ_curves(cfg);
    const aqua::RawSnapshots eval =
        aqua::simulate_snapshots(cfg, a.feeding, true, curves, cfg.global.eval_paths,
                                 aqua::rng_stream::evaluation_block);
    const aqua::ExercisePayoffMatrix eval_s = aqua::assemble_payoff(
        eval, curves, cfg, aqua::MortalityModel::stochastic, cfg.costs.treatment_rate);
    const aqua::ExercisePayoffMatrix eval_d =
        aqua::assemble_payoff(eval, curves, cfg, aqua::MortalityModel::deterministic,
                              cfg.costs.treatment_rate);
    const aqua::ComparisonReport rep = aqua::compare_rules(a, b, eval_s, eval_d);

    write_json(out_path, json{{"value_stoch", rep.value_stoch},
                              {"stderr_stoch", rep.stderr_stoch},
                              {"value_determ", rep.value_determ},
                              {"stderr_determ", rep.stderr_determ},
                              {"mean_tau_stoch", rep.mean_tau_stoch},
                              {"mean_tau_determ", rep.mean_tau_determ},
                              {"improvement", rep.improvement},
                              {"n_eval_paths", rep.n_paths}});
    if (!tau_csv.empty()) {
        const aqua::EvaluationResult ra = aqua::evaluate_rule(a, eval_s);
        const aqua::EvaluationResult rb =
            aqua::evaluate_rule_cross(b, eval_d, eval_s.payoff);
        std::vector<std::vector<double>> cols(2);
        for (Eigen::Index j = 0; j < ra.stop_time.size(); ++j) {
            cols[0].push_back(ra.stop_time[j]);
            cols[1].push_back(rb.stop_time[j]);
        }
        aqua::write_csv(tau_csv, {"tau_stoch", "tau_determ"}, cols);
    }
    std::cout << "compare: improvement " << rep.improvement << " (stoch "
              << rep.value_stoch << ", benchmark " << rep.value_determ << ")\n";
    return 0;
}

int cmd_pipeline(const CommonOpts& common, const std::string& data_path,
                 bool synthetic, int n_farms, const std::string& region,
                 const std::string& out_dir) {
    aqua::FarmConfig cfg = load_config(common);
    if (!region.empty()) cfg.ingest.region = region;
    fs::create_directories(out_dir);
    aqua::RunManifest man;
    man.command = "pipeline";
    man.seed = cfg.global.seed;
    man.config_path = common.config_path;
    const auto add = [&](const std::string& name) { man.files.push_back(name); };

    // Data: supplied export or a synthetic one in the same format.
    std::string lice_csv = data_path;
    if (synthetic) {
        lice_csv = join(out_dir, "synthetic_lice.csv");
        aqua::write_synthetic_lice_csv(lice_csv, cfg, n_farms, cfg.global.seed);
        add("synthetic_lice.csv");
    } else if (lice_csv.empty()) {
        throw std::runtime_error("pipeline: pass --data FILE or --synthetic");
    }

    // Ingest.
    const aqua::ParseReport parsed = aqua::parse_lice_file(lice_csv);
    const std::vector<aqua::FarmingPeriod> periods =
        aqua::select_mechanical_only_periods(parsed.records, cfg.ingest.region,
                                             cfg.ingest.gap_weeks);
    if (periods.empty()) throw std::runtime_error("pipeline: no usable farming periods");
    const std::vector<aqua::GreenSegment> segments =
        aqua::extract_green_segments(periods);
    if (segments.empty()) throw std::runtime_error("pipeline: no green segments");
    aqua::write_green_segments_csv(join(out_dir, "green_segments.csv"), segments);
    add("green_segments.csv");

    const aqua::RemovalDistribution dist_early =
        aqua::removal_distribution_at(periods, 1.09);
    const aqua::RemovalDistribution dist_match =
        aqua::removal_distribution_at(periods, cfg.calibration.t_match);
    aqua::save_removal_distribution_json(join(out_dir, "removals_early.json"),
                                         dist_early);
    add("removals_early.json");
    aqua::save_removal_distribution_json(join(out_dir, "removals_match.json"),
                                         dist_match);
    add("removals_match.json");

    // Calibrate.
    const aqua::LambdaFit lf =
        aqua::fit_lambda(segments, cfg.bio, cfg.fine_grid(), cfg.calibration.lambda_lo,
                         cfg.calibration.lambda_hi);
    aqua::save_lambda_fit_json(join(out_dir, "lambda_fit.json"), lf);
    add("lambda_fit.json");
    cfg.bio.lambda = lf.lambda;

    const aqua::RngStream calib_stream{
        cfg.global.seed, aqua::rng_stream::calibration_block | aqua::rng_stream::lice};
    const aqua::BetaFit bf = aqua::fit_beta(
        dist_match, cfg.bio, cfg.threshold, cfg.fine_grid(), cfg.calibration.n_paths,
        cfg.calibration.zeta, calib_stream, cfg.calibration.beta_lo,
        cfg.calibration.beta_hi);
    aqua::save_beta_fit_json(join(out_dir, "beta_fit.json"), bf, cfg.bio.lambda);
    add("beta_fit.json");
    cfg.bio.beta1 = bf.beta1;
    cfg.bio.beta2 = bf.beta2;

    // Figure data: model-vs-data removal histograms and a sample trajectory.
    {
        const aqua::DetermCurves curves = aqua::estimate_determ_curves(cfg);
        for (const auto* dist : {&dist_early, &dist_match}) {
            Eigen::Index row = 0;
            (void)aqua::locate_dates;  // nearest grid point below
            double best = 1e300;
            for (Eigen::Index i = 0; i < curves.grid.size(); ++i) {
                const double d = std::fabs(curves.grid[i] - dist->t);
                if (d < best) {
                    best = d;
                    row = i;
                }
            }
            std::map<int, int> model_hist, data_hist;
            for (Eigen::Index j = 0; j < curves.removals.cols(); ++j)
                ++model_hist[static_cast<int>(curves.removals(row, j))];
            for (int c : dist->counts) ++data_hist[c];
            int max_count = 0;
            for (const auto& [k, v] : model_hist) max_count = std::max(max_count, k);
            for (const auto& [k, v] : data_hist) max_count = std::max(max_count, k);
            std::vector<std::vector<double>> cols(3);
            for (int c = 0; c <= max_count; ++c) {
                cols[0].push_back(c);
                const auto mi = model_hist.find(c);
                cols[1].push_back(mi == model_hist.end()
                                      ? 0.0
                                      : static_cast<double>(mi->second) /
                                            static_cast<double>(curves.n_paths));
                const auto di = data_hist.find(c);
                cols[2].push_back(di == data_hist.end()
                                      ? 0.0
                                      : static_cast<double>(di->second) /
                                            static_cast<double>(dist->counts.size()));
            }
            char name[64];
            std::snprintf(name, sizeof name, "removal_hist_t%.2f.csv", dist->t);
            aqua::write_csv(join(out_dir, name), {"count", "model_freq", "data_freq"},
                            cols);
            add(name);
        }

        const aqua::HostParasitePathSet sample = aqua::simulate_host_parasite(
            cfg.bio, cfg.threshold, cfg.fine_grid(), 1,
            {cfg.global.seed, aqua::rng_stream::curves_block | aqua::rng_stream::lice},
            /*first_path=*/1);
        aqua::write_paths_csv(join(out_dir, "sample_trajectory.csv"), sample.grid,
                              {&sample.host, &sample.parasite, &sample.removals},
                              {"host", "parasite", "removals"});
        add("sample_trajectory.csv");
    }

    // Scenarios: both feeding modes, plus treatment-rate sensitivity.
    json scenarios = json::array();
    for (const auto feeding :
         {aqua::FeedingModel::stochastic, aqua::FeedingModel::deterministic}) {
        const aqua::ScenarioEngine engine(cfg, feeding);
        const aqua::ScenarioOutcome oc = engine.run();
        scenarios.push_back(report_to_json(oc));
        if (feeding == aqua::FeedingModel::stochastic) {
            json sens = json::array();
            for (const double rate : {0.01, 0.015, 0.02})
                sens.push_back(report_to_json(engine.run(rate)));
            write_json(join(out_dir, "treatment_rate_sensitivity.json"), sens);
            add("treatment_rate_sensitivity.json");
        }
    }
    write_json(join(out_dir, "scenario_report.json"), scenarios);
    add("scenario_report.json");

    man.notes.emplace_back("lambda", std::to_string(lf.lambda));
    man.notes.emplace_back("beta1", std::to_string(bf.beta1));
    man.notes.emplace_back("beta2", std::to_string(bf.beta2));
    man.notes.emplace_back("n_periods", std::to_string(periods.size()));
    man.notes.emplace_back("n_segments", std::to_string(segments.size()));
    man.notes.emplace_back("skipped_rows", std::to_string(parsed.skipped_rows));
    man.save(join(out_dir, "manifest.json"));
    std::cout << "pipeline: done; lambda " << lf.lambda << ", beta (" << bf.beta1
              << ", " << bf.beta2 << "); reports in " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Salmon farm valuation under stochastic lice-driven mortality"};
    app.require_subcommand(1);

    CommonOpts sim_o;
    std::string sim_out = "out";
    CLI::App* sim = app.add_subcommand("simulate", "simulate market and biology paths");
    add_common(sim, sim_o);
    sim->add_option("--out", sim_out, "output directory");

    CLI::App* cal = app.add_subcommand("calibrate", "fit biology parameters");
    cal->require_subcommand(1);
    CommonOpts lam_o;
    std::string lam_segments, lam_out = "lambda_fit.json";
    CLI::App* lam = cal->add_subcommand("lambda", "fit the reproduction rate");
    add_common(lam, lam_o, false);
    lam->add_option("--segments", lam_segments, "green segments CSV")->required();
    lam->add_option("--out", lam_out, "output JSON");
    CommonOpts bet_o;
    std::string bet_target, bet_out = "beta_fit.json";
    double bet_lambda = 0.0, bet_zeta = 0.0;
    int bet_paths = 0;
    CLI::App* bet = cal->add_subcommand("beta", "fit treatment effectiveness");
    add_common(bet, bet_o, false);
    bet->add_option("--target", bet_target, "removal distribution JSON")->required();
    bet->add_option("--lambda", bet_lambda, "reproduction rate to use");
    bet->add_option("--zeta", bet_zeta, "moment-matching exponent");
    bet->add_option("--paths", bet_paths, "simulation paths per evaluation");
    bet->add_option("--out", bet_out, "output JSON");

    CommonOpts sol_o;
    std::string sol_mode = "stoch", sol_feeding = "stoch", sol_out = "rule.json",
                sol_report;
    CLI::App* sol = app.add_subcommand("solve", "fit a harvesting rule");
    add_common(sol, sol_o);
    sol->add_option("--mode", sol_mode, "mortality model: stoch|determ")
        ->check(CLI::IsMember({"stoch", "determ"}));
    sol->add_option("--feeding", sol_feeding, "feeding model: stoch|determ")
        ->check(CLI::IsMember({"stoch", "determ"}));
    sol->add_option("--out", sol_out, "rule JSON path");
    sol->add_option("--report", sol_report, "evaluation report JSON path");

    CommonOpts cmp_o;
    std::vector<std::string> cmp_rules;
    std::string cmp_out = "comparison.json", cmp_tau;
    CLI::App* cmp = app.add_subcommand("compare", "compare two fitted rules");
    add_common(cmp, cmp_o);
    cmp->add_option("--rules", cmp_rules, "two rule JSON files")->expected(2);
    cmp->add_option("--out", cmp_out, "report JSON path");
    cmp->add_option("--tau-csv", cmp_tau, "per-path stopping times CSV");

    CommonOpts pip_o;
    std::string pip_data, pip_region, pip_out = "run";
    bool pip_synth = false;
    int pip_farms = 120;
    CLI::App* pip = app.add_subcommand("pipeline", "ingest, calibrate, solve, compare");
    add_common(pip, pip_o);
    pip->add_option("--data", pip_data, "weekly lice export CSV");
    pip->add_flag("--synthetic", pip_synth, "generate a synthetic export instead");
    pip->add_option("--farms", pip_farms, "synthetic farm count");
    pip->add_option("--region", pip_region, "region filter");
    pip->add_option("--out", pip_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_o, sim_out);
        if (lam->parsed()) return cmd_calibrate_lambda(lam_o, lam_segments, lam_out);
        if (bet->parsed())
            return cmd_calibrate_beta(bet_o, bet_target, bet_lambda, bet_zeta,
                                      bet_paths, bet_out);
        if (sol->parsed())
            return cmd_solve(sol_o, sol_mode, sol_feeding, sol_out, sol_report);
        if (cmp->parsed()) return cmd_compare(cmp_o, cmp_rules, cmp_out, cmp_tau);
        if (pip->parsed())
            return cmd_pipeline(pip_o, pip_data, pip_synth, pip_farms, pip_region,
                                pip_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
