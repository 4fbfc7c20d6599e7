#include "aqua/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace aqua {

Eigen::ArrayXd DetermCurves::mean_treat_frac(double rate) const {
    if (rate < 0.0) throw std::invalid_argument("mean_treat_frac: negative rate");
    return (rate * removals).min(1.0).rowwise().mean();
}

DetermCurves estimate_determ_curves(const FarmConfig& cfg, int n_paths) {
    cfg.validate();
    if (n_paths == 0) n_paths = cfg.global.train_paths;
    const Eigen::VectorXd grid = cfg.fine_grid();
    const RngStream stream{cfg.global.seed,
                           rng_stream::curves_block | rng_stream::lice};
    const HostParasitePathSet paths =
        simulate_host_parasite(cfg.bio, cfg.threshold, grid, n_paths, stream);
    DetermCurves c;
    c.grid = grid;
    c.mean_host = paths.host.rowwise().mean();
    c.removals = paths.removals;
    c.n_paths = n_paths;
    return c;
}

RawSnapshots simulate_snapshots(const FarmConfig& cfg, FeedingModel feeding,
                                bool with_biology, const DetermCurves& curves,
                                int n_paths, std::uint64_t stream_block) {
    cfg.validate();
    if (n_paths < 1) throw std::invalid_argument("simulate_snapshots: n_paths < 1");
    const Eigen::VectorXd grid = cfg.fine_grid();
    if (curves.mean_host.size() != grid.size())
        throw std::invalid_argument("simulate_snapshots: curve grid mismatch");
    const std::vector<Eigen::Index> idx = cfg.exercise_indices();
    const Eigen::Index n_dates = static_cast<Eigen::Index>(idx.size());
    const double r = cfg.global.r;

    RawSnapshots out;
    out.dates = cfg.exercise_dates();
    out.date_index = idx;
    out.feeding = feeding;
    out.n_paths = n_paths;
    out.salmon_spot.resize(n_paths, n_dates);
    out.salmon_yield.resize(n_paths, n_dates);
    if (feeding == FeedingModel::stochastic) {
        out.soy_spot.resize(n_paths, n_dates);
        out.soy_yield.resize(n_paths, n_dates);
    }
    if (with_biology) {
        out.host.resize(n_paths, n_dates);
        out.parasite.resize(n_paths, n_dates);
        out.removals.resize(n_paths, n_dates);
        out.cum_feed.resize(n_paths, n_dates);
    }
    out.cum_feed_determ.resize(n_paths, n_dates);

    // Deterministic ingredients shared by every block.
    const Eigen::ArrayXXd mean_host_col = curves.mean_host;
    Eigen::ArrayXXd feed_det_col;
    if (feeding == FeedingModel::deterministic) {
        const Eigen::ArrayXd rel = mean_relative_spot_curve(cfg.soy, r, grid);
        feed_det_col = feeding_cost_curve(rel, cfg.costs.feed_base);
    }

    const RngStream salmon_stream{cfg.global.seed, stream_block | rng_stream::salmon};
    const RngStream soy_stream{cfg.global.seed, stream_block | rng_stream::soy};
    const RngStream lice_stream{cfg.global.seed, stream_block | rng_stream::lice};

    const int block = cfg.global.block_paths;
    for (int first = 0; first < n_paths; first += block) {
        const int nb = std::min(block, n_paths - first);

        const CommodityPathSet salmon =
            simulate_two_factor(cfg.salmon, r, grid, nb, salmon_stream, first);

        Eigen::ArrayXXd feed;  // feeding cost level per path (or one column)
        CommodityPathSet soy;
        if (feeding == FeedingModel::stochastic) {
            soy = simulate_two_factor(cfg.soy, r, grid, nb, soy_stream, first);
            feed = feeding_cost_curve(
                Eigen::ArrayXXd(soy.spot / cfg.soy.s0), cfg.costs.feed_base);
        } else {
            feed = feed_det_col;
        }

        const Eigen::ArrayXXd cf_det =
            cumulative_feeding(grid, feed, mean_host_col, cfg.growth,
                               cfg.costs.feed_conversion, r);

        HostParasitePathSet hp;
        Eigen::ArrayXXd cf_stoch;
        if (with_biology) {
            hp = simulate_host_parasite(cfg.bio, cfg.threshold, grid, nb, lice_stream,
                                        first);
            cf_stoch = cumulative_feeding(grid, feed, hp.host, cfg.growth,
                                          cfg.costs.feed_conversion, r);
        }

        for (Eigen::Index k = 0; k < n_dates; ++k) {
            const Eigen::Index gi = idx[static_cast<std::size_t>(k)];
            for (int j = 0; j < nb; ++j) {
                const Eigen::Index row = first + j;
                out.salmon_spot(row, k) = salmon.spot(gi, j);
                out.salmon_yield(row, k) = salmon.conv_yield(gi, j);
                if (feeding == FeedingModel::stochastic) {
                    out.soy_spot(row, k) = soy.spot(gi, j);
                    out.soy_yield(row, k) = soy.conv_yield(gi, j);
                }
                if (with_biology) {
                    out.host(row, k) = hp.host(gi, j);
                    out.parasite(row, k) = hp.parasite(gi, j);
                    out.removals(row, k) = hp.removals(gi, j);
                    out.cum_feed(row, k) = cf_stoch(gi, j);
                }
                out.cum_feed_determ(row, k) =
                    cf_det(gi, cf_det.cols() == 1 ? 0 : j);
            }
        }
    }
    return out;
}

ExercisePayoffMatrix assemble_payoff(const RawSnapshots& snaps,
                                     const DetermCurves& curves,
                                     const FarmConfig& cfg, MortalityModel mortality,
                                     double treatment_rate) {
    if (treatment_rate < 0.0)
        throw std::invalid_argument("assemble_payoff: negative treatment rate");
    const Eigen::Index n = snaps.n_paths;
    const Eigen::Index n_dates = snaps.dates.size();
    const bool stoch_mort = mortality == MortalityModel::stochastic;
    if (stoch_mort && snaps.host.size() == 0)
        throw std::invalid_argument("assemble_payoff: snapshots lack biology");

    StateSpec spec;
    spec.feed_factors = snaps.feeding == FeedingModel::stochastic;
    spec.biology = stoch_mort;

    // Deterministic-mortality ingredients at the dates.
    Eigen::ArrayXd host_det(n_dates), ct_det(n_dates);
    if (!stoch_mort) {
        const Eigen::ArrayXd ct_curve = curves.mean_treat_frac(treatment_rate);
        for (Eigen::Index k = 0; k < n_dates; ++k) {
            const Eigen::Index gi = snaps.date_index[static_cast<std::size_t>(k)];
            host_det[k] = curves.mean_host[gi];
            ct_det[k] = ct_curve[gi];
        }
    }

    ExercisePayoffMatrix out;
    out.dates = snaps.dates;
    out.date_index = snaps.date_index;
    out.spec = spec;
    out.payoff.resize(n, n_dates);
    out.state.reserve(static_cast<std::size_t>(n_dates));

    for (Eigen::Index k = 0; k < n_dates; ++k) {
        const double t = snaps.dates[k];
        const double disc = std::exp(-cfg.global.r * t);
        const double w = bertalanffy_weight(t, cfg.growth);
        Eigen::MatrixXd st(n, spec.dim());
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s1 = snaps.salmon_spot(j, k);
            const double host = stoch_mort ? snaps.host(j, k) : host_det[k];
            const double ct =
                stoch_mort
                    ? treatment_cost_fraction(snaps.removals(j, k), treatment_rate)
                    : ct_det[k];
            const double cf =
                stoch_mort ? snaps.cum_feed(j, k) : snaps.cum_feed_determ(j, k);
            const double b = host * w;
            out.payoff(j, k) = disc * ((1.0 - ct) * s1 * b - cfg.costs.harvest * b) - cf;
            int c = 0;
            st(j, c++) = s1;
            st(j, c++) = snaps.salmon_yield(j, k);
            if (spec.feed_factors) {
                st(j, c++) = snaps.soy_spot(j, k);
                st(j, c++) = snaps.soy_yield(j, k);
            }
            if (spec.biology) {
                st(j, c++) = snaps.host(j, k);
                st(j, c++) = snaps.parasite(j, k);
            }
        }
        out.state.push_back(std::move(st));
    }
    return out;
}

ScenarioEngine::ScenarioEngine(const FarmConfig& cfg, FeedingModel feeding)
    : cfg_(cfg), feeding_(feeding) {
    cfg_.validate();
    curves_ = estimate_determ_curves(cfg_);
    train_stoch_ = simulate_snapshots(cfg_, feeding_, true, curves_,
                                      cfg_.global.train_paths,
                                      rng_stream::training_block);
    // The benchmark rule sees no biology at all; an independent market block
    // keeps its regression decoupled from the stochastic rule's.
    FarmConfig shifted = cfg_;
    shifted.global.seed = cfg_.global.seed + 1;
    train_determ_ = simulate_snapshots(shifted, feeding_, false, curves_,
                                       cfg_.global.train_paths,
                                       rng_stream::training_block);
    eval_ = simulate_snapshots(cfg_, feeding_, true, curves_, cfg_.global.eval_paths,
                               rng_stream::evaluation_block);
}

ScenarioOutcome ScenarioEngine::run(double treatment_rate) const {
    ScenarioOutcome res;
    res.feeding = feeding_;
    res.treatment_rate = treatment_rate;

    const ExercisePayoffMatrix train_s = assemble_payoff(
        train_stoch_, curves_, cfg_, MortalityModel::stochastic, treatment_rate);
    res.rule_stoch = solve_rule(train_s, cfg_.solver);
    res.rule_stoch.mortality = MortalityModel::stochastic;
    res.rule_stoch.feeding = feeding_;

    const ExercisePayoffMatrix train_d = assemble_payoff(
        train_determ_, curves_, cfg_, MortalityModel::deterministic, treatment_rate);
    res.rule_determ = solve_rule(train_d, cfg_.solver);
    res.rule_determ.mortality = MortalityModel::deterministic;
    res.rule_determ.feeding = feeding_;

    const ExercisePayoffMatrix eval_s = assemble_payoff(
        eval_, curves_, cfg_, MortalityModel::stochastic, treatment_rate);
    const ExercisePayoffMatrix eval_d = assemble_payoff(
        eval_, curves_, cfg_, MortalityModel::deterministic, treatment_rate);
    res.report = compare_rules(res.rule_stoch, res.rule_determ, eval_s, eval_d);
    return res;
}

ScenarioOutcome ScenarioEngine::run() const { return run(cfg_.costs.treatment_rate); }

void write_synthetic_lice_csv(const std::string& path, const FarmConfig& cfg,
                              int n_farms, std::uint64_t seed) {
    cfg.validate();
    if (n_farms < 1) throw std::invalid_argument("synthetic corpus: n_farms < 1");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "locality_id;year;week;adult_female_lpf;moving_lpf;stuck_lpf;"
           "mechanical_flag;medicinal_flag;cleanerfish_flag;region\n";

    char buf[64];
    for (int f = 0; f < n_farms; ++f) {
        PathRng noise(seed, rng_stream::synthetic_block, static_cast<std::uint64_t>(f));

        // Farm-specific start, stocking level and period length.
        const int start_year = 2013 + f % 8;
        const int start_week = 1 + (5 * f) % 40;
        const int n_weeks = 100 + static_cast<int>(noise.uniform(0.0, 40.0));
        const bool other_region = f % 17 == 2;
        const bool medicinal_farm = f % 13 == 5;
        const bool lpf_gap = f % 7 == 3;        // short missing-lpf stretch
        const bool fallow_gap = f % 11 == 7;    // long gap: the period splits

        BioParams bio = cfg.bio;
        bio.lpf0 = cfg.bio.lpf0 * std::exp(0.5 * noise.normal());

        Eigen::VectorXd grid(n_weeks);
        for (int i = 0; i < n_weeks; ++i) grid[i] = i / 52.0;
        const RngStream events{seed, rng_stream::synthetic_block | rng_stream::lice};
        const HostParasitePathSet hp = simulate_host_parasite(
            bio, cfg.threshold, grid, 1, events, /*first_path=*/f);

        const std::string region = other_region ? "Nordland" : "Trøndelag";
        for (int i = 0; i < n_weeks; ++i) {
            long long aw = static_cast<long long>(start_year) * 52 + (start_week - 1) + i;
            const int year = static_cast<int>(aw / 52);
            const int week = static_cast<int>(aw % 52) + 1;
            if (fallow_gap && i >= 60 && i < 66) continue;  // no rows at all

            const bool mech = i > 0 && hp.removals(i, 0) > hp.removals(i - 1, 0);
            const bool med = medicinal_farm && i == 45;
            const double ratio = hp.parasite(i, 0) / hp.host(i, 0);
            const double obs = ratio * std::exp(0.1 * noise.normal());
            const bool lpf_missing = lpf_gap && i >= 30 && i < 32;

            out << 10000 + f << ';' << year << ';' << week << ';';
            if (!lpf_missing) {
                std::snprintf(buf, sizeof buf, "%.4f", obs);
                out << buf;
            }
            std::snprintf(buf, sizeof buf, ";%.4f;%.4f;", 0.8 * obs, 0.3 * obs);
            out << buf << (mech ? 1 : 0) << ';' << (med ? 1 : 0) << ";0;" << region
                << '\n';
        }
    }
}

}  // namespace aqua
