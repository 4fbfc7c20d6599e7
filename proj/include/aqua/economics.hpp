#pragma once

#include <Eigen/Core>
#include <vector>

#include "aqua/biology.hpp"
#include "aqua/commodity.hpp"

namespace aqua {

// Per-kg cost structure, quoted in the salmon price currency.
struct CostParams {
    double spot_ref = 95.0;        // reference salmon price the costs scale from
    double production = 47.5;      // accumulated production cost per kg
    double harvest = 4.75;         // harvesting cost per kg
    double feed_base = 11.875;     // feeding cost level per kg of growth
    double setup = 14.25;          // smolt and other up-front cost per kg
    double feed_conversion = 1.1;  // kg feed per kg of fish growth
    double treatment_rate = 0.015; // value fraction lost per lice removal

    void validate() const;

    // Conventional cost breakdown: production half the reference price,
    // harvesting 10% of production, feeding 25%, setup 30%.
    static CostParams scaled_from(double spot_ref_price);
};

// Margin-adjusted initial salmon price: the costs already sunk per kg are
// netted out of the observed price, the recoverable ones added back.
double adjusted_initial_spot(const CostParams& cp);

// CT_t = min(1, rate * removals): fraction of harvest value lost to the
// treatments performed so far.
double treatment_cost_fraction(double removals, double rate);
Eigen::ArrayXd treatment_cost_fraction(const Eigen::ArrayXd& removals, double rate);
Eigen::ArrayXXd treatment_cost_fraction(const Eigen::ArrayXXd& removals, double rate);

// F_t = feed_base * relative_price_t.  The relative price curve must start
// at 1 (it is a price ratio) and stay positive.
Eigen::ArrayXd feeding_cost_curve(const Eigen::ArrayXd& relative_price,
                                  double feed_base);
Eigen::ArrayXXd feeding_cost_curve(const Eigen::ArrayXXd& relative_price,
                                   double feed_base);

// Discounted cumulative feeding cost on the grid:
//   CF_i = integral_0^{t_i} e^{-r s} F_s H_s w'(s) feed_conversion ds
// by the trapezoid rule.  Columns are paths; a one-column factor broadcasts
// against a many-column one.
Eigen::ArrayXXd cumulative_feeding(const Eigen::VectorXd& grid,
                                   const Eigen::ArrayXXd& feed_cost,
                                   const Eigen::ArrayXXd& host,
                                   const GrowthParams& g, double feed_conversion,
                                   double r);
Eigen::ArrayXd cumulative_feeding(const Eigen::VectorXd& grid,
                                  const Eigen::ArrayXd& feed_cost,
                                  const Eigen::ArrayXd& host,
                                  const GrowthParams& g, double feed_conversion,
                                  double r);

// Which components enter the regression state at each date.  Spot prices
// and convenience yields of the salmon market always do.
struct StateSpec {
    bool feed_factors = false;  // soy spot and yield
    bool biology = false;       // host and parasite counts

    int dim() const { return 2 + (feed_factors ? 2 : 0) + (biology ? 2 : 0); }
};

// Discounted exercise values and regression states at the exercise dates.
// payoff(j, k): stopping path j at date k, in time-0 money (the cumulative
// feeding cost inside is already discounted).  state[k] is n_paths x dim
// ordered [S1, d1, S2, d2, H, P] with absent blocks skipped.
struct ExercisePayoffMatrix {
    Eigen::VectorXd dates;
    std::vector<Eigen::Index> date_index;  // positions of the dates in the fine grid
    Eigen::MatrixXd payoff;                // n_paths x n_dates
    std::vector<Eigen::MatrixXd> state;    // one block per date
    StateSpec spec;
};

// Assemble the stopping problem inputs from fine-grid paths.  All path
// arrays share the salmon grid; `soy` and `parasite` may be null when the
// state spec does not use them.  Exercise dates must be grid points.
ExercisePayoffMatrix exercise_payoff(const CommodityPathSet& salmon,
                                     const CommodityPathSet* soy,
                                     const Eigen::ArrayXXd& host,
                                     const Eigen::ArrayXXd* parasite,
                                     const Eigen::ArrayXXd& treat_frac,
                                     const Eigen::ArrayXXd& cum_feed,
                                     const GrowthParams& g, const CostParams& cp,
                                     double r, const Eigen::VectorXd& exercise_dates,
                                     const StateSpec& spec);

// Locate each date in the grid (within tolerance); throws if one is absent.
std::vector<Eigen::Index> locate_dates(const Eigen::VectorXd& grid,
                                       const Eigen::VectorXd& dates,
                                       double tol = 1e-9);

}  // namespace aqua
