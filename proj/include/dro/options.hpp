#ifndef DRO_OPTIONS_HPP
#define DRO_OPTIONS_HPP

#include <optional>
#include <string>
#include <vector>

#include "dro/models.hpp"
#include "dro/numerics.hpp"

namespace dro {

enum class MarketVariant { Original, Redesigned };

struct OptionsEquilibrium {
    MarketVariant variant = MarketVariant::Original;
    double pi_sp = 0.0;   // strike price, $/MWh
    double pi_o = 0.0;    // option premium, $/MWh-right
    double x = 0.0;       // option volume
    double q = 0.0;       // day-ahead volume (redesigned: q = l_prime - x)
    double l_prime = 0.0; // redesigned offer size (0 for original)
    double s1 = 0.0;      // full-exercise boundary
    double s2 = 0.0;      // zero-exercise boundary
    double j_lse = 0.0;
    double j_agg = 0.0;
    double j_cp = 0.0;

    // diagnostics
    double resid_foc_q = 0.0;       // day-ahead first-order condition
    double resid_option_price = 0.0;// premium consistency (LSE side)
    double resid_agg = 0.0;         // aggregator stationarity (full-exercise form)
    double resid_agg_alt = 0.0;     // alternative aggregator form over [0, s2]
    double j_literal = 0.0;         // redesigned objective without transfer cancellation
};

// Optimal exercised volume in state s for a holder of x options at strike
// pi_sp with day-ahead volume q_eff.
double exercise_policy(const MarketInstance& inst, double q_eff, double x,
                       double pi_sp, double s);

struct RegimeBounds {
    double s1 = 0.0;  // y = x on [0, s1]
    double s2 = 0.0;  // y = 0 on [s2, 1]
};

RegimeBounds regime_boundaries(const MarketInstance& inst, double q_eff, double x,
                               double pi_sp, const Tolerances& tol = {});

// Competitive equilibrium of the original options market at the given strike.
// Branches: interior stationary point with positive exercise mass and a
// nonnegative premium; else the zero-premium equilibrium selecting the largest
// fully-priced volume; else (no exercise at any state) x = 0, q = q_ndr.
OptionsEquilibrium solve_original_ce(const MarketInstance& inst, double pi_sp,
                                     const Tolerances& tol = {});

// Offer size guaranteeing LSE participation: the no-DR optimal purchase.
double default_l_prime(const MarketInstance& inst, const Tolerances& tol = {});

// Competitive equilibrium of the redesigned market (x + q = l_prime).
OptionsEquilibrium solve_redesigned_ce(const MarketInstance& inst, double l_prime,
                                       double pi_sp, const Tolerances& tol = {});

// System objective of the redesigned market as a function of x (transfers
// cancelled); exposed for the gradient suite and the welfare report.
double redesigned_objective(const MarketInstance& inst, double l_prime, double x,
                            double pi_sp, const Tolerances& tol = {});

// LSE expected cost in the original market for arbitrary (q, x) at fixed
// premium/strike, with the optimal exercise policy inside (gradient suite).
double original_lse_cost(const MarketInstance& inst, double q, double x,
                         double pi_o, double pi_sp, const Tolerances& tol = {});
// Analytic partial derivatives of original_lse_cost.
double original_lse_dq(const MarketInstance& inst, double q, double x,
                       double pi_sp, const Tolerances& tol = {});
double original_lse_dx(const MarketInstance& inst, double q, double x,
                       double pi_o, double pi_sp, const Tolerances& tol = {});

// Aggregator expected profit-side cost and its x-derivative (original market).
double original_agg_cost(const MarketInstance& inst, double q, double x,
                         double pi_o, double pi_sp, const Tolerances& tol = {});
double original_agg_dx(const MarketInstance& inst, double q, double x,
                       double pi_o, double pi_sp, const Tolerances& tol = {});

struct StrikeSweepRow {
    double pi_sp = 0.0;
    std::optional<OptionsEquilibrium> eq;
    std::string error;
};

std::vector<StrikeSweepRow> strike_sweep(const MarketInstance& inst,
                                         MarketVariant variant, double l_prime,
                                         const std::vector<double>& strikes,
                                         const Tolerances& tol = {}, int jobs = 1);

std::vector<double> default_strike_grid(const MarketInstance& inst);

struct OptimalStrike {
    double pi_sp = 0.0;
    OptionsEquilibrium eq;
    double fixed_point_residual = 0.0;
    bool residual_defined = false;
};

// Strike minimizing the redesigned system cost over [phi'(0), phi'(l_prime)].
OptimalStrike optimal_strike(const MarketInstance& inst, double l_prime,
                             const Tolerances& tol = {});

// Analytic derivative of the optimal redesigned system cost in the strike
// (envelope form; gradient suite).
double redesigned_cost_dsp(const MarketInstance& inst, double l_prime, double x,
                           double pi_sp, const Tolerances& tol = {});

struct WelfareRow {
    double pi_sp = 0.0;
    double j_tilde = 0.0;  // redesigned optimal system cost at this strike
};

struct WelfareReport {
    double j_cp = 0.0;     // contingent-price benchmark (planner optimum)
    double j_ndr = 0.0;    // no-DR benchmark
    std::vector<WelfareRow> rows;
    bool sandwich_ok = true;
    double offending_strike = 0.0;
    double min_gap_lower = 0.0;  // min over strikes of j_tilde - j_cp
    double min_gap_upper = 0.0;  // min over strikes of j_ndr - j_tilde
    double best_strike = 0.0;
    double welfare_gap = 0.0;    // j_tilde(best) - j_cp
};

WelfareReport welfare_report(const MarketInstance& inst, double l_prime,
                             const std::vector<double>& strikes,
                             const Tolerances& tol = {}, int jobs = 1);

} // namespace dro

#endif
