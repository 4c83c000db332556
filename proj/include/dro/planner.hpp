#ifndef DRO_PLANNER_HPP
#define DRO_PLANNER_HPP

#include <vector>

#include "dro/models.hpp"
#include "dro/numerics.hpp"

namespace dro {

// Curtailment policy tabulated on an s-grid with linear interpolation.
struct Policy {
    std::vector<double> s;
    std::vector<double> y;

    double operator()(double at) const;
    static Policy zero();
};

struct PlannerSolution {
    double q = 0.0;
    double expected_cost = 0.0;
    Policy policy;
    double foc_residual = 0.0;
    bool has_dr = false;
    bool boundary = false;  // q pinned at 0 because the first-order condition has no interior root
};

// Optimal day-ahead purchase with no demand response (policy == 0).
PlannerSolution solve_no_dr(const MarketInstance& inst, const Tolerances& tol = {});

// State-s optimal curtailment given the day-ahead purchase q.
double second_stage_dr(const MarketInstance& inst, double q, double s,
                       const Tolerances& tol = {});

// Jointly optimal (q, y_s) for the social planner with demand response.
PlannerSolution solve_dr(const MarketInstance& inst, const Tolerances& tol = {},
                         int grid_n = 513);

// Expected system cost of an arbitrary (q, policy) pair.
double planner_cost(const MarketInstance& inst, double q, const ScalarFn& policy,
                    const Tolerances& tol = {});

// First-order-condition residuals (analytic gradients of the expected cost).
double no_dr_foc(const MarketInstance& inst, double q, const Tolerances& tol = {});
double dr_foc(const MarketInstance& inst, double q, const Tolerances& tol = {});

// Expected cost as a function of q alone, with the second stage re-optimized
// inside the expectation (used by the gradient test suite).
double dr_cost_of_q(const MarketInstance& inst, double q, const Tolerances& tol = {});

// Brute-force verification oracle: exhaustive q-grid with per-node y-grid
// argmins over fixed Gauss-Legendre nodes. Test use only.
struct OracleSolution {
    double q = 0.0;
    double cost = 0.0;
    std::vector<double> s_nodes;
    std::vector<double> y;
};
OracleSolution oracle_grid_search(const MarketInstance& inst, int nq, int ny,
                                  bool with_dr = true, int s_nodes = 128);

} // namespace dro

#endif
