#ifndef DRO_SPOT_HPP
#define DRO_SPOT_HPP

#include <vector>

#include "dro/models.hpp"
#include "dro/numerics.hpp"
#include "dro/planner.hpp"

namespace dro {

struct StateClearing {
    double y = 0.0;
    double price = 0.0;
};

// Intersects the state-s curtailment demand and supply curves given q.
// Zero-trade convention: if the curves only meet at y = 0 the reported price
// is phi'(0), the supply curve's lower end.
StateClearing per_state_clearing(const MarketInstance& inst, double q, double s,
                                 const Tolerances& tol = {});

struct SpotEquilibrium {
    double q_star = 0.0;
    std::vector<double> s_nodes;
    std::vector<double> y;      // cleared curtailment per node
    std::vector<double> price;  // contingent price per node
    double j_lse = 0.0;
    double j_agg = 0.0;
    double j_cp = 0.0;
};

SpotEquilibrium spot_equilibrium(const MarketInstance& inst, const Tolerances& tol = {},
                                 int grid_n = 513);

struct OptimalityCheck {
    double max_policy_gap = 0.0;   // max |y_s^spot - y_s^planner| over nodes
    double cost_gap_rel = 0.0;     // |j_cp - planner cost| / planner cost
    bool pass = false;
};

OptimalityCheck verify_social_optimality(const SpotEquilibrium& eq,
                                         const PlannerSolution& ref);

} // namespace dro

#endif
