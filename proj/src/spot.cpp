#include "dro/spot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dro {

StateClearing per_state_clearing(const MarketInstance& inst, double q, double s,
                                 const Tolerances& tol) {
    const double avail = std::max(inst.load_l - q, 0.0);
    const double mean = inst.rt_price.mean(s);
    const double p0 = inst.disutility.dphi(0.0);

    auto demand = [&](double pi) {
        if (pi >= mean * inst.wind.cdf(s, avail)) return 0.0;
        return std::max(avail - inst.wind.inv_cdf(s, pi / mean), 0.0);
    };
    auto supply = [&](double pi) {
        if (pi <= p0) return 0.0;
        return std::min(inst.disutility.inv_dphi(pi), inst.load_l);
    };

    // zero trade: demand already choked at the supply curve's lower end
    if (demand(p0) <= 0.0) return {0.0, p0};

    const double phi = std::max(p0 + 1e-12, mean * inst.wind.cdf(s, avail));
    const double price = find_root(
        [&](double pi) { return supply(pi) - demand(pi); }, p0, phi, tol);
    return {supply(price), price};
}

SpotEquilibrium spot_equilibrium(const MarketInstance& inst, const Tolerances& tol,
                                 int grid_n) {
    const PlannerSolution planner = solve_dr(inst, tol, grid_n);
    SpotEquilibrium eq;
    eq.q_star = planner.q;
    eq.s_nodes.resize(grid_n);
    eq.y.resize(grid_n);
    eq.price.resize(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        const double s = double(i) / (grid_n - 1);
        const StateClearing c = per_state_clearing(inst, eq.q_star, s, tol);
        eq.s_nodes[i] = s;
        eq.y[i] = c.y;
        eq.price[i] = c.price;
    }

    Policy ypol{eq.s_nodes, eq.y};
    Policy ppol{eq.s_nodes, eq.price};
    const double q = eq.q_star;
    eq.j_lse = inst.pi_da * q +
               inst.expect([&](double s) {
                   const double y = ypol(s);
                   const double z = std::max(inst.load_l - q - y, 0.0);
                   return ppol(s) * y +
                          inst.rt_price.mean(s) * wind_shortfall(inst.wind, s, z);
               }, tol);
    eq.j_agg = inst.expect([&](double s) {
        const double y = ypol(s);
        return inst.disutility.phi(y) - ppol(s) * y;
    }, tol);
    eq.j_cp = eq.j_lse + eq.j_agg;
    return eq;
}

OptimalityCheck verify_social_optimality(const SpotEquilibrium& eq,
                                         const PlannerSolution& ref) {
    OptimalityCheck check;
    Policy refpol = ref.policy;
    for (std::size_t i = 0; i < eq.s_nodes.size(); ++i)
        check.max_policy_gap = std::max(check.max_policy_gap,
                                        std::abs(eq.y[i] - refpol(eq.s_nodes[i])));
    check.cost_gap_rel = std::abs(eq.j_cp - ref.expected_cost) /
                         std::max(std::abs(ref.expected_cost), 1e-300);
    check.pass = check.max_policy_gap <= 1e-6 && check.cost_gap_rel <= 1e-6;
    return check;
}

} // namespace dro
