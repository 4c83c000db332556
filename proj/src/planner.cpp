#include "dro/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dro {

double Policy::operator()(double at) const {
    if (s.empty()) return 0.0;
    if (at <= s.front()) return y.front();
    if (at >= s.back()) return y.back();
    auto it = std::upper_bound(s.begin(), s.end(), at);
    const std::size_t i = std::size_t(it - s.begin()) - 1;
    const double w = (at - s[i]) / (s[i + 1] - s[i]);
    return (1.0 - w) * y[i] + w * y[i + 1];
}

Policy Policy::zero() { return Policy{}; }

double planner_cost(const MarketInstance& inst, double q, const ScalarFn& policy,
                    const Tolerances& tol) {
    return inst.pi_da * q +
           inst.expect(
               [&](double s) {
                   const double y = policy(s);
                   const double z = std::max(inst.load_l - q - y, 0.0);
                   return inst.disutility.phi(y) +
                          inst.rt_price.mean(s) * wind_shortfall(inst.wind, s, z);
               },
               tol);
}

double no_dr_foc(const MarketInstance& inst, double q, const Tolerances& tol) {
    return inst.pi_da -
           inst.expect([&](double s) {
               return inst.rt_price.mean(s) * inst.wind.cdf(s, inst.load_l - q);
           }, tol);
}

PlannerSolution solve_no_dr(const MarketInstance& inst, const Tolerances& tol) {
    PlannerSolution sol;
    sol.has_dr = false;
    sol.policy = Policy::zero();
    const double f0 = no_dr_foc(inst, 0.0, tol);
    if (f0 >= 0.0) {
        // day-ahead never cheaper: no interior root of the first-order condition
        sol.q = 0.0;
        sol.boundary = true;
        sol.foc_residual = f0;
    } else {
        sol.q = find_root([&](double q) { return no_dr_foc(inst, q, tol); },
                          0.0, inst.load_l, tol);
        sol.foc_residual = no_dr_foc(inst, sol.q, tol);
    }
    sol.expected_cost = planner_cost(inst, sol.q, [](double) { return 0.0; }, tol);
    return sol;
}

double second_stage_dr(const MarketInstance& inst, double q, double s,
                       const Tolerances& tol) {
    const double avail = inst.load_l - q;
    if (avail <= 0.0) return 0.0;
    const double marginal0 = inst.rt_price.mean(s) * inst.wind.cdf(s, avail);
    if (inst.disutility.dphi(0.0) >= marginal0) return 0.0;
    return find_root(
        [&](double y) {
            return inst.disutility.dphi(y) -
                   inst.rt_price.mean(s) * inst.wind.cdf(s, avail - y);
        },
        0.0, avail, tol);
}

double dr_foc(const MarketInstance& inst, double q, const Tolerances& tol) {
    return inst.pi_da -
           inst.expect([&](double s) {
               const double y = second_stage_dr(inst, q, s, tol);
               return inst.rt_price.mean(s) * inst.wind.cdf(s, inst.load_l - q - y);
           }, tol);
}

double dr_cost_of_q(const MarketInstance& inst, double q, const Tolerances& tol) {
    return inst.pi_da * q +
           inst.expect(
               [&](double s) {
                   const double y = second_stage_dr(inst, q, s, tol);
                   const double z = std::max(inst.load_l - q - y, 0.0);
                   return inst.disutility.phi(y) +
                          inst.rt_price.mean(s) * wind_shortfall(inst.wind, s, z);
               },
               tol);
}

PlannerSolution solve_dr(const MarketInstance& inst, const Tolerances& tol, int grid_n) {
    if (grid_n < 2) throw std::invalid_argument("solve_dr: grid_n >= 2 required");
    PlannerSolution sol;
    sol.has_dr = true;
    const double f0 = dr_foc(inst, 0.0, tol);
    if (f0 >= 0.0) {
        sol.q = 0.0;
        sol.boundary = true;
        sol.foc_residual = f0;
    } else {
        sol.q = find_root([&](double q) { return dr_foc(inst, q, tol); },
                          0.0, inst.load_l, tol);
        sol.foc_residual = dr_foc(inst, sol.q, tol);
    }
    sol.policy.s.resize(grid_n);
    sol.policy.y.resize(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        const double s = double(i) / (grid_n - 1);
        sol.policy.s[i] = s;
        sol.policy.y[i] = second_stage_dr(inst, sol.q, s, tol);
    }
    const Policy& pol = sol.policy;
    sol.expected_cost = planner_cost(inst, sol.q, [&pol](double s) { return pol(s); }, tol);
    return sol;
}

OracleSolution oracle_grid_search(const MarketInstance& inst, int nq, int ny,
                                  bool with_dr, int s_nodes) {
    if (nq < 100 || ny < 100)
        throw std::invalid_argument("oracle_grid_search: nq, ny >= 100 required");
    std::vector<double> sn, sw;
    gauss_legendre(s_nodes, 0.0, 1.0, sn, sw);
    std::vector<double> mean(s_nodes), weight(s_nodes);
    for (int i = 0; i < s_nodes; ++i) {
        mean[i] = inst.rt_price.mean(sn[i]);
        weight[i] = sw[i] * inst.info_state.pdf(sn[i]);
    }

    OracleSolution best;
    best.cost = std::numeric_limits<double>::infinity();
    std::vector<double> ybuf(s_nodes, 0.0);

    for (int iq = 0; iq < nq; ++iq) {
        const double q = inst.load_l * double(iq) / (nq - 1);
        double cost = inst.pi_da * q;
        for (int i = 0; i < s_nodes; ++i) {
            const double avail = std::max(inst.load_l - q, 0.0);
            double ysel = 0.0;
            if (with_dr && avail > 0.0) {
                auto node_cost = [&](std::size_t j) {
                    const double y = avail * double(j) / (ny - 1);
                    return inst.disutility.phi(y) +
                           mean[i] * wind_shortfall(inst.wind, sn[i], avail - y);
                };
                const std::size_t j = grid_argmin_unimodal(node_cost, std::size_t(ny));
                ysel = avail * double(j) / (ny - 1);
            }
            ybuf[i] = ysel;
            cost += weight[i] * (inst.disutility.phi(ysel) +
                                 mean[i] * wind_shortfall(inst.wind, sn[i],
                                                          std::max(inst.load_l - q - ysel, 0.0)));
        }
        if (cost < best.cost) {
            best.cost = cost;
            best.q = q;
            best.s_nodes = sn;
            best.y = ybuf;
        }
    }
    return best;
}

} // namespace dro
