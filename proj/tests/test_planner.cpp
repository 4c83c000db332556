#include "doctest.h"

#include <cmath>

#include "dro/planner.hpp"

using namespace dro;

namespace {
const MarketInstance& cs() {
    static const MarketInstance inst = build_case_study();
    return inst;
}
} // namespace

TEST_CASE("Policy: interpolation and extrapolation clamp") {
    Policy p;
    p.s = {0.0, 0.5, 1.0};
    p.y = {0.0, 1.0, 0.5};
    CHECK(p(0.25) == doctest::Approx(0.5));
    CHECK(p(0.75) == doctest::Approx(0.75));
    CHECK(p(-1.0) == doctest::Approx(0.0));
    CHECK(p(2.0) == doctest::Approx(0.5));
    CHECK(Policy::zero()(0.37) == 0.0);
}

TEST_CASE("solve_no_dr: case study") {
    const PlannerSolution sol = solve_no_dr(cs());
    CHECK(sol.q == doctest::Approx(0.768321824714).epsilon(1e-8));
    CHECK(sol.expected_cost == doctest::Approx(50.5229990792).epsilon(1e-8));
    CHECK(std::abs(sol.foc_residual) < 1e-8);
    CHECK_FALSE(sol.has_dr);
    CHECK_FALSE(sol.boundary);
    CHECK(std::abs(no_dr_foc(cs(), sol.q)) < 1e-8);
}

TEST_CASE("second_stage_dr: case study states") {
    // s = 0, q = 0: the unclamped linear intersection lies past the wind
    // support end l - y > sup(0) = 2, so the CDF saturates and the balance
    // 15 + 30 y = 31.71 * P_0(3 - y) solves at y with 3 - y <= 2
    const double y00 = second_stage_dr(cs(), 0.0, 0.0);
    CHECK(y00 == doctest::Approx(0.557).epsilon(1e-3));
    const double q_dr = solve_dr(cs()).q;
    CHECK(second_stage_dr(cs(), q_dr, 0.5) == doctest::Approx(0.389036872).epsilon(1e-6));
    // zero branch: with everything bought day-ahead there is no shortfall risk
    CHECK(second_stage_dr(cs(), 3.0, 0.5) == 0.0);
    // curtailment decreases in q
    CHECK(second_stage_dr(cs(), 1.0, 0.5) < second_stage_dr(cs(), 0.2, 0.5));
}

TEST_CASE("solve_dr: case study") {
    const PlannerSolution sol = solve_dr(cs());
    CHECK(sol.q == doctest::Approx(0.377576238).epsilon(1e-7));
    CHECK(sol.expected_cost == doctest::Approx(48.1366935465).epsilon(1e-8));
    CHECK(sol.has_dr);
    CHECK(std::abs(sol.foc_residual) < 1e-8);
    CHECK(std::abs(dr_foc(cs(), sol.q)) < 1e-8);
    // DR strictly improves on no-DR and reduces the day-ahead purchase
    const PlannerSolution ndr = solve_no_dr(cs());
    CHECK(sol.expected_cost < ndr.expected_cost);
    CHECK(sol.q < ndr.q);
    // policy grid covers [0,1] and matches the second stage pointwise
    CHECK(sol.policy.s.front() == 0.0);
    CHECK(sol.policy.s.back() == 1.0);
    for (double s : {0.0, 0.31, 0.77, 1.0})
        CHECK(sol.policy(s) == doctest::Approx(second_stage_dr(cs(), sol.q, s)).epsilon(1e-6));
}

TEST_CASE("planner_cost: consistency with the solvers") {
    const PlannerSolution dr = solve_dr(cs());
    const double cost = planner_cost(cs(), dr.q, [&](double s) { return dr.policy(s); });
    CHECK(cost == doctest::Approx(dr.expected_cost).epsilon(1e-12));
    const PlannerSolution ndr = solve_no_dr(cs());
    const double cost0 = planner_cost(cs(), ndr.q, [](double) { return 0.0; });
    CHECK(cost0 == doctest::Approx(ndr.expected_cost).epsilon(1e-10));
    // buying nothing day-ahead with no response is strictly worse
    CHECK(planner_cost(cs(), 0.0, [](double) { return 0.0; }) ==
          doctest::Approx(52.313865222).epsilon(1e-7));
    // any perturbed q is worse than the optimum
    CHECK(dr_cost_of_q(cs(), dr.q) == doctest::Approx(dr.expected_cost).epsilon(1e-8));
    CHECK(dr_cost_of_q(cs(), dr.q + 0.2) > dr.expected_cost);
    CHECK(dr_cost_of_q(cs(), dr.q - 0.2) > dr.expected_cost);
}

TEST_CASE("oracle_grid_search: agrees with the analytic solvers") {
    const OracleSolution o_dr = oracle_grid_search(cs(), 800, 800, true, 64);
    const PlannerSolution dr = solve_dr(cs());
    CHECK(std::abs(o_dr.q - dr.q) < 5e-3);
    CHECK(std::abs(o_dr.cost - dr.expected_cost) / dr.expected_cost < 1e-3);
    const OracleSolution o_ndr = oracle_grid_search(cs(), 800, 100, false, 64);
    const PlannerSolution ndr = solve_no_dr(cs());
    CHECK(std::abs(o_ndr.q - ndr.q) < 5e-3);
    CHECK(std::abs(o_ndr.cost - ndr.expected_cost) / ndr.expected_cost < 1e-3);
}

TEST_CASE("boundary: expensive day-ahead pins q at zero") {
    MarketInstance inst = build_case_study();
    inst.wind = WindModel::degenerate();
    inst.rt_price = RtPriceModel::linear(10.0, 0.0);  // rt cheaper than pi_da = 26.76
    inst.disutility = DisutilityFn::quadratic(1.0, 1.0);
    const PlannerSolution ndr = solve_no_dr(inst);
    CHECK(ndr.q == 0.0);
    CHECK(ndr.boundary);
    // no wind at all: the no-DR cost is the full load at the rt price
    CHECK(ndr.expected_cost == doctest::Approx(30.0).epsilon(1e-9));
    const PlannerSolution dr = solve_dr(inst);
    CHECK(dr.q == 0.0);
    CHECK(dr.boundary);
    // cheap DR replaces the entire rt purchase: cost = phi(3) = 3 + 9
    CHECK(dr.expected_cost == doctest::Approx(12.0).epsilon(1e-6));
}
