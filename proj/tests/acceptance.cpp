// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "dro/models.hpp"
#include "dro/numerics.hpp"
#include "dro/options.hpp"
#include "dro/planner.hpp"
#include "dro/simulate.hpp"
#include "dro/spot.hpp"

using namespace dro;

namespace {

int g_criteria_failed = 0;
int g_checks_failed = 0;

#define REQUIRE(cond)                                                          \
    do {                                                                       \
        if (!(cond)) {                                                         \
            ++g_checks_failed;                                                 \
            std::printf("    check failed at %s:%d: %s\n", __FILE__, __LINE__, \
                        #cond);                                                \
        }                                                                      \
    } while (0)

void criterion(int id, const char* title, void (*body)()) {
    const int before = g_checks_failed;
    try {
        body();
    } catch (const std::exception& e) {
        ++g_checks_failed;
        std::printf("    exception: %s\n", e.what());
    }
    const bool ok = g_checks_failed == before;
    if (!ok) ++g_criteria_failed;
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, title);
}

const MarketInstance& cs() {
    static const MarketInstance inst = build_case_study();
    return inst;
}

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// ---------------------------------------------------------------- criterion 1

void c1_validation() {
    REQUIRE(validate_assumptions(cs()).pass());

    // randomized well-posed instances (deterministic seeds)
    for (int k = 0; k < 5; ++k) {
        auto u = [&](int i) { return counter_uniform(1000 + k, i, 0); };
        MarketInstance inst;
        inst.load_l = 2.5 + u(0);
        inst.disutility = DisutilityFn::quadratic(10.0 + 10.0 * u(1), 10.0 + 10.0 * u(2));
        inst.info_state = InfoStateModel::truncated_normal(0.4 + 0.2 * u(3), 0.15 + 0.15 * u(4));
        inst.wind = WindModel::uniform_support(1.5 + u(5), 0.5 + u(6));
        inst.rt_price = RtPriceModel::linear(30.0 + 3.0 * u(7), -2.0 - 3.0 * u(8));
        const double cap = inst.expect([&](double s) {
            return inst.rt_price.mean(s) * inst.wind.cdf(s, inst.load_l);
        });
        inst.pi_da = 0.9 * cap;  // keeps the day-ahead discount strict
        REQUIRE(validate_assumptions(inst).pass());
    }

    // each assumption violation is detected individually
    MarketInstance v = cs();
    v.wind = WindModel::degenerate();
    REQUIRE(!validate_assumptions(v).a1_wind_ordering);
    v = cs();
    v.rt_price = RtPriceModel::linear(28.0, 3.71);
    REQUIRE(!validate_assumptions(v).a1_price_ordering);
    v = cs();
    v.disutility = DisutilityFn::tabulated({0.0, 1e6}, {15.0, 15.0});
    REQUIRE(!validate_assumptions(v).a2_convexity);
    v = cs();
    v.pi_da = 100.0;
    REQUIRE(!validate_assumptions(v).a3_discount);
}

// ---------------------------------------------------------------- criterion 2

void c2_sandwich() {
    std::vector<double> strikes;
    for (double sp = 15.0; sp <= 40.0 + 1e-9; sp += 0.1) strikes.push_back(sp);
    const double lp = default_l_prime(cs());
    const WelfareReport rep = welfare_report(cs(), lp, strikes, Tolerances{}, 4);
    REQUIRE(rep.rows.size() == strikes.size());
    REQUIRE(rep.sandwich_ok);
    for (const WelfareRow& row : rep.rows) {
        REQUIRE(row.j_tilde >= rep.j_cp - 1e-8);
        REQUIRE(row.j_tilde <= rep.j_ndr + 1e-8);
    }
}

// ---------------------------------------------------------------- criterion 3

void c3_original_calibrated() {
    MarketInstance inst = build_case_study();
    inst.wind = WindModel::uniform_support(1.5, 0.96);
    const double sps[4] = {15.0, 24.1, 28.7, 38.0};
    const double ref_pio[4] = {11.759, 2.658, 0.0, 0.0};
    const double ref_x[4] = {0.3919, 0.4177, 0.4567, 0.0};
    const double ref_q[4] = {0.8383, 0.8360, 1.1892, 1.2302};
    for (int i = 0; i < 4; ++i) {
        const OptionsEquilibrium eq = solve_original_ce(inst, sps[i]);
        REQUIRE(std::abs(eq.pi_o - ref_pio[i]) < 0.01);
        REQUIRE(std::abs(eq.x - ref_x[i]) < 0.01);
        REQUIRE(std::abs(eq.q - ref_q[i]) < 0.01);
        REQUIRE(std::abs(eq.resid_foc_q) < 1e-6);
        REQUIRE(std::abs(eq.resid_option_price) < 1e-6);
        REQUIRE(std::abs(eq.resid_agg) < 1e-6);
    }
}

// ---------------------------------------------------------------- criterion 4

void c4_redesigned_regimes() {
    const double lp = default_l_prime(cs());
    const double j_ndr = solve_no_dr(cs()).expected_cost;

    // regime (i): low strike, every state exercises in full
    const OptionsEquilibrium lo = solve_redesigned_ce(cs(), lp, 18.0);
    REQUIRE(lo.x > 0.0);
    REQUIRE(lo.s1 >= 1.0 - 1e-9);
    REQUIRE(lo.pi_o > 0.0);

    // regime (ii): interior strike, partial-exercise band
    const OptionsEquilibrium mid = solve_redesigned_ce(cs(), lp, 24.0);
    REQUIRE(mid.x > 0.0);
    REQUIRE(mid.s1 > 0.0);
    REQUIRE(mid.s1 < mid.s2);
    REQUIRE(mid.s2 <= 1.0);

    // regime (iii): strike above the rt price range, market collapses to no-DR
    const OptionsEquilibrium hi = solve_redesigned_ce(cs(), lp, 38.0);
    REQUIRE(hi.x == 0.0);
    REQUIRE(hi.pi_o == 0.0);
    REQUIRE(std::abs(hi.j_cp - j_ndr) <= 1e-12);

    // the regimes tile the strike axis in order
    double last_x = lp;
    for (double sp = 16.0; sp <= 36.0 + 1e-9; sp += 1.0) {
        const OptionsEquilibrium eq = solve_redesigned_ce(cs(), lp, sp);
        REQUIRE(eq.x >= -1e-15);
        REQUIRE(eq.x <= lp + 1e-12);
        REQUIRE(eq.q == lp - eq.x);
        (void)last_x;
    }
}

// ---------------------------------------------------------------- criterion 5

void c5_optimal_strike() {
    const double lp = default_l_prime(cs());
    const OptimalStrike best = optimal_strike(cs(), lp);
    REQUIRE(best.pi_sp >= cs().disutility.dphi(0.0) - 1e-9);
    REQUIRE(best.pi_sp <= cs().disutility.dphi(lp) + 1e-9);
    REQUIRE(best.residual_defined);
    REQUIRE(best.fixed_point_residual <= 1e-3);
    // minimality against a strike scan
    for (double sp = 16.0; sp <= 36.0 + 1e-9; sp += 0.25) {
        const OptionsEquilibrium eq = solve_redesigned_ce(cs(), lp, sp);
        REQUIRE(best.eq.j_cp <= eq.j_cp + 1e-8);
    }
}

// ---------------------------------------------------------------- criterion 6

void c6_brute_force_oracles() {
    const PlannerSolution ndr = solve_no_dr(cs());
    const OracleSolution o_ndr = oracle_grid_search(cs(), 3000, 100, false, 128);
    REQUIRE(close_rel(o_ndr.cost, ndr.expected_cost, 1e-3));
    REQUIRE(std::abs(o_ndr.q - ndr.q) < 5e-3);

    const PlannerSolution dr = solve_dr(cs());
    const OracleSolution o_dr = oracle_grid_search(cs(), 3000, 3000, true, 128);
    REQUIRE(close_rel(o_dr.cost, dr.expected_cost, 1e-3));
    REQUIRE(std::abs(o_dr.q - dr.q) < 5e-3);
    // oracle per-state curtailments track the analytic policy
    double max_gap = 0.0;
    for (std::size_t i = 0; i < o_dr.s_nodes.size(); ++i)
        max_gap = std::max(max_gap, std::abs(o_dr.y[i] - dr.policy(o_dr.s_nodes[i])));
    REQUIRE(max_gap < 5e-3);

    // redesigned market: equilibrium x minimizes the system objective on a grid
    const double lp = default_l_prime(cs());
    for (double sp : {20.0, 24.0, 28.0}) {
        const OptionsEquilibrium eq = solve_redesigned_ce(cs(), lp, sp);
        double best_x = 0.0, best_f = 1e300;
        const int nx = 2000;
        for (int i = 0; i <= nx; ++i) {
            const double x = lp * i / nx;
            const double f = redesigned_objective(cs(), lp, x, sp);
            if (f < best_f) { best_f = f; best_x = x; }
        }
        REQUIRE(std::abs(eq.x - best_x) < 5e-3);
        REQUIRE(close_rel(eq.j_cp, best_f, 1e-3));
    }
}

// ---------------------------------------------------------------- criterion 7

void c7_gradient_suite() {
    const Tolerances tight = Tolerances{}.with_quad_rel(1e-12);
    const double h = 2e-4;  // small enough for O(h^2) truncation below the 1e-5 gate,
                            // large enough to stay above the 1e-12 quadrature noise
    auto fd_ok = [&](double analytic, double fplus, double fminus) {
        const double fd = (fplus - fminus) / (2.0 * h);
        return std::abs(analytic - fd) <= 1e-5 * std::max(1.0, std::abs(analytic));
    };

    // day-ahead gradients of the planner costs
    for (double q : {0.3, 0.5, 0.8}) {
        REQUIRE(fd_ok(no_dr_foc(cs(), q, tight),
                      planner_cost(cs(), q + h, [](double) { return 0.0; }, tight),
                      planner_cost(cs(), q - h, [](double) { return 0.0; }, tight)));
        REQUIRE(fd_ok(dr_foc(cs(), q, tight), dr_cost_of_q(cs(), q + h, tight),
                      dr_cost_of_q(cs(), q - h, tight)));
    }

    // per-state stationarity of the second stage at interior states
    const double q_dr = solve_dr(cs()).q;
    for (double s : {0.1, 0.5, 0.9}) {
        const double y = second_stage_dr(cs(), q_dr, s, tight);
        REQUIRE(y > 0.0);
        const double gap = cs().disutility.dphi(y) -
                           cs().rt_price.mean(s) * cs().wind.cdf(s, cs().load_l - q_dr - y);
        REQUIRE(std::abs(gap) < 1e-8);
    }

    // original-market LSE and aggregator partials
    const double pi_sp = 24.0, pi_o = 2.66;
    for (double q : {0.35, 0.45}) {
        for (double x : {0.3, 0.45}) {
            REQUIRE(fd_ok(original_lse_dq(cs(), q, x, pi_sp, tight),
                          original_lse_cost(cs(), q + h, x, pi_o, pi_sp, tight),
                          original_lse_cost(cs(), q - h, x, pi_o, pi_sp, tight)));
            REQUIRE(fd_ok(original_lse_dx(cs(), q, x, pi_o, pi_sp, tight),
                          original_lse_cost(cs(), q, x + h, pi_o, pi_sp, tight),
                          original_lse_cost(cs(), q, x - h, pi_o, pi_sp, tight)));
            REQUIRE(fd_ok(original_agg_dx(cs(), q, x, pi_o, pi_sp, tight),
                          original_agg_cost(cs(), q, x + h, pi_o, pi_sp, tight),
                          original_agg_cost(cs(), q, x - h, pi_o, pi_sp, tight)));
        }
    }

    // envelope derivative of the redesigned optimum in the strike
    const double lp = default_l_prime(cs());
    for (double sp : {21.0, 24.5, 27.0}) {
        const OptionsEquilibrium eq = solve_redesigned_ce(cs(), lp, sp, tight);
        REQUIRE(fd_ok(redesigned_cost_dsp(cs(), lp, eq.x, sp, tight),
                      solve_redesigned_ce(cs(), lp, sp + h, tight).j_cp,
                      solve_redesigned_ce(cs(), lp, sp - h, tight).j_cp));
    }
}

// ---------------------------------------------------------------- criterion 8

void c8_monte_carlo() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t n = 1000000, seed = 20240817;

    // spot bundle: lse/agg/system all have analytic references
    const SpotEquilibrium spot = spot_equilibrium(cs());
    DecisionBundle sb;
    sb.q = spot.q_star;
    sb.y_policy = Policy{spot.s_nodes, spot.y};
    sb.payments = PaymentKind::Spot;
    sb.price_curve = Policy{spot.s_nodes, spot.price};
    AnalyticRefs srefs{spot.j_lse, spot.j_agg, spot.j_cp};
    const MCReport smc = monte_carlo(cs(), sb, n, seed, &srefs);
    REQUIRE(smc.max_identity_error == 0.0);
    REQUIRE(std::abs(smc.z_lse) <= 3.0);
    REQUIRE(std::abs(smc.z_agg) <= 3.0);
    REQUIRE(std::abs(smc.z_system) <= 3.0);

    // redesigned options bundle at an interior strike
    const double lp = default_l_prime(cs());
    const OptionsEquilibrium eq = solve_redesigned_ce(cs(), lp, 24.0);
    DecisionBundle ob;
    ob.q = eq.q;
    ob.payments = PaymentKind::Options;
    ob.pi_o = eq.pi_o;
    ob.pi_sp = eq.pi_sp;
    ob.x = eq.x;
    const int grid_n = 1025;
    ob.y_policy.s.resize(grid_n);
    ob.y_policy.y.resize(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        ob.y_policy.s[i] = double(i) / (grid_n - 1);
        ob.y_policy.y[i] = exercise_policy(cs(), eq.q, eq.x, eq.pi_sp, ob.y_policy.s[i]);
    }
    AnalyticRefs orefs{eq.j_lse, eq.j_agg, eq.j_cp};
    const MCReport omc = monte_carlo(cs(), ob, n, seed + 1, &orefs);
    REQUIRE(omc.max_identity_error == 0.0);
    REQUIRE(std::abs(omc.z_lse) <= 3.0);
    REQUIRE(std::abs(omc.z_agg) <= 3.0);
    REQUIRE(std::abs(omc.z_system) <= 3.0);

    // planner bundle: system cost only
    const PlannerSolution dr = solve_dr(cs());
    DecisionBundle pb;
    pb.q = dr.q;
    pb.y_policy = dr.policy;
    pb.payments = PaymentKind::None;
    AnalyticRefs prefs{0.0, 0.0, dr.expected_cost};
    const MCReport pmc = monte_carlo(cs(), pb, n, seed + 2, &prefs);
    REQUIRE(pmc.max_identity_error == 0.0);
    REQUIRE(std::abs(pmc.z_system) <= 3.0);

    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0).count();
    REQUIRE(secs < 30.0);
}

// ---------------------------------------------------------------- criterion 9

void c9_headline_comparison() {
    const PlannerSolution ndr = solve_no_dr(cs());
    const PlannerSolution dr = solve_dr(cs());
    std::printf("    headline values (computed vs. reference, informational only):\n");
    std::printf("      q_ndr: computed %.6f   reference 1.23\n", ndr.q);
    std::printf("      J_ndr: computed %.6f  reference 56.77\n", ndr.expected_cost);
    std::printf("      q_dr:  computed %.6f   reference 0.84\n", dr.q);
    std::printf("      J_dr:  computed %.6f  reference 53.95\n", dr.expected_cost);
    // sanity only; the reference values are a documented comparison, not a gate
    REQUIRE(dr.expected_cost < ndr.expected_cost);
    REQUIRE(ndr.q > 0.0);
    REQUIRE(dr.q > 0.0);
}

} // namespace

int main() {
    criterion(1, "assumption validation accepts well-posed instances, rejects violations",
              c1_validation);
    criterion(2, "redesigned welfare is sandwiched between the benchmarks", c2_sandwich);
    criterion(3, "original market reproduces the calibrated reference curves",
              c3_original_calibrated);
    criterion(4, "redesigned market exhibits the three strike regimes", c4_redesigned_regimes);
    criterion(5, "optimal strike is bracketed, minimal, and fixed-point consistent",
              c5_optimal_strike);
    criterion(6, "solvers agree with brute-force grid oracles", c6_brute_force_oracles);
    criterion(7, "analytic gradients match finite differences", c7_gradient_suite);
    criterion(8, "Monte-Carlo ex-post costs match analytic expectations", c8_monte_carlo);
    criterion(9, "headline case-study values reported beside the reference figures",
              c9_headline_comparison);

    if (g_criteria_failed) {
        std::printf("%d criterion(s) failed\n", g_criteria_failed);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
