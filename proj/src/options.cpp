#include "dro/options.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "dro/planner.hpp"

namespace dro {

namespace {

double exercise_mass(const MarketInstance& inst, double upto, const Tolerances& tol) {
    if (upto <= 0.0) return 0.0;
    return integrate([&](double s) { return inst.info_state.pdf(s); }, 0.0, upto, tol);
}

} // namespace

double exercise_policy(const MarketInstance& inst, double q_eff, double x,
                       double pi_sp, double s) {
    if (x <= 0.0) return 0.0;
    const double mean = inst.rt_price.mean(s);
    if (pi_sp >= mean) return 0.0;  // inverse-CDF argument out of range: never exercise
    const double ratio = pi_sp / mean;
    const double avail = inst.load_l - q_eff;
    if (inst.wind.cdf(s, avail) <= ratio) return 0.0;
    if (inst.wind.cdf(s, avail - x) > ratio) return x;
    return std::clamp(avail - inst.wind.inv_cdf(s, ratio), 0.0, x);
}

RegimeBounds regime_boundaries(const MarketInstance& inst, double q_eff, double x,
                               double pi_sp, const Tolerances& tol) {
    const double avail = inst.load_l - q_eff;
    RegimeBounds rb;
    rb.s1 = monotone_threshold(
        [&](double s) {
            return inst.rt_price.mean(s) * inst.wind.cdf(s, avail - x) - pi_sp;
        },
        0.0, 1.0, tol);
    rb.s2 = monotone_threshold(
        [&](double s) {
            return inst.rt_price.mean(s) * inst.wind.cdf(s, avail) - pi_sp;
        },
        0.0, 1.0, tol);
    return rb;
}

// ----------------------------------------------------------- original market

double original_lse_cost(const MarketInstance& inst, double q, double x,
                         double pi_o, double pi_sp, const Tolerances& tol) {
    const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
    return pi_o * x + inst.pi_da * q +
           inst.expect(
               [&](double s) {
                   const double y = exercise_policy(inst, q, x, pi_sp, s);
                   const double z = std::max(inst.load_l - q - y, 0.0);
                   return pi_sp * y +
                          inst.rt_price.mean(s) * wind_shortfall(inst.wind, s, z);
               },
               tol, {rb.s1, rb.s2});
}

double original_lse_dq(const MarketInstance& inst, double q, double x,
                       double pi_sp, const Tolerances& tol) {
    const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
    return inst.pi_da -
           inst.expect(
               [&](double s) {
                   const double y = exercise_policy(inst, q, x, pi_sp, s);
                   return inst.rt_price.mean(s) * inst.wind.cdf(s, inst.load_l - q - y);
               },
               tol, {rb.s1, rb.s2});
}

double original_lse_dx(const MarketInstance& inst, double q, double x,
                       double pi_o, double pi_sp, const Tolerances& tol) {
    const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
    double integral = 0.0;
    if (rb.s1 > 0.0)
        integral = integrate(
            [&](double s) {
                return (inst.rt_price.mean(s) * inst.wind.cdf(s, inst.load_l - q - x) - pi_sp) *
                       inst.info_state.pdf(s);
            },
            0.0, rb.s1, tol);
    return pi_o - integral;
}

double original_agg_cost(const MarketInstance& inst, double q, double x,
                         double pi_o, double pi_sp, const Tolerances& tol) {
    const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
    return inst.expect(
               [&](double s) {
                   const double y = exercise_policy(inst, q, x, pi_sp, s);
                   return inst.disutility.phi(y) - pi_sp * y;
               },
               tol, {rb.s1, rb.s2}) -
           pi_o * x;
}

double original_agg_dx(const MarketInstance& inst, double q, double x,
                       double pi_o, double pi_sp, const Tolerances& tol) {
    const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
    const double mass = exercise_mass(inst, rb.s1, tol);
    return (inst.disutility.dphi(x) - pi_sp) * mass - pi_o;
}

namespace {

// Day-ahead volume clearing the original-market first-order condition for a
// fixed option volume x (boundary q = 0 when the condition has no root).
double original_q_of_x(const MarketInstance& inst, double x, double pi_sp,
                       const Tolerances& tol) {
    auto foc = [&](double q) {
        const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
        return inst.pi_da -
               inst.expect(
                   [&](double s) {
                       const double y = exercise_policy(inst, q, x, pi_sp, s);
                       return inst.rt_price.mean(s) *
                              inst.wind.cdf(s, inst.load_l - q - y);
                   },
                   tol, {rb.s1, rb.s2});
    };
    if (foc(0.0) >= 0.0) return 0.0;
    return find_root(foc, 0.0, inst.load_l, tol);
}

OptionsEquilibrium assemble_original(const MarketInstance& inst, double q, double x,
                                     double pi_o, double pi_sp, const Tolerances& tol) {
    OptionsEquilibrium eq;
    eq.variant = MarketVariant::Original;
    eq.pi_sp = pi_sp;
    eq.pi_o = pi_o;
    eq.x = x;
    eq.q = q;
    const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
    eq.s1 = rb.s1;
    eq.s2 = rb.s2;

    eq.j_lse = original_lse_cost(inst, q, x, pi_o, pi_sp, tol);
    eq.j_agg = original_agg_cost(inst, q, x, pi_o, pi_sp, tol);
    eq.j_cp = eq.j_lse + eq.j_agg;

    eq.resid_foc_q = original_lse_dq(inst, q, x, pi_sp, tol);
    eq.resid_option_price = original_lse_dx(inst, q, x, pi_o, pi_sp, tol);
    eq.resid_agg = original_agg_dx(inst, q, x, pi_o, pi_sp, tol);
    // alternative aggregator form: integrate the exercised marginal over [0, s2]
    double alt = 0.0;
    if (rb.s2 > 0.0)
        alt = integrate(
            [&](double s) {
                const double y = exercise_policy(inst, q, x, pi_sp, s);
                return (inst.disutility.dphi(y) - pi_sp) * inst.info_state.pdf(s);
            },
            0.0, rb.s2, {rb.s1}, tol);
    eq.resid_agg_alt = alt - pi_o;
    eq.j_literal = eq.j_cp;
    return eq;
}

} // namespace

OptionsEquilibrium solve_original_ce(const MarketInstance& inst, double pi_sp,
                                     const Tolerances& tol) {
    if (pi_sp < 0.0) throw std::invalid_argument("solve_original_ce: pi_sp >= 0 required");

    // stationarity gap of the aggregator's volume choice at x, with q cleared
    auto g = [&](double x, bool& has_mass) {
        const double q = original_q_of_x(inst, x, pi_sp, tol);
        const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
        if (rb.s1 <= 0.0) { has_mass = false; return 0.0; }
        has_mass = true;
        return integrate(
            [&](double s) {
                return (inst.rt_price.mean(s) * inst.wind.cdf(s, inst.load_l - q - x) -
                        inst.disutility.dphi(x)) *
                       inst.info_state.pdf(s);
            },
            0.0, rb.s1, tol);
    };

    // bracket scan over the feasible volume range
    double x_hi = inst.load_l;
    const double top_marginal = inst.rt_price.mean(0.0);
    if (inst.disutility.dphi(x_hi) > top_marginal)
        x_hi = std::min(x_hi, inst.disutility.inv_dphi(top_marginal));
    const int scan_n = 96;
    double prev_x = 0.0, prev_g = 0.0;
    bool prev_valid = false, found = false;
    double root_x = 0.0;
    for (int i = 1; i <= scan_n; ++i) {
        const double xx = x_hi * double(i) / scan_n;
        bool has_mass = false;
        const double gx = g(xx, has_mass);
        if (!has_mass) { prev_valid = false; continue; }
        if (prev_valid && prev_g > 0.0 && gx <= 0.0) {
            root_x = find_root(
                [&](double x) {
                    bool m = false;
                    const double v = g(x, m);
                    return m ? v : -1.0;  // mass vanishing means overshoot
                },
                prev_x, xx, tol);
            found = true;
            break;
        }
        prev_x = xx;
        prev_g = gx;
        prev_valid = true;
    }

    if (found) {
        const double q = original_q_of_x(inst, root_x, pi_sp, tol);
        const RegimeBounds rb = regime_boundaries(inst, q, root_x, pi_sp, tol);
        const double mass = exercise_mass(inst, rb.s1, tol);
        const double pi_o = (inst.disutility.dphi(root_x) - pi_sp) * mass;
        if (mass > 0.0 && pi_o >= 0.0)
            return assemble_original(inst, q, root_x, pi_o, pi_sp, tol);
    }

    // zero-premium equilibrium family: pick the largest volume that is still
    // fully priced, with q cleared against the uncapped exercise policy
    auto foc_uncapped = [&](double q) {
        const double avail = inst.load_l - q;
        const double s_cut = monotone_threshold(
            [&](double s) {
                return inst.rt_price.mean(s) * inst.wind.cdf(s, avail) - pi_sp;
            },
            0.0, 1.0, tol);
        return inst.pi_da -
               inst.expect(
                   [&](double s) {
                       const double mean = inst.rt_price.mean(s);
                       double y = 0.0;
                       if (pi_sp < mean) {
                           const double ratio = pi_sp / mean;
                           if (inst.wind.cdf(s, avail) > ratio)
                               y = std::max(avail - inst.wind.inv_cdf(s, ratio), 0.0);
                       }
                       return mean * inst.wind.cdf(s, avail - y);
                   },
                   tol, {s_cut});
    };
    double q = 0.0;
    if (foc_uncapped(0.0) < 0.0)
        q = find_root(foc_uncapped, 0.0, inst.load_l, tol);

    double x = 0.0;
    if (pi_sp < inst.rt_price.mean(0.0)) {
        const double ratio0 = pi_sp / inst.rt_price.mean(0.0);
        x = std::max(inst.load_l - q - inst.wind.inv_cdf(0.0, ratio0), 0.0);
    }
    if (x == 0.0) {
        // no exercise at any state: the market degenerates to the no-DR planner
        const PlannerSolution ndr = solve_no_dr(inst, tol);
        q = ndr.q;
    }
    return assemble_original(inst, q, x, 0.0, pi_sp, tol);
}

// --------------------------------------------------------- redesigned market

double default_l_prime(const MarketInstance& inst, const Tolerances& tol) {
    return solve_no_dr(inst, tol).q;
}

double redesigned_objective(const MarketInstance& inst, double l_prime, double x,
                            double pi_sp, const Tolerances& tol) {
    const double q = l_prime - x;
    const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
    return inst.pi_da * q +
           inst.expect(
               [&](double s) {
                   const double y = exercise_policy(inst, q, x, pi_sp, s);
                   const double z = std::max(inst.load_l - q - y, 0.0);
                   return inst.disutility.phi(y) +
                          inst.rt_price.mean(s) * wind_shortfall(inst.wind, s, z);
               },
               tol, {rb.s1, rb.s2});
}

OptionsEquilibrium solve_redesigned_ce(const MarketInstance& inst, double l_prime,
                                       double pi_sp, const Tolerances& tol) {
    if (l_prime < 0.0 || l_prime > inst.load_l)
        throw std::invalid_argument("solve_redesigned_ce: l_prime in [0, load_l] required");
    if (pi_sp < 0.0) throw std::invalid_argument("solve_redesigned_ce: pi_sp >= 0 required");

    double x = 0.0, fx = 0.0;
    // x = 0 boundary evaluated through the planner formula so the no-exercise
    // regime reproduces the no-DR benchmark bit for bit
    const double f_zero = planner_cost(inst, l_prime, [](double) { return 0.0; }, tol);
    if (l_prime == 0.0) {
        x = 0.0;
        fx = f_zero;
    } else {
        const MinimizeResult m = minimize_scalar(
            [&](double xx) { return redesigned_objective(inst, l_prime, xx, pi_sp, tol); },
            0.0, l_prime, tol);
        const double snap = std::max(10.0 * tol.min_abs, 1e-12);
        x = m.x;
        fx = m.fx;
        if (x <= snap || f_zero <= fx) {
            x = 0.0;
            fx = f_zero;
        } else if (x >= l_prime - snap) {
            x = l_prime;
            fx = redesigned_objective(inst, l_prime, x, pi_sp, tol);
        }
    }

    OptionsEquilibrium eq;
    eq.variant = MarketVariant::Redesigned;
    eq.pi_sp = pi_sp;
    eq.l_prime = l_prime;
    eq.x = x;
    eq.q = l_prime - x;
    const RegimeBounds rb = regime_boundaries(inst, eq.q, x, pi_sp, tol);
    eq.s1 = rb.s1;
    eq.s2 = rb.s2;

    double premium = 0.0;
    if (rb.s2 > 0.0 && x > 0.0)
        premium = integrate(
            [&](double s) {
                const double y = exercise_policy(inst, eq.q, x, pi_sp, s);
                return (inst.disutility.dphi(y) - pi_sp) * inst.info_state.pdf(s);
            },
            0.0, rb.s2, {rb.s1}, tol);
    eq.pi_o = std::max(premium, 0.0);

    eq.j_cp = fx;
    eq.j_agg = inst.expect(
                   [&](double s) {
                       const double y = exercise_policy(inst, eq.q, x, pi_sp, s);
                       return inst.disutility.phi(y) - pi_sp * y;
                   },
                   tol, {rb.s1, rb.s2}) -
               eq.pi_o * x;
    eq.j_lse = eq.j_cp - eq.j_agg;  // premium and strike payments are internal transfers

    // literal objective value with the strike payment left in
    eq.j_literal = eq.j_cp + inst.expect(
                                 [&](double s) {
                                     return pi_sp * exercise_policy(inst, eq.q, x, pi_sp, s);
                                 },
                                 tol, {rb.s1, rb.s2});

    eq.resid_foc_q = 0.0;
    eq.resid_option_price = premium - eq.pi_o;
    eq.resid_agg = 0.0;
    eq.resid_agg_alt = 0.0;
    return eq;
}

double redesigned_cost_dsp(const MarketInstance& inst, double l_prime, double x,
                           double pi_sp, const Tolerances& tol) {
    const double q = l_prime - x;
    const RegimeBounds rb = regime_boundaries(inst, q, x, pi_sp, tol);
    if (rb.s2 <= rb.s1) return 0.0;
    return integrate(
        [&](double s) {
            const double y = exercise_policy(inst, q, x, pi_sp, s);
            const double z = inst.load_l - q - y;
            const double dens = inst.wind.pdf(s, z);
            return (pi_sp - inst.disutility.dphi(y)) /
                   (inst.rt_price.mean(s) * dens) * inst.info_state.pdf(s);
        },
        rb.s1, rb.s2, tol);
}

// --------------------------------------------------------------- sweeps etc.

std::vector<double> default_strike_grid(const MarketInstance& inst) {
    const double lo = inst.disutility.dphi(0.0) - 5.0;
    const double hi = inst.disutility.dphi(inst.load_l) + 5.0;
    std::vector<double> grid;
    for (double sp = lo; sp <= hi + 1e-9; sp += 0.1)
        grid.push_back(std::max(sp, 0.0));
    return grid;
}

std::vector<StrikeSweepRow> strike_sweep(const MarketInstance& inst,
                                         MarketVariant variant, double l_prime,
                                         const std::vector<double>& strikes,
                                         const Tolerances& tol, int jobs) {
    if (strikes.empty()) throw std::invalid_argument("strike_sweep: empty grid");
    for (std::size_t i = 1; i < strikes.size(); ++i)
        if (strikes[i] <= strikes[i - 1])
            throw std::invalid_argument("strike_sweep: grid must be strictly increasing");

    std::vector<StrikeSweepRow> rows(strikes.size());
    auto run_row = [&](std::size_t i) {
        rows[i].pi_sp = strikes[i];
        try {
            rows[i].eq = variant == MarketVariant::Original
                             ? solve_original_ce(inst, strikes[i], tol)
                             : solve_redesigned_ce(inst, l_prime, strikes[i], tol);
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    };

    jobs = std::max(jobs, 1);
    if (jobs == 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) run_row(i);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < jobs; ++t)
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= rows.size()) return;
                    run_row(i);
                }
            });
        for (auto& w : workers) w.join();
    }
    return rows;
}

OptimalStrike optimal_strike(const MarketInstance& inst, double l_prime,
                             const Tolerances& tol) {
    const double lo = inst.disutility.dphi(0.0);
    const double hi = inst.disutility.dphi(l_prime);
    OptimalStrike best;
    if (hi <= lo) {
        best.pi_sp = lo;
    } else {
        const MinimizeResult m = minimize_scalar(
            [&](double sp) { return solve_redesigned_ce(inst, l_prime, sp, tol).j_cp; },
            lo, hi, tol.with_quad_rel(tol.quad_rel));
        best.pi_sp = m.x;
    }
    best.eq = solve_redesigned_ce(inst, l_prime, best.pi_sp, tol);

    const double s1 = best.eq.s1, s2 = best.eq.s2, x = best.eq.x;
    if (s2 - s1 > 1e-9 && inst.wind.kind() != WindModel::Kind::Degenerate) {
        const double q = l_prime - x;
        auto beta = [&](double s) {
            const double y = exercise_policy(inst, q, x, best.pi_sp, s);
            const double z = inst.load_l - q - y;
            return inst.info_state.pdf(s) /
                   (inst.rt_price.mean(s) * inst.wind.pdf(s, z));
        };
        const double num = integrate(
            [&](double s) {
                return inst.disutility.dphi(exercise_policy(inst, q, x, best.pi_sp, s)) *
                       beta(s);
            },
            s1, s2, tol);
        const double den = integrate(beta, s1, s2, tol);
        if (den > 0.0) {
            best.fixed_point_residual = std::abs(best.pi_sp - num / den);
            best.residual_defined = true;
        }
    }
    return best;
}

WelfareReport welfare_report(const MarketInstance& inst, double l_prime,
                             const std::vector<double>& strikes,
                             const Tolerances& tol, int jobs) {
    WelfareReport rep;
    rep.j_cp = solve_dr(inst, tol).expected_cost;
    rep.j_ndr = solve_no_dr(inst, tol).expected_cost;

    const auto rows = strike_sweep(inst, MarketVariant::Redesigned, l_prime, strikes, tol, jobs);
    rep.min_gap_lower = std::numeric_limits<double>::infinity();
    rep.min_gap_upper = std::numeric_limits<double>::infinity();
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        if (!row.eq) {
            rep.sandwich_ok = false;
            rep.offending_strike = row.pi_sp;
            continue;
        }
        const double jt = row.eq->j_cp;
        rep.rows.push_back({row.pi_sp, jt});
        rep.min_gap_lower = std::min(rep.min_gap_lower, jt - rep.j_cp);
        rep.min_gap_upper = std::min(rep.min_gap_upper, rep.j_ndr - jt);
        if (jt < best_cost) {
            best_cost = jt;
            rep.best_strike = row.pi_sp;
        }
        if (jt < rep.j_cp - 1e-8 || jt > rep.j_ndr + 1e-8) {
            rep.sandwich_ok = false;
            rep.offending_strike = row.pi_sp;
        }
    }
    rep.welfare_gap = best_cost - rep.j_cp;
    return rep;
}

} // namespace dro
