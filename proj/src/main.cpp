#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dro/csv.hpp"
#include "dro/models.hpp"
#include "dro/numerics.hpp"
#include "dro/options.hpp"
#include "dro/planner.hpp"
#include "dro/simulate.hpp"
#include "dro/spot.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    bool case_study = false;
    std::string out = ".";
    int jobs = 1;
    dro::Tolerances tol;
    double quad_rel = -1.0, root_abs = -1.0, min_abs = -1.0;
    int max_iter = -1;
};

// DR_OPTIONS_TOL: either a bare number (sets quad_rel) or a comma-separated
// list of key=value pairs (quad_rel, root_abs, min_abs, max_iter).
void apply_env_tolerances(dro::Tolerances& tol) {
    const char* env = std::getenv("DR_OPTIONS_TOL");
    if (!env || !*env) return;
    const std::string text(env);
    if (text.find('=') == std::string::npos) {
        tol.quad_rel = std::stod(text);
        return;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto pos = item.find('=');
        if (pos == std::string::npos)
            throw UsageError("DR_OPTIONS_TOL: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, pos);
        const std::string val = item.substr(pos + 1);
        if (key == "quad_rel") tol.quad_rel = std::stod(val);
        else if (key == "root_abs") tol.root_abs = std::stod(val);
        else if (key == "min_abs") tol.min_abs = std::stod(val);
        else if (key == "max_iter") tol.max_iter = std::stoi(val);
        else throw UsageError("DR_OPTIONS_TOL: unknown key '" + key + "'");
    }
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "market instance JSON file");
    sub->add_flag("--case-study", c.case_study, "use the built-in case-study instance");
    sub->add_option("--out", c.out, "output directory for CSV/JSON artifacts")
        ->default_val(".");
    sub->add_option("--jobs", c.jobs, "parallel workers for sweeps")->default_val(1);
    sub->add_option("--quad-rel", c.quad_rel, "override quadrature relative tolerance");
    sub->add_option("--root-abs", c.root_abs, "override root-finding tolerance");
    sub->add_option("--min-abs", c.min_abs, "override minimization tolerance");
    sub->add_option("--max-iter", c.max_iter, "override max iterations");
}

dro::MarketInstance resolve(Common& c) {
    apply_env_tolerances(c.tol);  // env first, flags take precedence
    if (c.quad_rel > 0.0) c.tol.quad_rel = c.quad_rel;
    if (c.root_abs > 0.0) c.tol.root_abs = c.root_abs;
    if (c.min_abs > 0.0) c.tol.min_abs = c.min_abs;
    if (c.max_iter > 0) c.tol.max_iter = c.max_iter;

    if (c.case_study == !c.config.empty())
        throw UsageError("exactly one of --config or --case-study is required");
    std::filesystem::create_directories(c.out);
    if (c.case_study) return dro::build_case_study();
    return dro::load_instance(c.config);
}

std::string out_path(const Common& c, const std::string& name) {
    return (std::filesystem::path(c.out) / name).string();
}

std::vector<double> parse_grid(const std::string& spec, const dro::MarketInstance& inst) {
    if (spec == "default") return dro::default_strike_grid(inst);
    double a = 0.0, b = 0.0, step = 0.0;
    char c1 = 0, c2 = 0;
    std::stringstream ss(spec);
    if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0 || b < a)
        throw UsageError("--sweep expects A:B:STEP with STEP > 0, got '" + spec + "'");
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        const double v = a + step * i;
        if (v > b + 1e-9) break;
        grid.push_back(v);
    }
    return grid;
}

void write_sweep_csv(const std::string& path, const std::vector<dro::StrikeSweepRow>& rows) {
    std::vector<std::vector<double>> cells;
    for (const auto& row : rows) {
        if (!row.eq) {
            std::cerr << "warning: strike " << row.pi_sp << " failed: " << row.error << "\n";
            continue;
        }
        const auto& e = *row.eq;
        cells.push_back({e.pi_sp, e.pi_o, e.x, e.q, e.s1, e.s2, e.j_lse, e.j_agg, e.j_cp});
    }
    dro::write_csv_numeric(path, {"pi_sp", "pi_o", "x", "q", "s1", "s2", "j_lse", "j_agg", "j_cp"},
                           cells);
}

void print_equilibrium(const dro::OptionsEquilibrium& eq) {
    std::cout << "pi_sp = " << dro::format_value(eq.pi_sp)
              << "\npi_o = " << dro::format_value(eq.pi_o)
              << "\nx = " << dro::format_value(eq.x)
              << "\nq = " << dro::format_value(eq.q);
    if (eq.variant == dro::MarketVariant::Redesigned)
        std::cout << "\nl_prime = " << dro::format_value(eq.l_prime);
    std::cout << "\ns1 = " << dro::format_value(eq.s1)
              << "\ns2 = " << dro::format_value(eq.s2)
              << "\nj_lse = " << dro::format_value(eq.j_lse)
              << "\nj_agg = " << dro::format_value(eq.j_agg)
              << "\nj_cp = " << dro::format_value(eq.j_cp) << "\n";
}

int cmd_validate(Common& c, int grid_n) {
    const dro::MarketInstance inst = resolve(c);
    const dro::ValidationReport rep = dro::validate_assumptions(inst, grid_n);
    auto line = [](const char* name, bool ok) {
        std::cout << name << ": " << (ok ? "pass" : "FAIL") << "\n";
    };
    line("Assumption 1(i) wind stochastic ordering", rep.a1_wind_ordering);
    line("Assumption 1(ii) decreasing mean rt price", rep.a1_price_ordering);
    line("Assumption 2 strongly convex disutility", rep.a2_convexity);
    line("Assumption 3 discounted day-ahead price", rep.a3_discount);
    if (!rep.pass()) {
        if (!rep.a1_wind_ordering) std::cout << "Assumption 1(i) violated\n";
        if (!rep.a1_price_ordering) std::cout << "Assumption 1(ii) violated\n";
        if (!rep.a2_convexity) std::cout << "Assumption 2 violated\n";
        if (!rep.a3_discount) std::cout << "Assumption 3 violated\n";
        std::cout << "detail: " << rep.detail << "\n";
        return kExitValidation;
    }
    std::cout << "all assumptions hold\n";
    return kExitOk;
}

int cmd_planner(Common& c, bool no_dr) {
    const dro::MarketInstance inst = resolve(c);
    const dro::PlannerSolution sol =
        no_dr ? dro::solve_no_dr(inst, c.tol) : dro::solve_dr(inst, c.tol);
    std::cout << "q = " << dro::format_value(sol.q)
              << "\nexpected_cost = " << dro::format_value(sol.expected_cost)
              << "\nfoc_residual = " << dro::format_value(sol.foc_residual) << "\n";
    if (sol.boundary) std::cout << "warning: no interior first-order root; q pinned at 0\n";
    std::vector<std::vector<double>> rows;
    if (sol.policy.s.empty()) {
        for (int i = 0; i <= 100; ++i) rows.push_back({i / 100.0, 0.0});
    } else {
        for (std::size_t i = 0; i < sol.policy.s.size(); ++i)
            rows.push_back({sol.policy.s[i], sol.policy.y[i]});
    }
    dro::write_csv_numeric(out_path(c, "planner.csv"), {"s", "y"}, rows);
    return kExitOk;
}

int cmd_spot(Common& c) {
    const dro::MarketInstance inst = resolve(c);
    const dro::SpotEquilibrium eq = dro::spot_equilibrium(inst, c.tol);
    std::cout << "q_star = " << dro::format_value(eq.q_star)
              << "\nj_lse = " << dro::format_value(eq.j_lse)
              << "\nj_agg = " << dro::format_value(eq.j_agg)
              << "\nj_cp = " << dro::format_value(eq.j_cp) << "\n";
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < eq.s_nodes.size(); ++i)
        rows.push_back({eq.s_nodes[i], eq.y[i], eq.price[i]});
    dro::write_csv_numeric(out_path(c, "spot.csv"), {"s", "y", "price"}, rows);
    return kExitOk;
}

int cmd_options(Common& c, dro::MarketVariant variant, double strike, bool have_strike,
                const std::string& sweep, double lprime, bool have_lprime) {
    const dro::MarketInstance inst = resolve(c);
    double lp = 0.0;
    if (variant == dro::MarketVariant::Redesigned)
        lp = have_lprime ? lprime : dro::default_l_prime(inst, c.tol);
    if (have_strike == !sweep.empty())
        throw UsageError("exactly one of --strike or --sweep is required");
    if (have_strike) {
        const dro::OptionsEquilibrium eq =
            variant == dro::MarketVariant::Original
                ? dro::solve_original_ce(inst, strike, c.tol)
                : dro::solve_redesigned_ce(inst, lp, strike, c.tol);
        print_equilibrium(eq);
        return kExitOk;
    }
    const std::vector<double> grid = parse_grid(sweep, inst);
    const auto rows = dro::strike_sweep(inst, variant, lp, grid, c.tol, c.jobs);
    const std::string name = variant == dro::MarketVariant::Original
                                 ? "options_original_sweep.csv"
                                 : "options_redesigned_sweep.csv";
    write_sweep_csv(out_path(c, name), rows);
    std::size_t failures = 0;
    for (const auto& row : rows)
        if (!row.eq) ++failures;
    std::cout << "wrote " << (rows.size() - failures) << " rows to " << out_path(c, name) << "\n";
    return failures == 0 ? kExitOk : kExitSolver;
}

int cmd_strike_opt(Common& c, double lprime, bool have_lprime) {
    const dro::MarketInstance inst = resolve(c);
    const double lp = have_lprime ? lprime : dro::default_l_prime(inst, c.tol);
    const dro::OptimalStrike best = dro::optimal_strike(inst, lp, c.tol);
    std::cout << "pi_sp_star = " << dro::format_value(best.pi_sp)
              << "\nj_cp = " << dro::format_value(best.eq.j_cp)
              << "\nx = " << dro::format_value(best.eq.x)
              << "\nl_prime = " << dro::format_value(lp) << "\n";
    if (best.residual_defined)
        std::cout << "fixed_point_residual = " << dro::format_value(best.fixed_point_residual)
                  << "\n";
    else
        std::cout << "fixed_point_residual = undefined (degenerate exercise region)\n";
    return kExitOk;
}

int cmd_montecarlo(Common& c, std::uint64_t n, std::uint64_t seed,
                   const std::string& bundle_kind, double strike, bool have_strike) {
    const dro::MarketInstance inst = resolve(c);
    dro::DecisionBundle bundle;
    dro::AnalyticRefs refs;
    if (bundle_kind == "planner") {
        const dro::PlannerSolution sol = dro::solve_dr(inst, c.tol);
        bundle.q = sol.q;
        bundle.y_policy = sol.policy;
        bundle.payments = dro::PaymentKind::None;
        const dro::Policy& pol = sol.policy;
        const double phi_part =
            inst.expect([&](double s) { return inst.disutility.phi(pol(s)); }, c.tol);
        refs.system = sol.expected_cost;
        refs.agg = phi_part;
        refs.lse = sol.expected_cost - phi_part;
    } else if (bundle_kind == "spot") {
        const dro::SpotEquilibrium eq = dro::spot_equilibrium(inst, c.tol);
        bundle.q = eq.q_star;
        bundle.y_policy = dro::Policy{eq.s_nodes, eq.y};
        bundle.payments = dro::PaymentKind::Spot;
        bundle.price_curve = dro::Policy{eq.s_nodes, eq.price};
        refs = {eq.j_lse, eq.j_agg, eq.j_cp};
    } else if (bundle_kind == "options") {
        if (!have_strike) throw UsageError("--bundle options requires --strike");
        const double lp = dro::default_l_prime(inst, c.tol);
        const dro::OptionsEquilibrium eq = dro::solve_redesigned_ce(inst, lp, strike, c.tol);
        bundle.q = eq.q;
        bundle.payments = dro::PaymentKind::Options;
        bundle.pi_o = eq.pi_o;
        bundle.pi_sp = eq.pi_sp;
        bundle.x = eq.x;
        dro::Policy pol;
        const int grid_n = 1025;
        pol.s.resize(grid_n);
        pol.y.resize(grid_n);
        for (int i = 0; i < grid_n; ++i) {
            pol.s[i] = double(i) / (grid_n - 1);
            pol.y[i] = dro::exercise_policy(inst, eq.q, eq.x, eq.pi_sp, pol.s[i]);
        }
        bundle.y_policy = pol;
        refs = {eq.j_lse, eq.j_agg, eq.j_cp};
    } else {
        throw UsageError("--bundle must be planner, spot, or options");
    }

    const dro::MCReport rep = dro::monte_carlo(inst, bundle, n, seed, &refs);
    const std::string json = dro::to_json(rep);
    std::ofstream out(out_path(c, "mc_report.json"), std::ios::binary);
    out << json;
    std::cout << json;
    return kExitOk;
}

int cmd_report(Common& c) {
    c.case_study = true;
    c.config.clear();
    const dro::MarketInstance inst = resolve(c);

    const dro::PlannerSolution ndr = dro::solve_no_dr(inst, c.tol);
    const dro::PlannerSolution dr = dro::solve_dr(inst, c.tol);
    const dro::SpotEquilibrium spot = dro::spot_equilibrium(inst, c.tol);

    std::vector<std::vector<double>> f3, f4;
    for (std::size_t i = 0; i < spot.s_nodes.size(); ++i) {
        f3.push_back({spot.s_nodes[i], spot.y[i]});
        f4.push_back({spot.s_nodes[i], spot.price[i]});
    }
    dro::write_csv_numeric(out_path(c, "fig3.csv"), {"s", "y"}, f3);
    dro::write_csv_numeric(out_path(c, "fig4.csv"), {"s", "price"}, f4);

    std::vector<double> grid;
    for (double sp = 15.0; sp <= 40.0 + 1e-9; sp += 0.1) grid.push_back(sp);
    const double lp = dro::default_l_prime(inst, c.tol);
    const auto orig = dro::strike_sweep(inst, dro::MarketVariant::Original, 0.0, grid, c.tol, c.jobs);
    const auto redesigned =
        dro::strike_sweep(inst, dro::MarketVariant::Redesigned, lp, grid, c.tol, c.jobs);

    std::vector<std::vector<double>> f5, f6, f7, f8, f10;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!orig[i].eq || !redesigned[i].eq) continue;
        f5.push_back({grid[i], orig[i].eq->pi_o});
        f6.push_back({grid[i], orig[i].eq->x});
        f7.push_back({grid[i], orig[i].eq->q});
        f8.push_back({grid[i], redesigned[i].eq->x});
        f10.push_back({grid[i], orig[i].eq->j_cp, redesigned[i].eq->j_cp, ndr.expected_cost,
                       dr.expected_cost});
    }
    dro::write_csv_numeric(out_path(c, "fig5.csv"), {"pi_sp", "pi_o"}, f5);
    dro::write_csv_numeric(out_path(c, "fig6.csv"), {"pi_sp", "x"}, f6);
    dro::write_csv_numeric(out_path(c, "fig7.csv"), {"pi_sp", "q"}, f7);
    dro::write_csv_numeric(out_path(c, "fig8.csv"), {"pi_sp", "x"}, f8);

    const dro::OptimalStrike best = dro::optimal_strike(inst, lp, c.tol);
    std::vector<std::vector<double>> f9;
    for (int i = 0; i <= 200; ++i) {
        const double s = i / 200.0;
        f9.push_back({s, dro::exercise_policy(inst, best.eq.q, best.eq.x, best.pi_sp, s)});
    }
    dro::write_csv_numeric(out_path(c, "fig9.csv"), {"s", "y"}, f9);
    dro::write_csv_numeric(out_path(c, "fig10.csv"),
                           {"pi_sp", "j_cp_original", "j_cp_redesigned", "j_ndr", "j_dr"}, f10);

    std::ofstream gp(out_path(c, "plots.gp"), std::ios::binary);
    gp << "set datafile separator ','\n"
          "set key autotitle columnhead\n"
          "set terminal pngcairo size 900,600\n"
          "set output 'fig3.png'\nplot 'fig3.csv' using 1:2 with lines title 'y_s'\n"
          "set output 'fig4.png'\nplot 'fig4.csv' using 1:2 with lines title 'price'\n"
          "set output 'fig5.png'\nplot 'fig5.csv' using 1:2 with lines title 'pi_o'\n"
          "set output 'fig6.png'\nplot 'fig6.csv' using 1:2 with lines title 'x'\n"
          "set output 'fig7.png'\nplot 'fig7.csv' using 1:2 with lines title 'q'\n"
          "set output 'fig8.png'\nplot 'fig8.csv' using 1:2 with lines title 'x (redesigned)'\n"
          "set output 'fig9.png'\nplot 'fig9.csv' using 1:2 with lines title 'exercise'\n"
          "set output 'fig10.png'\nplot 'fig10.csv' using 1:2 with lines, "
          "'fig10.csv' using 1:3 with lines, 'fig10.csv' using 1:4 with lines, "
          "'fig10.csv' using 1:5 with lines\n";
    gp.close();

    std::cout << "headline values (computed vs. reference):\n"
              << "  q_ndr: computed " << dro::format_value(ndr.q) << "  reference 1.23\n"
              << "  J_ndr: computed " << dro::format_value(ndr.expected_cost)
              << "  reference 56.77\n"
              << "  q_dr:  computed " << dro::format_value(dr.q) << "  reference 0.84\n"
              << "  J_dr:  computed " << dro::format_value(dr.expected_cost)
              << "  reference 53.95\n"
              << "(reference values are documented comparisons only; the published figure\n"
              << " data and text values are mutually inconsistent under the stated models)\n"
              << "optimal strike: " << dro::format_value(best.pi_sp)
              << "  j_cp " << dro::format_value(best.eq.j_cp) << "\n"
              << "wrote fig3.csv..fig10.csv and plots.gp to " << c.out << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dr-options: demand-response options market solver"};
    app.require_subcommand(1);

    Common c_validate, c_planner, c_spot, c_orig, c_red, c_opt, c_mc, c_report;

    int grid_n = 50;
    auto* validate = app.add_subcommand("validate", "check the standing model assumptions");
    add_common(validate, c_validate);
    validate->add_option("--grid-n", grid_n, "validation grid resolution")->default_val(50);

    bool no_dr = false;
    auto* planner = app.add_subcommand("planner", "social-planner benchmark");
    add_common(planner, c_planner);
    planner->add_flag("--no-dr", no_dr, "disable demand response (day-ahead only)");

    auto* spot = app.add_subcommand("spot", "contingent-price spot market equilibrium");
    add_common(spot, c_spot);

    double strike_o = 0.0, strike_r = 0.0, lprime_r = 0.0, lprime_s = 0.0;
    std::string sweep_o, sweep_r;
    auto* orig = app.add_subcommand("options-original", "original options market equilibrium");
    add_common(orig, c_orig);
    auto* strike_o_opt = orig->add_option("--strike", strike_o, "strike price");
    orig->add_option("--sweep", sweep_o, "strike grid A:B:STEP or 'default'");

    auto* red = app.add_subcommand("options-redesigned", "redesigned options market equilibrium");
    add_common(red, c_red);
    auto* strike_r_opt = red->add_option("--strike", strike_r, "strike price");
    red->add_option("--sweep", sweep_r, "strike grid A:B:STEP or 'default'");
    auto* lprime_r_opt = red->add_option("--lprime", lprime_r, "offer size l' (default: q_ndr)");

    auto* sopt = app.add_subcommand("strike-opt", "optimal strike for the redesigned market");
    add_common(sopt, c_opt);
    auto* lprime_s_opt = sopt->add_option("--lprime", lprime_s, "offer size l' (default: q_ndr)");

    std::uint64_t mc_n = 1000000, mc_seed = 1;
    std::string mc_bundle = "planner";
    double mc_strike = 0.0;
    auto* mc = app.add_subcommand("montecarlo", "ex-post Monte-Carlo validation");
    add_common(mc, c_mc);
    mc->add_option("--n", mc_n, "number of draws")->default_val(1000000);
    mc->add_option("--seed", mc_seed, "RNG seed")->default_val(1);
    mc->add_option("--bundle", mc_bundle, "decision bundle: planner|spot|options")
        ->default_val("planner");
    auto* mc_strike_opt = mc->add_option("--strike", mc_strike, "strike for the options bundle");

    auto* report = app.add_subcommand("report", "run everything on the case study, emit figures");
    add_common(report, c_report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*validate) return cmd_validate(c_validate, grid_n);
        if (*planner) return cmd_planner(c_planner, no_dr);
        if (*spot) return cmd_spot(c_spot);
        if (*orig)
            return cmd_options(c_orig, dro::MarketVariant::Original, strike_o,
                               strike_o_opt->count() > 0, sweep_o, 0.0, false);
        if (*red)
            return cmd_options(c_red, dro::MarketVariant::Redesigned, strike_r,
                               strike_r_opt->count() > 0, sweep_r, lprime_r,
                               lprime_r_opt->count() > 0);
        if (*sopt) return cmd_strike_opt(c_opt, lprime_s, lprime_s_opt->count() > 0);
        if (*mc)
            return cmd_montecarlo(c_mc, mc_n, mc_seed, mc_bundle, mc_strike,
                                  mc_strike_opt->count() > 0);
        if (*report) return cmd_report(c_report);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const dro::NumericsError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitUsage;
}
