#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "dro/models.hpp"

using namespace dro;

TEST_CASE("DisutilityFn: quadratic") {
    const DisutilityFn phi = DisutilityFn::quadratic(15.0, 15.0);
    CHECK(phi.phi(0.0) == 0.0);
    CHECK(phi.phi(1.0) == doctest::Approx(30.0));
    CHECK(phi.dphi(0.0) == doctest::Approx(15.0));
    CHECK(phi.dphi(0.5) == doctest::Approx(30.0));
    CHECK(phi.ddphi(0.3) == doctest::Approx(30.0));
    CHECK(phi.inv_dphi(30.0) == doctest::Approx(0.5));
    CHECK(phi.inv_dphi(phi.dphi(0.123)) == doctest::Approx(0.123).epsilon(1e-12));
    CHECK(phi.inv_dphi(10.0) == 0.0);  // clamped below phi'(0)
}

TEST_CASE("DisutilityFn: tabulated piecewise-linear marginal") {
    const DisutilityFn phi = DisutilityFn::tabulated({0.0, 1.0, 2.0}, {10.0, 20.0, 40.0});
    // exact integral of the piecewise-linear marginal
    CHECK(phi.phi(1.0) == doctest::Approx(15.0));
    CHECK(phi.phi(2.0) == doctest::Approx(45.0));
    CHECK(phi.phi(0.5) == doctest::Approx(0.5 * (10.0 + 15.0) / 2.0));
    CHECK(phi.dphi(1.5) == doctest::Approx(30.0));
    CHECK(phi.inv_dphi(30.0) == doctest::Approx(1.5));
    CHECK(phi.inv_dphi(5.0) == 0.0);
    CHECK(phi.inv_dphi(100.0) == doctest::Approx(2.0));
    // constant marginal is representable (zero curvature)
    const DisutilityFn lin = DisutilityFn::tabulated({0.0, 2.0}, {12.0, 12.0});
    CHECK(lin.ddphi(1.0) == 0.0);
    CHECK(lin.phi(2.0) == doctest::Approx(24.0));
}

TEST_CASE("InfoStateModel: truncated normal normalizes and is symmetric") {
    const InfoStateModel a = InfoStateModel::truncated_normal(0.5, 0.2);
    CHECK(a.pdf(0.5) > a.pdf(0.1));
    CHECK(a.pdf(0.25) == doctest::Approx(a.pdf(0.75)).epsilon(1e-12));
    const InfoStateModel tab =
        InfoStateModel::tabulated({0.0, 0.5, 1.0}, {1.0, 3.0, 1.0});
    // renormalized: raw trapezoid mass is 2
    CHECK(tab.pdf(0.5) == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(tab.pdf(0.25) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("WindModel: uniform support") {
    const WindModel w = WindModel::uniform_support(2.0, 1.0);
    CHECK(w.sup(0.0) == doctest::Approx(2.0));
    CHECK(w.sup(1.0) == doctest::Approx(3.0));
    CHECK(w.cdf(0.0, 1.0) == doctest::Approx(0.5));
    CHECK(w.cdf(1.0, 1.5) == doctest::Approx(0.5));
    CHECK(w.cdf(0.5, 10.0) == 1.0);
    CHECK(w.cdf(0.5, -1.0) == 0.0);
    CHECK(w.inv_cdf(0.0, 0.25) == doctest::Approx(0.5));
    CHECK(w.pdf(0.0, 1.0) == doctest::Approx(0.5));
    CHECK(w.pdf(1.0, 1.0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("WindModel: tabulated CDF rescales with the support") {
    const WindModel w = WindModel::tabulated(2.0, 1.0, {0.0, 0.5, 1.0}, {0.0, 0.8, 1.0});
    CHECK(w.cdf(0.0, 1.0) == doctest::Approx(0.8));   // u = 1/2
    CHECK(w.cdf(1.0, 1.5) == doctest::Approx(0.8));   // u = 1.5/3
    CHECK(w.inv_cdf(0.0, 0.8) == doctest::Approx(1.0));
    CHECK(w.inv_cdf(0.0, 0.4) == doctest::Approx(0.5));
}

TEST_CASE("wind_shortfall: uniform closed form") {
    const WindModel w = WindModel::uniform_support(2.0, 1.0);
    // s=0, support [0,2]: z<=U gives z^2/(2U); z>U gives z-U/2
    CHECK(wind_shortfall(w, 0.0, 1.0) == doctest::Approx(0.25));
    CHECK(wind_shortfall(w, 0.0, 3.0) == doctest::Approx(2.0));
    CHECK(wind_shortfall(w, 0.0, 0.0) == 0.0);
    CHECK(wind_shortfall(w, 1.0, 3.0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(wind_shortfall(w, 0.0, -0.1), std::invalid_argument);
    // degenerate wind: shortfall is z itself
    const WindModel d = WindModel::degenerate();
    CHECK(wind_shortfall(d, 0.3, 1.7) == doctest::Approx(1.7));
    // tabulated wind agrees with the uniform closed form for a uniform table
    const WindModel t = WindModel::tabulated(2.0, 1.0, {0.0, 1.0}, {0.0, 1.0});
    CHECK(wind_shortfall(t, 0.4, 1.1) ==
          doctest::Approx(wind_shortfall(w, 0.4, 1.1)).epsilon(1e-12));
}

TEST_CASE("RtPriceModel: mean and noise sampling") {
    const RtPriceModel p = RtPriceModel::linear(31.71, -3.71);
    CHECK(p.mean(0.0) == doctest::Approx(31.71));
    CHECK(p.mean(1.0) == doctest::Approx(28.0));
    CHECK(p.sample(0.5, 0.123) == doctest::Approx(p.mean(0.5)));  // no noise
    const RtPriceModel pu = RtPriceModel::linear(30.0, 0.0, RtPriceModel::Noise::Uniform, 2.0);
    CHECK(pu.sample(0.0, 0.5) == doctest::Approx(30.0));
    CHECK(pu.sample(0.0, 0.0) == doctest::Approx(28.0));
    CHECK(pu.sample(0.0, 1.0) == doctest::Approx(32.0));
    const RtPriceModel pn = RtPriceModel::linear(30.0, 0.0, RtPriceModel::Noise::Normal, 1.5);
    CHECK(pn.sample(0.0, 0.5) == doctest::Approx(30.0).epsilon(1e-9));
    // quantile symmetry
    CHECK(pn.sample(0.0, 0.2) - 30.0 == doctest::Approx(30.0 - pn.sample(0.0, 0.8)).epsilon(1e-9));
}

TEST_CASE("MarketInstance: case-study expectation") {
    const MarketInstance inst = build_case_study();
    CHECK(inst.load_l == doctest::Approx(3.0));
    CHECK(inst.pi_da == doctest::Approx(26.76));
    const double mean_rt = inst.expect([&](double s) { return inst.rt_price.mean(s); });
    CHECK(mean_rt == doctest::Approx(29.855).epsilon(1e-6));
    CHECK(inst.expect([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("validate_assumptions: case study passes") {
    const ValidationReport rep = validate_assumptions(build_case_study());
    CHECK(rep.a1_wind_ordering);
    CHECK(rep.a1_price_ordering);
    CHECK(rep.a2_convexity);
    CHECK(rep.a3_discount);
    CHECK(rep.pass());
    CHECK(rep.detail.empty());
}

TEST_CASE("validate_assumptions: targeted violations") {
    MarketInstance inst = build_case_study();
    inst.wind = WindModel::degenerate();
    CHECK_FALSE(validate_assumptions(inst).a1_wind_ordering);

    inst = build_case_study();
    inst.rt_price = RtPriceModel::linear(28.0, 3.71);  // increasing in s
    CHECK_FALSE(validate_assumptions(inst).a1_price_ordering);

    inst = build_case_study();
    inst.disutility = DisutilityFn::tabulated({0.0, 1e6}, {15.0, 15.0});  // linear phi
    CHECK_FALSE(validate_assumptions(inst).a2_convexity);

    inst = build_case_study();
    inst.pi_da = 100.0;  // no day-ahead discount
    const ValidationReport rep = validate_assumptions(inst);
    CHECK_FALSE(rep.a3_discount);
    CHECK_FALSE(rep.pass());
    CHECK_FALSE(rep.detail.empty());
}

TEST_CASE("JSON round trip") {
    const MarketInstance inst = build_case_study();
    const MarketInstance back = instance_from_json(to_json(inst));
    CHECK(back.load_l == inst.load_l);
    CHECK(back.pi_da == inst.pi_da);
    CHECK(back.disutility.quad_a() == inst.disutility.quad_a());
    CHECK(back.wind.base() == inst.wind.base());
    CHECK(back.rt_price.slope() == inst.rt_price.slope());
    CHECK(back.info_state.sigma() == inst.info_state.sigma());
}

TEST_CASE("JSON: strictness and variants") {
    CHECK_THROWS_AS(instance_from_json("{\"load_l\": 3.0, \"bogus\": 1}"),
                    std::invalid_argument);
    CHECK_THROWS_AS(instance_from_json("not json"), std::invalid_argument);
    // linear disutility kind maps onto a flat tabulated marginal
    const std::string txt = R"({
      "load_l": 3.0, "pi_da": 26.76,
      "disutility": {"kind": "linear", "a": 15.0},
      "info_state": {"kind": "truncated-normal", "mean": 0.5, "sigma": 0.2},
      "wind": {"kind": "uniform-support", "base": 2.0, "slope": 1.0},
      "rt_price": {"kind": "linear", "intercept": 31.71, "slope": -3.71}
    })";
    const MarketInstance inst = instance_from_json(txt);
    CHECK(inst.disutility.kind() == DisutilityFn::Kind::Tabulated);
    CHECK(inst.disutility.dphi(0.5) == doctest::Approx(15.0));
    CHECK_FALSE(validate_assumptions(inst).a2_convexity);
}
