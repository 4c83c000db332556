#ifndef DRO_MODELS_HPP
#define DRO_MODELS_HPP

#include <string>
#include <vector>

#include "dro/numerics.hpp"

namespace dro {

// Aggregator disutility phi(y), strongly convex on the load range.
class DisutilityFn {
public:
    // phi(y) = a*y + b*y^2, b > 0
    static DisutilityFn quadratic(double a, double b);
    // piecewise-linear marginal disutility: knots y (increasing, y[0]=0) with
    // strictly increasing values dphi; phi is its exact integral
    static DisutilityFn tabulated(std::vector<double> y, std::vector<double> dphi);

    double phi(double y) const;
    double dphi(double y) const;
    double ddphi(double y) const;
    double inv_dphi(double p) const;  // (phi')^{-1}, clamped to the knot range

    enum class Kind { Quadratic, Tabulated };
    Kind kind() const { return kind_; }
    double quad_a() const { return a_; }
    double quad_b() const { return b_; }
    const std::vector<double>& knots() const { return y_; }
    const std::vector<double>& knot_dphi() const { return d_; }

private:
    DisutilityFn() = default;
    Kind kind_ = Kind::Quadratic;
    double a_ = 0.0, b_ = 0.0;
    std::vector<double> y_, d_, phi_;  // phi_ = cumulative integral at knots
};

// Prior density alpha(s) of the information state on [0,1], renormalized
// numerically at construction.
class InfoStateModel {
public:
    static InfoStateModel truncated_normal(double mean, double sigma);
    // density samples at knots s (increasing, spanning [0,1]), linear interp
    static InfoStateModel tabulated(std::vector<double> s, std::vector<double> density);

    double pdf(double s) const;

    enum class Kind { TruncatedNormal, Tabulated };
    Kind kind() const { return kind_; }
    double mean() const { return mean_; }
    double sigma() const { return sigma_; }
    const std::vector<double>& knots() const { return s_; }
    const std::vector<double>& knot_density() const { return d_; }

private:
    InfoStateModel() = default;
    Kind kind_ = Kind::TruncatedNormal;
    double mean_ = 0.5, sigma_ = 0.2, norm_ = 1.0;
    std::vector<double> s_, d_;
};

// Conditional wind model: w | s on [0, sup(s)] with sup(s) = base + slope*s.
class WindModel {
public:
    // uniform density 1/sup(s) on [0, sup(s)]
    static WindModel uniform_support(double base, double slope);
    // w == 0 with probability one (test instrument; breaks Assumption 1(i))
    static WindModel degenerate();
    // base CDF F on u in [0,1] (piecewise linear through (u, cdf) knots,
    // cdf[0]=0, cdf[n-1]=1, strictly increasing) rescaled to [0, sup(s)]
    static WindModel tabulated(double base, double slope,
                               std::vector<double> u, std::vector<double> cdf);

    double sup(double s) const;           // upper end of the support
    double cdf(double s, double z) const;      // P_s(z)
    double inv_cdf(double s, double u) const;  // P_s^{-1}(u)
    double pdf(double s, double z) const;      // p_s(z)

    enum class Kind { Uniform, Degenerate, Tabulated };
    Kind kind() const { return kind_; }
    double base() const { return base_; }
    double slope() const { return slope_; }
    const std::vector<double>& tab_u() const { return u_; }
    const std::vector<double>& tab_cdf() const { return c_; }

private:
    WindModel() = default;
    Kind kind_ = Kind::Uniform;
    double base_ = 2.0, slope_ = 1.0;
    std::vector<double> u_, c_;
};

// E_w[(z - w)_+ | s]; closed form for all supported wind kinds. Rejects z < 0.
double wind_shortfall(const WindModel& w, double s, double z);

// Conditional mean real-time price with optional zero-mean sampling noise.
class RtPriceModel {
public:
    enum class Noise { None, Uniform, Normal };

    static RtPriceModel linear(double intercept, double slope,
                               Noise noise = Noise::None, double noise_param = 0.0);

    double mean(double s) const { return intercept_ + slope_ * s; }
    // u ~ Uniform(0,1) -> realized price draw
    double sample(double s, double u) const;

    double intercept() const { return intercept_; }
    double slope() const { return slope_; }
    Noise noise() const { return noise_; }
    double noise_param() const { return noise_param_; }

private:
    double intercept_ = 0.0, slope_ = 0.0, noise_param_ = 0.0;
    Noise noise_ = Noise::None;
};

struct MarketInstance {
    double load_l = 0.0;
    double pi_da = 0.0;
    DisutilityFn disutility = DisutilityFn::quadratic(1.0, 1.0);
    InfoStateModel info_state = InfoStateModel::truncated_normal(0.5, 0.2);
    WindModel wind = WindModel::uniform_support(2.0, 1.0);
    RtPriceModel rt_price = RtPriceModel::linear(1.0, 0.0);

    // E_s[f(s)] under alpha, optionally splitting at known kinks of f.
    double expect(const ScalarFn& f, const Tolerances& tol = {},
                  const std::vector<double>& breakpoints = {}) const;
};

MarketInstance build_case_study();

struct ValidationReport {
    bool a1_wind_ordering = true;   // stochastic ordering of P_s in s
    bool a1_price_ordering = true;  // mean rt price strictly decreasing
    bool a2_convexity = true;       // phi'' > 0 on [0, l]
    bool a3_discount = true;        // pi_da < E_s[mean_s * P_s(l)]
    std::string detail;             // first violation found, if any
    bool pass() const { return a1_wind_ordering && a1_price_ordering && a2_convexity && a3_discount; }
};

ValidationReport validate_assumptions(const MarketInstance& inst, int grid_n = 50);

// JSON (de)serialization; unknown fields are rejected.
std::string to_json(const MarketInstance& inst);
MarketInstance instance_from_json(const std::string& text);
MarketInstance load_instance(const std::string& path);

} // namespace dro

#endif
