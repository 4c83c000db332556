#include "dro/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dro {

// ---------------------------------------------------------------- Disutility

DisutilityFn DisutilityFn::quadratic(double a, double b) {
    if (b <= 0.0) throw std::invalid_argument("DisutilityFn: quadratic needs b > 0");
    if (a < 0.0) throw std::invalid_argument("DisutilityFn: quadratic needs a >= 0");
    DisutilityFn f;
    f.kind_ = Kind::Quadratic;
    f.a_ = a;
    f.b_ = b;
    return f;
}

DisutilityFn DisutilityFn::tabulated(std::vector<double> y, std::vector<double> dphi) {
    if (y.size() < 2 || y.size() != dphi.size())
        throw std::invalid_argument("DisutilityFn: tabulated needs matching knots, >= 2");
    if (y.front() != 0.0)
        throw std::invalid_argument("DisutilityFn: first knot must be y = 0");
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] <= y[i - 1] || dphi[i] < dphi[i - 1])
            throw std::invalid_argument("DisutilityFn: knots must increase, marginals must be nondecreasing");
    if (dphi.front() < 0.0)
        throw std::invalid_argument("DisutilityFn: marginal disutility must be nonnegative");
    DisutilityFn f;
    f.kind_ = Kind::Tabulated;
    f.y_ = std::move(y);
    f.d_ = std::move(dphi);
    f.phi_.assign(f.y_.size(), 0.0);
    for (std::size_t i = 1; i < f.y_.size(); ++i)
        f.phi_[i] = f.phi_[i - 1] +
                    0.5 * (f.d_[i] + f.d_[i - 1]) * (f.y_[i] - f.y_[i - 1]);
    return f;
}

namespace {
std::size_t segment(const std::vector<double>& xs, double x) {
    // largest i with xs[i] <= x, clamped to [0, n-2]
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = (it == xs.begin()) ? 0 : std::size_t(it - xs.begin()) - 1;
    return std::min(i, xs.size() - 2);
}
} // namespace

double DisutilityFn::phi(double y) const {
    if (kind_ == Kind::Quadratic) return a_ * y + b_ * y * y;
    const std::size_t i = segment(y_, y);
    const double t = y - y_[i];
    const double slope = (d_[i + 1] - d_[i]) / (y_[i + 1] - y_[i]);
    return phi_[i] + d_[i] * t + 0.5 * slope * t * t;
}

double DisutilityFn::dphi(double y) const {
    if (kind_ == Kind::Quadratic) return a_ + 2.0 * b_ * y;
    const std::size_t i = segment(y_, y);
    const double slope = (d_[i + 1] - d_[i]) / (y_[i + 1] - y_[i]);
    return d_[i] + slope * (y - y_[i]);
}

double DisutilityFn::ddphi(double y) const {
    if (kind_ == Kind::Quadratic) return 2.0 * b_;
    const std::size_t i = segment(y_, y);
    return (d_[i + 1] - d_[i]) / (y_[i + 1] - y_[i]);
}

double DisutilityFn::inv_dphi(double p) const {
    if (kind_ == Kind::Quadratic) return std::max(0.0, (p - a_) / (2.0 * b_));
    if (p <= d_.front()) return y_.front();
    if (p >= d_.back()) return y_.back();
    const std::size_t i = segment(d_, p);
    const double slope = (d_[i + 1] - d_[i]) / (y_[i + 1] - y_[i]);
    if (slope <= 0.0) return y_[i];  // flat marginal segment
    return y_[i] + (p - d_[i]) / slope;
}

// ------------------------------------------------------------- Info state

InfoStateModel InfoStateModel::truncated_normal(double mean, double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("InfoStateModel: sigma must be positive");
    InfoStateModel m;
    m.kind_ = Kind::TruncatedNormal;
    m.mean_ = mean;
    m.sigma_ = sigma;
    m.norm_ = 1.0;
    const double raw = integrate([&m](double s) { return m.pdf(s); }, 0.0, 1.0,
                                 Tolerances{}.with_quad_rel(1e-12));
    m.norm_ = raw;
    return m;
}

InfoStateModel InfoStateModel::tabulated(std::vector<double> s, std::vector<double> density) {
    if (s.size() < 2 || s.size() != density.size())
        throw std::invalid_argument("InfoStateModel: tabulated needs matching knots, >= 2");
    if (s.front() != 0.0 || s.back() != 1.0)
        throw std::invalid_argument("InfoStateModel: knots must span [0,1]");
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] <= s[i - 1]) throw std::invalid_argument("InfoStateModel: knots must increase");
    for (double d : density)
        if (d < 0.0) throw std::invalid_argument("InfoStateModel: density must be nonnegative");
    InfoStateModel m;
    m.kind_ = Kind::Tabulated;
    m.s_ = std::move(s);
    m.d_ = std::move(density);
    double raw = 0.0;
    for (std::size_t i = 1; i < m.s_.size(); ++i)
        raw += 0.5 * (m.d_[i] + m.d_[i - 1]) * (m.s_[i] - m.s_[i - 1]);
    if (raw <= 0.0) throw std::invalid_argument("InfoStateModel: density integrates to zero");
    m.norm_ = raw;
    return m;
}

double InfoStateModel::pdf(double s) const {
    if (s < 0.0 || s > 1.0) return 0.0;
    if (kind_ == Kind::TruncatedNormal) {
        const double t = (s - mean_) / sigma_;
        return std::exp(-0.5 * t * t) / (std::sqrt(2.0 * M_PI) * sigma_) / norm_;
    }
    const std::size_t i = segment(s_, s);
    const double w = (s - s_[i]) / (s_[i + 1] - s_[i]);
    return ((1.0 - w) * d_[i] + w * d_[i + 1]) / norm_;
}

// ------------------------------------------------------------------ Wind

WindModel WindModel::uniform_support(double base, double slope) {
    if (base <= 0.0 || base + slope <= 0.0)
        throw std::invalid_argument("WindModel: support must stay positive on [0,1]");
    WindModel w;
    w.kind_ = Kind::Uniform;
    w.base_ = base;
    w.slope_ = slope;
    return w;
}

WindModel WindModel::degenerate() {
    WindModel w;
    w.kind_ = Kind::Degenerate;
    w.base_ = 0.0;
    w.slope_ = 0.0;
    return w;
}

WindModel WindModel::tabulated(double base, double slope,
                               std::vector<double> u, std::vector<double> cdf) {
    if (base <= 0.0 || base + slope <= 0.0)
        throw std::invalid_argument("WindModel: support must stay positive on [0,1]");
    if (u.size() < 2 || u.size() != cdf.size())
        throw std::invalid_argument("WindModel: tabulated needs matching knots, >= 2");
    if (u.front() != 0.0 || u.back() != 1.0 || cdf.front() != 0.0 || cdf.back() != 1.0)
        throw std::invalid_argument("WindModel: tabulated CDF must run from (0,0) to (1,1)");
    for (std::size_t i = 1; i < u.size(); ++i)
        if (u[i] <= u[i - 1] || cdf[i] <= cdf[i - 1])
            throw std::invalid_argument("WindModel: tabulated CDF must strictly increase");
    WindModel w;
    w.kind_ = Kind::Tabulated;
    w.base_ = base;
    w.slope_ = slope;
    w.u_ = std::move(u);
    w.c_ = std::move(cdf);
    return w;
}

double WindModel::sup(double s) const {
    if (kind_ == Kind::Degenerate) return 0.0;
    return base_ + slope_ * s;
}

double WindModel::cdf(double s, double z) const {
    if (kind_ == Kind::Degenerate) return z > 0.0 ? 1.0 : 0.0;  // P(0) = 0 convention
    const double hi = sup(s);
    if (z <= 0.0) return 0.0;
    if (z >= hi) return 1.0;
    const double u = z / hi;
    if (kind_ == Kind::Uniform) return u;
    const std::size_t i = segment(u_, u);
    const double w = (u - u_[i]) / (u_[i + 1] - u_[i]);
    return (1.0 - w) * c_[i] + w * c_[i + 1];
}

double WindModel::inv_cdf(double s, double u) const {
    if (kind_ == Kind::Degenerate) return 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const double hi = sup(s);
    if (kind_ == Kind::Uniform) return u * hi;
    const std::size_t i = segment(c_, u);
    const double w = (u - c_[i]) / (c_[i + 1] - c_[i]);
    return ((1.0 - w) * u_[i] + w * u_[i + 1]) * hi;
}

double WindModel::pdf(double s, double z) const {
    if (kind_ == Kind::Degenerate)
        throw std::logic_error("WindModel: degenerate wind has no density");
    const double hi = sup(s);
    if (z < 0.0 || z > hi) return 0.0;
    if (kind_ == Kind::Uniform) return 1.0 / hi;
    const std::size_t i = segment(u_, z / hi);
    return (c_[i + 1] - c_[i]) / (u_[i + 1] - u_[i]) / hi;
}

double wind_shortfall(const WindModel& w, double s, double z) {
    if (z < 0.0) throw std::invalid_argument("wind_shortfall: z must be nonnegative");
    if (z == 0.0) return 0.0;
    if (w.kind() == WindModel::Kind::Degenerate) return z;
    const double hi = w.sup(s);
    if (w.kind() == WindModel::Kind::Uniform)
        return z <= hi ? z * z / (2.0 * hi) : z - 0.5 * hi;
    // E[(z - w)_+] = integral of the CDF from 0 to z; the CDF is piecewise
    // linear between knots u_i * hi, so the trapezoid rule on those segment
    // endpoints is exact.
    const double zc = std::min(z, hi);
    double acc = 0.0, prev_z = 0.0, prev_c = 0.0;
    for (double knot : w.tab_u()) {
        const double zk = knot * hi;
        if (zk <= 0.0) continue;
        if (zk >= zc) break;
        const double ck = w.cdf(s, zk);
        acc += 0.5 * (prev_c + ck) * (zk - prev_z);
        prev_z = zk;
        prev_c = ck;
    }
    acc += 0.5 * (prev_c + w.cdf(s, zc)) * (zc - prev_z);
    if (z > hi) acc += z - hi;  // CDF is 1 beyond the support
    return acc;
}

// ----------------------------------------------------------------- RT price

RtPriceModel RtPriceModel::linear(double intercept, double slope,
                                  Noise noise, double noise_param) {
    if ((noise == Noise::Uniform || noise == Noise::Normal) && noise_param <= 0.0)
        throw std::invalid_argument("RtPriceModel: noise parameter must be positive");
    RtPriceModel m;
    m.intercept_ = intercept;
    m.slope_ = slope;
    m.noise_ = noise;
    m.noise_param_ = noise_param;
    return m;
}

namespace {
// Acklam's rational approximation to the standard normal quantile,
// refined by one Halley step against erfc.
double normal_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}
} // namespace

double RtPriceModel::sample(double s, double u) const {
    const double m = mean(s);
    switch (noise_) {
        case Noise::None: return m;
        case Noise::Uniform: return m + noise_param_ * (2.0 * u - 1.0);
        case Noise::Normal: {
            const double uc = std::clamp(u, 1e-15, 1.0 - 1e-15);
            return m + noise_param_ * normal_quantile(uc);
        }
    }
    return m;
}

// ------------------------------------------------------------- Instance

double MarketInstance::expect(const ScalarFn& f, const Tolerances& tol,
                              const std::vector<double>& breakpoints) const {
    const auto& info = info_state;
    return integrate([&](double s) { return f(s) * info.pdf(s); }, 0.0, 1.0,
                     breakpoints, tol);
}

MarketInstance build_case_study() {
    MarketInstance inst;
    inst.load_l = 3.0;
    inst.pi_da = 26.76;
    inst.disutility = DisutilityFn::quadratic(15.0, 15.0);
    inst.info_state = InfoStateModel::truncated_normal(0.5, 0.2);
    inst.wind = WindModel::uniform_support(2.0, 1.0);
    inst.rt_price = RtPriceModel::linear(31.71, -3.71);
    return inst;
}

ValidationReport validate_assumptions(const MarketInstance& inst, int grid_n) {
    if (grid_n < 2) throw std::invalid_argument("validate_assumptions: grid_n >= 2 required");
    ValidationReport rep;
    std::ostringstream why;

    // Assumption 1(i): strict stochastic ordering of the wind CDFs.
    const double zmax = std::min(inst.wind.sup(0.0), inst.wind.sup(1.0));
    for (int i = 0; i < grid_n && rep.a1_wind_ordering; ++i) {
        const double s = double(i) / (grid_n - 1);
        const double sp = s + 1.0 / (grid_n - 1);
        if (sp > 1.0) break;
        for (int j = 1; j < grid_n; ++j) {
            const double z = zmax * double(j) / grid_n;  // interior of (0, zmax)
            if (!(inst.wind.cdf(sp, z) < inst.wind.cdf(s, z))) {
                rep.a1_wind_ordering = false;
                why << "wind ordering fails at s=" << s << " s'=" << sp << " z=" << z << "; ";
                break;
            }
        }
    }

    // Assumption 1(ii): conditional mean price strictly decreasing in s.
    for (int i = 0; i + 1 < grid_n; ++i) {
        const double s = double(i) / (grid_n - 1);
        const double sp = double(i + 1) / (grid_n - 1);
        if (!(inst.rt_price.mean(sp) < inst.rt_price.mean(s))) {
            rep.a1_price_ordering = false;
            why << "mean rt price not strictly decreasing at s=" << s << "; ";
            break;
        }
    }

    // Assumption 2: strong convexity of the disutility on [0, l].
    for (int i = 0; i < grid_n; ++i) {
        const double y = inst.load_l * double(i) / (grid_n - 1);
        if (!(inst.disutility.ddphi(y) > 0.0)) {
            rep.a2_convexity = false;
            why << "phi''(y) <= 0 at y=" << y << "; ";
            break;
        }
    }

    // Assumption 3: discounted day-ahead price.
    const double rhs = inst.expect([&](double s) {
        return inst.rt_price.mean(s) * inst.wind.cdf(s, inst.load_l);
    });
    if (!(inst.pi_da < rhs)) {
        rep.a3_discount = false;
        why << "pi_da=" << inst.pi_da << " not below E[mean*P(l)]=" << rhs << "; ";
    }

    rep.detail = why.str();
    return rep;
}

// ---------------------------------------------------------------- JSON I/O

namespace {

using nlohmann::json;

void require_fields(const json& j, const std::set<std::string>& allowed,
                    const std::set<std::string>& required, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("unknown field '" + it.key() + "' in " + where);
    for (const auto& k : required)
        if (!j.contains(k))
            throw std::invalid_argument("missing field '" + k + "' in " + where);
}

} // namespace

std::string to_json(const MarketInstance& inst) {
    json j;
    j["load_l"] = inst.load_l;
    j["pi_da"] = inst.pi_da;

    json d;
    if (inst.disutility.kind() == DisutilityFn::Kind::Quadratic) {
        d["kind"] = "quadratic";
        d["a"] = inst.disutility.quad_a();
        d["b"] = inst.disutility.quad_b();
    } else {
        d["kind"] = "tabulated";
        d["y"] = inst.disutility.knots();
        d["dphi"] = inst.disutility.knot_dphi();
    }
    j["disutility"] = d;

    json is;
    if (inst.info_state.kind() == InfoStateModel::Kind::TruncatedNormal) {
        is["kind"] = "truncated-normal";
        is["mean"] = inst.info_state.mean();
        is["sigma"] = inst.info_state.sigma();
    } else {
        is["kind"] = "tabulated";
        is["s"] = inst.info_state.knots();
        is["density"] = inst.info_state.knot_density();
    }
    j["info_state"] = is;

    json w;
    switch (inst.wind.kind()) {
        case WindModel::Kind::Uniform:
            w["kind"] = "uniform-support";
            w["base"] = inst.wind.base();
            w["slope"] = inst.wind.slope();
            break;
        case WindModel::Kind::Degenerate:
            w["kind"] = "degenerate";
            break;
        case WindModel::Kind::Tabulated:
            throw std::invalid_argument("to_json: tabulated wind serialization not supported");
    }
    j["wind"] = w;

    json rt;
    rt["kind"] = "linear";
    rt["intercept"] = inst.rt_price.intercept();
    rt["slope"] = inst.rt_price.slope();
    switch (inst.rt_price.noise()) {
        case RtPriceModel::Noise::None: rt["noise"] = "none"; break;
        case RtPriceModel::Noise::Uniform:
            rt["noise"] = "uniform";
            rt["noise_param"] = inst.rt_price.noise_param();
            break;
        case RtPriceModel::Noise::Normal:
            rt["noise"] = "normal";
            rt["noise_param"] = inst.rt_price.noise_param();
            break;
    }
    j["rt_price"] = rt;

    return j.dump(2) + "\n";
}

MarketInstance instance_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("instance JSON: ") + e.what());
    }
    require_fields(j, {"load_l", "pi_da", "disutility", "info_state", "wind", "rt_price"},
                   {"load_l", "pi_da", "disutility", "info_state", "wind", "rt_price"},
                   "instance");
    MarketInstance inst;
    inst.load_l = j.at("load_l").get<double>();
    inst.pi_da = j.at("pi_da").get<double>();
    if (!(inst.load_l > 0.0)) throw std::invalid_argument("load_l must be positive");
    if (!(inst.pi_da > 0.0)) throw std::invalid_argument("pi_da must be positive");

    const json& d = j.at("disutility");
    const std::string dk = d.at("kind").get<std::string>();
    if (dk == "quadratic") {
        require_fields(d, {"kind", "a", "b"}, {"kind", "a", "b"}, "disutility");
        inst.disutility = DisutilityFn::quadratic(d.at("a").get<double>(), d.at("b").get<double>());
    } else if (dk == "tabulated") {
        require_fields(d, {"kind", "y", "dphi"}, {"kind", "y", "dphi"}, "disutility");
        inst.disutility = DisutilityFn::tabulated(d.at("y").get<std::vector<double>>(),
                                                  d.at("dphi").get<std::vector<double>>());
    } else if (dk == "linear") {
        // constructible from JSON so that validate_assumptions can reject it
        require_fields(d, {"kind", "a"}, {"kind", "a"}, "disutility");
        const double a = d.at("a").get<double>();
        inst.disutility = DisutilityFn::tabulated({0.0, 1e6}, {a, a});
    } else {
        throw std::invalid_argument("unknown disutility kind '" + dk + "'");
    }

    const json& is = j.at("info_state");
    const std::string ik = is.at("kind").get<std::string>();
    if (ik == "truncated-normal") {
        require_fields(is, {"kind", "mean", "sigma"}, {"kind", "sigma"}, "info_state");
        const double mean = is.contains("mean") ? is.at("mean").get<double>() : 0.5;
        inst.info_state = InfoStateModel::truncated_normal(mean, is.at("sigma").get<double>());
    } else if (ik == "tabulated") {
        require_fields(is, {"kind", "s", "density"}, {"kind", "s", "density"}, "info_state");
        inst.info_state = InfoStateModel::tabulated(is.at("s").get<std::vector<double>>(),
                                                    is.at("density").get<std::vector<double>>());
    } else {
        throw std::invalid_argument("unknown info_state kind '" + ik + "'");
    }

    const json& w = j.at("wind");
    const std::string wk = w.at("kind").get<std::string>();
    if (wk == "uniform-support") {
        require_fields(w, {"kind", "base", "slope"}, {"kind"}, "wind");
        const double base = w.contains("base") ? w.at("base").get<double>() : 2.0;
        const double slope = w.contains("slope") ? w.at("slope").get<double>() : 1.0;
        inst.wind = WindModel::uniform_support(base, slope);
    } else if (wk == "degenerate") {
        require_fields(w, {"kind"}, {"kind"}, "wind");
        inst.wind = WindModel::degenerate();
    } else {
        throw std::invalid_argument("unknown wind kind '" + wk + "'");
    }

    const json& rt = j.at("rt_price");
    require_fields(rt, {"kind", "intercept", "slope", "noise", "noise_param"},
                   {"kind", "intercept", "slope"}, "rt_price");
    if (rt.at("kind").get<std::string>() != "linear")
        throw std::invalid_argument("unknown rt_price kind");
    RtPriceModel::Noise noise = RtPriceModel::Noise::None;
    double np = 0.0;
    if (rt.contains("noise")) {
        const std::string nk = rt.at("noise").get<std::string>();
        if (nk == "none") noise = RtPriceModel::Noise::None;
        else if (nk == "uniform") noise = RtPriceModel::Noise::Uniform;
        else if (nk == "normal") noise = RtPriceModel::Noise::Normal;
        else throw std::invalid_argument("unknown rt_price noise '" + nk + "'");
        if (noise != RtPriceModel::Noise::None)
            np = rt.at("noise_param").get<double>();
    }
    inst.rt_price = RtPriceModel::linear(rt.at("intercept").get<double>(),
                                         rt.at("slope").get<double>(), noise, np);
    return inst;
}

MarketInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return instance_from_json(ss.str());
}

} // namespace dro
