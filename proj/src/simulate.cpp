#include "dro/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace dro {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t draw, std::uint32_t stream) {
    std::uint64_t z = splitmix64(seed);
    z = splitmix64(z ^ splitmix64(draw));
    z = splitmix64(z ^ splitmix64(stream));
    // 53-bit mantissa in [0, 1)
    return double(z >> 11) * 0x1.0p-53;
}

InfoStateSampler::InfoStateSampler(const InfoStateModel& model, int table_n) {
    if (table_n < 2) throw std::invalid_argument("InfoStateSampler: table_n >= 2 required");
    cdf_.assign(table_n, 0.0);
    const Tolerances tight = Tolerances{}.with_quad_rel(1e-12);
    double acc = 0.0;
    for (int i = 1; i < table_n; ++i) {
        const double a = double(i - 1) / (table_n - 1);
        const double b = double(i) / (table_n - 1);
        acc += integrate([&](double s) { return model.pdf(s); }, a, b, tight);
        cdf_[i] = acc;
    }
    // guard against last-digit drift so sample(1) maps to s = 1
    for (auto& c : cdf_) c /= acc;
}

double InfoStateSampler::sample(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return 0.0;
    if (it == cdf_.end()) return 1.0;
    const std::size_t i = std::size_t(it - cdf_.begin()) - 1;
    const double span = cdf_[i + 1] - cdf_[i];
    const double w = span > 0.0 ? (u - cdf_[i]) / span : 0.0;
    return (double(i) + w) / double(cdf_.size() - 1);
}

ScenarioDraw sample_scenario(const MarketInstance& inst, const InfoStateSampler& sampler,
                             std::uint64_t seed, std::uint64_t draw) {
    ScenarioDraw d;
    d.s = sampler.sample(counter_uniform(seed, draw, 0));
    d.w = inst.wind.inv_cdf(d.s, counter_uniform(seed, draw, 1));
    d.pi_rt = inst.rt_price.sample(d.s, counter_uniform(seed, draw, 2));
    return d;
}

ExpostCosts expost_costs(const MarketInstance& inst, const DecisionBundle& bundle,
                         const ScenarioDraw& draw) {
    const double y = bundle.y_policy(draw.s);
    const double q_rt = std::max(inst.load_l - bundle.q - y - draw.w, 0.0);
    double payment = 0.0;  // R_s(y): what the LSE pays the aggregator
    switch (bundle.payments) {
        case PaymentKind::None:
            payment = 0.0;
            break;
        case PaymentKind::Spot:
            payment = bundle.price_curve(draw.s) * y;
            break;
        case PaymentKind::Options:
            payment = bundle.pi_o * bundle.x + bundle.pi_sp * y;
            break;
    }
    ExpostCosts c;
    c.lse = inst.pi_da * bundle.q + payment + draw.pi_rt * q_rt;
    c.agg = inst.disutility.phi(y) - payment;
    c.system = c.lse + c.agg;
    return c;
}

namespace {

// Deterministic pairwise summation (fixed order regardless of worker count).
double pairwise_sum(std::vector<double>& v) {
    std::size_t n = v.size();
    while (n > 1) {
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i < n / 2; ++i) v[i] = v[2 * i] + v[2 * i + 1];
        if (n % 2) v[n / 2] = v[n - 1];
        n = half;
    }
    return n ? v[0] : 0.0;
}

} // namespace

MCReport monte_carlo(const MarketInstance& inst, const DecisionBundle& bundle,
                     std::uint64_t n, std::uint64_t seed, const AnalyticRefs* refs) {
    if (n < 10000) throw std::invalid_argument("monte_carlo: n >= 10^4 required");
    const InfoStateSampler sampler(inst.info_state);

    const std::uint64_t block = 4096;
    const std::uint64_t nblocks = (n + block - 1) / block;
    std::vector<double> sl(nblocks, 0.0), sa(nblocks, 0.0), ss(nblocks, 0.0);
    std::vector<double> sl2(nblocks, 0.0), sa2(nblocks, 0.0), ss2(nblocks, 0.0);

    MCReport rep;
    rep.n = n;
    rep.seed = seed;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        double bl = 0.0, ba = 0.0, bs = 0.0, bl2 = 0.0, ba2 = 0.0, bs2 = 0.0;
        const std::uint64_t end = std::min(n, (b + 1) * block);
        for (std::uint64_t i = b * block; i < end; ++i) {
            const ScenarioDraw d = sample_scenario(inst, sampler, seed, i);
            const ExpostCosts c = expost_costs(inst, bundle, d);
            bl += c.lse; ba += c.agg; bs += c.system;
            bl2 += c.lse * c.lse; ba2 += c.agg * c.agg; bs2 += c.system * c.system;
            rep.max_identity_error =
                std::max(rep.max_identity_error, std::abs(c.lse + c.agg - c.system));
        }
        sl[b] = bl; sa[b] = ba; ss[b] = bs;
        sl2[b] = bl2; sa2[b] = ba2; ss2[b] = bs2;
    }

    const double dn = double(n);
    rep.mean_lse = pairwise_sum(sl) / dn;
    rep.mean_agg = pairwise_sum(sa) / dn;
    rep.mean_system = pairwise_sum(ss) / dn;
    auto stderr_of = [&](std::vector<double>& sq, double mean) {
        const double var = std::max(pairwise_sum(sq) / dn - mean * mean, 0.0);
        return std::sqrt(var / dn);
    };
    rep.se_lse = stderr_of(sl2, rep.mean_lse);
    rep.se_agg = stderr_of(sa2, rep.mean_agg);
    rep.se_system = stderr_of(ss2, rep.mean_system);

    if (refs) {
        rep.has_refs = true;
        rep.ref_lse = refs->lse;
        rep.ref_agg = refs->agg;
        rep.ref_system = refs->system;
        auto z = [](double m, double r, double se) {
            return se > 0.0 ? (m - r) / se : 0.0;
        };
        rep.z_lse = z(rep.mean_lse, refs->lse, rep.se_lse);
        rep.z_agg = z(rep.mean_agg, refs->agg, rep.se_agg);
        rep.z_system = z(rep.mean_system, refs->system, rep.se_system);
    }
    return rep;
}

std::string to_json(const MCReport& rep) {
    nlohmann::json j;
    j["n"] = rep.n;
    j["seed"] = rep.seed;
    j["mean_lse"] = rep.mean_lse;
    j["mean_agg"] = rep.mean_agg;
    j["mean_system"] = rep.mean_system;
    j["se_lse"] = rep.se_lse;
    j["se_agg"] = rep.se_agg;
    j["se_system"] = rep.se_system;
    j["max_identity_error"] = rep.max_identity_error;
    if (rep.has_refs) {
        j["ref_lse"] = rep.ref_lse;
        j["ref_agg"] = rep.ref_agg;
        j["ref_system"] = rep.ref_system;
        j["z_lse"] = rep.z_lse;
        j["z_agg"] = rep.z_agg;
        j["z_system"] = rep.z_system;
    }
    return j.dump(2) + "\n";
}

} // namespace dro
