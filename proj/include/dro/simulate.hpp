#ifndef DRO_SIMULATE_HPP
#define DRO_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dro/models.hpp"
#include "dro/numerics.hpp"
#include "dro/planner.hpp"

namespace dro {

// Counter-based uniform stream: value is a pure function of
// (seed, draw index, stream id), so draws are order-independent.
double counter_uniform(std::uint64_t seed, std::uint64_t draw, std::uint32_t stream);

// Inverse-CDF sampler for the information state (4096-point monotone table).
class InfoStateSampler {
public:
    explicit InfoStateSampler(const InfoStateModel& model, int table_n = 4096);
    double sample(double u) const;

private:
    std::vector<double> cdf_;  // cdf_[i] = P(S <= i/(n-1))
};

struct ScenarioDraw {
    double s = 0.0;
    double w = 0.0;
    double pi_rt = 0.0;
};

ScenarioDraw sample_scenario(const MarketInstance& inst, const InfoStateSampler& sampler,
                             std::uint64_t seed, std::uint64_t draw);

enum class PaymentKind { None, Spot, Options };

struct DecisionBundle {
    double q = 0.0;
    Policy y_policy;                 // s -> curtailment
    PaymentKind payments = PaymentKind::None;
    Policy price_curve;              // spot payments: s -> contingent price
    double pi_o = 0.0, pi_sp = 0.0, x = 0.0;  // options payments
};

struct ExpostCosts {
    double lse = 0.0;
    double agg = 0.0;
    double system = 0.0;
};

ExpostCosts expost_costs(const MarketInstance& inst, const DecisionBundle& bundle,
                         const ScenarioDraw& draw);

struct MCReport {
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    double mean_lse = 0.0, mean_agg = 0.0, mean_system = 0.0;
    double se_lse = 0.0, se_agg = 0.0, se_system = 0.0;
    double ref_lse = 0.0, ref_agg = 0.0, ref_system = 0.0;
    bool has_refs = false;
    double z_lse = 0.0, z_agg = 0.0, z_system = 0.0;
    double max_identity_error = 0.0;  // max |lse + agg - system| over draws
};

struct AnalyticRefs {
    double lse = 0.0, agg = 0.0, system = 0.0;
};

MCReport monte_carlo(const MarketInstance& inst, const DecisionBundle& bundle,
                     std::uint64_t n, std::uint64_t seed,
                     const AnalyticRefs* refs = nullptr);

std::string to_json(const MCReport& rep);

} // namespace dro

#endif
