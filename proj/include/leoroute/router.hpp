#pragma once

#include "leoroute/constellation.hpp"

#include <optional>
#include <span>

namespace leoroute {

/**
 * How the delay-cost threshold picks an axis when neither or both candidates are saturated.
 * Balanced leans toward the axis with more remaining hops unless it is costlier by more
 * than Γ. AsPrinted compares the costs with the opposite sign, which leans toward the
 * costlier queue; it is kept for comparison runs.
 */
enum class ThresholdRule : std::uint8_t { Balanced, AsPrinted };

/// Forwarding parameters of one link profile. Rates in bit/s, sizes in bits.
struct RoutingParams {
    double eta1 = 0.01;
    double eta2 = 2.0;
    double eta3 = 1.0;
    double eta4 = 2.0;
    double eta5 = 1.0;
    int N0 = 4;
    double tau = 1e-3;
    double R_ISL = 25e6;
    double R_SGL_up = 2e9;
    double R_SGL_down = 1.5e9;
    double B_s = 5e6;
    ThresholdRule threshold_rule = ThresholdRule::Balanced;

    void validate() const;
};

/// Send-buffer view for one forwarding decision, in bits.
struct CandidateQueues {
    double local_h = 0.0; ///< Q_i^h
    double local_v = 0.0; ///< Q_i^v
    double next_h = 0.0;  ///< Q_{i+1}^h, aggregate of the horizontal next hop
    double next_v = 0.0;  ///< Q_{i+1}^v
};

/// A next hop's load as seen by its upstream neighbour: the mean of its two candidate queues.
inline double neighbor_aggregate(double q_h, double q_v) { return 0.5 * (q_h + q_v); }

struct DelayCosts {
    double T_h = 0.0;
    double T_v = 0.0;
};

DelayCosts delay_costs(const CandidateQueues& q, double R_ISL);

/// Γ = η1·(2B_s/R_ISL − max(T_h, T_v)).
double gamma_threshold(double T_h, double T_v, double B_s, double R_ISL, double eta1);

enum class Axis : std::uint8_t { Horizontal, Vertical };

/// Which branch of the inter-satellite rule fired. Useful for tracing.
enum class DecisionBranch : std::uint8_t { Forced, Saturation, Threshold };

struct IntersatDecision {
    Axis axis = Axis::Horizontal;
    DecisionBranch branch = DecisionBranch::Forced;
};

IntersatDecision decide_intersat(int rem_h, int rem_v, const CandidateQueues& q,
                                 const RoutingParams& params);

struct PsiThresholds {
    double down = 0.0;
    double up = 0.0;
};

PsiThresholds psi_thresholds(const RoutingParams& params);

/// A gateway as seen by a relay-side decision: its P column and the SGL queue in question.
struct GatewayLoad {
    SatelliteId sat;
    int P = 0;
    double load = 0.0;
};

/**
 * Lightest gateway within N0 columns of `anchor_P` that is strictly lighter than
 * `reference_load`. Ties go to the lower satellite id. Returns nothing if none qualifies.
 */
std::optional<GatewayLoad> lightest_alternate(std::span<const GatewayLoad> gateways, SatelliteId exclude,
                                              int anchor_P, double reference_load, int N0, int N);

struct SatTerrestrialDecision {
    bool to_relay = true;
    SatelliteId alternate; ///< set when to_relay is false
};

/// At a down-gateway: descend to the relay, or divert to a lighter gateway of the same relay.
SatTerrestrialDecision decide_sat_terrestrial(const GatewayLoad& current,
                                              std::span<const GatewayLoad> relay_gateways,
                                              const RoutingParams& params, int N);

struct TerrestrialSatDecision {
    SatelliteId gateway;
    bool replan = false; ///< not the planned gateway, so the header must be rebuilt there
};

/**
 * At a relay: climb through the planned gateway, or through a lighter one nearby.
 * `planned` is empty when the planned gateway is no longer a gateway of this relay.
 * Returns nothing only if the relay currently has no gateways.
 */
std::optional<TerrestrialSatDecision> decide_terrestrial_sat(
    const std::optional<GatewayLoad>& planned, std::span<const GatewayLoad> relay_gateways,
    const RoutingParams& params, int N);

} // namespace leoroute
