#include "leoroute/router.hpp"

#include <algorithm>

namespace leoroute {

void RoutingParams::validate() const
{
    if (!(R_ISL > 0 && R_SGL_up > 0 && R_SGL_down > 0))
        throw ConfigError("link rates must be positive");
    if (!(tau > 0))
        throw ConfigError("tick length tau must be positive");
    if (!(B_s > 0))
        throw ConfigError("send buffer B_s must be positive");
    if (N0 < 0)
        throw ConfigError("N0 must be non-negative");
    for (double e : {eta1, eta2, eta3, eta4, eta5})
        if (e < 0)
            throw ConfigError("smoothing factors must be non-negative");
}

DelayCosts delay_costs(const CandidateQueues& q, double R_ISL)
{
    return {(q.local_h + q.next_h) / R_ISL, (q.local_v + q.next_v) / R_ISL};
}

double gamma_threshold(double T_h, double T_v, double B_s, double R_ISL, double eta1)
{
    return eta1 * (2.0 * B_s / R_ISL - std::max(T_h, T_v));
}

IntersatDecision decide_intersat(int rem_h, int rem_v, const CandidateQueues& q,
                                 const RoutingParams& params)
{
    if (rem_h < 0 || rem_v < 0 || rem_h + rem_v == 0)
        throw ContractViolation("decide_intersat: no remaining hops in this segment");
    if (rem_h == 0)
        return {Axis::Vertical, DecisionBranch::Forced};
    if (rem_v == 0)
        return {Axis::Horizontal, DecisionBranch::Forced};

    const bool sat_h = q.local_h >= params.B_s || q.next_h >= params.B_s;
    const bool sat_v = q.local_v >= params.B_s || q.next_v >= params.B_s;
    if (sat_h != sat_v)
        return {sat_h ? Axis::Vertical : Axis::Horizontal, DecisionBranch::Saturation};

    // Both or neither saturated: compare delay costs against Γ.
    const auto T = delay_costs(q, params.R_ISL);
    const double G = gamma_threshold(T.T_h, T.T_v, params.B_s, params.R_ISL, params.eta1);
    // d > 0 means the vertical queue is the costlier one.
    const double d = params.threshold_rule == ThresholdRule::Balanced ? T.T_v - T.T_h : T.T_h - T.T_v;
    const bool vertical = (rem_h <= rem_v && d <= G) || (rem_v <= rem_h && -d > G);
    return {vertical ? Axis::Vertical : Axis::Horizontal, DecisionBranch::Threshold};
}

PsiThresholds psi_thresholds(const RoutingParams& p)
{
    return {p.eta2 * p.tau * p.R_ISL + p.eta3 * p.tau * p.R_SGL_down,
            p.eta4 * p.tau * p.R_ISL + p.eta5 * p.tau * p.R_SGL_up};
}

std::optional<GatewayLoad> lightest_alternate(std::span<const GatewayLoad> gateways, SatelliteId exclude,
                                              int anchor_P, double reference_load, int N0, int N)
{
    std::optional<GatewayLoad> best;
    for (const auto& g : gateways) {
        if (g.sat == exclude || ring_distance(g.P, anchor_P, N) > N0 || !(g.load < reference_load))
            continue;
        if (!best || g.load < best->load || (g.load == best->load && g.sat < best->sat))
            best = g;
    }
    return best;
}

SatTerrestrialDecision decide_sat_terrestrial(const GatewayLoad& current,
                                              std::span<const GatewayLoad> relay_gateways,
                                              const RoutingParams& params, int N)
{
    if (current.load <= psi_thresholds(params).down)
        return {};
    const auto alt = lightest_alternate(relay_gateways, current.sat, current.P, current.load,
                                        params.N0, N);
    if (!alt)
        return {};
    return {false, alt->sat};
}

std::optional<TerrestrialSatDecision> decide_terrestrial_sat(
    const std::optional<GatewayLoad>& planned, std::span<const GatewayLoad> relay_gateways,
    const RoutingParams& params, int N)
{
    if (!planned) {
        // Lightest uplink among whatever gateways the relay still has.
        std::optional<GatewayLoad> best;
        for (const auto& g : relay_gateways)
            if (!best || g.load < best->load || (g.load == best->load && g.sat < best->sat))
                best = g;
        if (!best)
            return std::nullopt;
        return TerrestrialSatDecision{best->sat, true};
    }
    if (planned->load <= psi_thresholds(params).up)
        return TerrestrialSatDecision{planned->sat, false};
    const auto alt = lightest_alternate(relay_gateways, planned->sat, planned->P, planned->load,
                                        params.N0, N);
    if (!alt)
        return TerrestrialSatDecision{planned->sat, false};
    return TerrestrialSatDecision{alt->sat, true};
}

} // namespace leoroute
