#pragma once

#include "leoroute/constellation.hpp"
#include "leoroute/router.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace leoroute {

enum class Strategy : std::uint8_t { Ours, Dsp, Lsp, Dspcr, Lspcr };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

/// Uses ground relays as shortcuts.
inline bool is_cooperative(Strategy s) { return s == Strategy::Ours || s == Strategy::Dspcr || s == Strategy::Lspcr; }

struct LinkProfile {
    double R_ISL = 25e6;       ///< bit/s
    double R_SGL_up = 2e9;     ///< bit/s
    double R_SGL_down = 1.5e9; ///< bit/s
    double B_s = 5e6;          ///< bits per send buffer
    double B_w = 40e6;         ///< bits per satellite waiting buffer
};

struct TrafficConfig {
    int flow_count = 300;
    double R_pac = 5e6;        ///< bit/s per flow while ON
    double on_mean_s = 1.0;
    double off_mean_s = 1.0;
    double packet_bits = 12000.0;
};

struct ScenarioConfig {
    WalkerDelta constellation = WalkerDelta::starlink_phase1();
    std::vector<GroundRelay> relays;
    LinkProfile link;
    TrafficConfig traffic;
    Strategy strategy = Strategy::Ours;
    double duration = 20.51;
    /// After `duration`, traffic stops and forwarding continues for up to this long so
    /// packets generated near the end are still counted.
    double drain_s = 0.0;
    double tau = 1e-3;
    double knbg_period = 0.6;
    std::uint64_t seed = 1;
    int forwarding_rate_multiplier = 1;
    RoutingParams routing;     ///< η, N0 and threshold rule; rates and B_s are taken from `link`
    int replan_limit = 4;      ///< re-plans per packet before falling back to pure ISL forwarding
    bool record_trace = false;
    bool check_invariants = true;

    void validate() const;
    /// Routing parameters with rates, tick and usable send-buffer size filled in.
    RoutingParams routing_params() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` text; `#` starts a comment. Duplicate keys are rejected.
KeyValues read_key_values(const std::string& path);
KeyValues parse_key_values(std::string_view text, const std::string& origin = "<text>");

/**
 * Builds a scenario from key/value pairs. Angles in degrees, rates in bit/s, sizes in
 * bits. Throws ConfigError naming the offending key.
 */
ScenarioConfig scenario_from_key_values(const KeyValues& kv);

inline ScenarioConfig load_scenario(const std::string& path)
{
    return scenario_from_key_values(read_key_values(path));
}

/// Keys accepted by scenario_from_key_values whose values are plain numbers.
bool is_numeric_scenario_key(std::string_view key);
bool is_known_scenario_key(std::string_view key);

} // namespace leoroute
