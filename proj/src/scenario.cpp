#include "leoroute/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace leoroute {

std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::Ours: return "OURS";
    case Strategy::Dsp: return "DSP";
    case Strategy::Lsp: return "LSP";
    case Strategy::Dspcr: return "DSPCR";
    default: return "LSPCR";
    }
}

Strategy parse_strategy(std::string_view name)
{
    for (auto s : {Strategy::Ours, Strategy::Dsp, Strategy::Lsp, Strategy::Dspcr, Strategy::Lspcr})
        if (to_string(s) == name)
            return s;
    throw ConfigError("strategy: unknown value '" + std::string(name) +
                      "' (expected OURS, DSP, LSP, DSPCR or LSPCR)");
}

void ScenarioConfig::validate() const
{
    if (!(duration > 0))
        throw ConfigError("duration: must be positive");
    if (!(drain_s >= 0))
        throw ConfigError("drain_s: must be non-negative");
    if (!(tau > 0))
        throw ConfigError("tau: must be positive");
    if (!(knbg_period > 0))
        throw ConfigError("knbg_period: must be positive");
    if (!(link.R_ISL > 0))
        throw ConfigError("R_ISL: must be positive");
    if (!(link.R_SGL_up > 0))
        throw ConfigError("R_SGL_up: must be positive");
    if (!(link.R_SGL_down > 0))
        throw ConfigError("R_SGL_down: must be positive");
    if (!(traffic.packet_bits > 0))
        throw ConfigError("packet_bits: must be positive");
    if (link.B_s < traffic.packet_bits)
        throw ConfigError("B_s: must hold at least one packet");
    if (link.B_w < 0)
        throw ConfigError("B_w: must be non-negative");
    if (traffic.flow_count < 0)
        throw ConfigError("flow_count: must be non-negative");
    if (traffic.R_pac < 0)
        throw ConfigError("R_pac: must be non-negative");
    if (!(traffic.on_mean_s > 0) || !(traffic.off_mean_s >= 0))
        throw ConfigError("on_mean_s/off_mean_s: ON mean must be positive, OFF mean non-negative");
    if (forwarding_rate_multiplier != 1 && forwarding_rate_multiplier != 2)
        throw ConfigError("forwarding_rate_multiplier: must be 1 or 2");
    if (replan_limit < 0)
        throw ConfigError("replan_limit: must be non-negative");
    if (constellation.satellite_count() > 65535)
        throw ConfigError("S: at most 65535 satellites fit the header id width");
    for (const auto& r : relays)
        r.validate();
    routing_params().validate();
}

RoutingParams ScenarioConfig::routing_params() const
{
    RoutingParams p = routing;
    p.tau = tau;
    p.R_ISL = link.R_ISL;
    p.R_SGL_up = link.R_SGL_up;
    p.R_SGL_down = link.R_SGL_down;
    // A buffer is full once the next packet no longer fits.
    p.B_s = std::floor(link.B_s / traffic.packet_bits) * traffic.packet_bits;
    return p;
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

constexpr std::array kNumericKeys = {
    "S", "N", "F", "h_km", "inclination_deg", "R_ISL", "R_SGL_up", "R_SGL_down", "B_s", "B_w",
    "flow_count", "R_pac", "on_mean_s", "off_mean_s", "packet_bits", "duration", "drain_s", "tau",
    "knbg_period", "seed", "forwarding_rate_multiplier", "relay_count", "min_elevation_deg",
    "eta1", "eta2", "eta3", "eta4", "eta5", "N0", "replan_limit", "omega_e", "r_e"};
constexpr std::array kTextKeys = {"strategy", "threshold_rule", "trace", "check_invariants"};
constexpr std::array kRequired = {"S", "N", "F", "h_km", "inclination_deg",
                                  "R_ISL", "R_SGL_up", "R_SGL_down", "B_s", "B_w"};

bool is_relay_key(std::string_view key) { return key.starts_with("relay_") && key != "relay_count"; }

double to_double(const KeyValues& kv, const std::string& key)
{
    const std::string& v = kv.at(key);
    double out = 0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end)
        throw ConfigError(key + ": '" + v + "' is not a number");
    return out;
}

long long to_integer(const KeyValues& kv, const std::string& key)
{
    const double d = to_double(kv, key);
    if (d != std::floor(d))
        throw ConfigError(key + ": '" + kv.at(key) + "' is not an integer");
    return static_cast<long long>(d);
}

bool to_bool(const KeyValues& kv, const std::string& key)
{
    const auto& v = kv.at(key);
    if (v == "1" || v == "true" || v == "on")
        return true;
    if (v == "0" || v == "false" || v == "off")
        return false;
    throw ConfigError(key + ": '" + v + "' is not a boolean");
}

} // namespace

bool is_numeric_scenario_key(std::string_view key)
{
    return std::find(kNumericKeys.begin(), kNumericKeys.end(), key) != kNumericKeys.end();
}

bool is_known_scenario_key(std::string_view key)
{
    return is_numeric_scenario_key(key) || is_relay_key(key) ||
           std::find(kTextKeys.begin(), kTextKeys.end(), key) != kTextKeys.end();
}

KeyValues parse_key_values(std::string_view text, const std::string& origin)
{
    KeyValues kv;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        const std::string body = trim(line);
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw ConfigError(key + ": duplicate key at " + origin + ":" + std::to_string(lineno));
    }
    return kv;
}

KeyValues read_key_values(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_key_values(ss.str(), path);
}

ScenarioConfig scenario_from_key_values(const KeyValues& kv)
{
    for (const auto& [k, v] : kv)
        if (!is_known_scenario_key(k))
            throw ConfigError(k + ": unknown scenario key");
    for (const char* req : kRequired)
        if (!kv.contains(req))
            throw ConfigError(std::string(req) + ": missing required key");

    auto num = [&](const char* key, double def) { return kv.contains(key) ? to_double(kv, key) : def; };
    auto integer = [&](const char* key, long long def) {
        return kv.contains(key) ? to_integer(kv, key) : def;
    };

    const long long S = to_integer(kv, "S");
    const long long N = to_integer(kv, "N");
    if (N < 1 || S < 1)
        throw ConfigError("S/N: must be positive");
    if (S % N != 0)
        throw ConfigError("S: " + std::to_string(S) + " satellites do not split evenly over N = " +
                          std::to_string(N) + " orbits");

    ScenarioConfig sc;
    sc.constellation = WalkerDelta(static_cast<int>(N), static_cast<int>(S / N),
                                     static_cast<int>(to_integer(kv, "F")), to_double(kv, "h_km"),
                                     deg2rad(to_double(kv, "inclination_deg")), 0.0,
                                     num("omega_e", 7.2921159e-5), num("r_e", 6371.0));
    sc.link = {to_double(kv, "R_ISL"), to_double(kv, "R_SGL_up"), to_double(kv, "R_SGL_down"),
               to_double(kv, "B_s"), to_double(kv, "B_w")};
    sc.traffic.flow_count = static_cast<int>(integer("flow_count", sc.traffic.flow_count));
    sc.traffic.R_pac = num("R_pac", sc.traffic.R_pac);
    sc.traffic.on_mean_s = num("on_mean_s", sc.traffic.on_mean_s);
    sc.traffic.off_mean_s = num("off_mean_s", sc.traffic.off_mean_s);
    sc.traffic.packet_bits = num("packet_bits", sc.traffic.packet_bits);
    if (kv.contains("strategy"))
        sc.strategy = parse_strategy(kv.at("strategy"));
    sc.duration = num("duration", sc.duration);
    sc.drain_s = num("drain_s", sc.drain_s);
    sc.tau = num("tau", sc.tau);
    sc.knbg_period = num("knbg_period", sc.knbg_period);
    const long long seed = integer("seed", 1);
    if (seed < 0)
        throw ConfigError("seed: must be non-negative");
    sc.seed = static_cast<std::uint64_t>(seed);
    sc.forwarding_rate_multiplier = static_cast<int>(integer("forwarding_rate_multiplier", 1));
    sc.routing.eta1 = num("eta1", sc.routing.eta1);
    sc.routing.eta2 = num("eta2", sc.routing.eta2);
    sc.routing.eta3 = num("eta3", sc.routing.eta3);
    sc.routing.eta4 = num("eta4", sc.routing.eta4);
    sc.routing.eta5 = num("eta5", sc.routing.eta5);
    sc.routing.N0 = static_cast<int>(integer("N0", sc.routing.N0));
    if (kv.contains("threshold_rule")) {
        const auto& v = kv.at("threshold_rule");
        if (v == "balanced")
            sc.routing.threshold_rule = ThresholdRule::Balanced;
        else if (v == "as_printed")
            sc.routing.threshold_rule = ThresholdRule::AsPrinted;
        else
            throw ConfigError("threshold_rule: expected 'balanced' or 'as_printed'");
    }
    sc.replan_limit = static_cast<int>(integer("replan_limit", sc.replan_limit));
    if (kv.contains("trace"))
        sc.record_trace = to_bool(kv, "trace");
    if (kv.contains("check_invariants"))
        sc.check_invariants = to_bool(kv, "check_invariants");

    const double min_elev = deg2rad(num("min_elevation_deg", kDefaultMinElevationDeg));
    bool custom = false;
    for (const auto& [k, v] : kv) {
        if (!is_relay_key(k))
            continue;
        custom = true;
        int id = 0;
        const auto idtext = std::string_view(k).substr(6);
        const auto res = std::from_chars(idtext.data(), idtext.data() + idtext.size(), id);
        if (res.ec != std::errc() || res.ptr != idtext.data() + idtext.size() || id < 1)
            throw ConfigError(k + ": relay keys look like relay_<positive id>");
        double lat = 0, lon = 0;
        char comma = 0;
        std::istringstream is(v);
        if (!(is >> lat >> comma >> lon) || comma != ',')
            throw ConfigError(k + ": expected 'lat_deg, lon_deg'");
        sc.relays.push_back(GroundRelay{id, deg2rad(lat), wrap_two_pi(deg2rad(lon)), min_elev});
    }
    if (!custom) {
        const long long count = integer("relay_count", 25);
        try {
            sc.relays = reconstructed_relays(static_cast<int>(count), min_elev);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("relay_count: ") + e.what());
        }
    } else if (kv.contains("relay_count")) {
        throw ConfigError("relay_count: cannot be combined with explicit relay_<id> entries");
    }
    std::sort(sc.relays.begin(), sc.relays.end(),
              [](const GroundRelay& a, const GroundRelay& b) { return a.id < b.id; });

    sc.validate();
    return sc;
}

} // namespace leoroute
