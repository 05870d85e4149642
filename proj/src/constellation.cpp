#include "leoroute/constellation.hpp"

#include <algorithm>
#include <string>

namespace leoroute {

WalkerDelta::WalkerDelta(int orbits, int per_orbit, int phasing, double altitude_km,
                         double inclination_rad, double sat_angular_velocity,
                         double earth_angular_velocity, double earth_radius_km)
    : m_orbits(orbits),
      m_perOrbit(per_orbit),
      m_phasing(phasing),
      m_altitude(altitude_km),
      m_inclination(inclination_rad),
      m_omegaS(sat_angular_velocity),
      m_omegaE(earth_angular_velocity),
      m_earthRadius(earth_radius_km)
{
    if (orbits < 1)
        throw ConfigError("orbit count N must be >= 1, got " + std::to_string(orbits));
    if (per_orbit < 3)
        throw ConfigError("satellites per orbit M must be >= 3, got " + std::to_string(per_orbit));
    if (phasing < 0 || phasing >= orbits * per_orbit)
        throw ConfigError("phasing factor F must be in [0, N*M), got " + std::to_string(phasing));
    if (!(inclination_rad > 0.0 && inclination_rad < kHalfPi))
        throw ConfigError("inclination must be acute (0 < alpha < 90 deg)");
    if (!(altitude_km > 0.0) || !(earth_radius_km > 0.0))
        throw ConfigError("altitude and earth radius must be positive");
    if (!(earth_angular_velocity >= 0.0))
        throw ConfigError("earth angular velocity must be non-negative");
    if (m_omegaS <= 0.0)
        m_omegaS = std::sqrt(kEarthMu / std::pow(earth_radius_km + altitude_km, 3));

    m_deltaOmega = kTwoPi / orbits;
    m_deltaPhi = kTwoPi / per_orbit;
    m_deltaF = kTwoPi * phasing / (static_cast<double>(orbits) * per_orbit);
}

WalkerDelta WalkerDelta::starlink_phase1()
{
    return WalkerDelta(72, 22, 39, 550.0, deg2rad(53.0));
}

InitialPhases walker_initial_phases(const WalkerDelta& cfg)
{
    InitialPhases init;
    init.phase.resize(cfg.satellite_count());
    init.node_longitude.resize(cfg.orbits());
    for (int n = 0; n < cfg.orbits(); ++n) {
        init.node_longitude[n] = n * cfg.delta_omega();
        for (int m = 0; m < cfg.per_orbit(); ++m)
            init.phase[n * cfg.per_orbit() + m] = m * cfg.delta_phi() + n * cfg.delta_f();
    }
    return init;
}

SatelliteState satellite_state(double phase, double node_longitude, double inclination)
{
    SatelliteState s;
    s.phase = wrap_pi(phase);
    s.lat = std::asin(std::sin(inclination) * std::sin(s.phase));
    s.lon = wrap_two_pi(node_longitude + node_offset(s.phase, inclination));
    s.ascending = is_ascending_phase(s.phase);
    return s;
}

Ephemeris propagate(const WalkerDelta& cfg, const InitialPhases& initial, double t)
{
    if (static_cast<int>(initial.phase.size()) != cfg.satellite_count() ||
        static_cast<int>(initial.node_longitude.size()) != cfg.orbits())
        throw ContractViolation("initial phases do not match the constellation size");
    if (t < 0.0)
        throw ContractViolation("propagation time must be non-negative");

    Ephemeris eph;
    eph.t = t;
    eph.node_longitude.resize(cfg.orbits());
    eph.sats.resize(cfg.satellite_count());
    for (int n = 0; n < cfg.orbits(); ++n)
        eph.node_longitude[n] = wrap_two_pi(initial.node_longitude[n] - cfg.omega_e() * t);
    // Accumulate the phase advance modulo 2π first so large t keeps full precision.
    const double advance = std::fmod(cfg.omega_s() * t, kTwoPi);
    for (int i = 0; i < cfg.satellite_count(); ++i) {
        const int orbit = i / cfg.per_orbit();
        eph.sats[i] = satellite_state(initial.phase[i] + advance, eph.node_longitude[orbit],
                                      cfg.inclination());
    }
    return eph;
}

Ephemeris propagate(const WalkerDelta& cfg, double t)
{
    return propagate(cfg, walker_initial_phases(cfg), t);
}

IslNeighbors isl_neighbors(SatelliteId sat, const WalkerDelta& cfg)
{
    const int N = cfg.orbits();
    const int M = cfg.per_orbit();
    if (sat.value < 1 || sat.value > N * M)
        throw ContractViolation("satellite id out of range: " + std::to_string(sat.value));
    const int n = sat.orbit(cfg) - 1;
    const int m = sat.index(cfg) - 1;
    auto id = [&](int orbit0, int index0) { return SatelliteId{orbit0 * M + index0 + 1}; };

    IslNeighbors nb;
    nb.up = id(n, pos_mod(m + 1, M));
    nb.down = id(n, pos_mod(m - 1, M));
    // Orbit N+1 is orbit 1 shifted by a full NΔf = F·ΔΦ of phase.
    const int shift = cfg.phasing() % M;
    nb.right = n + 1 < N ? id(n + 1, m) : id(0, pos_mod(m + shift, M));
    nb.left = n > 0 ? id(n - 1, m) : id(N - 1, pos_mod(m - shift, M));
    return nb;
}

void GroundRelay::validate() const
{
    if (!(std::abs(lat) < kHalfPi))
        throw ConfigError("relay " + std::to_string(id) + ": |lat| must be < 90 deg");
    if (!(min_elevation > 0.0 && min_elevation < kHalfPi))
        throw ConfigError("relay " + std::to_string(id) + ": min elevation must be in (0, 90) deg");
}

namespace {

struct City {
    double lat;
    double lon;
};

// First 12 entries: initial deployment. Remaining 13: second phase.
constexpr std::array<City, 25> kRelaySites = {{
    {39.90, 116.40},   // Beijing
    {19.10, 72.90},    // Mumbai
    {1.35, 103.80},    // Singapore
    {35.70, 139.70},   // Tokyo
    {40.40, -3.70},    // Madrid
    {41.90, 12.50},    // Rome
    {30.00, 31.20},    // Cairo
    {36.80, 3.00},     // Algiers
    {40.70, -74.00},   // New York
    {34.10, -118.20},  // Los Angeles
    {-23.50, -46.60},  // Sao Paulo
    {-33.90, 151.20},  // Sydney
    {43.80, 87.60},    // Urumqi
    {25.20, 55.30},    // Dubai
    {24.90, 67.00},    // Karachi
    {30.70, 104.10},   // Chengdu
    {37.98, 23.70},    // Athens
    {-1.30, 36.80},    // Nairobi
    {-26.20, 28.00},   // Johannesburg
    {19.40, -99.10},   // Mexico City
    {29.80, -95.40},   // Houston
    {-12.00, -77.00},  // Lima
    {-31.95, 115.90},  // Perth
    {21.30, -157.90},  // Honolulu
    {25.80, -80.20},   // Miami
}};

} // namespace

std::vector<GroundRelay> reconstructed_relays(int count, double min_elevation_rad)
{
    if (count < 0 || count > static_cast<int>(kRelaySites.size()))
        throw ConfigError("reconstructed relay set holds at most 25 relays");
    std::vector<GroundRelay> relays;
    relays.reserve(count);
    for (int k = 0; k < count; ++k) {
        GroundRelay r{k + 1, deg2rad(kRelaySites[k].lat), wrap_two_pi(deg2rad(kRelaySites[k].lon)),
                      min_elevation_rad};
        r.validate();
        relays.push_back(r);
    }
    return relays;
}

Vec3 to_ecef(double lat, double lon, double radius_km)
{
    return {radius_km * std::cos(lat) * std::cos(lon), radius_km * std::cos(lat) * std::sin(lon),
            radius_km * std::sin(lat)};
}

double distance_km(const Vec3& a, const Vec3& b)
{
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double central_angle(double lat1, double lon1, double lat2, double lon2)
{
    // Haversine form stays accurate for the small angles a coverage test cares about.
    const double s1 = std::sin(0.5 * (lat2 - lat1));
    const double s2 = std::sin(0.5 * (lon2 - lon1));
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

double coverage_angle(double min_elevation, const WalkerDelta& cfg)
{
    const double re = cfg.earth_radius_km();
    const double gamma = std::asin(re * std::sin(min_elevation + kHalfPi) / cfg.orbit_radius_km());
    return kHalfPi - min_elevation - gamma;
}

double elevation_angle(const GroundRelay& relay, const SatelliteState& sat, const WalkerDelta& cfg)
{
    const double psi = central_angle(relay.lat, relay.lon, sat.lat, sat.lon);
    const double ratio = cfg.earth_radius_km() / cfg.orbit_radius_km();
    return std::atan2(std::cos(psi) - ratio, std::sin(psi));
}

LinkLengths link_lengths(const WalkerDelta& cfg)
{
    const double a = cfg.inclination();
    const double w = kTwoPi / cfg.orbits();
    const double r = cfg.orbit_radius_km();
    const double sa_sw = std::sin(a) * std::sin(w);

    LinkLengths out;
    out.intra_km = 2.0 * std::sin(kPi / cfg.per_orbit()) * r;
    out.gamma = std::acos(std::clamp(1.0 - sa_sw * sa_sw / (1.0 + std::cos(w)), -1.0, 1.0));
    const double k2 = std::pow(1.0 + std::cos(w), 2) / (2.0 + 2.0 * std::cos(w) - sa_sw * sa_sw);
    out.kappa = std::asin(std::sqrt(std::clamp(k2, 0.0, 1.0)));
    const double cg = std::cos(out.gamma);
    out.min_inter_angle = std::acos(std::clamp(
        0.5 * (1.0 - cg) - 0.5 * (1.0 + cg) * std::cos(2.0 * out.kappa - cfg.delta_f()), -1.0, 1.0));
    out.inter_min_km = 2.0 * r * std::sin(0.5 * out.min_inter_angle);
    return out;
}

} // namespace leoroute
