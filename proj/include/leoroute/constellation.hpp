#pragma once

#include "leoroute/common.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

namespace leoroute {

/**
 * Ideal Walker Delta constellation: N circular orbits with M satellites each,
 * inclination alpha and phasing factor F. The derived spacing constants are
 * computed once at construction.
 */
class WalkerDelta {
public:
    /// Satellite angular velocity defaults to the circular-orbit value for the altitude.
    WalkerDelta(int orbits, int per_orbit, int phasing, double altitude_km, double inclination_rad,
                double sat_angular_velocity = 0.0, double earth_angular_velocity = 7.2921159e-5,
                double earth_radius_km = 6371.0);

    /// 1584/72/39/550/53°.
    static WalkerDelta starlink_phase1();

    int orbits() const { return m_orbits; }
    int per_orbit() const { return m_perOrbit; }
    int phasing() const { return m_phasing; }
    int satellite_count() const { return m_orbits * m_perOrbit; }
    double altitude_km() const { return m_altitude; }
    double inclination() const { return m_inclination; }
    double omega_s() const { return m_omegaS; }
    double omega_e() const { return m_omegaE; }
    double earth_radius_km() const { return m_earthRadius; }
    double orbit_radius_km() const { return m_earthRadius + m_altitude; }

    double delta_omega() const { return m_deltaOmega; } ///< ascending-node spacing 2π/N
    double delta_phi() const { return m_deltaPhi; }     ///< in-orbit phase spacing 2π/M
    double delta_f() const { return m_deltaF; }         ///< inter-orbit phase offset 2πF/(NM)

    double orbital_period_s() const { return kTwoPi / m_omegaS; }
    double earth_period_s() const { return kTwoPi / m_omegaE; }

private:
    int m_orbits;
    int m_perOrbit;
    int m_phasing;
    double m_altitude;
    double m_inclination;
    double m_omegaS;
    double m_omegaE;
    double m_earthRadius;
    double m_deltaOmega;
    double m_deltaPhi;
    double m_deltaF;
};

/// Flat satellite id i = (n−1)·M + m, 1-based.
struct SatelliteId {
    int value = 0;

    static SatelliteId from_orbit_index(int orbit, int index, const WalkerDelta& cfg)
    {
        return SatelliteId{(orbit - 1) * cfg.per_orbit() + index};
    }
    static SatelliteId from_slot(int slot) { return SatelliteId{slot + 1}; }

    int orbit(const WalkerDelta& cfg) const { return (value - 1) / cfg.per_orbit() + 1; }
    int index(const WalkerDelta& cfg) const { return (value - 1) % cfg.per_orbit() + 1; }
    /// Zero-based position for vector indexing.
    int slot() const { return value - 1; }

    auto operator<=>(const SatelliteId&) const = default;
};

struct SatelliteState {
    double lat = 0.0;   ///< radians
    double lon = 0.0;   ///< radians, [0, 2π)
    double phase = 0.0; ///< argument of latitude u, (−π, π]
    bool ascending = true;
};

/// Satellite states plus per-orbit ascending-node longitudes at one instant.
struct Ephemeris {
    double t = 0.0;
    std::vector<SatelliteState> sats;      ///< indexed by slot
    std::vector<double> node_longitude;    ///< indexed by orbit − 1
};

/// Explicit initial conditions; Walker spacing is the default.
struct InitialPhases {
    std::vector<double> phase;          ///< u0 per slot
    std::vector<double> node_longitude; ///< L0 per orbit
};

InitialPhases walker_initial_phases(const WalkerDelta& cfg);

Ephemeris propagate(const WalkerDelta& cfg, const InitialPhases& initial, double t);
Ephemeris propagate(const WalkerDelta& cfg, double t);

/// State of a single satellite from its phase and node longitude.
SatelliteState satellite_state(double phase, double node_longitude, double inclination);

/// ξ(u): longitude offset from the ascending node to the sub-satellite point.
/// The quadrant-aware arctangent already carries the +π of the descending branch.
inline double node_offset(double phase, double inclination)
{
    return std::atan2(std::cos(inclination) * std::sin(phase), std::cos(phase));
}

/// Ascending iff u ∈ [−π/2, π/2).
inline bool is_ascending_phase(double phase) { return phase >= -kHalfPi && phase < kHalfPi; }

enum class IslPort : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr std::array<IslPort, 4> kAllPorts = {IslPort::Up, IslPort::Down, IslPort::Left,
                                                     IslPort::Right};

struct IslNeighbors {
    SatelliteId up;    ///< (n, m+1)
    SatelliteId down;  ///< (n, m−1)
    SatelliteId left;  ///< previous orbit, phase −Δf
    SatelliteId right; ///< next orbit, phase +Δf

    SatelliteId at(IslPort port) const
    {
        switch (port) {
        case IslPort::Up: return up;
        case IslPort::Down: return down;
        case IslPort::Left: return left;
        default: return right;
        }
    }
};

/// The four permanent ISLs. Inter-orbit links join satellites whose phases differ by
/// exactly Δf, which is the same index in the adjacent orbit except across the
/// orbit N → orbit 1 seam, where the partner index is shifted by F.
IslNeighbors isl_neighbors(SatelliteId sat, const WalkerDelta& cfg);

inline IslPort opposite(IslPort p)
{
    switch (p) {
    case IslPort::Up: return IslPort::Down;
    case IslPort::Down: return IslPort::Up;
    case IslPort::Left: return IslPort::Right;
    default: return IslPort::Left;
    }
}

struct GroundRelay {
    int id = 0;
    double lat = 0.0;           ///< radians
    double lon = 0.0;           ///< radians
    double min_elevation = 0.0; ///< radians

    void validate() const;
};

/// Minimum elevation that yields about ten gateways per relay for the reconstructed relay set.
inline constexpr double kDefaultMinElevationDeg = 24.5;

/**
 * Reconstructed 25-relay deployment (the first 12 form the initial phase). Coordinates
 * are real cities spread over six continents with mean |latitude| ≈ 28°.
 */
std::vector<GroundRelay> reconstructed_relays(int count, double min_elevation_rad);

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

Vec3 to_ecef(double lat, double lon, double radius_km);
double distance_km(const Vec3& a, const Vec3& b);

/// Great-circle angle between two surface points.
double central_angle(double lat1, double lon1, double lat2, double lon2);

/// β: the maximum central angle between relay and sub-satellite point at elevation θ.
double coverage_angle(double min_elevation, const WalkerDelta& cfg);

/// Elevation of a satellite above the relay's local horizon.
double elevation_angle(const GroundRelay& relay, const SatelliteState& sat, const WalkerDelta& cfg);

inline bool is_gateway(const GroundRelay& relay, const SatelliteState& sat, const WalkerDelta& cfg)
{
    return elevation_angle(relay, sat, cfg) >= relay.min_elevation;
}

struct LinkLengths {
    double intra_km = 0.0;         ///< L_v
    double inter_min_km = 0.0;     ///< L_hmin
    double gamma = 0.0;
    double kappa = 0.0;
    double min_inter_angle = 0.0;  ///< Γ_min
};

LinkLengths link_lengths(const WalkerDelta& cfg);

} // namespace leoroute
