#pragma once

#include "leoroute/constellation.hpp"

#include <compare>
#include <iosfwd>
#include <vector>

namespace leoroute {

/// Region coordinate on the N×M grid: P horizontal, R vertical.
struct RegionCoord {
    int P = 0;
    int R = 0;

    auto operator<=>(const RegionCoord&) const = default;
};

struct RegionBounds {
    double lambda_left = 0.0;
    double lambda_right = 0.0;
    double phi_lower = 0.0;
    double phi_upper = 0.0;
    double u_lower = 0.0; ///< in the [π/2, π/2+2π) window
    double u_upper = 0.0;
};

/// Longitude, latitude and phase limits of region (P, R). Latitudes are those the
/// phase band sweeps on an ascending pass, so they may coincide at the apex.
RegionBounds region_boundaries(int P, int R, const WalkerDelta& cfg);

/// Phase u in (−π, π] of a satellite at latitude phi on the given branch.
/// Descending at the equator resolves to +π, the only descending phase with zero latitude.
double satellite_phase(double phi, bool ascending, double inclination);

/// L = mod(λ − ξ(u), 2π).
double ascending_node_longitude(double lambda, double phase, double inclination);

/// 𝒖: the phase moved into [π/2, π/2+2π).
inline double normalized_phase(double phase)
{
    return phase < kHalfPi ? phase + kTwoPi : phase;
}

/// Snap margin in region units. Satellites exactly on a boundary must all fall on
/// the same side despite round-off in the phase advance.
inline constexpr double kRegionSnap = 1e-10;

RegionCoord region_coords(double node_longitude, double phase, const WalkerDelta& cfg);

/**
 * One-satellite-per-region map at one instant. Immutable after construction.
 */
class RtpgSnapshot {
public:
    RtpgSnapshot() = default;

    double t() const { return m_t; }
    int satellite_count() const { return static_cast<int>(m_coords.size()); }

    RegionCoord coord(SatelliteId sat) const { return m_coords.at(sat.slot()); }
    SatelliteId satellite_at(RegionCoord rc) const
    {
        return SatelliteId{m_regionToSat.at(rc.P * m_perOrbit + rc.R)};
    }
    /// 𝒖 of the satellite.
    double normalized_phase(SatelliteId sat) const { return m_phase.at(sat.slot()); }
    const SatelliteState& state(SatelliteId sat) const { return m_states.at(sat.slot()); }
    const std::vector<SatelliteState>& states() const { return m_states; }

    /// One line per region: P,R,satellite,lat_deg,lon_deg.
    void dump(std::ostream& os) const;

private:
    friend RtpgSnapshot build_rtpg(const Ephemeris& eph, const WalkerDelta& cfg);

    double m_t = 0.0;
    int m_perOrbit = 0;
    std::vector<RegionCoord> m_coords;
    std::vector<int> m_regionToSat;
    std::vector<double> m_phase;
    std::vector<SatelliteState> m_states;
};

/// Throws IntegrityError if two satellites share a region.
RtpgSnapshot build_rtpg(const Ephemeris& eph, const WalkerDelta& cfg);

} // namespace leoroute
