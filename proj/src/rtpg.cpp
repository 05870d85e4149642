#include "leoroute/rtpg.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace leoroute {

RegionBounds region_boundaries(int P, int R, const WalkerDelta& cfg)
{
    if (P < 0 || P >= cfg.orbits() || R < 0 || R >= cfg.per_orbit())
        throw ContractViolation("region index out of range: (" + std::to_string(P) + ", " +
                                std::to_string(R) + ")");
    RegionBounds b;
    b.lambda_left = P * cfg.delta_omega();
    b.lambda_right = (P + 1) * cfg.delta_omega();
    b.u_lower = kHalfPi + R * cfg.delta_phi();
    b.u_upper = kHalfPi + (R + 1) * cfg.delta_phi();
    const double s = std::sin(cfg.inclination());
    const double lat_a = std::asin(s * std::sin(b.u_lower));
    const double lat_b = std::asin(s * std::sin(b.u_upper));
    b.phi_lower = std::min(lat_a, lat_b);
    b.phi_upper = std::max(lat_a, lat_b);
    // A band containing the apex or the southern turning point reaches ±α.
    const double apex = kHalfPi + kTwoPi;
    const double trough = kHalfPi + kPi;
    if (b.u_lower <= trough && trough < b.u_upper)
        b.phi_lower = -cfg.inclination();
    if (b.u_lower <= apex && apex < b.u_upper)
        b.phi_upper = cfg.inclination();
    return b;
}

double satellite_phase(double phi, bool ascending, double inclination)
{
    const double ratio = std::sin(phi) / std::sin(inclination);
    if (std::abs(ratio) > 1.0 + 1e-12)
        throw DomainError("latitude exceeds the orbit inclination");
    const double a = std::asin(std::clamp(ratio, -1.0, 1.0));
    if (ascending)
        return a;
    return (phi < 0.0 ? -kPi : kPi) - a;
}

double ascending_node_longitude(double lambda, double phase, double inclination)
{
    return wrap_two_pi(lambda - node_offset(phase, inclination));
}

RegionCoord region_coords(double node_longitude, double phase, const WalkerDelta& cfg)
{
    const double L = wrap_two_pi(node_longitude);
    const double U = normalized_phase(wrap_pi(phase));
    RegionCoord rc;
    rc.P = pos_mod(static_cast<long long>(std::floor(L / cfg.delta_omega() + kRegionSnap)),
                   cfg.orbits());
    rc.R = pos_mod(static_cast<long long>(std::floor((U - kHalfPi) / cfg.delta_phi() + kRegionSnap)),
                   cfg.per_orbit());
    return rc;
}

RtpgSnapshot build_rtpg(const Ephemeris& eph, const WalkerDelta& cfg)
{
    const int S = cfg.satellite_count();
    if (static_cast<int>(eph.sats.size()) != S)
        throw ContractViolation("ephemeris does not cover every satellite");

    RtpgSnapshot snap;
    snap.m_t = eph.t;
    snap.m_perOrbit = cfg.per_orbit();
    snap.m_coords.resize(S);
    snap.m_phase.resize(S);
    snap.m_states = eph.sats;
    snap.m_regionToSat.assign(S, 0);

    for (int i = 0; i < S; ++i) {
        const int orbit = i / cfg.per_orbit();
        const RegionCoord rc = region_coords(eph.node_longitude[orbit], eph.sats[i].phase, cfg);
        const int cell = rc.P * cfg.per_orbit() + rc.R;
        if (snap.m_regionToSat[cell] != 0)
            throw IntegrityError("satellites " + std::to_string(snap.m_regionToSat[cell]) + " and " +
                                 std::to_string(i + 1) + " share region (" + std::to_string(rc.P) +
                                 ", " + std::to_string(rc.R) + ") at t=" + std::to_string(eph.t));
        snap.m_regionToSat[cell] = i + 1;
        snap.m_coords[i] = rc;
        snap.m_phase[i] = normalized_phase(eph.sats[i].phase);
    }
    return snap;
}

void RtpgSnapshot::dump(std::ostream& os) const
{
    os << "P,R,satellite,lat_deg,lon_deg\n";
    for (std::size_t cell = 0; cell < m_regionToSat.size(); ++cell) {
        const int sat = m_regionToSat[cell];
        const auto& s = m_states[sat - 1];
        os << cell / m_perOrbit << ',' << cell % m_perOrbit << ',' << sat << ',' << rad2deg(s.lat)
           << ',' << rad2deg(s.lon) << '\n';
    }
}

} // namespace leoroute
