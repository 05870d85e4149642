#include "leoroute/minhop.hpp"

namespace leoroute {

std::string_view to_string(Direction d)
{
    switch (d) {
    case Direction::TopRight: return "TR";
    case Direction::BottomRight: return "BR";
    case Direction::TopLeft: return "TL";
    default: return "BL";
    }
}

HorizontalHops horizontal_hops(int P1, int P2, int N)
{
    return {pos_mod(N - (P1 - P2), N), pos_mod(N + (P1 - P2), N)};
}

int r_shift(int h, int R1, double u_norm, bool rightward, const WalkerDelta& cfg)
{
    if (h < 0)
        throw ContractViolation("r_shift: negative hop count");
    const int M = cfg.per_orbit();
    if (h == 0 || cfg.delta_f() == 0.0)
        return R1;
    // Position inside the source region in region units, [0, 1).
    const double lower = kHalfPi + R1 * cfg.delta_phi();
    const double offset = (u_norm - lower) / cfg.delta_phi();
    const double travel = h * cfg.delta_f() / cfg.delta_phi();
    // Right: unchanged while h·Δf < 𝒰_u − 𝒖, else +⌈…⌉ with the half-open tie.
    // Left: unchanged while h·Δf ≤ 𝒖 − 𝒰_l, else −⌈…⌉.
    const double moved = rightward ? offset + travel : offset - travel;
    return pos_mod(R1 + static_cast<long long>(std::floor(moved + kRegionSnap)), M);
}

VerticalHops vertical_hops(int R_target, int R_shifted, int M)
{
    return {pos_mod(M + (R_target - R_shifted), M), pos_mod(M - (R_target - R_shifted), M)};
}

HopEstimate estimate_min_hops(RegionCoord src, double src_u_norm, RegionCoord dst,
                              const WalkerDelta& cfg)
{
    if (src == dst)
        return {};
    const HorizontalHops hh = horizontal_hops(src.P, dst.P, cfg.orbits());
    const int r_right = r_shift(hh.right, src.R, src_u_norm, true, cfg);
    const int r_left = r_shift(hh.left, src.R, src_u_norm, false, cfg);
    const VerticalHops vr = vertical_hops(dst.R, r_right, cfg.per_orbit());
    const VerticalHops vl = vertical_hops(dst.R, r_left, cfg.per_orbit());

    const std::array<HopEstimate, 4> cand = {{
        {hh.right + vr.up, Direction::TopRight, hh.right, vr.up},
        {hh.right + vr.down, Direction::BottomRight, hh.right, vr.down},
        {hh.left + vl.up, Direction::TopLeft, hh.left, vl.up},
        {hh.left + vl.down, Direction::BottomLeft, hh.left, vl.down},
    }};
    HopEstimate best = cand[0];
    for (const auto& c : cand)
        if (c.h_min < best.h_min)
            best = c;
    return best;
}

HopEstimate estimate_min_hops(SatelliteId src, SatelliteId dst, const RtpgSnapshot& snap,
                              const WalkerDelta& cfg)
{
    if (src == dst)
        return {};
    return estimate_min_hops(snap.coord(src), snap.normalized_phase(src), snap.coord(dst), cfg);
}

} // namespace leoroute
