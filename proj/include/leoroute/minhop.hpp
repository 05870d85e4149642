#pragma once

#include "leoroute/rtpg.hpp"

#include <array>
#include <string_view>

namespace leoroute {

/// Candidate direction pair. The enumeration order is the tie-break order.
enum class Direction : std::uint8_t { TopRight = 0, BottomRight = 1, TopLeft = 2, BottomLeft = 3 };

inline constexpr std::array<Direction, 4> kAllDirections = {
    Direction::TopRight, Direction::BottomRight, Direction::TopLeft, Direction::BottomLeft};

inline bool is_rightward(Direction d) { return d == Direction::TopRight || d == Direction::BottomRight; }
inline bool is_upward(Direction d) { return d == Direction::TopRight || d == Direction::TopLeft; }

/// ISL port used by a horizontal or vertical step in direction d.
inline IslPort horizontal_port(Direction d) { return is_rightward(d) ? IslPort::Right : IslPort::Left; }
inline IslPort vertical_port(Direction d) { return is_upward(d) ? IslPort::Up : IslPort::Down; }

std::string_view to_string(Direction d);

struct HopEstimate {
    int h_min = 0;
    Direction direction = Direction::TopRight;
    int h_h = 0;
    int h_v = 0;
};

struct HorizontalHops {
    int right = 0;
    int left = 0;
};

struct VerticalHops {
    int up = 0;
    int down = 0;
};

HorizontalHops horizontal_hops(int P1, int P2, int N);

/**
 * ℝ(h, R1): the R coordinate of the satellite reached after h inter-orbit hops.
 * Each hop shifts the phase by +Δf to the right and −Δf to the left; R1 changes
 * only once the accumulated offset crosses the source region's boundary in that
 * direction, measured from the source phase 𝒖.
 */
int r_shift(int h, int R1, double u_norm, bool rightward, const WalkerDelta& cfg);

VerticalHops vertical_hops(int R_target, int R_shifted, int M);

/// Four-direction minimum over coordinates; the source phase drives the R shift.
HopEstimate estimate_min_hops(RegionCoord src, double src_u_norm, RegionCoord dst,
                              const WalkerDelta& cfg);

HopEstimate estimate_min_hops(SatelliteId src, SatelliteId dst, const RtpgSnapshot& snap,
                              const WalkerDelta& cfg);

} // namespace leoroute
