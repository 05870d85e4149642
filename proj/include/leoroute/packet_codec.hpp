#pragma once

#include "leoroute/knbg.hpp"
#include "leoroute/router.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace leoroute {

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HeaderInterSat {
    std::uint16_t end_node = 0;
    Direction direction = Direction::TopRight;
    std::uint16_t rem_h = 0;
    std::uint16_t rem_v = 0;

    bool complete() const { return rem_h == 0 && rem_v == 0; }
    auto operator<=>(const HeaderInterSat&) const = default;
};

/// The down-gateway is implied: it is where the preceding segment ends (or the
/// current node when this segment is first).
struct HeaderCoop {
    std::uint16_t relay = 0;
    std::uint16_t up_gateway = 0;

    auto operator<=>(const HeaderCoop&) const = default;
};

using HeaderSegment = std::variant<HeaderInterSat, HeaderCoop>;

struct PacketHeader {
    std::uint16_t src = 0;
    std::uint16_t dst = 0;
    std::uint32_t flow = 0;
    std::uint32_t tick = 0;
    std::vector<HeaderSegment> segments; ///< front is the active segment

    int planned_hops() const;
    bool operator==(const PacketHeader&) const = default;
};

inline constexpr std::size_t kHeaderFixedBytes = 13;
inline constexpr std::size_t kInterSatBytes = 8; ///< type byte + 7 payload bytes
inline constexpr std::size_t kCoopBytes = 5;

std::size_t encoded_size(const PacketHeader& h);

/// Big-endian wire format. Throws ContractViolation for headers that cannot be encoded.
std::vector<std::uint8_t> encode(const PacketHeader& h);
PacketHeader decode(std::span<const std::uint8_t> bytes);

/// Decodable, no completed inter-satellite segment left in place, ids in range.
bool well_formed(const PacketHeader& h);

PacketHeader header_from_plan(const RoutePlan& plan, SatelliteId src, SatelliteId dst,
                              std::uint32_t flow, std::uint32_t tick);

/// Take one hop along the active inter-satellite segment; pops it when it completes.
PacketHeader& apply_forward(PacketHeader& h, Axis axis);

enum class UpdateCase : std::uint8_t {
    ForwardToRelay = 1, ///< Case 1
    DivertGateway = 2,  ///< Case 2
    Replan = 3,         ///< Case 3
    ArriveUpGateway = 4,///< Case 4
    RelayReroute = 5,   ///< Case 5
};

struct CaseContext {
    SatelliteId current;
    int relay_id = 0;
    SatelliteId alternate;
    HopEstimate to_alternate;            ///< Case 2: minimum-hop estimate from current to alternate
    const RoutePlan* plan = nullptr;     ///< Cases 3 and 5: fresh plan from the current node
};

/// Cases 1–5 of the in-flight header update. Throws ContractViolation when the
/// header's active segment does not fit the case.
PacketHeader& apply_case(PacketHeader& h, UpdateCase c, const CaseContext& ctx);

} // namespace leoroute
