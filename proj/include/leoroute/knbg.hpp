#pragma once

#include "leoroute/minhop.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace leoroute {

/**
 * Rectangular region windows that must contain every gateway of a relay.
 * The windows span delta_P + 1 columns and delta_R + 1 rows centred on the
 * relay's ascending and descending pseudo-satellite coordinates.
 */
struct SearchExtent {
    double r_s_km = 0.0;
    double beta = 0.0;
    int delta_P = 0;
    int delta_R = 0;
    RegionCoord ascending_center;
    RegionCoord descending_center;
    bool empty = false; ///< relay too far poleward to ever see a satellite
};

/// Δh_min: the smallest latitude change across one R band, reached next to the apex.
double min_band_latitude_step(const WalkerDelta& cfg);

SearchExtent search_extent(const GroundRelay& relay, const WalkerDelta& cfg);

struct KeyNodeScan {
    std::vector<std::vector<SatelliteId>> gateways; ///< per relay index, ascending ids
    std::int64_t comparisons = 0;                   ///< elevation tests performed
};

/// Windowed gateway extraction over the snapshot's region grid.
KeyNodeScan extract_key_nodes(const RtpgSnapshot& snap, const std::vector<GroundRelay>& relays,
                              const WalkerDelta& cfg);

/// w = min(2, h_min) for gateways sharing a relay, h_min otherwise.
inline int edge_weight(int h_min, bool share_relay) { return share_relay && h_min > 2 ? 2 : h_min; }

struct InterSatSegment {
    SatelliteId from;
    SatelliteId to;
    Direction direction = Direction::TopRight;
    int h_h = 0;
    int h_v = 0;

    int hops() const { return h_h + h_v; }
    auto operator<=>(const InterSatSegment&) const = default;
};

struct CoopSegment {
    SatelliteId gateway_down;
    int relay_id = 0;
    SatelliteId gateway_up;

    auto operator<=>(const CoopSegment&) const = default;
};

using PlanSegment = std::variant<InterSatSegment, CoopSegment>;

struct RoutePlan {
    std::vector<PlanSegment> segments;

    /// Σ(h_h + h_v) + 2 per cooperative segment.
    int total_hops() const;
    int coop_count() const;
};

/**
 * Key-node graph for one regeneration period. Immutable once built; route queries
 * work on a private overlay holding the transient source and destination.
 */
class KnbgGraph {
public:
    KnbgGraph() = default;

    double generation_time() const { return m_time; }
    int node_count() const { return static_cast<int>(m_nodes.size()); }
    const std::vector<SatelliteId>& nodes() const { return m_nodes; }
    const std::vector<GroundRelay>& relays() const { return m_relays; }
    const std::vector<std::vector<SatelliteId>>& gateway_sets() const { return m_gateways; }
    const std::vector<SearchExtent>& extents() const { return m_extents; }

    /// Node index of a satellite, or −1 if it is not a key node.
    int index_of(SatelliteId sat) const { return m_index.at(sat.slot()); }
    /// Relay indices the node is a gateway of.
    const std::vector<int>& relays_of_node(int node) const { return m_relaysOf.at(node); }
    /// Relay indices a satellite is a gateway of (empty for ordinary satellites).
    const std::vector<int>& relays_of(SatelliteId sat) const;
    bool is_gateway_of(SatelliteId sat, int relay_index) const;
    /// Index of the relay with the given id, or −1.
    int relay_index(int relay_id) const;

    int weight(int i, int j) const { return m_weight[i * node_count() + j]; }
    const HopEstimate& estimate(int i, int j) const { return m_estimate[i * node_count() + j]; }
    /// Lowest relay index shared by two nodes, or −1.
    int shared_relay(int i, int j) const;

    std::int64_t scan_comparisons() const { return m_scanComparisons; }
    std::int64_t edge_evaluations() const { return m_edgeEvaluations; }

private:
    friend KnbgGraph build_knbg(const RtpgSnapshot&, const std::vector<GroundRelay>&,
                                const WalkerDelta&);

    double m_time = 0.0;
    std::vector<GroundRelay> m_relays;
    std::vector<SearchExtent> m_extents;
    std::vector<std::vector<SatelliteId>> m_gateways;
    std::vector<SatelliteId> m_nodes;
    std::vector<int> m_index;
    std::vector<std::vector<int>> m_relaysOf;
    std::vector<int> m_weight;
    std::vector<HopEstimate> m_estimate;
    std::int64_t m_scanComparisons = 0;
    std::int64_t m_edgeEvaluations = 0;
};

KnbgGraph build_knbg(const RtpgSnapshot& snap, const std::vector<GroundRelay>& relays,
                     const WalkerDelta& cfg);

/// Minimum-hop plan from src to dst through the key-node graph.
RoutePlan estimate_route(SatelliteId src, SatelliteId dst, const KnbgGraph& knbg,
                         const RtpgSnapshot& snap, const WalkerDelta& cfg);

} // namespace leoroute
