#pragma once

#include "leoroute/knbg.hpp"
#include "leoroute/router.hpp"
#include "leoroute/scenario.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace leoroute {

/**
 * Node-level view of the network for the distance-based baselines. Nodes 0..S−1 are
 * satellite slots, S..S+K−1 relay indices. ISL entries are indexed by IslPort.
 */
struct TopologyView {
    int satellites = 0;
    int relays = 0;
    std::vector<std::array<int, 4>> isl_neighbor;   ///< per satellite slot
    std::vector<std::array<double, 4>> isl_length;  ///< km
    std::vector<std::vector<std::pair<int, double>>> sgl; ///< per node: (other node, km)

    int node_count() const { return satellites + relays; }
};

/// Link lengths at the ephemeris instant. `gateways` is indexed like `relays`.
TopologyView build_topology_view(const WalkerDelta& cfg, const Ephemeris& eph,
                                 const std::vector<GroundRelay>& relays,
                                 const std::vector<std::vector<SatelliteId>>& gateways);

/**
 * Minimum propagation-distance path from src to dst, both node ids. SGL edges (and so
 * relays) are only used when `use_sgl` is set. Ties prefer the lower predecessor id.
 * Empty when dst is unreachable.
 */
std::vector<int> route_dsp(int src, int dst, const TopologyView& view, bool use_sgl);

/// One LSP step: the axis with more remaining hops, the lighter local queue on a tie.
Axis route_lsp_step(int rem_h, int rem_v, double q_h, double q_v);

struct TraceRow {
    std::int64_t tick = 0;
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t in_flight = 0;
    double queued_bits = 0.0;  ///< send buffers of all links
    double waiting_bits = 0.0; ///< all waiting buffers
};

struct SimMetrics {
    Strategy strategy = Strategy::Ours;
    double R_pac = 0.0;
    double B_s = 0.0;
    double duration = 0.0;
    double packet_bits = 0.0;

    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;         ///< waiting buffer overflow plus no-route drops
    std::uint64_t dropped_no_route = 0;
    std::uint64_t in_flight = 0;       ///< still in the network when the run ends

    std::map<int, std::uint64_t> hop_histogram;
    std::vector<double> propagation_delays; ///< seconds, per delivered packet
    std::vector<double> end_to_end_delays;  ///< propagation plus queueing, seconds

    double max_queue_fill = 0.0;   ///< max send-buffer occupancy / B_s over bounded queues
    double max_waiting_fill = 0.0; ///< max waiting occupancy / B_w
    std::uint64_t conservation_violations = 0;
    std::uint64_t capacity_violations = 0;

    std::uint64_t replans = 0;
    std::uint64_t down_diversions = 0;
    std::uint64_t up_diversions = 0;
    std::uint64_t regenerations = 0;

    std::vector<TraceRow> trace;

    double throughput_bps() const;
    double drop_rate() const;
    double mean_hops() const;
    double mean_delay() const;
    double mean_propagation_delay() const;
    /// Nearest-rank percentile of the end-to-end delays, q in [0, 1].
    double delay_percentile(double q) const;
};

/// Deterministic for a given configuration and seed.
SimMetrics simulate(const ScenarioConfig& cfg);

struct FlowEndpoints {
    SatelliteId src;
    SatelliteId dst;
};

/// The flow endpoints a run would use (after excluding flows whose plan is pure SGL).
std::vector<FlowEndpoints> sample_flows(const ScenarioConfig& cfg);

// CSV output. Column names are part of the interface.
void write_metrics_header(std::ostream& os, const std::vector<std::string>& extra_columns = {});
void write_metrics_row(std::ostream& os, const SimMetrics& m,
                       const std::vector<std::string>& extra_values = {});
void write_hop_histogram(std::ostream& os, const SimMetrics& m);
void write_delay_cdf(std::ostream& os, const SimMetrics& m);
void write_trace(std::ostream& os, const SimMetrics& m);

} // namespace leoroute
