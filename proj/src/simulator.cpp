#include "leoroute/simulator.hpp"

#include "leoroute/packet_codec.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <unordered_map>

namespace leoroute {

namespace {

template <class Pairs>
void fill_sgl(TopologyView& view, const std::vector<Vec3>& sats, const std::vector<Vec3>& relays,
              const Pairs& pairs)
{
    view.sgl.assign(static_cast<std::size_t>(view.node_count()), {});
    for (const auto& [key, unused] : pairs) {
        const auto [slot, k] = key;
        const double d = distance_km(sats[slot], relays[k]);
        view.sgl[slot].emplace_back(view.satellites + k, d);
        view.sgl[view.satellites + k].emplace_back(slot, d);
    }
    for (auto& adj : view.sgl)
        std::sort(adj.begin(), adj.end());
}

} // namespace

TopologyView build_topology_view(const WalkerDelta& cfg, const Ephemeris& eph,
                                 const std::vector<GroundRelay>& relays,
                                 const std::vector<std::vector<SatelliteId>>& gateways)
{
    if (gateways.size() != relays.size())
        throw ContractViolation("build_topology_view: one gateway list per relay");
    TopologyView view;
    view.satellites = cfg.satellite_count();
    view.relays = static_cast<int>(relays.size());
    std::vector<Vec3> sats, ground;
    for (const auto& st : eph.sats)
        sats.push_back(to_ecef(st.lat, st.lon, cfg.orbit_radius_km()));
    for (const auto& r : relays)
        ground.push_back(to_ecef(r.lat, r.lon, cfg.earth_radius_km()));
    view.isl_neighbor.resize(view.satellites);
    view.isl_length.resize(view.satellites);
    for (int s = 0; s < view.satellites; ++s) {
        const auto n = isl_neighbors(SatelliteId::from_slot(s), cfg);
        for (auto port : kAllPorts) {
            const int p = static_cast<int>(port);
            view.isl_neighbor[s][p] = n.at(port).slot();
            view.isl_length[s][p] = distance_km(sats[s], sats[n.at(port).slot()]);
        }
    }
    std::map<std::pair<int, int>, bool> pairs;
    for (std::size_t k = 0; k < gateways.size(); ++k)
        for (auto g : gateways[k])
            pairs.emplace(std::pair{g.slot(), static_cast<int>(k)}, true);
    fill_sgl(view, sats, ground, pairs);
    return view;
}

std::vector<int> route_dsp(int src, int dst, const TopologyView& view, bool use_sgl)
{
    const int n = view.node_count();
    if (src < 0 || src >= n || dst < 0 || dst >= n)
        throw ContractViolation("route_dsp: node id out of range");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, kInf);
    std::vector<int> prev(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0.0;
    pq.emplace(0.0, src);
    auto relax = [&](int u, int v, double w) {
        const double nd = dist[u] + w;
        if (nd < dist[v] || (nd == dist[v] && u < prev[v])) {
            const bool improved = nd < dist[v];
            dist[v] = nd;
            prev[v] = u;
            if (improved)
                pq.emplace(nd, v);
        }
    };
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u])
            continue;
        if (u == dst)
            break;
        if (u < view.satellites)
            for (int p = 0; p < 4; ++p)
                relax(u, view.isl_neighbor[u][p], view.isl_length[u][p]);
        if (use_sgl && u < static_cast<int>(view.sgl.size()))
            for (const auto& [v, w] : view.sgl[u])
                relax(u, v, w);
    }
    if (dist[dst] == kInf)
        return {};
    std::vector<int> path;
    for (int v = dst; v != -1; v = prev[v])
        path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

Axis route_lsp_step(int rem_h, int rem_v, double q_h, double q_v)
{
    if (rem_h < 0 || rem_v < 0 || rem_h + rem_v == 0)
        throw ContractViolation("route_lsp_step: no hops remaining");
    if (rem_h != rem_v)
        return rem_h > rem_v ? Axis::Horizontal : Axis::Vertical;
    return q_h <= q_v ? Axis::Horizontal : Axis::Vertical;
}

double SimMetrics::throughput_bps() const
{
    return duration > 0 ? static_cast<double>(delivered) * packet_bits / duration : 0.0;
}

double SimMetrics::drop_rate() const
{
    return generated ? static_cast<double>(dropped) / static_cast<double>(generated) : 0.0;
}

double SimMetrics::mean_hops() const
{
    std::uint64_t n = 0, total = 0;
    for (const auto& [h, c] : hop_histogram) {
        n += c;
        total += static_cast<std::uint64_t>(h) * c;
    }
    return n ? static_cast<double>(total) / static_cast<double>(n) : 0.0;
}

namespace {

double mean_of(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double nearest_rank(std::vector<double> v, double q)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    const auto idx = static_cast<std::size_t>(std::clamp(std::ceil(q * n) - 1.0, 0.0, n - 1.0));
    return v[idx];
}

} // namespace

double SimMetrics::mean_delay() const { return mean_of(end_to_end_delays); }
double SimMetrics::mean_propagation_delay() const { return mean_of(propagation_delays); }
double SimMetrics::delay_percentile(double q) const { return nearest_rank(end_to_end_delays, q); }

namespace {

RoutePlan pure_isl_plan(SatelliteId from, SatelliteId to, const RtpgSnapshot& snap, const WalkerDelta& wd)
{
    RoutePlan plan;
    if (from == to)
        return plan;
    const auto e = estimate_min_hops(from, to, snap, wd);
    plan.segments.emplace_back(InterSatSegment{from, to, e.direction, e.h_h, e.h_v});
    return plan;
}

bool pure_sgl(const RoutePlan& plan)
{
    return !plan.segments.empty() &&
           std::all_of(plan.segments.begin(), plan.segments.end(),
                       [](const PlanSegment& s) { return std::holds_alternative<CoopSegment>(s); });
}

} // namespace

std::vector<FlowEndpoints> sample_flows(const ScenarioConfig& cfg)
{
    cfg.validate();
    const auto& wd = cfg.constellation;
    const int S = wd.satellite_count();
    if (S < 2 && cfg.traffic.flow_count > 0)
        throw ConfigError("flow_count: flows need at least two satellites");
    std::optional<RtpgSnapshot> snap;
    std::optional<KnbgGraph> knbg;
    if (!cfg.relays.empty()) {
        snap = build_rtpg(propagate(wd, 0.0), wd);
        knbg = build_knbg(*snap, cfg.relays, wd);
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> pick(1, S);
    std::vector<FlowEndpoints> flows;
    flows.reserve(cfg.traffic.flow_count);
    for (int i = 0; i < cfg.traffic.flow_count; ++i) {
        FlowEndpoints f;
        for (int attempt = 0;; ++attempt) {
            f.src = SatelliteId{pick(rng)};
            do
                f.dst = SatelliteId{pick(rng)};
            while (f.dst == f.src);
            if (!knbg || attempt >= 1000 || !pure_sgl(estimate_route(f.src, f.dst, *knbg, *snap, wd)))
                break;
        }
        flows.push_back(f);
    }
    return flows;
}

namespace {

enum class LinkKind : std::uint8_t { Isl, Down, Up };

/// Isl: (slot, port). Down: (slot, relay index). Up: (relay index, slot).
struct Target {
    LinkKind kind = LinkKind::Isl;
    int a = 0;
    int b = 0;
    auto operator<=>(const Target&) const = default;
};

struct Packet {
    std::uint64_t id = 0;
    int flow = 0;
    SatelliteId src;
    SatelliteId dst;
    std::int64_t created_tick = 0;
    std::int64_t enqueue_tick = 0;
    PacketHeader header;
    std::shared_ptr<const std::vector<int>> path; ///< DSP/DSPCR node path
    std::size_t path_pos = 0;
    int hops = 0;
    double propagation = 0.0;
    std::int64_t queue_ticks = 0;
    int replans = 0;
    bool diverted = false;  ///< one down-gateway diversion per cooperative segment
    bool isl_only = false;
    bool via_uplink = false;
};

struct LinkQueue {
    std::deque<Packet> packets;
    double bits = 0.0;
    double credit = 0.0;
};

struct Pending {
    std::deque<Packet> packets;
    double bits = 0.0;
};

struct WaitBuffer {
    double bits = 0.0;
    std::size_t count = 0;
    std::map<Target, Pending> by_target;
};

struct Flow {
    SatelliteId src;
    SatelliteId dst;
    bool on = false;
    double next_toggle = 0.0;
    double acc_bits = 0.0;
    std::mt19937_64 rng;
    std::int64_t epoch = -1;
    PacketHeader header;
    std::shared_ptr<const std::vector<int>> path;
};

constexpr double kBitsEps = 1e-6;

class Engine {
public:
    explicit Engine(const ScenarioConfig& cfg);
    SimMetrics run();

private:
    bool header_based() const { return m_strategy == Strategy::Ours || m_strategy == Strategy::Lsp || m_strategy == Strategy::Lspcr; }
    bool cooperative() const { return is_cooperative(m_strategy) && m_K > 0; }
    int relay_node(int k) const { return m_S + k; }
    const Vec3& position(int node) const { return node < m_S ? m_satPos[node] : m_relayPos[node - m_S]; }

    void regenerate();
    void update_positions();
    void generate();
    void arrive(int node, Packet p);
    void dispatch(int node, Packet p);
    void admit(int node, Packet p, const Target& t);
    void drop(bool no_route);
    void transmit_all();
    void transmit(LinkQueue& q, int from, int to, double rate, bool uplink);
    void refill();
    void check_invariants();

    std::optional<Target> decide(Packet& p, int node);
    std::optional<Target> decide_path(Packet& p, int node);
    std::optional<Target> decide_header_sat(Packet& p, int slot);
    std::optional<Target> decide_header_relay(Packet& p, int k);
    void replan(Packet& p, SatelliteId from, UpdateCase why);
    /// Plans are cached for the current regeneration period.
    const RoutePlan& plan_for(const Packet& p, SatelliteId from);
    Axis choose_axis(const HeaderInterSat& seg, int slot) const;

    LinkQueue* queue_of(const Target& t);
    double down_load(int slot, int k) const;
    double up_load(int k, int slot) const;
    std::vector<GatewayLoad> gateway_loads(int k, bool downlink) const;
    std::optional<int> port_towards(int slot, int neighbor_slot) const;

    const ScenarioConfig& m_cfg;
    const WalkerDelta& m_wd;
    Strategy m_strategy;
    RoutingParams m_rp;
    InitialPhases m_init;
    int m_S = 0;
    int m_K = 0;
    double m_pkt = 0.0;
    double m_Bs = 0.0;
    std::int64_t m_tick = 0;
    std::int64_t m_ticks = 0;
    std::int64_t m_epoch = -1;
    double m_nextRegen = 0.0;

    std::vector<std::array<int, 4>> m_nbr;
    std::vector<LinkQueue> m_isl;
    std::map<std::pair<int, int>, LinkQueue> m_down;
    std::map<std::pair<int, int>, LinkQueue> m_up;
    std::vector<WaitBuffer> m_wait;
    std::vector<std::vector<std::pair<int, Packet>>> m_transit;
    std::uint64_t m_transitCount = 0;

    RtpgSnapshot m_snap;
    KnbgGraph m_knbg;
    std::unordered_map<std::uint64_t, RoutePlan> m_planCache;
    TopologyView m_view;
    std::vector<Vec3> m_satPos;
    std::vector<Vec3> m_relayPos;

    std::vector<Flow> m_flows;
    std::uint64_t m_nextId = 0;
    SimMetrics m_m;
};

Engine::Engine(const ScenarioConfig& cfg)
    : m_cfg(cfg), m_wd(cfg.constellation), m_strategy(cfg.strategy), m_rp(cfg.routing_params()),
      m_init(walker_initial_phases(cfg.constellation))
{
    m_S = m_wd.satellite_count();
    m_K = static_cast<int>(cfg.relays.size());
    m_pkt = cfg.traffic.packet_bits;
    m_Bs = cfg.link.B_s;
    m_ticks = static_cast<std::int64_t>(std::ceil(cfg.duration / cfg.tau - 1e-9));

    m_nbr.resize(m_S);
    for (int s = 0; s < m_S; ++s) {
        const auto n = isl_neighbors(SatelliteId::from_slot(s), m_wd);
        for (auto port : kAllPorts)
            m_nbr[s][static_cast<int>(port)] = n.at(port).slot();
    }
    m_isl.resize(static_cast<std::size_t>(m_S) * 4);
    m_wait.resize(m_S);
    for (const auto& r : cfg.relays)
        m_relayPos.push_back(to_ecef(r.lat, r.lon, m_wd.earth_radius_km()));

    // Longest possible link: a chord through the orbit sphere.
    const double max_delay = 2.0 * m_wd.orbit_radius_km() / kSpeedOfLightKmPerS;
    m_transit.resize(static_cast<std::size_t>(std::ceil(max_delay / cfg.tau)) + 4);

    const auto endpoints = sample_flows(cfg);
    m_flows.resize(endpoints.size());
    const double p_on = cfg.traffic.on_mean_s / (cfg.traffic.on_mean_s + cfg.traffic.off_mean_s);
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        auto& f = m_flows[i];
        f.src = endpoints[i].src;
        f.dst = endpoints[i].dst;
        std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(i), std::uint64_t{0x5eed}};
        f.rng.seed(seq);
        f.on = std::bernoulli_distribution(p_on)(f.rng);
        const double mean = f.on ? cfg.traffic.on_mean_s : cfg.traffic.off_mean_s;
        f.next_toggle = mean > 0 ? std::exponential_distribution<double>(1.0 / mean)(f.rng) : 0.0;
    }

    m_m.strategy = m_strategy;
    m_m.R_pac = cfg.traffic.R_pac;
    m_m.B_s = cfg.link.B_s;
    m_m.duration = static_cast<double>(m_ticks) * cfg.tau;
    m_m.packet_bits = m_pkt;
}

void Engine::update_positions()
{
    const auto eph = propagate(m_wd, m_init, static_cast<double>(m_tick) * m_cfg.tau);
    m_satPos.resize(m_S);
    for (int s = 0; s < m_S; ++s)
        m_satPos[s] = to_ecef(eph.sats[s].lat, eph.sats[s].lon, m_wd.orbit_radius_km());
}

void Engine::regenerate()
{
    const double t = static_cast<double>(m_tick) * m_cfg.tau;
    ++m_epoch;
    ++m_m.regenerations;
    m_snap = build_rtpg(propagate(m_wd, m_init, t), m_wd);
    if (cooperative())
        m_knbg = build_knbg(m_snap, m_cfg.relays, m_wd);
    m_planCache.clear();

    std::map<std::pair<int, int>, bool> pairs; // (slot, k)
    if (cooperative())
        for (int k = 0; k < m_K; ++k)
            for (auto g : m_knbg.gateway_sets()[k])
                pairs.emplace(std::pair{g.slot(), k}, true);

    std::vector<std::pair<int, Packet>> orphans;
    for (auto it = m_down.begin(); it != m_down.end();) {
        if (pairs.contains(it->first)) {
            ++it;
            continue;
        }
        for (auto& p : it->second.packets)
            orphans.emplace_back(it->first.first, std::move(p));
        it = m_down.erase(it);
    }
    for (int s = 0; s < m_S; ++s) {
        auto& w = m_wait[s];
        for (auto it = w.by_target.begin(); it != w.by_target.end();) {
            const auto& tgt = it->first;
            if (tgt.kind != LinkKind::Down || pairs.contains({tgt.a, tgt.b})) {
                ++it;
                continue;
            }
            for (auto& p : it->second.packets)
                orphans.emplace_back(s, std::move(p));
            w.bits -= it->second.bits;
            w.count -= it->second.packets.size();
            it = w.by_target.erase(it);
        }
    }
    for (auto it = m_up.begin(); it != m_up.end();) {
        if (pairs.contains({it->first.second, it->first.first})) {
            ++it;
            continue;
        }
        for (auto& p : it->second.packets)
            orphans.emplace_back(relay_node(it->first.first), std::move(p));
        it = m_up.erase(it);
    }
    for (const auto& [key, unused] : pairs) {
        m_down.try_emplace(key);
        m_up.try_emplace({key.second, key.first});
    }

    // Link lengths at the regeneration instant drive the distance-based baselines.
    m_view.satellites = m_S;
    m_view.relays = m_K;
    m_view.isl_neighbor = m_nbr;
    m_view.isl_length.assign(m_S, {});
    for (int s = 0; s < m_S; ++s)
        for (int p = 0; p < 4; ++p)
            m_view.isl_length[s][p] = distance_km(m_satPos[s], m_satPos[m_nbr[s][p]]);
    fill_sgl(m_view, m_satPos, m_relayPos, pairs);

    for (auto& [node, p] : orphans)
        dispatch(node, std::move(p));
}

LinkQueue* Engine::queue_of(const Target& t)
{
    switch (t.kind) {
    case LinkKind::Isl: return &m_isl[static_cast<std::size_t>(t.a) * 4 + t.b];
    case LinkKind::Down: {
        auto it = m_down.find({t.a, t.b});
        return it == m_down.end() ? nullptr : &it->second;
    }
    default: {
        auto it = m_up.find({t.a, t.b});
        return it == m_up.end() ? nullptr : &it->second;
    }
    }
}

double Engine::down_load(int slot, int k) const
{
    double load = 0.0;
    if (auto it = m_down.find({slot, k}); it != m_down.end())
        load += it->second.bits;
    const auto& w = m_wait[slot];
    if (auto it = w.by_target.find(Target{LinkKind::Down, slot, k}); it != w.by_target.end())
        load += it->second.bits;
    return load;
}

double Engine::up_load(int k, int slot) const
{
    // Backlog the uplink feeds into: its own queue plus what the gateway could not buffer.
    double load = m_wait[slot].bits;
    if (auto it = m_up.find({k, slot}); it != m_up.end())
        load += it->second.bits;
    return load;
}

std::vector<GatewayLoad> Engine::gateway_loads(int k, bool downlink) const
{
    std::vector<GatewayLoad> out;
    for (auto g : m_knbg.gateway_sets()[k])
        out.push_back({g, m_snap.coord(g).P, downlink ? down_load(g.slot(), k) : up_load(k, g.slot())});
    return out;
}

std::optional<int> Engine::port_towards(int slot, int neighbor_slot) const
{
    for (int p = 0; p < 4; ++p)
        if (m_nbr[slot][p] == neighbor_slot)
            return p;
    return std::nullopt;
}

void Engine::drop(bool no_route)
{
    ++m_m.dropped;
    if (no_route)
        ++m_m.dropped_no_route;
}

void Engine::arrive(int node, Packet p)
{
    p.enqueue_tick = m_tick;
    if (node < m_S) {
        if (node == p.dst.slot()) {
            ++m_m.delivered;
            ++m_m.hop_histogram[p.hops];
            m_m.propagation_delays.push_back(p.propagation);
            m_m.end_to_end_delays.push_back(p.propagation + static_cast<double>(p.queue_ticks) * m_cfg.tau);
            return;
        }
        if (p.via_uplink && header_based() && !p.header.segments.empty()) {
            const auto* co = std::get_if<HeaderCoop>(&p.header.segments.front());
            if (co && co->up_gateway == SatelliteId::from_slot(node).value) {
                CaseContext ctx;
                ctx.current = SatelliteId::from_slot(node);
                apply_case(p.header, UpdateCase::ArriveUpGateway, ctx);
                p.diverted = false;
            }
        }
    }
    p.via_uplink = false;
    dispatch(node, std::move(p));
}

void Engine::dispatch(int node, Packet p)
{
    if (node < m_S && node == p.dst.slot()) {
        arrive(node, std::move(p));
        return;
    }
    const auto t = decide(p, node);
    if (!t) {
        drop(true);
        return;
    }
    admit(node, std::move(p), *t);
}

void Engine::admit(int node, Packet p, const Target& t)
{
    LinkQueue* q = queue_of(t);
    if (!q)
        throw ContractViolation("admit: routing chose a link that does not exist");
    if (t.kind == LinkKind::Up) {
        q->bits += m_pkt;
        q->packets.push_back(std::move(p));
        return;
    }
    auto& w = m_wait[node];
    auto it = w.by_target.find(t);
    const bool backlog = it != w.by_target.end() && !it->second.packets.empty();
    if (!backlog && q->bits + m_pkt <= m_Bs + kBitsEps) {
        q->bits += m_pkt;
        q->packets.push_back(std::move(p));
        return;
    }
    if (w.bits + m_pkt <= m_cfg.link.B_w + kBitsEps) {
        auto& pend = w.by_target[t];
        pend.bits += m_pkt;
        pend.packets.push_back(std::move(p));
        w.bits += m_pkt;
        ++w.count;
        return;
    }
    drop(false);
}

std::optional<Target> Engine::decide(Packet& p, int node)
{
    if (header_based())
        return node < m_S ? decide_header_sat(p, node) : decide_header_relay(p, node - m_S);
    return decide_path(p, node);
}

std::optional<Target> Engine::decide_path(Packet& p, int node)
{
    const bool use_sgl = m_strategy == Strategy::Dspcr && m_K > 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (p.path && p.path_pos + 1 < p.path->size() && (*p.path)[p.path_pos] == node) {
            const int next = (*p.path)[p.path_pos + 1];
            if (node < m_S && next < m_S) {
                if (const auto port = port_towards(node, next))
                    return Target{LinkKind::Isl, node, *port};
            } else if (node < m_S) {
                if (m_down.contains({node, next - m_S}))
                    return Target{LinkKind::Down, node, next - m_S};
            } else if (next < m_S && m_up.contains({node - m_S, next})) {
                return Target{LinkKind::Up, node - m_S, next};
            }
        }
        // The path no longer matches the topology; recompute from here.
        if (attempt == 0)
            ++m_m.replans;
        auto path = route_dsp(node, p.dst.slot(), m_view, use_sgl);
        if (path.size() < 2)
            return std::nullopt;
        p.path = std::make_shared<const std::vector<int>>(std::move(path));
        p.path_pos = 0;
    }
    return std::nullopt;
}

const RoutePlan& Engine::plan_for(const Packet& p, SatelliteId from)
{
    const bool pure = p.isl_only || !cooperative() || m_strategy == Strategy::Lsp;
    const auto key = (static_cast<std::uint64_t>(from.value) << 33) |
                     (static_cast<std::uint64_t>(p.dst.value) << 1) | (pure ? 1u : 0u);
    auto it = m_planCache.find(key);
    if (it == m_planCache.end())
        it = m_planCache
                 .emplace(key, pure ? pure_isl_plan(from, p.dst, m_snap, m_wd)
                                    : estimate_route(from, p.dst, m_knbg, m_snap, m_wd))
                 .first;
    return it->second;
}

void Engine::replan(Packet& p, SatelliteId from, UpdateCase why)
{
    ++p.replans;
    ++m_m.replans;
    p.diverted = false;
    if (p.replans > m_cfg.replan_limit)
        p.isl_only = true;
    const RoutePlan& plan = plan_for(p, from);
    CaseContext ctx;
    ctx.current = from;
    ctx.plan = &plan;
    apply_case(p.header, why, ctx);
}

Axis Engine::choose_axis(const HeaderInterSat& seg, int slot) const
{
    const int hp = static_cast<int>(horizontal_port(seg.direction));
    const int vp = static_cast<int>(vertical_port(seg.direction));
    auto bits = [&](int s, int port) { return m_isl[static_cast<std::size_t>(s) * 4 + port].bits; };
    if (m_strategy != Strategy::Ours)
        return route_lsp_step(seg.rem_h, seg.rem_v, bits(slot, hp), bits(slot, vp));
    const int hn = m_nbr[slot][hp];
    const int vn = m_nbr[slot][vp];
    CandidateQueues q;
    q.local_h = bits(slot, hp);
    q.local_v = bits(slot, vp);
    q.next_h = neighbor_aggregate(bits(hn, hp), bits(hn, vp));
    q.next_v = neighbor_aggregate(bits(vn, hp), bits(vn, vp));
    return decide_intersat(seg.rem_h, seg.rem_v, q, m_rp).axis;
}

std::optional<Target> Engine::decide_header_sat(Packet& p, int slot)
{
    const SatelliteId here = SatelliteId::from_slot(slot);
    const bool coop = cooperative() && m_strategy != Strategy::Lsp;
    for (int guard = 0; guard < 8; ++guard) {
        if (guard == 6 && !p.isl_only) {
            // Keeps bouncing between plans; finish over ISLs only.
            p.isl_only = true;
            replan(p, here, UpdateCase::Replan);
        }
        auto& segs = p.header.segments;
        if (segs.empty()) {
            replan(p, here, UpdateCase::Replan);
            if (p.header.segments.empty())
                return std::nullopt;
            continue;
        }
        if (const auto* is = std::get_if<HeaderInterSat>(&segs.front())) {
            if (coop && segs.size() > 1) {
                // Case 3: the segment's end is no longer a gateway of the next relay.
                if (const auto* co = std::get_if<HeaderCoop>(&segs[1])) {
                    const int k = m_knbg.relay_index(co->relay);
                    if (k < 0 || !m_knbg.is_gateway_of(SatelliteId{is->end_node}, k)) {
                        replan(p, here, UpdateCase::Replan);
                        continue;
                    }
                }
            }
            const Axis axis = choose_axis(*is, slot);
            const int port = static_cast<int>(axis == Axis::Horizontal ? horizontal_port(is->direction)
                                                                       : vertical_port(is->direction));
            apply_forward(p.header, axis);
            return Target{LinkKind::Isl, slot, port};
        }
        const auto co = std::get<HeaderCoop>(segs.front());
        const int k = coop ? m_knbg.relay_index(co.relay) : -1;
        if (k < 0 || !m_knbg.is_gateway_of(here, k)) {
            replan(p, here, UpdateCase::Replan);
            continue;
        }
        if (m_strategy == Strategy::Ours && !p.diverted) {
            const GatewayLoad cur{here, m_snap.coord(here).P, down_load(slot, k)};
            const auto loads = gateway_loads(k, true);
            const auto d = decide_sat_terrestrial(cur, loads, m_rp, m_wd.orbits());
            if (!d.to_relay) {
                p.diverted = true;
                ++m_m.down_diversions;
                CaseContext ctx{here, co.relay, d.alternate,
                                estimate_min_hops(here, d.alternate, m_snap, m_wd)};
                apply_case(p.header, UpdateCase::DivertGateway, ctx);
                continue;
            }
        }
        return Target{LinkKind::Down, slot, k};
    }
    return std::nullopt;
}

std::optional<Target> Engine::decide_header_relay(Packet& p, int k)
{
    const auto& relay = m_cfg.relays[k];
    std::optional<GatewayLoad> planned;
    if (!p.header.segments.empty())
        if (const auto* co = std::get_if<HeaderCoop>(&p.header.segments.front());
            co && co->relay == relay.id) {
            const SatelliteId up{co->up_gateway};
            if (cooperative() && m_knbg.is_gateway_of(up, k))
                planned = GatewayLoad{up, m_snap.coord(up).P, up_load(k, up.slot())};
        }
    if (!cooperative())
        return std::nullopt;
    const auto loads = gateway_loads(k, false);
    std::optional<TerrestrialSatDecision> d;
    if (m_strategy == Strategy::Ours || !planned)
        d = decide_terrestrial_sat(planned, loads, m_rp, m_wd.orbits());
    else
        d = TerrestrialSatDecision{planned->sat, false};
    if (!d)
        return std::nullopt;
    if (d->replan) {
        if (planned)
            ++m_m.up_diversions;
        replan(p, d->gateway, UpdateCase::RelayReroute);
    }
    return Target{LinkKind::Up, k, d->gateway.slot()};
}

void Engine::generate()
{
    const double t = static_cast<double>(m_tick) * m_cfg.tau;
    const auto& tr = m_cfg.traffic;
    for (std::size_t i = 0; i < m_flows.size(); ++i) {
        auto& f = m_flows[i];
        if (tr.off_mean_s > 0) {
            while (t >= f.next_toggle) {
                f.on = !f.on;
                f.next_toggle += std::exponential_distribution<double>(
                    1.0 / (f.on ? tr.on_mean_s : tr.off_mean_s))(f.rng);
            }
        } else {
            f.on = true;
        }
        if (!f.on)
            continue;
        f.acc_bits += tr.R_pac * m_cfg.tau;
        while (f.acc_bits + kBitsEps >= m_pkt) {
            f.acc_bits -= m_pkt;
            if (f.epoch != m_epoch) {
                f.epoch = m_epoch;
                if (header_based()) {
                    Packet probe;
                    probe.dst = f.dst;
                    f.header = header_from_plan(plan_for(probe, f.src), f.src, f.dst,
                                                static_cast<std::uint32_t>(i), 0);
                } else {
                    auto path = route_dsp(f.src.slot(), f.dst.slot(), m_view,
                                          m_strategy == Strategy::Dspcr && m_K > 0);
                    f.path = std::make_shared<const std::vector<int>>(std::move(path));
                }
            }
            Packet p;
            p.id = m_nextId++;
            p.flow = static_cast<int>(i);
            p.src = f.src;
            p.dst = f.dst;
            p.created_tick = m_tick;
            p.enqueue_tick = m_tick;
            if (header_based()) {
                p.header = f.header;
                p.header.tick = static_cast<std::uint32_t>(m_tick);
            } else {
                p.path = f.path;
            }
            ++m_m.generated;
            dispatch(f.src.slot(), std::move(p));
        }
    }
}

void Engine::transmit(LinkQueue& q, int from, int to, double rate, bool uplink)
{
    if (q.packets.empty()) {
        q.credit = 0.0;
        return;
    }
    q.credit += rate * m_cfg.tau * m_cfg.forwarding_rate_multiplier;
    if (q.credit + kBitsEps < m_pkt)
        return;
    const double prop = distance_km(position(from), position(to)) / kSpeedOfLightKmPerS;
    const auto delay = std::max<std::int64_t>(1, std::llround(prop / m_cfg.tau));
    auto& slot = m_transit[static_cast<std::size_t>((m_tick + delay) % static_cast<std::int64_t>(m_transit.size()))];
    while (!q.packets.empty() && q.credit + kBitsEps >= m_pkt) {
        Packet p = std::move(q.packets.front());
        q.packets.pop_front();
        q.bits -= m_pkt;
        q.credit -= m_pkt;
        ++p.hops;
        p.propagation += prop;
        p.queue_ticks += m_tick - p.enqueue_tick;
        if (p.path)
            ++p.path_pos;
        p.via_uplink = uplink;
        slot.emplace_back(to, std::move(p));
        ++m_transitCount;
    }
    if (q.packets.empty()) {
        q.credit = 0.0;
        q.bits = 0.0;
    }
}

void Engine::transmit_all()
{
    for (int s = 0; s < m_S; ++s)
        for (int port = 0; port < 4; ++port)
            transmit(m_isl[static_cast<std::size_t>(s) * 4 + port], s, m_nbr[s][port], m_cfg.link.R_ISL, false);
    for (auto& [key, q] : m_down)
        transmit(q, key.first, relay_node(key.second), m_cfg.link.R_SGL_down, false);
    for (auto& [key, q] : m_up)
        transmit(q, relay_node(key.first), key.second, m_cfg.link.R_SGL_up, true);
}

void Engine::refill()
{
    for (auto& w : m_wait) {
        if (w.count == 0)
            continue;
        for (auto it = w.by_target.begin(); it != w.by_target.end();) {
            LinkQueue* q = queue_of(it->first);
            auto& pend = it->second;
            while (q && !pend.packets.empty() && q->bits + m_pkt <= m_Bs + kBitsEps) {
                q->bits += m_pkt;
                q->packets.push_back(std::move(pend.packets.front()));
                pend.packets.pop_front();
                pend.bits -= m_pkt;
                w.bits -= m_pkt;
                --w.count;
            }
            it = pend.packets.empty() ? w.by_target.erase(it) : std::next(it);
        }
        if (w.count == 0)
            w.bits = 0.0;
    }
}

void Engine::check_invariants()
{
    std::uint64_t in_system = m_transitCount;
    double queued = 0.0, waiting = 0.0;
    auto bounded = [&](const LinkQueue& q) {
        in_system += q.packets.size();
        queued += q.bits;
        if (q.bits > m_Bs + kBitsEps)
            ++m_m.capacity_violations;
        m_m.max_queue_fill = std::max(m_m.max_queue_fill, q.bits / m_Bs);
    };
    for (const auto& q : m_isl)
        bounded(q);
    for (const auto& [key, q] : m_down)
        bounded(q);
    for (const auto& [key, q] : m_up) {
        in_system += q.packets.size();
        queued += q.bits;
    }
    for (const auto& w : m_wait) {
        in_system += w.count;
        waiting += w.bits;
        if (w.bits > m_cfg.link.B_w + kBitsEps)
            ++m_m.capacity_violations;
        if (m_cfg.link.B_w > 0)
            m_m.max_waiting_fill = std::max(m_m.max_waiting_fill, w.bits / m_cfg.link.B_w);
    }
    if (m_m.generated != m_m.delivered + m_m.dropped + in_system)
        ++m_m.conservation_violations;
    m_m.in_flight = in_system;
    if (m_cfg.record_trace)
        m_m.trace.push_back({m_tick, m_m.generated, m_m.delivered, m_m.dropped, in_system, queued, waiting});
}

SimMetrics Engine::run()
{
    const auto drain_ticks = static_cast<std::int64_t>(std::ceil(m_cfg.drain_s / m_cfg.tau - 1e-9));
    for (m_tick = 0; m_tick < m_ticks + drain_ticks; ++m_tick) {
        const bool draining = m_tick >= m_ticks;
        if (draining && m_m.generated == m_m.delivered + m_m.dropped)
            break;
        update_positions();
        const double t = static_cast<double>(m_tick) * m_cfg.tau;
        if (t + 1e-12 >= m_nextRegen) {
            regenerate();
            m_nextRegen += m_cfg.knbg_period;
        }
        auto& bucket = m_transit[static_cast<std::size_t>(m_tick % static_cast<std::int64_t>(m_transit.size()))];
        auto arrivals = std::move(bucket);
        bucket.clear();
        m_transitCount -= arrivals.size();
        for (auto& [node, p] : arrivals)
            arrive(node, std::move(p));
        if (!draining)
            generate();
        transmit_all();
        refill();
        if (m_cfg.check_invariants || m_cfg.record_trace)
            check_invariants();
    }
    if (!m_cfg.check_invariants && !m_cfg.record_trace)
        check_invariants();
    return std::move(m_m);
}

} // namespace

SimMetrics simulate(const ScenarioConfig& cfg)
{
    cfg.validate();
    Engine engine(cfg);
    return engine.run();
}

void write_metrics_header(std::ostream& os, const std::vector<std::string>& extra_columns)
{
    for (const auto& c : extra_columns)
        os << c << ',';
    os << "strategy,R_pac,B_s,delivered,dropped,drop_rate,throughput_bps,mean_hops,p50_delay,p95_delay\n";
}

void write_metrics_row(std::ostream& os, const SimMetrics& m, const std::vector<std::string>& extra_values)
{
    for (const auto& v : extra_values)
        os << v << ',';
    os << to_string(m.strategy) << ',' << m.R_pac << ',' << m.B_s << ',' << m.delivered << ','
       << m.dropped << ',' << m.drop_rate() << ',' << m.throughput_bps() << ',' << m.mean_hops() << ','
       << m.delay_percentile(0.5) << ',' << m.delay_percentile(0.95) << '\n';
}

void write_hop_histogram(std::ostream& os, const SimMetrics& m)
{
    os << "hops,count\n";
    for (const auto& [h, c] : m.hop_histogram)
        os << h << ',' << c << '\n';
}

void write_delay_cdf(std::ostream& os, const SimMetrics& m)
{
    os << "cdf,end_to_end_s,propagation_s\n";
    if (m.end_to_end_delays.empty())
        return;
    auto e2e = m.end_to_end_delays;
    auto prop = m.propagation_delays;
    std::sort(e2e.begin(), e2e.end());
    std::sort(prop.begin(), prop.end());
    const std::size_t n = e2e.size();
    const std::size_t points = std::min<std::size_t>(n, 1000);
    for (std::size_t i = 1; i <= points; ++i) {
        const std::size_t idx = (i * n + points - 1) / points - 1;
        os << static_cast<double>(idx + 1) / static_cast<double>(n) << ',' << e2e[idx] << ','
           << prop[idx] << '\n';
    }
}

void write_trace(std::ostream& os, const SimMetrics& m)
{
    os << "tick,generated,delivered,dropped,in_flight,queued_bits,waiting_bits\n";
    for (const auto& r : m.trace)
        os << r.tick << ',' << r.generated << ',' << r.delivered << ',' << r.dropped << ','
           << r.in_flight << ',' << r.queued_bits << ',' << r.waiting_bits << '\n';
}

} // namespace leoroute
