#include "leoroute/knbg.hpp"

#include <algorithm>
#include <limits>

namespace leoroute {

double min_band_latitude_step(const WalkerDelta& cfg)
{
    const double a = cfg.inclination();
    const int M = cfg.per_orbit();
    return a - std::asin(std::sin(a) * std::sin(kHalfPi - kTwoPi * (M - 1) / M));
}

SearchExtent search_extent(const GroundRelay& relay, const WalkerDelta& cfg)
{
    relay.validate();
    SearchExtent e;
    e.beta = coverage_angle(relay.min_elevation, cfg);
    e.r_s_km = cfg.earth_radius_km() * e.beta;
    const double a = cfg.inclination();
    if (std::abs(relay.lat) > a + e.beta) {
        e.empty = true;
        return e;
    }

    // Pseudo-satellites at the relay position, one per branch. Above the inclination
    // both collapse onto the apex.
    const double phi = std::clamp(relay.lat, -a, a);
    const double u_asc = satellite_phase(phi, true, a);
    const double u_desc = satellite_phase(phi, false, a);
    const double L_asc = ascending_node_longitude(relay.lon, u_asc, a);
    const double L_desc = ascending_node_longitude(relay.lon, u_desc, a);
    e.ascending_center = region_coords(L_asc, u_asc, cfg);
    e.descending_center = region_coords(L_desc, u_desc, cfg);

    // An orbit can only carry a gateway if its plane passes within β of the relay:
    // |sinα·cosφ·sin(L−λ) + cosα·sinφ| ≤ sinβ. On the ascending side this confines
    // L−λ to [asin(lo), asin(hi)]; the descending side mirrors it about π and gives
    // the same half-width around its own centre.
    const double c = std::sin(a) * std::cos(relay.lat);
    const double k = std::cos(a) * std::sin(relay.lat);
    const double lo = (-std::sin(e.beta) - k) / c;
    const double hi = (std::sin(e.beta) - k) / c;
    if (lo <= -1.0 || hi >= 1.0) {
        // The two sides merge: scan every column.
        e.delta_P = cfg.orbits() + cfg.orbits() % 2;
    } else {
        const double xi = node_offset(u_asc, a);
        const double half = std::max(std::abs(std::asin(lo) + xi), std::abs(std::asin(hi) + xi));
        e.delta_P = 2 * static_cast<int>(std::ceil(half / cfg.delta_omega() + 1e-9));
    }
    e.delta_P = std::max(e.delta_P, 2);

    const double step = min_band_latitude_step(cfg);
    e.delta_R = std::max(2, 2 * static_cast<int>(std::ceil(e.beta / step)));
    return e;
}

namespace {

// Offsets −h..h on a ring of size n, each residue at most once.
std::vector<int> ring_window(int center, int half, int n)
{
    std::vector<int> out;
    if (2 * half + 1 >= n) {
        out.resize(n);
        for (int i = 0; i < n; ++i)
            out[i] = i;
        return out;
    }
    for (int d = -half; d <= half; ++d)
        out.push_back(pos_mod(center + d, n));
    return out;
}

} // namespace

KeyNodeScan extract_key_nodes(const RtpgSnapshot& snap, const std::vector<GroundRelay>& relays,
                              const WalkerDelta& cfg)
{
    KeyNodeScan scan;
    scan.gateways.resize(relays.size());
    std::vector<int> stamp(cfg.satellite_count(), -1);
    for (std::size_t k = 0; k < relays.size(); ++k) {
        const auto ext = search_extent(relays[k], cfg);
        if (ext.empty)
            continue;
        auto& out = scan.gateways[k];
        for (const RegionCoord center : {ext.ascending_center, ext.descending_center}) {
            const auto cols = ring_window(center.P, ext.delta_P / 2, cfg.orbits());
            const auto rows = ring_window(center.R, ext.delta_R / 2, cfg.per_orbit());
            for (int P : cols)
                for (int R : rows) {
                    const SatelliteId sat = snap.satellite_at({P, R});
                    if (stamp[sat.slot()] == static_cast<int>(k))
                        continue;
                    stamp[sat.slot()] = static_cast<int>(k);
                    ++scan.comparisons;
                    if (is_gateway(relays[k], snap.state(sat), cfg))
                        out.push_back(sat);
                }
        }
        std::sort(out.begin(), out.end());
    }
    return scan;
}

int RoutePlan::total_hops() const
{
    int total = 0;
    for (const auto& s : segments)
        total += std::holds_alternative<InterSatSegment>(s) ? std::get<InterSatSegment>(s).hops() : 2;
    return total;
}

int RoutePlan::coop_count() const
{
    return static_cast<int>(std::count_if(segments.begin(), segments.end(), [](const auto& s) {
        return std::holds_alternative<CoopSegment>(s);
    }));
}

const std::vector<int>& KnbgGraph::relays_of(SatelliteId sat) const
{
    static const std::vector<int> none;
    const int i = index_of(sat);
    return i < 0 ? none : m_relaysOf[i];
}

bool KnbgGraph::is_gateway_of(SatelliteId sat, int relay_index) const
{
    const auto& r = relays_of(sat);
    return std::binary_search(r.begin(), r.end(), relay_index);
}

int KnbgGraph::relay_index(int relay_id) const
{
    for (std::size_t k = 0; k < m_relays.size(); ++k)
        if (m_relays[k].id == relay_id)
            return static_cast<int>(k);
    return -1;
}

int KnbgGraph::shared_relay(int i, int j) const
{
    const auto& a = m_relaysOf[i];
    const auto& b = m_relaysOf[j];
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia == *ib)
            return *ia;
        if (*ia < *ib)
            ++ia;
        else
            ++ib;
    }
    return -1;
}

KnbgGraph build_knbg(const RtpgSnapshot& snap, const std::vector<GroundRelay>& relays,
                     const WalkerDelta& cfg)
{
    KnbgGraph g;
    g.m_time = snap.t();
    g.m_relays = relays;
    g.m_extents.reserve(relays.size());
    for (const auto& r : relays)
        g.m_extents.push_back(search_extent(r, cfg));

    auto scan = extract_key_nodes(snap, relays, cfg);
    g.m_scanComparisons = scan.comparisons;
    g.m_gateways = std::move(scan.gateways);

    for (const auto& set : g.m_gateways)
        g.m_nodes.insert(g.m_nodes.end(), set.begin(), set.end());
    std::sort(g.m_nodes.begin(), g.m_nodes.end());
    g.m_nodes.erase(std::unique(g.m_nodes.begin(), g.m_nodes.end()), g.m_nodes.end());

    g.m_index.assign(cfg.satellite_count(), -1);
    for (int i = 0; i < g.node_count(); ++i)
        g.m_index[g.m_nodes[i].slot()] = i;
    g.m_relaysOf.assign(g.node_count(), {});
    for (std::size_t k = 0; k < g.m_gateways.size(); ++k)
        for (auto sat : g.m_gateways[k])
            g.m_relaysOf[g.m_index[sat.slot()]].push_back(static_cast<int>(k));

    const int V = g.node_count();
    g.m_weight.assign(static_cast<std::size_t>(V) * V, 0);
    g.m_estimate.assign(static_cast<std::size_t>(V) * V, HopEstimate{});
    for (int i = 0; i < V; ++i)
        for (int j = 0; j < V; ++j) {
            if (i == j)
                continue;
            const auto est = estimate_min_hops(g.m_nodes[i], g.m_nodes[j], snap, cfg);
            ++g.m_edgeEvaluations;
            g.m_estimate[i * V + j] = est;
            g.m_weight[i * V + j] = edge_weight(est.h_min, g.shared_relay(i, j) >= 0);
        }
    return g;
}

RoutePlan estimate_route(SatelliteId src, SatelliteId dst, const KnbgGraph& knbg,
                         const RtpgSnapshot& snap, const WalkerDelta& cfg)
{
    RoutePlan plan;
    if (src == dst)
        return plan;

    // Overlay numbering: 0 = src, 1..V = key nodes, V+1 = dst. Lower index wins ties.
    const int V = knbg.node_count();
    const int D = V + 1;
    const int total = V + 2;
    std::vector<HopEstimate> from_src(total), to_dst(total);
    for (int i = 0; i < V; ++i) {
        from_src[i + 1] = estimate_min_hops(src, knbg.nodes()[i], snap, cfg);
        to_dst[i + 1] = estimate_min_hops(knbg.nodes()[i], dst, snap, cfg);
    }
    from_src[D] = estimate_min_hops(src, dst, snap, cfg);

    auto weight = [&](int u, int v) -> int {
        if (u == v)
            return 0;
        if (u == 0)
            return from_src[v].h_min;
        if (v == D)
            return to_dst[u].h_min;
        if (v == 0 || u == D)
            return -1; // no edges back into the source or out of the destination
        return knbg.weight(u - 1, v - 1);
    };

    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<int> dist(total, kInf), pred(total, -1);
    std::vector<char> done(total, 0);
    dist[0] = 0;
    for (int iter = 0; iter < total; ++iter) {
        int u = -1;
        for (int v = 0; v < total; ++v)
            if (!done[v] && dist[v] != kInf && (u < 0 || dist[v] < dist[u]))
                u = v;
        if (u < 0 || u == D)
            break;
        done[u] = 1;
        for (int v = 1; v < total; ++v) {
            if (done[v])
                continue;
            const int w = weight(u, v);
            if (w < 0)
                continue;
            const int nd = dist[u] + w;
            if (nd < dist[v] || (nd == dist[v] && u < pred[v])) {
                dist[v] = nd;
                pred[v] = u;
            }
        }
    }

    std::vector<int> path;
    for (int v = D; v >= 0; v = pred[v])
        path.push_back(v);
    std::reverse(path.begin(), path.end());

    auto sat_of = [&](int v) { return v == 0 ? src : v == D ? dst : knbg.nodes()[v - 1]; };
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const int u = path[s], v = path[s + 1];
        const SatelliteId a = sat_of(u), b = sat_of(v);
        if (a == b)
            continue;
        HopEstimate est;
        if (u == 0)
            est = from_src[v];
        else if (v == D)
            est = to_dst[u];
        else {
            const int rel = knbg.shared_relay(u - 1, v - 1);
            if (rel >= 0 && knbg.weight(u - 1, v - 1) == 2) {
                plan.segments.push_back(CoopSegment{a, knbg.relays()[rel].id, b});
                continue;
            }
            est = knbg.estimate(u - 1, v - 1);
        }
        if (est.h_min == 0)
            continue;
        plan.segments.push_back(InterSatSegment{a, b, est.direction, est.h_h, est.h_v});
    }
    return plan;
}

} // namespace leoroute
