// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Simulation criteria use the desk-scale scenarios under scenarios/.

#include "leoroute/analysis.hpp"
#include "leoroute/knbg.hpp"
#include "leoroute/minhop.hpp"
#include "leoroute/packet_codec.hpp"
#include "leoroute/rtpg.hpp"
#include "leoroute/scenario.hpp"
#include "leoroute/simulator.hpp"

#include "validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace leoroute;

namespace {

const std::string kScenarioDir = LEOROUTE_SCENARIO_DIR;

int g_failures = 0;

void verdict(int id, bool pass, const std::string& detail)
{
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << " | " << detail << std::endl;
    if (!pass)
        ++g_failures;
}

std::string fmt(double v, int precision = 4)
{
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - m_t0).count();
    }

private:
    std::chrono::steady_clock::time_point m_t0 = std::chrono::steady_clock::now();
};

// Every simulation of the run goes through here so the conservation and capacity
// counters of criterion 8 cover all of them.
struct SimLedger {
    int runs = 0;
    std::uint64_t conservation = 0;
    std::uint64_t capacity = 0;
    std::uint64_t unbalanced_end = 0;
};
SimLedger g_sims;

SimMetrics run(const ScenarioConfig& cfg)
{
    auto m = simulate(cfg);
    ++g_sims.runs;
    g_sims.conservation += m.conservation_violations;
    g_sims.capacity += m.capacity_violations;
    if (m.generated != m.delivered + m.dropped + m.in_flight)
        ++g_sims.unbalanced_end;
    return m;
}

ScenarioConfig scenario(const std::string& file, KeyValues overrides = {})
{
    auto kv = read_key_values(kScenarioDir + "/" + file);
    for (auto& [k, v] : overrides)
        kv[k] = v;
    return scenario_from_key_values(kv);
}

// --- 1-3: oracle suites -----------------------------------------------------

void criterion1()
{
    const auto r = validation::validate_minhop(WalkerDelta::starlink_phase1(), 100000, 20240601);
    for (const auto& m : r.mismatches)
        std::cout << "  minhop mismatch t,src,dst,estimate,bfs = " << m << '\n';
    verdict(1, r.pass() && r.seconds <= 120.0,
            "match " + fmt(100.0 * r.match_rate(), 6) + "% of " + std::to_string(r.samples) +
                " pairs (need >= 99%), below BFS " + std::to_string(r.below_reference) + ", max bin gap " +
                fmt(r.distribution.max_bin_gap_pp()) + " pp (need <= 0.5), " + fmt(r.seconds, 3) + " s");
}

void criterion2()
{
    const auto c = WalkerDelta::starlink_phase1();
    bool pass = true;
    std::string detail;
    Stopwatch sw;
    for (int k : {12, 25}) {
        const auto r = validation::validate_routes(c, k, deg2rad(kDefaultMinElevationDeg), 10000, 777 + k);
        for (const auto& m : r.mismatches)
            std::cout << "  route mismatch K=" << k << " t,src,dst,estimate,reference = " << m << '\n';
        // A 99.9% match rate bounds every CDF bin gap by 0.1 pp.
        pass = pass && r.pass() && r.distribution.max_bin_gap_pp() <= 0.1;
        detail += "K=" + std::to_string(k) + " match " + fmt(100.0 * r.match_rate(), 6) + "%, bin gap " +
                  fmt(r.distribution.max_bin_gap_pp()) + " pp; ";
    }
    pass = pass && sw.seconds() <= 300.0;
    verdict(2, pass, detail + "need >= 99.9%, " + fmt(sw.seconds(), 3) + " s");
}

void criterion3()
{
    const auto r = validation::validate_key_nodes(WalkerDelta::starlink_phase1(), 25,
                                                  deg2rad(kDefaultMinElevationDeg), 100, 4242);
    verdict(3, r.pass(),
            std::to_string(r.exact) + "/" + std::to_string(r.instants) +
                " instants exact, worst windowed comparisons " + fmt(100.0 * r.comparison_ratio) +
                "% of K*S (need <= 10%), mean gateways per relay " + fmt(r.mean_gateways));
}

// --- 4-5: analysis ----------------------------------------------------------

void criterion4()
{
    const double rho = complexity_ratio(25, 10, 1584);
    verdict(4, std::abs(rho - 39.15) <= 0.01, "rho(25, 10, 1584) = " + fmt(rho, 8) + " (target 39.15 +- 0.01)");
}

void criterion5()
{
    const auto r = validation::validate_survival(10, 10'000'000, 9001);
    int within = 0;
    for (const auto& c : r.cases) {
        within += c.within_3_sigma();
        std::cout << "  survival " << c.h_h << 'x' << c.h_v << " h_g=" << c.h_g << " exact " << fmt(c.exact, 8)
                  << " mc " << fmt(c.mc_mean, 8) << " +- " << fmt(c.mc_stderr, 3) << '\n';
    }
    verdict(5, r.pass(),
            std::to_string(r.closed_form_checks) + " closed-form checks, max error " +
                fmt(r.closed_form_max_error, 3) + " (need <= 1e-12); " + std::to_string(within) + "/" +
                std::to_string(r.cases.size()) + " inclusion-exclusion cases within 3 sigma of 1e7 samples");
}

// --- 6-7: simulations -------------------------------------------------------

struct SweepPoint {
    double B_s;
    double throughput;
    std::uint64_t dropped;
};

std::vector<SweepPoint> buffer_sweep(const std::string& file, const std::vector<double>& sizes, KeyValues extra)
{
    std::vector<SweepPoint> out;
    for (double b : sizes) {
        extra["B_s"] = fmt(b, 12);
        const auto m = run(scenario(file, extra));
        out.push_back({b, m.throughput_bps(), m.dropped});
        std::cout << "  " << file << " B_s=" << b << " throughput " << fmt(m.throughput_bps(), 8) << " bit/s, dropped "
                  << m.dropped << ", mean delay " << fmt(m.mean_delay()) << " s" << std::endl;
    }
    return out;
}

double throughput_at(const std::vector<SweepPoint>& s, double b)
{
    for (const auto& p : s)
        if (p.B_s == b)
            return p.throughput;
    return 0.0;
}

void criterion6()
{
    // Ka: 300 flows for 5 s, then a drain so the last packets are still counted.
    const std::vector<double> ka_sizes{12e3, 24e3, 100e3, 500e3, 1e6, 1.5e6, 2e6, 3e6, 5e6};
    const auto ka = buffer_sweep("starlink_phase1.scenario", ka_sizes, {});
    bool ka_monotone = true;
    for (std::size_t i = 1; i < ka.size(); ++i)
        ka_monotone = ka_monotone && ka[i].throughput >= ka[i - 1].throughput;
    const double t2 = throughput_at(ka, 2e6);
    double ka_gain = 0.0;
    for (const auto& p : ka)
        if (p.B_s > 2e6)
            ka_gain = std::max(ka_gain, p.throughput / t2 - 1.0);
    const double ka_rise = t2 / ka.front().throughput - 1.0;

    // Laser ISLs with Ka SGLs, as in the throughput experiments.
    const std::vector<double> laser_sizes{0.5e6, 1.5e6, 2.5e6, 5e6, 10e6};
    const auto laser = buffer_sweep("starlink_phase1_laser.scenario", laser_sizes,
                                    {{"R_SGL_up", "2e9"}, {"R_SGL_down", "1.5e9"}});
    const double l25 = throughput_at(laser, 2.5e6);
    double laser_dev = 0.0;
    for (const auto& p : laser)
        if (p.B_s > 2.5e6)
            laser_dev = std::max(laser_dev, std::abs(p.throughput / l25 - 1.0));
    const double laser_rise = l25 / laser.front().throughput - 1.0;

    const bool pass = ka_monotone && ka_gain < 0.02 && laser_dev < 0.02;
    verdict(6, pass,
            std::string("Ka non-decreasing ") + (ka_monotone ? "yes" : "no") + ", gain beyond 2 Mbit " +
                fmt(100.0 * ka_gain) + "% (need < 2%), rise 12 kbit->2 Mbit " + fmt(100.0 * ka_rise) +
                "%; laser deviation beyond 2.5 Mbit " + fmt(100.0 * laser_dev) + "% (need < 2%), rise 0.5->2.5 Mbit " +
                fmt(100.0 * laser_rise) + "%");
}

void criterion7()
{
    const KeyValues saturating{{"R_pac", "25e6"}};
    auto with = [&](const char* strategy, int relays) {
        KeyValues kv = saturating;
        kv["strategy"] = strategy;
        kv["relay_count"] = std::to_string(relays);
        const auto m = run(scenario("starlink_phase1.scenario", kv));
        std::cout << "  " << strategy << " K=" << relays << " mean delay " << fmt(m.mean_delay()) << " s, drop rate "
                  << fmt(m.drop_rate()) << ", mean hops " << fmt(m.mean_hops()) << ", throughput "
                  << fmt(m.throughput_bps(), 6) << std::endl;
        return m;
    };
    const auto ours25 = with("OURS", 25);
    const auto dsp = with("DSP", 25);
    const auto lsp = with("LSP", 25);
    const bool delay_ok = ours25.mean_delay() < dsp.mean_delay() && ours25.mean_delay() < lsp.mean_delay();
    const bool drop_ok = ours25.drop_rate() < dsp.drop_rate() && ours25.drop_rate() < lsp.drop_rate();

    const double pure_isl = std::min(dsp.mean_hops(), lsp.mean_hops());
    bool hops_ok = true;
    std::string hops;
    for (const char* s : {"OURS", "DSPCR", "LSPCR"}) {
        const double h25 = std::string(s) == "OURS" ? ours25.mean_hops() : with(s, 25).mean_hops();
        const double h12 = with(s, 12).mean_hops();
        hops_ok = hops_ok && h25 < h12 && h12 < pure_isl;
        hops += std::string(s) + " " + fmt(h25) + " < " + fmt(h12) + "; ";
    }
    verdict(7, delay_ok && drop_ok && hops_ok,
            "mean delay OURS " + fmt(ours25.mean_delay()) + " s vs DSP " + fmt(dsp.mean_delay()) + " / LSP " +
                fmt(lsp.mean_delay()) + "; drop rate " + fmt(ours25.drop_rate()) + " vs " + fmt(dsp.drop_rate()) +
                " / " + fmt(lsp.drop_rate()) + "; hops 25 < 12 relays: " + hops + "pure ISL " + fmt(pure_isl));
}

// --- 8: determinism and conservation ----------------------------------------

std::string all_csv(const SimMetrics& m)
{
    std::ostringstream os;
    write_metrics_header(os);
    write_metrics_row(os, m);
    write_hop_histogram(os, m);
    write_delay_cdf(os, m);
    write_trace(os, m);
    return os.str();
}

void criterion8()
{
    const KeyValues small{{"flow_count", "120"}, {"duration", "1.5"}, {"drain_s", "1"}, {"R_pac", "25e6"},
                          {"trace", "true"}, {"seed", "31337"}};
    bool identical = true;
    for (const char* s : {"OURS", "DSP", "LSP", "DSPCR", "LSPCR"}) {
        KeyValues kv = small;
        kv["strategy"] = s;
        const auto cfg = scenario("starlink_phase1.scenario", kv);
        const auto a = all_csv(run(cfg));
        const auto b = all_csv(run(cfg));
        identical = identical && a == b && !a.empty();
    }
    verdict(8, identical && g_sims.conservation == 0 && g_sims.capacity == 0 && g_sims.unbalanced_end == 0,
            std::string("repeat runs byte-identical ") + (identical ? "yes" : "no") + "; across " +
                std::to_string(g_sims.runs) + " runs checked every tick: conservation violations " +
                std::to_string(g_sims.conservation) + ", capacity violations " + std::to_string(g_sims.capacity));
}

// --- 9: codec ---------------------------------------------------------------

PacketHeader random_header(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> u16(0, 65535), n(0, 16), dir(0, 3), coin(0, 1);
    std::uniform_int_distribution<std::uint32_t> u32;
    PacketHeader h;
    h.src = static_cast<std::uint16_t>(u16(rng));
    h.dst = static_cast<std::uint16_t>(u16(rng));
    h.flow = u32(rng);
    h.tick = u32(rng);
    const int count = n(rng);
    for (int i = 0; i < count; ++i) {
        if (coin(rng))
            h.segments.emplace_back(HeaderInterSat{static_cast<std::uint16_t>(u16(rng)), static_cast<Direction>(dir(rng)),
                                                   static_cast<std::uint16_t>(u16(rng)),
                                                   static_cast<std::uint16_t>(u16(rng))});
        else
            h.segments.emplace_back(HeaderCoop{static_cast<std::uint16_t>(u16(rng)), static_cast<std::uint16_t>(u16(rng))});
    }
    return h;
}

// Carries real plans from source to destination, exercising every update case on the way.
struct CaseWalk {
    const WalkerDelta& c;
    const RtpgSnapshot& snap;
    const KnbgGraph& knbg;
    std::mt19937_64& rng;
    std::int64_t counts[6] = {};
    std::int64_t updates = 0;
    std::int64_t malformed = 0;

    void check(const PacketHeader& h)
    {
        ++updates;
        malformed += !well_formed(h);
    }

    bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

    void walk(SatelliteId src, SatelliteId dst)
    {
        auto plan = estimate_route(src, dst, knbg, snap, c);
        auto h = header_from_plan(plan, src, dst, 1, 0);
        check(h);
        SatelliteId cur = src;
        bool replanned = false;
        bool diverted = false;
        for (int guard = 0; !h.segments.empty() && guard < 10000; ++guard) {
            if (const auto* is = std::get_if<HeaderInterSat>(&h.segments.front())) {
                const auto end = SatelliteId{is->end_node};
                const bool both = is->rem_h > 0 && is->rem_v > 0;
                const Axis axis = is->rem_h == 0 || (both && chance(0.5)) ? Axis::Vertical : Axis::Horizontal;
                apply_forward(h, axis);
                check(h);
                if (h.segments.empty() || !std::holds_alternative<HeaderInterSat>(h.segments.front()) ||
                    std::get<HeaderInterSat>(h.segments.front()).end_node != end.value) {
                    cur = end;
                    if (!replanned && cur != dst && chance(0.3)) {
                        replanned = true;
                        plan = estimate_route(cur, dst, knbg, snap, c);
                        CaseContext ctx;
                        ctx.current = cur;
                        ctx.plan = &plan;
                        apply_case(h, UpdateCase::Replan, ctx);
                        ++counts[3];
                        check(h);
                    }
                }
                continue;
            }
            const auto co = std::get<HeaderCoop>(h.segments.front());
            const int k = knbg.relay_index(co.relay);
            const auto& gws = knbg.gateway_sets()[k];
            if (!diverted && gws.size() > 1 && chance(0.3)) {
                // Case 2: go to another gateway of the same relay first.
                SatelliteId alt = gws[std::uniform_int_distribution<std::size_t>(0, gws.size() - 1)(rng)];
                if (alt != cur) {
                    CaseContext ctx;
                    ctx.current = cur;
                    ctx.relay_id = co.relay;
                    ctx.alternate = alt;
                    ctx.to_alternate = estimate_min_hops(cur, alt, snap, c);
                    apply_case(h, UpdateCase::DivertGateway, ctx);
                    ++counts[2];
                    check(h);
                    diverted = true;
                    continue;
                }
            }
            diverted = false;
            CaseContext down;
            down.current = cur;
            down.relay_id = co.relay;
            apply_case(h, UpdateCase::ForwardToRelay, down);
            ++counts[1];
            check(h);
            if (chance(0.2)) {
                // Case 5: the relay picks another up-gateway and the header becomes its plan.
                const SatelliteId up = gws[std::uniform_int_distribution<std::size_t>(0, gws.size() - 1)(rng)];
                plan = estimate_route(up, dst, knbg, snap, c);
                CaseContext ctx;
                ctx.current = up;
                ctx.plan = &plan;
                apply_case(h, UpdateCase::RelayReroute, ctx);
                ++counts[5];
                check(h);
                cur = up;
                continue;
            }
            const auto up = SatelliteId{std::get<HeaderCoop>(h.segments.front()).up_gateway};
            CaseContext arrive;
            arrive.current = up;
            apply_case(h, UpdateCase::ArriveUpGateway, arrive);
            ++counts[4];
            check(h);
            cur = up;
        }
    }
};

void criterion9()
{
    std::mt19937_64 rng(99);
    int mismatched = 0;
    constexpr int kHeaders = 100000;
    for (int i = 0; i < kHeaders; ++i) {
        const auto h = random_header(rng);
        const auto bytes = encode(h);
        if (bytes.size() != encoded_size(h) || decode(bytes) != h || encode(decode(bytes)) != bytes)
            ++mismatched;
    }

    const auto c = WalkerDelta::starlink_phase1();
    const auto relays = reconstructed_relays(25, deg2rad(kDefaultMinElevationDeg));
    std::int64_t counts[6] = {};
    std::int64_t updates = 0, malformed = 0;
    std::uniform_int_distribution<int> pick(1, c.satellite_count());
    for (int instant = 0; instant < 5; ++instant) {
        const auto snap = build_rtpg(propagate(c, 137.0 * instant), c);
        const auto knbg = build_knbg(snap, relays, c);
        CaseWalk w{c, snap, knbg, rng};
        for (int i = 0; i < 400; ++i) {
            const SatelliteId a{pick(rng)};
            const SatelliteId b{pick(rng)};
            if (a != b)
                w.walk(a, b);
        }
        for (int k = 1; k <= 5; ++k)
            counts[k] += w.counts[k];
        updates += w.updates;
        malformed += w.malformed;
    }
    bool every_case = true;
    std::string per_case;
    for (int k = 1; k <= 5; ++k) {
        every_case = every_case && counts[k] > 0;
        per_case += " case" + std::to_string(k) + "=" + std::to_string(counts[k]);
    }
    verdict(9, mismatched == 0 && malformed == 0 && every_case,
            std::to_string(kHeaders - mismatched) + "/" + std::to_string(kHeaders) + " random headers round-trip; " +
                std::to_string(updates - malformed) + "/" + std::to_string(updates) +
                " in-flight updates well-formed;" + per_case);
}

// --- 10: RTPG ---------------------------------------------------------------

void criterion10()
{
    const auto c = WalkerDelta::starlink_phase1();
    const int S = c.satellite_count();
    const double Ts = c.orbital_period_s();
    int bijective = 0, periodic = 0, worst_shift = 0;
    std::string failure;
    constexpr int kSamples = 1000;
    for (int i = 0; i < kSamples; ++i) {
        const double t = Ts * i / kSamples;
        try {
            const auto a = build_rtpg(propagate(c, t), c);
            const auto b = build_rtpg(propagate(c, t + Ts), c);
            std::set<std::pair<int, int>> regions;
            bool ok = true;
            for (int s = 1; s <= S; ++s) {
                const auto rc = a.coord(SatelliteId{s});
                ok = ok && regions.insert({rc.P, rc.R}).second && a.satellite_at(rc) == SatelliteId{s};
            }
            bijective += ok && static_cast<int>(regions.size()) == S;
            int shift = 0;
            for (int s = 1; s <= S; ++s)
                shift = std::max(shift, ring_distance(a.coord(SatelliteId{s}).R, b.coord(SatelliteId{s}).R, c.per_orbit()));
            worst_shift = std::max(worst_shift, shift);
            periodic += shift <= 1;
        } catch (const IntegrityError& e) {
            failure = e.what();
        }
    }
    verdict(10, bijective == kSamples && periodic == kSamples,
            std::to_string(bijective) + "/" + std::to_string(kSamples) + " instants one-satellite-per-region; " +
                std::to_string(periodic) + "/" + std::to_string(kSamples) +
                " instants with R(t+T_s) within one index of R(t), worst shift " + std::to_string(worst_shift) +
                (failure.empty() ? "" : "; " + failure));
}

} // namespace

int main()
{
    Stopwatch total;
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    std::cout << (g_failures ? "FAILED " : "ALL PASSED ") << g_failures << " failing, " << fmt(total.seconds(), 4)
              << " s total" << std::endl;
    return g_failures ? 1 : 0;
}
