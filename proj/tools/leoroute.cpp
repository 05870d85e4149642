// leoroute: scenario runs, parameter sweeps, oracle validation and small calculators.

#include "leoroute/analysis.hpp"
#include "leoroute/knbg.hpp"
#include "leoroute/minhop.hpp"
#include "leoroute/packet_codec.hpp"
#include "leoroute/rtpg.hpp"
#include "leoroute/scenario.hpp"
#include "leoroute/simulator.hpp"

#include "validation.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace leoroute;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;

/// Raised when a run completes but an oracle threshold is missed.
struct ValidationFailed {};

std::ofstream open_output(const fs::path& dir, const std::string& name)
{
    fs::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os)
        throw ConfigError("--out: cannot write " + (dir / name).string());
    os << std::setprecision(10);
    return os;
}

void write_run(const fs::path& out, const SimMetrics& m, const ScenarioConfig& cfg)
{
    {
        auto os = open_output(out, "metrics.csv");
        write_metrics_header(os);
        write_metrics_row(os, m);
    }
    {
        auto os = open_output(out, "hops_hist.csv");
        write_hop_histogram(os, m);
    }
    {
        auto os = open_output(out, "delay_cdf.csv");
        write_delay_cdf(os, m);
    }
    if (cfg.record_trace) {
        auto os = open_output(out, "trace.csv");
        write_trace(os, m);
    }
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string out = "./out";
};

int run_simulate(const SimulateArgs& a, bool seed_given)
{
    auto cfg = load_scenario(a.scenario);
    if (seed_given)
        cfg.seed = a.seed;
    const auto m = simulate(cfg);
    write_run(a.out, m, cfg);
    std::cout << "delivered," << m.delivered << "\ndropped," << m.dropped << "\nthroughput_bps,"
              << m.throughput_bps() << "\nout," << a.out << '\n';
    return kExitOk;
}

// --- sweep ------------------------------------------------------------------

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

SweepAxis parse_vary(const std::string& arg)
{
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--vary: expected key=v1,v2,... but got '" + arg + "'");
    SweepAxis axis{arg.substr(0, eq), {}};
    if (!is_known_scenario_key(axis.key))
        throw ConfigError(axis.key + ": unknown scenario key in --vary");
    if (!is_numeric_scenario_key(axis.key))
        throw ConfigError(axis.key + ": --vary only accepts numeric keys");
    std::stringstream ss(arg.substr(eq + 1));
    for (std::string v; std::getline(ss, v, ',');) {
        double parsed = 0.0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
        if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size())
            throw ConfigError(axis.key + ": '" + v + "' is not a number");
        axis.values.push_back(v);
    }
    if (axis.values.empty())
        throw ConfigError(axis.key + ": --vary needs at least one value");
    return axis;
}

struct SweepArgs {
    std::string scenario;
    std::vector<std::string> vary;
    std::string out = "./out";
};

int run_sweep(const SweepArgs& a)
{
    const auto base = read_key_values(a.scenario);
    std::vector<SweepAxis> axes;
    std::vector<std::string> columns;
    for (const auto& v : a.vary) {
        axes.push_back(parse_vary(v));
        columns.push_back(axes.back().key);
    }
    // Validate every combination before the first (slow) run.
    std::vector<std::vector<std::string>> combos{{}};
    for (const auto& ax : axes) {
        std::vector<std::vector<std::string>> next;
        for (const auto& c : combos)
            for (const auto& v : ax.values) {
                next.push_back(c);
                next.back().push_back(v);
            }
        combos = std::move(next);
    }
    std::vector<ScenarioConfig> configs;
    for (const auto& c : combos) {
        auto kv = base;
        for (std::size_t i = 0; i < axes.size(); ++i)
            kv[axes[i].key] = c[i];
        configs.push_back(scenario_from_key_values(kv));
    }

    auto os = open_output(a.out, "sweep.csv");
    write_metrics_header(os, columns);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto m = simulate(configs[i]);
        write_metrics_row(os, m, combos[i]);
        os.flush();
        std::cerr << "run " << i + 1 << '/' << configs.size() << " done\n";
    }
    std::cout << "rows," << configs.size() << "\nout," << (fs::path(a.out) / "sweep.csv").string() << '\n';
    return kExitOk;
}

// --- estimate / knbg-dump ---------------------------------------------------

struct EstimateArgs {
    std::string scenario;
    int src = 0;
    int dst = 0;
    double time = 0.0;
};

void check_satellite(const char* flag, int id, const WalkerDelta& c)
{
    if (id < 1 || id > c.satellite_count())
        throw ConfigError(std::string(flag) + ": satellite id must lie in 1.." + std::to_string(c.satellite_count()));
}

int run_estimate(const EstimateArgs& a)
{
    const auto cfg = load_scenario(a.scenario);
    const auto& c = cfg.constellation;
    check_satellite("--src", a.src, c);
    check_satellite("--dst", a.dst, c);
    const auto snap = build_rtpg(propagate(c, a.time), c);
    const SatelliteId src{a.src}, dst{a.dst};
    const auto isl = estimate_min_hops(src, dst, snap, c);
    const auto knbg = build_knbg(snap, cfg.relays, c);
    const auto plan = estimate_route(src, dst, knbg, snap, c);

    std::cout << "src,dst,t,h_min,direction,h_h,h_v,route_hops,coop_segments\n"
              << a.src << ',' << a.dst << ',' << a.time << ',' << isl.h_min << ','
              << to_string(isl.direction) << ',' << isl.h_h << ',' << isl.h_v << ','
              << plan.total_hops() << ',' << plan.coop_count() << '\n';
    std::cout << "segment,kind,from,to,direction,h_h,h_v,relay\n";
    int i = 0;
    for (const auto& seg : plan.segments) {
        if (const auto* s = std::get_if<InterSatSegment>(&seg))
            std::cout << i++ << ",intersat," << s->from.value << ',' << s->to.value << ','
                      << to_string(s->direction) << ',' << s->h_h << ',' << s->h_v << ",\n";
        else {
            const auto& co = std::get<CoopSegment>(seg);
            std::cout << i++ << ",coop," << co.gateway_down.value << ',' << co.gateway_up.value
                      << ",,,," << co.relay_id << '\n';
        }
    }
    return kExitOk;
}

struct KnbgDumpArgs {
    std::string scenario;
    double time = 0.0;
    std::string out = "./out";
};

int run_knbg_dump(const KnbgDumpArgs& a)
{
    const auto cfg = load_scenario(a.scenario);
    const auto& c = cfg.constellation;
    const auto snap = build_rtpg(propagate(c, a.time), c);
    const auto g = build_knbg(snap, cfg.relays, c);
    {
        auto os = open_output(a.out, "knbg_nodes.csv");
        os << "node,satellite,relays\n";
        for (int i = 0; i < g.node_count(); ++i) {
            os << i << ',' << g.nodes()[i].value << ',';
            const auto& rs = g.relays_of_node(i);
            for (std::size_t k = 0; k < rs.size(); ++k)
                os << (k ? ";" : "") << g.relays()[rs[k]].id;
            os << '\n';
        }
    }
    {
        auto os = open_output(a.out, "knbg_edges.csv");
        os << "node";
        for (int j = 0; j < g.node_count(); ++j)
            os << ',' << j;
        os << '\n';
        for (int i = 0; i < g.node_count(); ++i) {
            os << i;
            for (int j = 0; j < g.node_count(); ++j)
                os << ',' << g.weight(i, j);
            os << '\n';
        }
    }
    std::cout << "nodes," << g.node_count() << "\nrelays," << g.relays().size() << "\nout," << a.out << '\n';
    return kExitOk;
}

// --- validate ---------------------------------------------------------------

struct ValidateArgs {
    std::string suite;
    std::int64_t samples = 0;
    std::uint64_t seed = 1;
};

int run_validate(const ValidateArgs& a)
{
    const auto c = WalkerDelta::starlink_phase1();
    const double elev = deg2rad(kDefaultMinElevationDeg);
    bool ok = true;
    std::cout << std::setprecision(10);
    if (a.suite == "minhop") {
        const auto r = validation::validate_minhop(c, a.samples > 0 ? a.samples : 100000, a.seed);
        validation::print(std::cout, r);
        ok = r.pass();
    } else if (a.suite == "knbg") {
        const std::int64_t n = a.samples > 0 ? a.samples : 10000;
        for (int k : {12, 25}) {
            const auto r = validation::validate_routes(c, k, elev, n, a.seed);
            validation::print(std::cout, r);
            ok = ok && r.pass();
        }
        const auto kn = validation::validate_key_nodes(c, 25, elev, 100, a.seed);
        validation::print(std::cout, kn);
        ok = ok && kn.pass();
    } else if (a.suite == "survival") {
        const auto r = validation::validate_survival(10, a.samples > 0 ? static_cast<std::uint64_t>(a.samples) : 10'000'000,
                                                     a.seed);
        validation::print(std::cout, r);
        ok = r.pass();
    } else {
        throw ConfigError("--suite: expected minhop, knbg or survival");
    }
    std::cout << "result," << (ok ? "PASS" : "FAIL") << '\n';
    if (!ok)
        throw ValidationFailed{};
    return kExitOk;
}

// --- calculators ------------------------------------------------------------

struct SurvivalArgs {
    int h_h = 0, h_v = 0, h_g = 0;
    double p = 0.9, q = 0.9, r = 0.9;
    std::uint64_t mc_samples = 0;
    std::uint64_t seed = 1;
};

int run_survival(const SurvivalArgs& a)
{
    const LinkAvailability links{a.p, a.q, a.r};
    std::cout << std::setprecision(12)
              << "h_h,h_v,h_g,p,q,r,single,lsp,ours,mc_mean,mc_stderr\n"
              << a.h_h << ',' << a.h_v << ',' << a.h_g << ',' << a.p << ',' << a.q << ',' << a.r << ','
              << survival_single(a.h_h, a.h_v, links) << ',' << survival_lsp(a.h_h, a.h_v, links) << ',';
    if (a.h_h + a.h_v <= kSurvivalExactLimit)
        std::cout << survival_ours(a.h_h, a.h_v, a.h_g, links);
    std::cout << ',';
    if (a.mc_samples > 0) {
        const auto mc = survival_monte_carlo(a.h_h, a.h_v, a.h_g, links, a.mc_samples, a.seed);
        std::cout << mc.value << ',' << mc.std_error;
    } else {
        std::cout << ',';
    }
    std::cout << '\n';
    return kExitOk;
}

struct ComplexityArgs {
    double K = 25, X = 10, S = 1584;
};

int run_complexity(const ComplexityArgs& a)
{
    if (a.K < 1 || a.X < 1 || a.S < 1)
        throw ConfigError("complexity: K, X and S must be at least 1");
    std::cout << std::setprecision(10) << "K,X,S,rho\n"
              << a.K << ',' << a.X << ',' << a.S << ',' << complexity_ratio(a.K, a.X, a.S) << '\n';
    return kExitOk;
}

int run_minhop_condition(const std::string& scenario)
{
    const auto c = scenario.empty() ? WalkerDelta::starlink_phase1() : load_scenario(scenario).constellation;
    const auto L = link_lengths(c);
    const auto r = minhop_equals_shortest(c);
    std::cout << std::setprecision(10) << "N,M,F,L_v_km,L_hmin_km,Z,Hv_max,Hh_max,case1,case2,both\n"
              << c.orbits() << ',' << c.per_orbit() << ',' << c.phasing() << ',' << L.intra_km << ','
              << L.inter_min_km << ',' << r.Z << ',' << r.Hv_max << ',' << r.Hh_max << ','
              << r.case1_holds << ',' << r.case2_holds << ',' << r.both << '\n';
    return kExitOk;
}

std::vector<std::uint8_t> parse_hex(const std::string& text)
{
    std::string digits;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch)))
            digits.push_back(ch);
    if (digits.rfind("0x", 0) == 0 || digits.rfind("0X", 0) == 0)
        digits.erase(0, 2);
    if (digits.size() % 2 != 0)
        throw ConfigError("--hex: odd number of hex digits");
    std::vector<std::uint8_t> bytes;
    for (std::size_t i = 0; i < digits.size(); i += 2) {
        unsigned v = 0;
        const auto [ptr, ec] = std::from_chars(digits.data() + i, digits.data() + i + 2, v, 16);
        if (ec != std::errc{} || ptr != digits.data() + i + 2)
            throw ConfigError("--hex: invalid digit near offset " + std::to_string(i));
        bytes.push_back(static_cast<std::uint8_t>(v));
    }
    return bytes;
}

int run_header_dump(const std::string& hex)
{
    const auto bytes = parse_hex(hex);
    const auto h = decode(bytes);
    std::cout << "field,value\nsrc," << h.src << "\ndst," << h.dst << "\nflow," << h.flow << "\ntick," << h.tick
              << "\nsegments," << h.segments.size() << "\nplanned_hops," << h.planned_hops()
              << "\nwell_formed," << well_formed(h) << '\n';
    std::cout << "segment,kind,end_node,direction,rem_h,rem_v,relay,up_gateway\n";
    for (std::size_t i = 0; i < h.segments.size(); ++i) {
        if (const auto* s = std::get_if<HeaderInterSat>(&h.segments[i]))
            std::cout << i << ",intersat," << s->end_node << ',' << to_string(s->direction) << ','
                      << s->rem_h << ',' << s->rem_v << ",,\n";
        else {
            const auto& co = std::get<HeaderCoop>(h.segments[i]);
            std::cout << i << ",coop,,,,," << co.relay << ',' << co.up_gateway << '\n';
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cooperative LEO routing toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Run one scenario and write metrics.csv, hops_hist.csv, delay_cdf.csv");
    c_sim->add_option("--scenario", sim.scenario, "Scenario file")->required();
    auto* seed_opt = c_sim->add_option("--seed", sim.seed, "Override the scenario seed");
    c_sim->add_option("--out", sim.out, "Output directory")->capture_default_str();

    SweepArgs sw;
    auto* c_sweep = app.add_subcommand("sweep", "Cartesian parameter sweep, one metrics row per combination");
    c_sweep->add_option("--scenario", sw.scenario, "Base scenario file")->required();
    c_sweep->add_option("--vary", sw.vary, "key=v1,v2,... (repeatable)")->take_all()->expected(0, -1);
    c_sweep->add_option("--out", sw.out, "Output directory")->capture_default_str();

    EstimateArgs est;
    auto* c_est = app.add_subcommand("estimate", "Minimum-hop estimate and cooperative plan for one pair");
    c_est->add_option("--scenario", est.scenario, "Scenario file")->required();
    c_est->add_option("--src", est.src, "Source satellite id (1-based)")->required();
    c_est->add_option("--dst", est.dst, "Destination satellite id (1-based)")->required();
    c_est->add_option("--time", est.time, "Instant in seconds")->capture_default_str();

    KnbgDumpArgs kd;
    auto* c_kd = app.add_subcommand("knbg-dump", "Write the key-node graph as node list and edge matrix");
    c_kd->add_option("--scenario", kd.scenario, "Scenario file")->required();
    c_kd->add_option("--time", kd.time, "Instant in seconds")->capture_default_str();
    c_kd->add_option("--out", kd.out, "Output directory")->capture_default_str();

    ValidateArgs va;
    auto* c_va = app.add_subcommand("validate", "Compare against the test oracles; exit 3 below threshold");
    c_va->add_option("--suite", va.suite, "minhop | knbg | survival")->required();
    c_va->add_option("--samples", va.samples, "Pairs (minhop, knbg) or Monte-Carlo samples (survival)");
    c_va->add_option("--seed", va.seed, "Sampling seed")->capture_default_str();

    SurvivalArgs sv;
    auto* c_sv = app.add_subcommand("survival", "Path survival probabilities for one lattice");
    c_sv->add_option("--h-h", sv.h_h, "Horizontal hops")->required()->check(CLI::NonNegativeNumber);
    c_sv->add_option("--h-v", sv.h_v, "Vertical hops")->required()->check(CLI::NonNegativeNumber);
    c_sv->add_option("--h-g", sv.h_g, "Satellite-ground hops")->capture_default_str()->check(CLI::NonNegativeNumber);
    c_sv->add_option("--p", sv.p, "Horizontal link availability")->capture_default_str();
    c_sv->add_option("--q", sv.q, "Vertical link availability")->capture_default_str();
    c_sv->add_option("--r", sv.r, "Satellite-ground link availability")->capture_default_str();
    c_sv->add_option("--mc-samples", sv.mc_samples, "Also estimate by sampling");
    c_sv->add_option("--seed", sv.seed, "Sampling seed")->capture_default_str();

    ComplexityArgs cx;
    auto* c_cx = app.add_subcommand("complexity", "Route-computation cost ratio rho(K, X, S)");
    c_cx->add_option("--K", cx.K, "Relay count")->capture_default_str();
    c_cx->add_option("--X", cx.X, "Mean gateways per relay")->capture_default_str();
    c_cx->add_option("--S", cx.S, "Satellite count")->capture_default_str();

    std::string mc_scenario;
    auto* c_mc = app.add_subcommand("minhop-condition", "Whether the shortest-distance path is also minimum-hop");
    c_mc->add_option("--scenario", mc_scenario, "Scenario file (default: Starlink phase I)");

    std::string hex;
    auto* c_hd = app.add_subcommand("header-dump", "Decode a hex-encoded packet header");
    c_hd->add_option("--hex", hex, "Header bytes as hex")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*c_sim)
            return run_simulate(sim, seed_opt->count() > 0);
        if (*c_sweep)
            return run_sweep(sw);
        if (*c_est)
            return run_estimate(est);
        if (*c_kd)
            return run_knbg_dump(kd);
        if (*c_va)
            return run_validate(va);
        if (*c_sv)
            return run_survival(sv);
        if (*c_cx)
            return run_complexity(cx);
        if (*c_mc)
            return run_minhop_condition(mc_scenario);
        if (*c_hd)
            return run_header_dump(hex);
    } catch (const ValidationFailed&) {
        return kExitValidation;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DecodeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ContractViolation& e) {
        // At this level a broken precondition means an argument out of range.
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
