#include "validation.hpp"

#include "oracles.hpp"

#include "leoroute/analysis.hpp"
#include "leoroute/knbg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

namespace leoroute::validation {

namespace {

double elapsed(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr std::size_t kMismatchLog = 20;

} // namespace

double HopDistribution::max_bin_gap_pp() const
{
    if (total == 0)
        return 0.0;
    std::map<int, bool> bins;
    for (const auto& [h, c] : estimated)
        bins[h] = true;
    for (const auto& [h, c] : reference)
        bins[h] = true;
    double worst = 0.0;
    for (const auto& [h, unused] : bins) {
        const auto e = estimated.contains(h) ? estimated.at(h) : 0;
        const auto r = reference.contains(h) ? reference.at(h) : 0;
        worst = std::max(worst, 100.0 * std::abs(double(e - r)) / double(total));
    }
    return worst;
}

MinhopReport validate_minhop(const WalkerDelta& cfg, std::int64_t samples, std::uint64_t seed)
{
    const auto t0 = std::chrono::steady_clock::now();
    MinhopReport rep;
    const int S = cfg.satellite_count();
    std::vector<std::vector<int>> bfs(S);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(1, S);
    std::uniform_real_distribution<double> when(0.0, cfg.orbital_period_s());
    // Pairs are spread over a few hundred instants so that every region alignment shows up.
    const std::int64_t per_instant = std::max<std::int64_t>(1, samples / 200);
    RtpgSnapshot snap;
    double t = 0.0;
    for (std::int64_t i = 0; i < samples; ++i) {
        if (i % per_instant == 0) {
            t = when(rng);
            snap = build_rtpg(propagate(cfg, t), cfg);
        }
        const SatelliteId a{pick(rng)};
        SatelliteId b{pick(rng)};
        while (b == a)
            b = SatelliteId{pick(rng)};
        auto& d = bfs[a.slot()];
        if (d.empty())
            d = oracle::isl_bfs(cfg, a);
        const int ref = d[b.slot()];
        const int est = estimate_min_hops(a, b, snap, cfg).h_min;
        ++rep.samples;
        ++rep.distribution.estimated[est];
        ++rep.distribution.reference[ref];
        if (est == ref) {
            ++rep.matches;
            continue;
        }
        if (est < ref)
            ++rep.below_reference;
        if (rep.mismatches.size() < kMismatchLog) {
            std::ostringstream os;
            os << t << ',' << a.value << ',' << b.value << ',' << est << ',' << ref;
            rep.mismatches.push_back(os.str());
        }
    }
    rep.distribution.total = rep.samples;
    rep.seconds = elapsed(t0);
    return rep;
}

RouteReport validate_routes(const WalkerDelta& cfg, int relay_count, double min_elevation,
                            std::int64_t samples, std::uint64_t seed)
{
    const auto t0 = std::chrono::steady_clock::now();
    RouteReport rep;
    rep.relay_count = relay_count;
    const auto relays = reconstructed_relays(relay_count, min_elevation);
    const int S = cfg.satellite_count();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(1, S);
    std::uniform_real_distribution<double> when(0.0, cfg.orbital_period_s());
    const std::int64_t per_instant = std::max<std::int64_t>(1, samples / 20);
    RtpgSnapshot snap;
    KnbgGraph knbg;
    std::vector<std::vector<SatelliteId>> gateways;
    std::map<int, std::vector<int>> dist;
    double t = 0.0;
    for (std::int64_t i = 0; i < samples; ++i) {
        if (i % per_instant == 0) {
            t = when(rng);
            const auto eph = propagate(cfg, t);
            snap = build_rtpg(eph, cfg);
            knbg = build_knbg(snap, relays, cfg);
            gateways = oracle::brute_force_gateways(eph.sats, relays, cfg);
            dist.clear();
        }
        const SatelliteId a{pick(rng)};
        SatelliteId b{pick(rng)};
        while (b == a)
            b = SatelliteId{pick(rng)};
        auto& d = dist[a.value];
        if (d.empty())
            d = oracle::full_graph_bfs(cfg, gateways, a);
        const int ref = d[b.slot()];
        const int est = estimate_route(a, b, knbg, snap, cfg).total_hops();
        ++rep.samples;
        ++rep.distribution.estimated[est];
        ++rep.distribution.reference[ref];
        if (est == ref) {
            ++rep.matches;
        } else if (rep.mismatches.size() < kMismatchLog) {
            std::ostringstream os;
            os << t << ',' << a.value << ',' << b.value << ',' << est << ',' << ref;
            rep.mismatches.push_back(os.str());
        }
    }
    rep.distribution.total = rep.samples;
    rep.seconds = elapsed(t0);
    return rep;
}

KeyNodeReport validate_key_nodes(const WalkerDelta& cfg, int relay_count, double min_elevation,
                                 int instants, std::uint64_t seed)
{
    const auto t0 = std::chrono::steady_clock::now();
    KeyNodeReport rep;
    const auto relays = reconstructed_relays(relay_count, min_elevation);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> when(0.0, cfg.earth_period_s());
    double gateway_total = 0.0;
    const double full = double(relay_count) * cfg.satellite_count();
    for (int i = 0; i < instants; ++i) {
        const auto eph = propagate(cfg, when(rng));
        const auto snap = build_rtpg(eph, cfg);
        const auto scan = extract_key_nodes(snap, relays, cfg);
        auto ref = oracle::brute_force_gateways(eph.sats, relays, cfg);
        for (auto& g : ref)
            std::sort(g.begin(), g.end());
        ++rep.instants;
        rep.exact += scan.gateways == ref;
        rep.comparison_ratio = std::max(rep.comparison_ratio, double(scan.comparisons) / full);
        for (const auto& g : ref)
            gateway_total += double(g.size());
    }
    rep.mean_gateways = instants ? gateway_total / (double(instants) * relay_count) : 0.0;
    rep.seconds = elapsed(t0);
    return rep;
}

bool SurvivalCase::within_3_sigma() const
{
    // A degenerate estimate (all hits or all misses) has zero spread; allow one sample of slack.
    return std::abs(exact - mc_mean) <= 3.0 * std::max(mc_stderr, 1e-9);
}

bool SurvivalReport::pass() const
{
    return closed_form_max_error <= 1e-12 &&
           std::all_of(cases.begin(), cases.end(), [](const SurvivalCase& c) { return c.within_3_sigma(); });
}

SurvivalReport validate_survival(int cases, std::uint64_t mc_samples, std::uint64_t seed)
{
    const auto t0 = std::chrono::steady_clock::now();
    SurvivalReport rep;
    const double grid[] = {0.1, 0.3, 0.5, 0.8, 0.99};
    for (double p : grid)
        for (double q : grid)
            for (double r : grid) {
                const LinkAvailability a{p, q, r};
                const double pq = p * q;
                const double errs[] = {
                    std::abs(survival_single(3, 2, a) - p * p * p * q * q),
                    std::abs(survival_lsp(3, 2, a) - p * p * p * q * q * (2 - pq) * (2 - pq)),
                    std::abs(survival_ours(1, 1, 2, a) - pq * (2 - pq) * r * r),
                };
                for (double e : errs) {
                    ++rep.closed_form_checks;
                    rep.closed_form_max_error = std::max(rep.closed_form_max_error, e);
                }
            }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> prob(0.5, 1.0);
    // Lattices small enough for literal inclusion–exclusion.
    const std::pair<int, int> shapes[] = {{1, 1}, {2, 1}, {1, 2}, {2, 2}, {3, 1}, {1, 3},
                                          {3, 2}, {2, 3}, {3, 3}, {4, 1}, {1, 4}};
    std::uniform_int_distribution<int> shape(0, static_cast<int>(std::size(shapes)) - 1);
    std::uniform_int_distribution<int> ground(0, 1);
    for (int i = 0; i < cases; ++i) {
        SurvivalCase c;
        std::tie(c.h_h, c.h_v) = shapes[shape(rng)];
        c.h_g = 2 * ground(rng);
        c.p = prob(rng);
        c.q = prob(rng);
        c.r = prob(rng);
        c.exact = survival_inclusion_exclusion(c.h_h, c.h_v, {c.p, c.q, c.r}) * std::pow(c.r, c.h_g);
        const auto mc = oracle::survival_monte_carlo(c.h_h, c.h_v, c.h_g, c.p, c.q, c.r, mc_samples, rng());
        c.mc_mean = mc.mean;
        c.mc_stderr = mc.stderr_;
        rep.cases.push_back(c);
    }
    rep.seconds = elapsed(t0);
    return rep;
}

namespace {

void print_distribution(std::ostream& os, const HopDistribution& d)
{
    os << "hops,estimated,reference\n";
    std::map<int, bool> bins;
    for (const auto& [h, c] : d.estimated)
        bins[h] = true;
    for (const auto& [h, c] : d.reference)
        bins[h] = true;
    for (const auto& [h, unused] : bins)
        os << h << ',' << (d.estimated.contains(h) ? d.estimated.at(h) : 0) << ','
           << (d.reference.contains(h) ? d.reference.at(h) : 0) << '\n';
}

} // namespace

void print(std::ostream& os, const MinhopReport& r)
{
    os << "suite,minhop\nsamples," << r.samples << "\nmatches," << r.matches << "\nmatch_rate,"
       << r.match_rate() << "\nbelow_bfs," << r.below_reference << "\nmax_bin_gap_pp,"
       << r.distribution.max_bin_gap_pp() << "\nseconds," << r.seconds << '\n';
    print_distribution(os, r.distribution);
    os << "mismatch_t,src,dst,estimate,bfs\n";
    for (const auto& m : r.mismatches)
        os << m << '\n';
}

void print(std::ostream& os, const RouteReport& r)
{
    os << "suite,knbg\nrelays," << r.relay_count << "\nsamples," << r.samples << "\nmatches,"
       << r.matches << "\nmatch_rate," << r.match_rate() << "\nmax_bin_gap_pp,"
       << r.distribution.max_bin_gap_pp() << "\nseconds," << r.seconds << '\n';
    print_distribution(os, r.distribution);
    os << "mismatch_t,src,dst,estimate,reference\n";
    for (const auto& m : r.mismatches)
        os << m << '\n';
}

void print(std::ostream& os, const KeyNodeReport& r)
{
    os << "suite,key-nodes\ninstants," << r.instants << "\nexact," << r.exact
       << "\nworst_comparison_ratio," << r.comparison_ratio << "\nmean_gateways_per_relay,"
       << r.mean_gateways << "\nseconds," << r.seconds << '\n';
}

void print(std::ostream& os, const SurvivalReport& r)
{
    os << "suite,survival\nclosed_form_checks," << r.closed_form_checks << "\nclosed_form_max_error,"
       << r.closed_form_max_error << "\nseconds," << r.seconds << '\n';
    os << "h_h,h_v,h_g,p,q,r,exact,mc_mean,mc_stderr,within_3_sigma\n";
    for (const auto& c : r.cases)
        os << c.h_h << ',' << c.h_v << ',' << c.h_g << ',' << c.p << ',' << c.q << ',' << c.r << ','
           << c.exact << ',' << c.mc_mean << ',' << c.mc_stderr << ',' << (c.within_3_sigma() ? 1 : 0)
           << '\n';
}

} // namespace leoroute::validation
