#include "leoroute/analysis.hpp"

#include <algorithm>
#include <bitset>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace leoroute {

void LinkAvailability::validate() const
{
    for (double v : {p, q, r})
        if (!(v >= 0.0 && v <= 1.0))
            throw ContractViolation("link availability must lie in [0, 1]");
}

namespace {

void check_hops(int h_h, int h_v)
{
    if (h_h < 0 || h_v < 0)
        throw ContractViolation("hop counts must be non-negative");
}

} // namespace

double survival_single(int h_h, int h_v, const LinkAvailability& a)
{
    check_hops(h_h, h_v);
    a.validate();
    return std::pow(a.p, h_h) * std::pow(a.q, h_v);
}

double survival_lsp(int h_h, int h_v, const LinkAvailability& a)
{
    check_hops(h_h, h_v);
    a.validate();
    const double pair = a.p * a.q * (2.0 - a.p * a.q);
    if (h_h >= h_v)
        return std::pow(a.p, h_h - h_v) * std::pow(pair, h_v);
    return std::pow(a.q, h_v - h_h) * std::pow(pair, h_h);
}

std::uint64_t lattice_path_count(int h_h, int h_v)
{
    check_hops(h_h, h_v);
    const int k = std::min(h_h, h_v);
    const int n = h_h + h_v;
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        const auto f = static_cast<std::uint64_t>(n - k + i);
        if (c > kMax / f)
            return kMax;
        c = c * f / static_cast<std::uint64_t>(i);
    }
    return c;
}

namespace {

// Lattice links: horizontal (x→x+1 on row y) get ids y·h_h + x; vertical (y→y+1 in
// column x) follow after all horizontal ones.
using EdgeSet = std::bitset<512>;

struct PathSets {
    std::vector<EdgeSet> paths;
    int horizontal_links = 0;
};

PathSets enumerate_paths(int h_h, int h_v)
{
    PathSets out;
    out.horizontal_links = h_h * (h_v + 1);
    EdgeSet cur;
    auto rec = [&](auto&& self, int x, int y) -> void {
        if (x == h_h && y == h_v) {
            out.paths.push_back(cur);
            return;
        }
        if (x < h_h) {
            const int e = y * h_h + x;
            cur.set(e);
            self(self, x + 1, y);
            cur.reset(e);
        }
        if (y < h_v) {
            const int e = out.horizontal_links + x * h_v + y;
            cur.set(e);
            self(self, x, y + 1);
            cur.reset(e);
        }
    };
    rec(rec, 0, 0);
    return out;
}

// Exact union probability by sweeping cells row by row and tracking which cells of
// the frontier are reachable from the origin.
double frontier_survival(int h_h, int h_v, double p, double q)
{
    const int W = h_h + 1;
    std::vector<double> prob(std::size_t{1} << W, 0.0), next(prob.size());
    // Row 0: reachable prefix along the bottom row.
    {
        unsigned mask = 1;
        double pr = 1.0;
        for (int x = 1; x < W; ++x) {
            prob[mask] += pr * (1.0 - p);
            pr *= p;
            mask |= 1u << x;
        }
        prob[mask] += pr;
    }
    for (int y = 1; y <= h_v; ++y) {
        // Cell by cell; bits below x already belong to row y, bits from x on to row y−1.
        for (int x = 0; x < W; ++x) {
            std::fill(next.begin(), next.end(), 0.0);
            for (unsigned m = 0; m < prob.size(); ++m) {
                if (prob[m] == 0.0)
                    continue;
                const bool below = m >> x & 1u;
                const bool left = x > 0 && (m >> (x - 1) & 1u);
                const unsigned off = m & ~(1u << x);
                const unsigned on = m | (1u << x);
                // Vertical link from below succeeds with q, horizontal from the left with p.
                const double pv = below ? q : 0.0;
                const double ph = left ? p : 0.0;
                const double reach = 1.0 - (1.0 - pv) * (1.0 - ph);
                next[on] += prob[m] * reach;
                next[off] += prob[m] * (1.0 - reach);
            }
            prob.swap(next);
        }
    }
    double total = 0.0;
    for (unsigned m = 0; m < prob.size(); ++m)
        if (m >> (W - 1) & 1u)
            total += prob[m];
    return total;
}

} // namespace

double survival_inclusion_exclusion(int h_h, int h_v, const LinkAvailability& a)
{
    check_hops(h_h, h_v);
    a.validate();
    if (lattice_path_count(h_h, h_v) > static_cast<std::uint64_t>(kInclusionExclusionPathLimit))
        throw DomainError("inclusion-exclusion limited to " +
                          std::to_string(kInclusionExclusionPathLimit) + " paths");
    const auto sets = enumerate_paths(h_h, h_v);
    EdgeSet horizontal;
    for (int e = 0; e < sets.horizontal_links; ++e)
        horizontal.set(e);
    const int n = static_cast<int>(sets.paths.size());

    // Σ over non-empty path subsets of (−1)^{|J|+1} · Π over the union of their links.
    double total = 0.0;
    auto rec = [&](auto&& self, int next, const EdgeSet& uni, int chosen) -> void {
        for (int i = next; i < n; ++i) {
            const EdgeSet u = uni | sets.paths[i];
            const auto nh = (u & horizontal).count();
            const auto nv = u.count() - nh;
            const double pr = std::pow(a.p, static_cast<double>(nh)) * std::pow(a.q, static_cast<double>(nv));
            total += (chosen % 2 == 0 ? 1.0 : -1.0) * pr;
            self(self, i + 1, u, chosen + 1);
        }
    };
    rec(rec, 0, EdgeSet{}, 0);
    return total;
}

double survival_ours(int h_h, int h_v, int h_g, const LinkAvailability& a)
{
    check_hops(h_h, h_v);
    a.validate();
    if (h_g < 0 || h_g % 2 != 0)
        throw ContractViolation("satellite-ground hop count must be even and non-negative");
    if (h_h + h_v > kSurvivalExactLimit)
        throw DomainError("exact survival limited to h_h + h_v <= " +
                          std::to_string(kSurvivalExactLimit) + "; use survival_monte_carlo");
    double lattice;
    if (lattice_path_count(h_h, h_v) <= static_cast<std::uint64_t>(kInclusionExclusionPathLimit))
        lattice = survival_inclusion_exclusion(h_h, h_v, a);
    else
        lattice = frontier_survival(h_h, h_v, a.p, a.q);
    return std::clamp(lattice, 0.0, 1.0) * std::pow(a.r, h_g);
}

SurvivalEstimate survival_monte_carlo(int h_h, int h_v, int h_g, const LinkAvailability& a,
                                      std::uint64_t samples, std::uint64_t seed)
{
    check_hops(h_h, h_v);
    a.validate();
    if (samples == 0)
        throw ContractViolation("survival_monte_carlo needs at least one sample");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution up_p(a.p), up_q(a.q), up_r(a.r);
    const int W = h_h + 1;
    std::vector<char> reach(W);
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        reach[0] = 1;
        for (int x = 1; x < W; ++x)
            reach[x] = reach[x - 1] && up_p(rng);
        for (int y = 1; y <= h_v; ++y)
            for (int x = 0; x < W; ++x) {
                const bool from_below = reach[x] && up_q(rng);
                const bool from_left = x > 0 && reach[x - 1] && up_p(rng);
                reach[x] = from_below || from_left;
            }
        bool ok = reach[W - 1];
        for (int g = 0; g < h_g && ok; ++g)
            ok = up_r(rng);
        hits += ok;
    }
    const double m = static_cast<double>(hits) / static_cast<double>(samples);
    return {m, std::sqrt(m * (1.0 - m) / static_cast<double>(samples))};
}

double complexity_ratio(double K, double X, double S)
{
    if (K < 1 || X < 1 || S < 1)
        throw ContractViolation("complexity_ratio needs K, X, S >= 1");
    return (K * S + K * X * (X - 1) / 2.0 + S * S) / ((K + 0.5) * K * X * X + 5.5 * K * X);
}

MinhopEqualityResult minhop_equals_shortest(const MinhopEqualityInput& in)
{
    if (in.N < 1 || in.M < 1)
        throw ContractViolation("minhop_equals_shortest needs N, M >= 1");
    MinhopEqualityResult r;
    const int f = pos_mod(in.F, in.M);
    r.Z = f <= in.M / 2 ? f : in.M - f;
    r.Hv_max = std::min(r.Z, in.N / 2 - 1);
    r.Hh_max = std::min(r.Z - 1, in.N / 2);
    r.case1_holds = in.L_hmin > static_cast<double>(r.Hv_max) / (r.Hv_max + 1) * in.L_v;
    r.case2_holds = r.Hh_max < 0 ||
                    in.L_v > static_cast<double>(r.Hh_max) / (r.Hh_max + 1) * in.L_hmin;
    r.both = r.case1_holds && r.case2_holds;
    return r;
}

MinhopEqualityResult minhop_equals_shortest(const WalkerDelta& cfg)
{
    const auto L = link_lengths(cfg);
    return minhop_equals_shortest(MinhopEqualityInput{cfg.orbits(), cfg.per_orbit(), cfg.phasing(), L.intra_km, L.inter_min_km});
}

} // namespace leoroute
