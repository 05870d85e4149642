#include "leoroute/constellation.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace leoroute;

namespace {

WalkerDelta toy() { return WalkerDelta(5, 10, 0, 550.0, deg2rad(53.0)); }

SatelliteId sat(int n, int m, const WalkerDelta& c) { return SatelliteId::from_orbit_index(n, m, c); }

} // namespace

TEST(Constellation, RejectsInvalidConfig)
{
    EXPECT_THROW(WalkerDelta(0, 10, 0, 550, 0.9), ConfigError);
    EXPECT_THROW(WalkerDelta(5, 2, 0, 550, 0.9), ConfigError);
    EXPECT_THROW(WalkerDelta(5, 10, 50, 550, 0.9), ConfigError);
    EXPECT_THROW(WalkerDelta(5, 10, 0, 550, kHalfPi), ConfigError);
    EXPECT_THROW(WalkerDelta(5, 10, 0, -1, 0.9), ConfigError);
}

TEST(Constellation, DerivedConstants)
{
    const auto c = WalkerDelta::starlink_phase1();
    EXPECT_EQ(c.satellite_count(), 1584);
    EXPECT_NEAR(c.delta_omega(), deg2rad(5.0), 1e-15);
    EXPECT_NEAR(c.delta_f(), kTwoPi * 39 / 1584.0, 1e-15);
    EXPECT_NEAR(c.omega_s(), std::sqrt(398600.4418 / std::pow(6921.0, 3)), 1e-18);
}

TEST(Constellation, SatelliteIdBijection)
{
    const auto c = toy();
    std::set<int> seen;
    for (int n = 1; n <= 5; ++n)
        for (int m = 1; m <= 10; ++m) {
            const auto id = sat(n, m, c);
            EXPECT_EQ(id.orbit(c), n);
            EXPECT_EQ(id.index(c), m);
            seen.insert(id.value);
        }
    EXPECT_EQ(seen.size(), 50u);
    EXPECT_EQ(*seen.begin(), 1);
    EXPECT_EQ(*seen.rbegin(), 50);
}

TEST(Constellation, EquatorAndApex)
{
    const auto s0 = satellite_state(0.0, 0.0, deg2rad(53.0));
    EXPECT_DOUBLE_EQ(s0.lat, 0.0);
    EXPECT_TRUE(s0.ascending);
    const auto s1 = satellite_state(kHalfPi, 0.0, deg2rad(53.0));
    EXPECT_NEAR(s1.lat, deg2rad(53.0), 1e-12);
    EXPECT_FALSE(s1.ascending);
    EXPECT_TRUE(satellite_state(-kHalfPi, 0.0, deg2rad(53.0)).ascending);
}

TEST(Constellation, LatitudePhaseIdentity)
{
    const auto c = WalkerDelta::starlink_phase1();
    const auto init = walker_initial_phases(c);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> T(0.0, 2.0e5);
    std::uniform_int_distribution<int> I(0, c.satellite_count() - 1);
    for (int k = 0; k < 100; ++k) {
        const auto eph = propagate(c, init, T(rng));
        for (int j = 0; j < 100; ++j) {
            const auto& s = eph.sats[I(rng)];
            ASSERT_NEAR(std::sin(s.lat), std::sin(c.inclination()) * std::sin(s.phase), 1e-9);
            ASSERT_LE(std::abs(s.lat), c.inclination() + 1e-12);
            ASSERT_GE(s.lon, 0.0);
            ASSERT_LT(s.lon, kTwoPi);
            ASSERT_EQ(s.ascending, s.phase >= -kHalfPi && s.phase < kHalfPi);
        }
    }
}

TEST(Constellation, RigidRotation)
{
    const auto c = WalkerDelta::starlink_phase1();
    const auto e0 = propagate(c, 0.0);
    const double t = 1234.5;
    const auto e1 = propagate(c, t);
    for (int i = 0; i < c.satellite_count(); i += 37)
        EXPECT_NEAR(wrap_pi(e1.sats[i].phase - e0.sats[i].phase - c.omega_s() * t), 0.0, 1e-9);
}

TEST(Constellation, ToyNeighbours)
{
    const auto c = toy();
    const auto nb = isl_neighbors(sat(1, 1, c), c);
    EXPECT_EQ(nb.up, sat(1, 2, c));
    EXPECT_EQ(nb.down, sat(1, 10, c));
    EXPECT_EQ(nb.left, sat(5, 1, c));
    EXPECT_EQ(nb.right, sat(2, 1, c));
}

TEST(Constellation, SeamPartnerKeepsPhaseStep)
{
    const auto c = WalkerDelta::starlink_phase1();
    const auto init = walker_initial_phases(c);
    for (int m = 1; m <= c.per_orbit(); ++m) {
        const auto a = sat(72, m, c);
        const auto b = isl_neighbors(a, c).right;
        EXPECT_EQ(b.orbit(c), 1);
        EXPECT_NEAR(wrap_pi(init.phase[b.slot()] - init.phase[a.slot()] - c.delta_f()), 0.0, 1e-12);
    }
}

TEST(Constellation, IslGraphIsSymmetricFourRegularConnected)
{
    for (const auto& c : {WalkerDelta::starlink_phase1(), toy(), WalkerDelta(3, 3, 1, 500, 0.8)}) {
        std::set<std::pair<int, int>> edges;
        for (int i = 1; i <= c.satellite_count(); ++i) {
            const auto nb = isl_neighbors(SatelliteId{i}, c);
            for (auto p : kAllPorts) {
                const auto j = nb.at(p);
                EXPECT_EQ(isl_neighbors(j, c).at(opposite(p)), SatelliteId{i});
                edges.insert({std::min(i, j.value), std::max(i, j.value)});
            }
        }
        if (c.orbits() >= 3)
            EXPECT_EQ(static_cast<int>(edges.size()), 2 * c.satellite_count());
        const auto d = oracle::isl_bfs(c, SatelliteId{1});
        EXPECT_TRUE(std::none_of(d.begin(), d.end(), [](int x) { return x < 0; }));
    }
}

TEST(Constellation, NeighboursAgreeWithGeometricOracle)
{
    const auto c = WalkerDelta::starlink_phase1();
    const auto d = oracle::isl_bfs(c, SatelliteId{100});
    for (auto p : kAllPorts)
        EXPECT_EQ(d[isl_neighbors(SatelliteId{100}, c).at(p).slot()], 1);
}

TEST(Constellation, ElevationOverheadAndAtCoverageEdge)
{
    const auto c = WalkerDelta::starlink_phase1();
    const double theta = deg2rad(40.0);
    GroundRelay g{1, deg2rad(20.0), deg2rad(30.0), theta};
    SatelliteState s{g.lat, g.lon, 0.0, true};
    EXPECT_NEAR(elevation_angle(g, s, c), kHalfPi, 1e-12);

    const double beta = coverage_angle(theta, c);
    const double gamma = std::asin(6371.0 * std::sin(theta + kHalfPi) / 6921.0);
    EXPECT_NEAR(beta, kHalfPi - theta - gamma, 1e-15);
    // Walk due north by exactly β.
    SatelliteState edge{g.lat + beta, g.lon, 0.0, true};
    EXPECT_NEAR(elevation_angle(g, edge, c), theta, 1e-9);
    SatelliteState beyond{g.lat + beta + 1e-4, g.lon, 0.0, true};
    EXPECT_LT(elevation_angle(g, beyond, c), theta);
    EXPECT_FALSE(is_gateway(g, beyond, c));
}

TEST(Constellation, GatewayByElevationMatchesCentralAngle)
{
    const auto c = WalkerDelta::starlink_phase1();
    const auto relays = reconstructed_relays(25, deg2rad(kDefaultMinElevationDeg));
    const double beta = coverage_angle(relays[0].min_elevation, c);
    const auto eph = propagate(c, 321.0);
    for (const auto& r : relays)
        for (const auto& s : eph.sats) {
            const double psi = central_angle(r.lat, r.lon, s.lat, s.lon);
            if (std::abs(psi - beta) > 1e-9)
                ASSERT_EQ(is_gateway(r, s, c), psi <= beta);
        }
}

TEST(Constellation, ReconstructedRelays)
{
    const auto relays = reconstructed_relays(25, deg2rad(kDefaultMinElevationDeg));
    ASSERT_EQ(relays.size(), 25u);
    double sum = 0;
    for (const auto& r : relays)
        sum += std::abs(rad2deg(r.lat));
    EXPECT_NEAR(sum / 25.0, 28.0, 1.0);
    EXPECT_THROW(reconstructed_relays(26, 0.5), ConfigError);
    GroundRelay bad{1, kHalfPi, 0.0, 0.5};
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Constellation, LinkLengths)
{
    const auto c = WalkerDelta::starlink_phase1();
    const auto L = link_lengths(c);
    EXPECT_NEAR(L.intra_km, 2.0 * std::sin(kPi / 22) * 6921.0, 1e-9);

    // Every inter-orbit ISL is at least L_hmin long.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> T(0.0, 6000.0);
    std::uniform_int_distribution<int> I(1, c.satellite_count());
    for (int k = 0; k < 1000; ++k) {
        const auto eph = propagate(c, T(rng));
        const SatelliteId a{I(rng)};
        const auto b = isl_neighbors(a, c).right;
        const auto& sa = eph.sats[a.slot()];
        const auto& sb = eph.sats[b.slot()];
        const double d = distance_km(to_ecef(sa.lat, sa.lon, c.orbit_radius_km()),
                                     to_ecef(sb.lat, sb.lon, c.orbit_radius_km()));
        ASSERT_GE(d, L.inter_min_km - 1e-6);
    }

    const WalkerDelta polar(72, 22, 39, 550, kHalfPi - 1e-9);
    const double w = kTwoPi / 72;
    EXPECT_NEAR(link_lengths(polar).gamma,
                std::acos(1 - std::pow(std::sin(w), 2) / (1 + std::cos(w))), 1e-7);
}
