#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace leoroute {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

/// Standard gravitational parameter of the earth, km^3/s^2.
inline constexpr double kEarthMu = 398600.4418;
inline constexpr double kSpeedOfLightKmPerS = 299792.458;

/// Thrown when a configuration (constellation, scenario, relay) is inconsistent.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Geometry input outside an inverse function's domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Region map lost its one-satellite-per-region property.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle to [0, 2π).
inline double wrap_two_pi(double x)
{
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    if (r >= kTwoPi)
        r = 0.0;
    return r;
}

/// Wraps an angle to (−π, π].
inline double wrap_pi(double x)
{
    double r = wrap_two_pi(x);
    return r > kPi ? r - kTwoPi : r;
}

/// Non-negative integer modulus.
constexpr int pos_mod(long long a, int m)
{
    long long r = a % m;
    return static_cast<int>(r < 0 ? r + m : r);
}

/// Shortest distance between two indices on a ring of size n.
constexpr int ring_distance(int a, int b, int n)
{
    int d = pos_mod(static_cast<long long>(a) - b, n);
    return d < n - d ? d : n - d;
}

} // namespace leoroute
