#pragma once

#include "leoroute/constellation.hpp"

#include <cstdint>

namespace leoroute {

/// Independent per-link availabilities: inter-orbit p, intra-orbit q, satellite-ground r.
struct LinkAvailability {
    double p = 1.0;
    double q = 1.0;
    double r = 1.0;

    void validate() const;
};

/// One fixed path: p^h_h · q^h_v.
double survival_single(int h_h, int h_v, const LinkAvailability& a);

/// Forwarding toward the larger remaining count, switching when that link is down.
double survival_lsp(int h_h, int h_v, const LinkAvailability& a);

/// Largest h_h + h_v for which survival_ours computes an exact value.
inline constexpr int kSurvivalExactLimit = 12;
/// Up to this many paths the exact value comes from literal inclusion–exclusion.
inline constexpr int kInclusionExclusionPathLimit = 20;

/**
 * Probability that at least one monotone lattice path of h_h horizontal and h_v vertical
 * links survives, times r^h_g. Paths sharing a link share its trial. Throws DomainError
 * beyond kSurvivalExactLimit; use survival_monte_carlo there.
 */
double survival_ours(int h_h, int h_v, int h_g, const LinkAvailability& a);

/// Literal inclusion–exclusion over path edge sets. Exponential in the path count.
double survival_inclusion_exclusion(int h_h, int h_v, const LinkAvailability& a);

struct SurvivalEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Seeded sampling of every lattice link and SGL.
SurvivalEstimate survival_monte_carlo(int h_h, int h_v, int h_g, const LinkAvailability& a,
                                      std::uint64_t samples, std::uint64_t seed);

/// Binomial path count (h_h + h_v choose h_h), saturating at UINT64_MAX.
std::uint64_t lattice_path_count(int h_h, int h_v);

/// ρ = (K·S + K·X(X−1)/2 + S²) / ((K + 0.5)·K·X² + 5.5·K·X).
double complexity_ratio(double K, double X, double S);

struct MinhopEqualityInput {
    int N = 0;
    int M = 0;
    int F = 0;
    double L_v = 0.0;
    double L_hmin = 0.0;
};

struct MinhopEqualityResult {
    int Z = 0;
    int Hv_max = 0;
    int Hh_max = 0;
    bool case1_holds = false; ///< L_hmin > Hv_max/(Hv_max+1)·L_v
    bool case2_holds = false; ///< L_v > Hh_max/(Hh_max+1)·L_hmin
    bool both = false;
};

MinhopEqualityResult minhop_equals_shortest(const MinhopEqualityInput& in);

/// Convenience: lengths taken from link_lengths().
MinhopEqualityResult minhop_equals_shortest(const WalkerDelta& cfg);

} // namespace leoroute
