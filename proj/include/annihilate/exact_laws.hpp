#pragma once

#include "random.hpp"
#include "topology.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace annihilate {

inline constexpr long double euler_mascheroni = 0.577215664901532860606512090082402431L;

/// scale * sum_i X(probs[i]) with independent geometric X(q) on {1, 2, ...}.
struct GeometricSumLaw
{
    std::vector<double> probs;
    unsigned scale = 1;
    long double exact_mean = 0;
    long double exact_variance = 0;

    static GeometricSumLaw from_probs(std::vector<double> probs, unsigned scale)
    {
        if (scale == 0)
            throw std::invalid_argument("law: scale must be positive");
        GeometricSumLaw law{std::move(probs), scale, 0, 0};
        for (double q : law.probs) {
            if (!(q > 0.0 && q <= 1.0))
                throw std::invalid_argument("law: probabilities must lie in (0, 1]");
            const long double ql = q;
            law.exact_mean += 1.0L / ql;
            law.exact_variance += (1.0L - ql) / (ql * ql);
        }
        law.exact_mean *= scale;
        law.exact_variance *= static_cast<long double>(scale) * scale;
        return law;
    }
};

namespace detail {

inline void require_positive_n(std::uint32_t n)
{
    if (n == 0)
        throw std::invalid_argument("law: n must be positive");
}

// Moments from exact integer ratios q_i = num_i / den_i, so the long double
// sums carry no double rounding from the stored probabilities.
template <class RatioFn>
GeometricSumLaw law_from_ratios(std::uint32_t n, unsigned scale, RatioFn ratio)
{
    GeometricSumLaw law;
    law.scale = scale;
    law.probs.reserve(n);
    for (std::uint32_t i = 1; i <= n; ++i) {
        const auto [num, den] = ratio(i);
        law.probs.push_back(static_cast<double>(num) / static_cast<double>(den));
        const long double inv = static_cast<long double>(den) / static_cast<long double>(num);
        law.exact_mean += inv;
        law.exact_variance += inv * inv - inv;
    }
    law.exact_mean *= scale;
    law.exact_variance *= static_cast<long double>(scale) * scale;
    return law;
}

struct Ratio
{
    std::uint64_t num;
    std::uint64_t den;
};

} // namespace detail

/// q_i written as 1 - (1/2i)((2n - 2i + 1)/2n).
inline double star_q_product_form(std::uint32_t i, std::uint32_t n)
{
    const double frac = static_cast<double>(2ull * n - 2ull * i + 1) /
                        (4.0 * static_cast<double>(n) * static_cast<double>(i));
    return 1.0 - frac;
}

/// q_i written as (2i - 1)(2n + 1) / (4 n i).
inline double star_q_ratio_form(std::uint32_t i, std::uint32_t n)
{
    return static_cast<double>((2ull * i - 1) * (2ull * n + 1)) /
           static_cast<double>(4ull * n * i);
}

/// Distance in units in the last place between two positive finite doubles.
inline std::uint64_t ulp_distance(double a, double b)
{
    const auto ia = std::bit_cast<std::uint64_t>(a);
    const auto ib = std::bit_cast<std::uint64_t>(b);
    return ia > ib ? ia - ib : ib - ia;
}

/// How many destinations a mover on K_2n is counted as having. The closed
/// forms below are usually written with all 2n sites; the walk simulated here
/// never stays put, so its laws use the 2n - 1 other sites.
enum class CompleteTargets
{
    AllSites,
    OtherSites
};

inline std::uint64_t complete_targets(CompleteTargets targets, std::uint32_t n)
{
    return targets == CompleteTargets::AllSites ? 2ull * n : 2ull * n - 1;
}

/// One-type, complete graph: T = sum X((2i - 1) / 2n), or over 2n - 1.
inline GeometricSumLaw one_type_complete_law(std::uint32_t n, CompleteTargets targets = CompleteTargets::AllSites)
{
    detail::require_positive_n(n);
    const std::uint64_t den = complete_targets(targets, n);
    return detail::law_from_ratios(n, 1, [den](std::uint32_t i) {
        return detail::Ratio{2ull * i - 1, den};
    });
}

/// One-type, star: T = 2 sum X(q_i). Both closed forms of q_i are evaluated
/// and must agree to 4 ulp.
inline GeometricSumLaw one_type_star_law(std::uint32_t n)
{
    detail::require_positive_n(n);
    auto law = detail::law_from_ratios(n, 2, [n](std::uint32_t i) {
        return detail::Ratio{(2ull * i - 1) * (2ull * n + 1), 4ull * n * i};
    });
    for (std::uint32_t i = 1; i <= n; ++i)
        if (ulp_distance(law.probs[i - 1], star_q_product_form(i, n)) > 4)
            throw std::logic_error("one_type_star_law: closed forms of q_i disagree");
    return law;
}

/// Two-type with p = 1: sum X(i / 2n) on the complete graph, twice that on
/// the star. `targets` only matters for the complete graph.
inline GeometricSumLaw two_type_p1_law(GraphKind graph, std::uint32_t n,
                                       CompleteTargets targets = CompleteTargets::AllSites)
{
    detail::require_positive_n(n);
    const std::uint64_t den = graph == GraphKind::Star ? 2ull * n : complete_targets(targets, n);
    return detail::law_from_ratios(n, graph == GraphKind::Star ? 2 : 1, [den](std::uint32_t i) {
        return detail::Ratio{i, den};
    });
}

/// Geometric on {1, 2, ...} with success probability p, by inverse CDF.
inline std::uint64_t sample_geometric(double p, Engine& eng)
{
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("sample_geometric: p must lie in (0, 1]");
    if (p == 1.0)
        return 1;
    const double k = std::ceil(std::log(uniform_open01(eng)) / std::log1p(-p));
    if (k >= 0x1.0p63)
        return std::numeric_limits<std::uint64_t>::max() / 4;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(k));
}

inline std::uint64_t sample_law(const GeometricSumLaw& law, Engine& eng)
{
    std::uint64_t sum = 0;
    for (double q : law.probs)
        sum += sample_geometric(q, eng);
    return law.scale * sum;
}

inline long double law_mean(const GeometricSumLaw& law)
{
    return law.exact_mean;
}

/// E|W_t| for the symmetric +-1 walk at even t = 2m:
/// 1 + sum_{k=1}^{m-1} 2^{-2k} binom(2k, k).
inline long double displacement_mean_exact(std::uint64_t t)
{
    if (t == 0 || t % 2 != 0)
        throw std::invalid_argument("displacement_mean_exact: t must be even and positive");
    const std::uint64_t m = t / 2;
    long double central = 1.0L; // 2^{-2k} binom(2k, k)
    long double sum = 1.0L;
    for (std::uint64_t k = 1; k < m; ++k) {
        central *= static_cast<long double>(2 * k - 1) / static_cast<long double>(2 * k);
        sum += central;
    }
    return sum;
}

/// Harmonic number H_m in long double.
inline long double harmonic(std::uint64_t m)
{
    long double h = 0;
    for (std::uint64_t i = m; i >= 1; --i)
        h += 1.0L / static_cast<long double>(i);
    return h;
}

} // namespace annihilate
