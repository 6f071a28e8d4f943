#pragma once

#include "dynamics.hpp"
#include "exact_laws.hpp"
#include "random.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace annihilate {

// ---------------------------------------------------------------------------
// Biased-walk displacement D_t = |Z_1 + ... + Z_t|.

struct BiasedWalkPath
{
    double p = 0.5;
    std::vector<std::int8_t> signs;   // Z_1..Z_t
    std::vector<std::int64_t> w_series; // W_0..W_t
    std::vector<std::uint64_t> d_series; // D_0..D_t
};

inline void require_speed(double p)
{
    if (!(p >= 0.5 && p <= 1.0))
        throw std::invalid_argument("biased walk: p must lie in [1/2, 1]");
}

inline BiasedWalkPath simulate_biased_walk(std::uint64_t t, SignSource& signs)
{
    require_speed(signs.p());
    BiasedWalkPath path;
    path.p = signs.p();
    path.signs.reserve(t);
    path.w_series.reserve(t + 1);
    path.d_series.reserve(t + 1);
    std::int64_t w = 0;
    path.w_series.push_back(0);
    path.d_series.push_back(0);
    for (std::uint64_t s = 0; s < t; ++s) {
        const int z = signs.next();
        w += z;
        path.signs.push_back(static_cast<std::int8_t>(z));
        path.w_series.push_back(w);
        path.d_series.push_back(static_cast<std::uint64_t>(w < 0 ? -w : w));
    }
    return path;
}

/// The walk driven by the sign stream of the trajectory with this seed, so
/// its first T steps coincide with the trajectory's recorded signs.
inline BiasedWalkPath simulate_biased_walk(std::uint64_t t, double p, std::uint64_t trajectory_seed)
{
    SignSource signs{trajectory_seed, p};
    return simulate_biased_walk(t, signs);
}

/// D_t only, without storing the path.
inline std::uint64_t displacement_at(std::uint64_t t, SignSource& signs)
{
    std::int64_t w = 0;
    for (std::uint64_t s = 0; s < t; ++s)
        w += signs.next();
    return static_cast<std::uint64_t>(w < 0 ? -w : w);
}

// ---------------------------------------------------------------------------
// Core-count coupling: a simple symmetric walk displacement D'_t built from a
// p = 1/2 star trajectory with C_t <= D'_t + 1 pathwise.

struct CoupledWalkPath
{
    std::vector<std::uint64_t> dprime_series; // D'_0..D'_T
};

class CouplingViolation : public std::logic_error
{
public:
    explicit CouplingViolation(std::uint64_t step)
        : std::logic_error("coupling violated at step " + std::to_string(step)), step_{step}
    {
    }
    std::uint64_t step() const noexcept { return step_; }

private:
    std::uint64_t step_;
};

inline CoupledWalkPath coupled_core_walk(const Trajectory& tr, Engine& coin)
{
    if (tr.graph != GraphKind::Star || tr.system != SystemKind::TwoType)
        throw std::invalid_argument("coupling: two-type star trajectories only");
    if (tr.p != 0.5)
        throw std::invalid_argument("coupling: symmetric speeds (p = 1/2) only");
    if (!tr.has_series)
        throw std::invalid_argument("coupling: trajectory has no recorded series");

    const auto& c = tr.c_series;
    CoupledWalkPath out;
    out.dprime_series.reserve(c.size());
    std::uint64_t d = 0;
    out.dprime_series.push_back(d);
    if (c[0] > d + 1)
        throw CouplingViolation(0);
    for (std::size_t t = 0; t + 1 < c.size(); ++t) {
        bool up;
        if (d == 0)
            up = true; // (a)
        else if (c[t] > 0 && c[t + 1] == c[t] + 1)
            up = true; // (b)
        else if (c[t] > 0 && c[t + 1] + 1 == c[t] && departed_core(tr.step_kinds[t]))
            up = true; // (c)
        else if (c[t] == 0)
            up = bernoulli(coin, 0.5); // (d)
        else
            up = false;
        d = up ? d + 1 : d - 1;
        out.dprime_series.push_back(d);
        if (c[t + 1] > d + 1)
            throw CouplingViolation(t + 1);
    }
    return out;
}

inline CoupledWalkPath coupled_core_walk(const Trajectory& tr)
{
    Engine coin = make_engine(tr.seed, Stream::Coupling);
    return coupled_core_walk(tr, coin);
}

// ---------------------------------------------------------------------------
// Lazy coupon collector: each step idles with probability 1/2, otherwise
// draws one of n coupons uniformly.

enum class CollectorMethod
{
    StepByStep,     // Bernoulli(1/2) gate, uniform coupon, bitmap
    GeometricJumps, // waiting time for the next new coupon is X((n - j) / 2n)
};

class LazyCollector
{
public:
    explicit LazyCollector(std::uint64_t n) : seen_(n, 0), uncollected_{n}
    {
        if (n == 0)
            throw std::invalid_argument("collector: n must be positive");
    }

    void step(Engine& eng)
    {
        if (bernoulli(eng, 0.5))
            return;
        const auto k = std::uniform_int_distribution<std::uint64_t>{0, seen_.size() - 1}(eng);
        if (!seen_[k]) {
            seen_[k] = 1;
            --uncollected_;
        }
    }

    std::uint64_t uncollected() const noexcept { return uncollected_; }
    std::uint64_t collected() const noexcept { return seen_.size() - uncollected_; }

private:
    std::vector<std::uint8_t> seen_;
    std::uint64_t uncollected_;
};

/// Steps until `target` distinct coupons are seen; 0 when target == 0.
inline std::uint64_t lazy_steps_to_collect(std::uint64_t n, std::uint64_t target, Engine& eng,
                                           CollectorMethod method = CollectorMethod::GeometricJumps)
{
    if (target > n)
        throw std::invalid_argument("collector: target exceeds n");
    if (target == 0)
        return 0;
    std::uint64_t steps = 0;
    if (method == CollectorMethod::StepByStep) {
        LazyCollector col{n};
        while (col.collected() < target) {
            col.step(eng);
            ++steps;
        }
        return steps;
    }
    const double two_n = 2.0 * static_cast<double>(n);
    for (std::uint64_t j = 0; j < target; ++j)
        steps += sample_geometric(static_cast<double>(n - j) / two_n, eng);
    return steps;
}

/// Coupons still missing after `steps` lazy steps.
inline std::uint64_t lazy_uncollected_after(std::uint64_t n, std::uint64_t steps, Engine& eng,
                                            CollectorMethod method = CollectorMethod::GeometricJumps)
{
    if (method == CollectorMethod::StepByStep) {
        LazyCollector col{n};
        for (std::uint64_t s = 0; s < steps; ++s)
            col.step(eng);
        return col.uncollected();
    }
    if (n == 0)
        throw std::invalid_argument("collector: n must be positive");
    const double two_n = 2.0 * static_cast<double>(n);
    std::uint64_t elapsed = 0;
    std::uint64_t j = 0;
    while (j < n) {
        elapsed += sample_geometric(static_cast<double>(n - j) / two_n, eng);
        if (elapsed > steps)
            break;
        ++j;
    }
    return n - j;
}

struct CouponParams
{
    std::uint64_t n = 1;
    double p = 0.99;
    double epsilon = 0.5;
    double r = 5.0;

    /// t_p = -n log(1 - p).
    double t_p() const { return -static_cast<double>(n) * std::log1p(-p); }

    void validate() const
    {
        if (n == 0)
            throw std::invalid_argument("coupon: n must be positive");
        if (!(p > 0.5 && p < 1.0))
            throw std::invalid_argument("coupon: p must lie in (1/2, 1)");
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("coupon: epsilon must lie in (0, 1)");
    }
};

/// T'_p given the number R of red moves: steps to see n - R coupons.
inline std::uint64_t threshold_time_given(std::uint64_t n, std::int64_t red_moves, Engine& eng,
                                          CollectorMethod method = CollectorMethod::GeometricJumps)
{
    const std::int64_t target = static_cast<std::int64_t>(n) - red_moves;
    if (target <= 0)
        return 0;
    return lazy_steps_to_collect(n, static_cast<std::uint64_t>(target), eng, method);
}

/// R ~ Binomial(floor(4 (1 - eps) t_p), 1 - p), then T'_p.
inline std::uint64_t coupon_collector_threshold(const CouponParams& params, Engine& eng,
                                                CollectorMethod method = CollectorMethod::GeometricJumps)
{
    params.validate();
    const auto trials = static_cast<std::int64_t>(std::floor(4.0 * (1.0 - params.epsilon) * params.t_p()));
    const std::int64_t red_moves = std::binomial_distribution<std::int64_t>{trials, 1.0 - params.p}(eng);
    return threshold_time_given(params.n, red_moves, eng, method);
}

/// V given N: uncollected after N lazy steps, V = n when N <= 0.
inline std::uint64_t uncollected_given(std::uint64_t n, std::int64_t core_departures, Engine& eng,
                                       CollectorMethod method = CollectorMethod::GeometricJumps)
{
    if (core_departures <= 0)
        return n;
    return lazy_uncollected_after(n, static_cast<std::uint64_t>(core_departures), eng, method);
}

/// B ~ Binomial(floor(r t_p), p), N = floor((B - n) / 2), then V.
inline std::uint64_t coupon_uncollected(const CouponParams& params, Engine& eng,
                                        CollectorMethod method = CollectorMethod::GeometricJumps)
{
    params.validate();
    if (!(params.r > 4.0))
        throw std::invalid_argument("coupon: r must exceed 4");
    const auto trials = static_cast<std::int64_t>(std::floor(params.r * params.t_p()));
    const std::int64_t blue_moves = std::binomial_distribution<std::int64_t>{trials, params.p}(eng);
    const std::int64_t excess = blue_moves - static_cast<std::int64_t>(params.n);
    const std::int64_t departures = excess >= 0 ? excess / 2 : -((-excess + 1) / 2);
    return uncollected_given(params.n, departures, eng, method);
}

} // namespace annihilate
