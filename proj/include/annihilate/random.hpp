#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace annihilate {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent random streams owned by one trajectory. Keeping the color-sign
// draws on their own stream lets comparison processes regenerate Z_1, Z_2, ...
// from the trajectory seed alone, including past extinction.
enum class Stream : std::uint64_t
{
    Coloring = 0,
    Moves = 1,
    Signs = 2,
    Coupling = 3,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream) noexcept
{
    return splitmix64(seed ^ splitmix64(0xa11a5eedULL + static_cast<std::uint64_t>(stream)));
}

// Per-trial seed of a sweep: base_seed XOR hash(point_index, trial_index).
// Part of the reproducibility contract; do not change.
constexpr std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t point_index,
                                   std::uint64_t trial_index) noexcept
{
    return base_seed ^ splitmix64(splitmix64(point_index) + trial_index);
}

inline Engine make_engine(std::uint64_t seed, Stream stream)
{
    return Engine{derive_seed(seed, stream)};
}

/// Uniform on the open interval (0, 1), 53 bits.
inline double uniform_open01(Engine& eng)
{
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// True with probability p. p >= 1 is always true, p <= 0 always false.
inline bool bernoulli(Engine& eng, double p)
{
    return static_cast<double>(eng() >> 11) * 0x1.0p-53 < p;
}

inline std::uint32_t uniform_index(Engine& eng, std::uint32_t size)
{
    return std::uniform_int_distribution<std::uint32_t>{0, size - 1}(eng);
}

/// The i.i.d. color-sampling signs: +1 (blue) with probability p, else -1 (red).
class SignSource
{
public:
    SignSource(std::uint64_t trajectory_seed, double p)
        : eng_{make_engine(trajectory_seed, Stream::Signs)}, p_{p}
    {
    }

    int next() { return bernoulli(eng_, p_) ? 1 : -1; }

    double p() const noexcept { return p_; }

private:
    Engine eng_;
    double p_;
};

} // namespace annihilate
