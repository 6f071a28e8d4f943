#pragma once

#include "random.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace annihilate {

using Site = std::uint32_t;

enum class GraphKind : std::uint8_t
{
    Complete,
    Star,
};

inline const char* to_string(GraphKind kind)
{
    return kind == GraphKind::Complete ? "complete" : "star";
}

/// Complete graph on 2n vertices, or star with 2n leaves (sites 0..2n-1) and
/// the core at site 2n. In both cases the initially occupied sites are 0..2n-1.
class Topology
{
public:
    Topology(GraphKind kind, std::uint32_t n) : kind_{kind}, n_{n}
    {
        if (n == 0)
            throw std::invalid_argument("topology: n must be positive");
        if (n > (1u << 29))
            throw std::invalid_argument("topology: n too large");
    }

    static Topology complete(std::uint32_t n) { return {GraphKind::Complete, n}; }
    static Topology star(std::uint32_t n) { return {GraphKind::Star, n}; }

    GraphKind kind() const noexcept { return kind_; }
    std::uint32_t n() const noexcept { return n_; }
    bool is_star() const noexcept { return kind_ == GraphKind::Star; }

    std::uint32_t site_count() const noexcept { return is_star() ? 2 * n_ + 1 : 2 * n_; }
    std::uint32_t particle_sites() const noexcept { return 2 * n_; }

    Site core() const
    {
        if (!is_star())
            throw std::logic_error("topology: complete graph has no core");
        return 2 * n_;
    }

    bool is_core(Site s) const noexcept { return is_star() && s == 2 * n_; }

    std::uint32_t degree(Site s) const noexcept
    {
        if (!is_star())
            return 2 * n_ - 1;
        return is_core(s) ? 2 * n_ : 1;
    }

    std::vector<Site> neighbors(Site s) const
    {
        std::vector<Site> out;
        if (is_star() && !is_core(s)) {
            out.push_back(2 * n_);
            return out;
        }
        out.reserve(2 * n_);
        for (Site v = 0; v < 2 * n_; ++v)
            if (is_star() || v != s)
                out.push_back(v);
        return out;
    }

    /// One simple-random-walk step from s.
    Site random_neighbor(Site s, Engine& eng) const
    {
        if (is_star()) {
            if (!is_core(s))
                return 2 * n_;
            return uniform_index(eng, 2 * n_);
        }
        Site v = uniform_index(eng, 2 * n_ - 1);
        return v >= s ? v + 1 : v;
    }

    bool operator==(const Topology&) const = default;

private:
    GraphKind kind_;
    std::uint32_t n_;
};

} // namespace annihilate
