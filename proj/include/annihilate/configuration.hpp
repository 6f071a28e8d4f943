#pragma once

#include "random.hpp"
#include "topology.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace annihilate {

enum class SystemKind : std::uint8_t
{
    OneType,
    TwoType,
};

enum class Coloring : std::uint8_t
{
    RandomBalanced,
    Alternating,
};

enum class Color : std::uint8_t
{
    Red = 0,
    Blue = 1,
    None = 2,
};

inline const char* to_string(SystemKind kind)
{
    return kind == SystemKind::OneType ? "one" : "two";
}

inline Color opposite(Color c)
{
    return c == Color::Red ? Color::Blue : Color::Red;
}

/// A registry slot of one color. Slots are reassigned by swap-remove, so a
/// handle is only valid until the next move.
struct ParticleHandle
{
    Color color;
    std::uint32_t slot;
};

struct SiteOccupancy
{
    Color color;
    std::uint32_t count;
};

struct StepOutcome
{
    Site from;
    Site moved_to;
    bool collided;
    bool core_departure_without_collision;
};

struct Placement
{
    Site site;
    Color color;
    std::uint32_t count = 1;
};

// Particle positions per color, with an intrusive doubly-linked list threading
// the particles of each site. Uniform sampling, moves and annihilation are all
// O(1). One-type particles all live in the Blue registry and annihilate on
// contact with anything.
class Configuration
{
public:
    Configuration(Topology topology, SystemKind system, Coloring coloring, Engine& eng)
        : topology_{topology}, system_{system}
    {
        init_storage();
        const std::uint32_t sites = topology_.particle_sites();
        std::vector<Color> colors(sites, Color::Blue);
        if (system_ == SystemKind::TwoType) {
            if (coloring == Coloring::Alternating) {
                for (Site s = 0; s < sites; ++s)
                    colors[s] = (s % 2 == 0) ? Color::Red : Color::Blue;
            } else {
                for (Site s = 0; s < sites / 2; ++s)
                    colors[s] = Color::Red;
                // Fisher-Yates with our own index draws keeps the layout
                // independent of the standard library's shuffle.
                for (std::uint32_t i = sites - 1; i > 0; --i)
                    std::swap(colors[i], colors[uniform_index(eng, i + 1)]);
            }
        }
        for (Site s = 0; s < sites; ++s)
            add_particle(colors[s], s);
    }

    /// Arbitrary placement, for tests and hand traces. Validates invariants.
    static Configuration from_placement(Topology topology, SystemKind system,
                                        std::span<const Placement> placements)
    {
        Configuration cfg{topology, system};
        for (const auto& pl : placements) {
            if (pl.site >= topology.site_count() || pl.color == Color::None)
                throw std::invalid_argument("placement: bad site or color");
            if (system == SystemKind::OneType && pl.color != Color::Blue)
                throw std::invalid_argument("placement: one-type particles are Blue");
            for (std::uint32_t k = 0; k < pl.count; ++k)
                cfg.add_particle(pl.color, pl.site);
        }
        std::string why;
        if (!cfg.check_invariants(&why))
            throw std::invalid_argument("placement: " + why);
        return cfg;
    }

    const Topology& topology() const noexcept { return topology_; }
    SystemKind system() const noexcept { return system_; }

    std::uint32_t count(Color c) const
    {
        return static_cast<std::uint32_t>(registry_[index(c)].size());
    }
    std::uint32_t red_count() const { return count(Color::Red); }
    std::uint32_t blue_count() const { return count(Color::Blue); }
    std::uint32_t total() const { return red_count() + blue_count(); }
    bool empty() const { return total() == 0; }

    SiteOccupancy occupancy(Site s) const { return {sites_[s].color, sites_[s].count}; }

    Site position(ParticleHandle h) const { return registry_[index(h.color)][h.slot].site; }

    /// Current maximum particle count over all sites.
    std::uint32_t max_site_count() const noexcept { return max_count_; }

    /// Handle of some particle of color c at site s (the head of its list).
    ParticleHandle particle_at(Site s, Color c) const
    {
        const auto& st = sites_[s];
        if (st.count == 0 || st.color != c)
            throw std::invalid_argument("particle_at: no such particle");
        return {c, st.head};
    }

    ParticleHandle sample_of_color(Color c, Engine& eng) const
    {
        const auto& reg = registry_[index(c)];
        if (reg.empty())
            throw std::logic_error("sample_mover: no particle of the requested color");
        return {c, uniform_index(eng, static_cast<std::uint32_t>(reg.size()))};
    }

    /// OneType: uniform particle. TwoType: uniform blue with probability p,
    /// otherwise uniform red.
    ParticleHandle sample_mover(double p, Engine& eng) const
    {
        if (empty())
            throw std::logic_error("sample_mover: system is empty");
        if (system_ == SystemKind::OneType)
            return sample_of_color(Color::Blue, eng);
        return sample_of_color(bernoulli(eng, p) ? Color::Blue : Color::Red, eng);
    }

    /// Moves the particle one random-walk step and applies annihilation. On a
    /// collision the removed resident is the head of the destination's list.
    StepOutcome move_and_resolve(ParticleHandle h, Engine& eng)
    {
        const std::size_t ci = index(h.color);
        const Site from = registry_[ci][h.slot].site;
        const Site to = topology_.random_neighbor(from, eng);
        return resolve(h, from, to);
    }

    /// Same as move_and_resolve with a fixed destination (must be a neighbor).
    StepOutcome move_to(ParticleHandle h, Site to)
    {
        const Site from = position(h);
        if (to >= topology_.site_count() || to == from ||
            (topology_.is_star() && topology_.is_core(from) == topology_.is_core(to)))
            throw std::invalid_argument("move_to: destination is not a neighbor");
        return resolve(h, from, to);
    }

    /// Full O(sites + particles) consistency check.
    bool check_invariants(std::string* why = nullptr) const
    {
        auto fail = [why](const char* msg) {
            if (why)
                *why = msg;
            return false;
        };
        std::array<std::uint64_t, 2> per_color{0, 0};
        std::uint32_t observed_max = 0;
        for (Site s = 0; s < sites_.size(); ++s) {
            const auto& st = sites_[s];
            if ((st.count == 0) != (st.color == Color::None))
                return fail("site color/count mismatch");
            if (st.count == 0) {
                if (st.head != kNil)
                    return fail("empty site has a list");
                continue;
            }
            if (system_ == SystemKind::OneType && st.count > 1)
                return fail("one-type site holds more than one particle");
            const auto& reg = registry_[index(st.color)];
            std::uint32_t walked = 0;
            std::uint32_t prev = kNil;
            for (std::uint32_t k = st.head; k != kNil; k = reg[k].next) {
                if (k >= reg.size() || reg[k].site != s || reg[k].prev != prev)
                    return fail("broken site list");
                prev = k;
                if (++walked > reg.size())
                    return fail("cyclic site list");
            }
            if (walked != st.count)
                return fail("site count differs from its list length");
            per_color[index(st.color)] += st.count;
            observed_max = std::max(observed_max, st.count);
        }
        for (std::size_t c = 0; c < 2; ++c)
            if (per_color[c] != registry_[c].size())
                return fail("registry size differs from site totals");
        if (system_ == SystemKind::TwoType && registry_[0].size() != registry_[1].size())
            return fail("red and blue counts differ");
        if (observed_max != max_count_)
            return fail("cached max occupancy is stale");
        return true;
    }

private:
    static constexpr std::uint32_t kNil = std::numeric_limits<std::uint32_t>::max();

    struct SiteState
    {
        Color color = Color::None;
        std::uint32_t count = 0;
        std::uint32_t head = kNil;
    };

    struct Particle
    {
        Site site;
        std::uint32_t prev;
        std::uint32_t next;
    };

    Configuration(Topology topology, SystemKind system) : topology_{topology}, system_{system}
    {
        init_storage();
    }

    static std::size_t index(Color c) { return static_cast<std::size_t>(c); }

    void init_storage()
    {
        sites_.assign(topology_.site_count(), SiteState{});
        hist_.assign(topology_.particle_sites() + 2, 0);
        hist_[0] = topology_.site_count();
        for (auto& reg : registry_)
            reg.reserve(topology_.n());
    }

    void add_particle(Color c, Site s)
    {
        auto& reg = registry_[index(c)];
        reg.push_back(Particle{s, kNil, kNil});
        link(index(c), static_cast<std::uint32_t>(reg.size() - 1), s);
    }

    void bump(std::uint32_t from, std::uint32_t to)
    {
        --hist_[from];
        ++hist_[to];
        if (to > max_count_)
            max_count_ = to;
        while (max_count_ > 0 && hist_[max_count_] == 0)
            --max_count_;
    }

    void link(std::size_t ci, std::uint32_t k, Site s)
    {
        auto& reg = registry_[ci];
        auto& st = sites_[s];
        reg[k].site = s;
        reg[k].prev = kNil;
        reg[k].next = st.head;
        if (st.head != kNil)
            reg[st.head].prev = k;
        st.head = k;
        st.color = static_cast<Color>(ci);
        bump(st.count, st.count + 1);
        ++st.count;
    }

    void unlink(std::size_t ci, std::uint32_t k)
    {
        auto& reg = registry_[ci];
        Particle& q = reg[k];
        auto& st = sites_[q.site];
        if (q.prev != kNil)
            reg[q.prev].next = q.next;
        else
            st.head = q.next;
        if (q.next != kNil)
            reg[q.next].prev = q.prev;
        bump(st.count, st.count - 1);
        if (--st.count == 0)
            st.color = Color::None;
    }

    // Swap-remove of an already unlinked slot.
    void erase_slot(std::size_t ci, std::uint32_t k)
    {
        auto& reg = registry_[ci];
        const auto last = static_cast<std::uint32_t>(reg.size() - 1);
        if (k != last) {
            reg[k] = reg[last];
            Particle& moved = reg[k];
            if (moved.prev != kNil)
                reg[moved.prev].next = k;
            else
                sites_[moved.site].head = k;
            if (moved.next != kNil)
                reg[moved.next].prev = k;
        }
        reg.pop_back();
    }

    StepOutcome resolve(ParticleHandle h, Site from, Site to)
    {
        const std::size_t ci = index(h.color);
        unlink(ci, h.slot);
        const SiteState& dest = sites_[to];
        const bool collided =
            dest.count > 0 && (system_ == SystemKind::OneType || dest.color != h.color);
        if (collided) {
            const std::size_t vi = index(dest.color);
            const std::uint32_t victim = dest.head;
            unlink(vi, victim);
            if (vi == ci) {
                // Same registry: erase the higher slot first so the lower one
                // is not relocated by the swap.
                erase_slot(ci, std::max(victim, h.slot));
                erase_slot(ci, std::min(victim, h.slot));
            } else {
                erase_slot(vi, victim);
                erase_slot(ci, h.slot);
            }
        } else {
            link(ci, h.slot, to);
        }
        return StepOutcome{from, to, collided, topology_.is_core(from) && !collided};
    }

    Topology topology_;
    SystemKind system_;
    std::array<std::vector<Particle>, 2> registry_;
    std::vector<SiteState> sites_;
    std::vector<std::uint32_t> hist_;
    std::uint32_t max_count_ = 0;
};

} // namespace annihilate
