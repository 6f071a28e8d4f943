#pragma once

#include "configuration.hpp"
#include "random.hpp"
#include "topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace annihilate {

struct SimulationParams
{
    Topology topology = Topology::star(1);
    SystemKind system = SystemKind::TwoType;
    double p = 0.5;
    std::optional<std::uint64_t> max_steps; // unset: default_max_steps()
    bool record_series = false;
    Coloring coloring = Coloring::RandomBalanced;

    void validate() const
    {
        if (!(p >= 0.5 && p <= 1.0))
            throw std::invalid_argument("simulation: p must lie in [1/2, 1]");
        if (system == SystemKind::OneType && p != 0.5)
            throw std::invalid_argument("simulation: one-type system requires p = 1/2");
        if (max_steps && *max_steps == 0)
            throw std::invalid_argument("simulation: max_steps must be positive");
    }

    // 10 n (1 + ceil(log 2n))^2 / (1 - p), with 1/(1 - p) read as 2 at p = 1.
    // Sits well above the largest mean bound for either graph.
    std::uint64_t default_max_steps() const
    {
        const double n = topology.n();
        const double lg = 1.0 + std::ceil(std::log(2.0 * n));
        const double speed = p < 1.0 ? 1.0 / (1.0 - p) : 2.0;
        return static_cast<std::uint64_t>(std::ceil(10.0 * n * lg * lg * speed));
    }

    std::uint64_t effective_max_steps() const { return max_steps.value_or(default_max_steps()); }
};

/// What happened on one step, in the terms the star identities need.
enum class StepKind : std::uint8_t
{
    Move,
    Collision,
    LeafToCore,
    LeafToCoreCollision,
    CoreToLeaf,
    CoreToLeafCollision,
};

inline bool departed_core(StepKind k)
{
    return k == StepKind::CoreToLeaf || k == StepKind::CoreToLeafCollision;
}

// Series are indexed by time: a/c/m/occupancy hold t = 0..steps, while
// signs and step kinds hold step t at index t - 1.
struct Trajectory
{
    std::uint64_t seed = 0;
    GraphKind graph = GraphKind::Star;
    SystemKind system = SystemKind::TwoType;
    std::uint32_t n = 0;
    double p = 0.5;

    std::optional<std::uint64_t> extinction_time; // empty: max_steps reached first
    std::uint64_t steps = 0;

    // Summary counters, always kept.
    std::uint64_t final_m = 0;
    std::uint64_t collision_count = 0;
    std::uint32_t max_occupancy = 0;
    std::optional<std::uint32_t> a_at_2n; // star only; T >= 2n makes these total
    std::optional<std::uint64_t> m_at_2n;

    bool has_series = false;
    std::vector<std::uint32_t> a_series;
    std::vector<std::uint32_t> c_series;
    std::vector<std::uint64_t> m_series;
    std::vector<std::uint32_t> occupancy_series;
    std::vector<std::int8_t> sign_series;
    std::vector<StepKind> step_kinds;
    std::vector<std::uint64_t> collision_times;

    bool reached() const noexcept { return extinction_time.has_value(); }

    bool operator==(const Trajectory&) const = default;
};

inline Trajectory run_trajectory(const SimulationParams& params, std::uint64_t seed)
{
    params.validate();
    const Topology& topo = params.topology;
    const bool star = topo.is_star();
    const bool two_type = params.system == SystemKind::TwoType;
    const std::uint64_t max_steps = params.effective_max_steps();
    const std::uint64_t two_n = 2ull * topo.n();

    Engine coloring_eng = make_engine(seed, Stream::Coloring);
    Configuration cfg{topo, params.system, params.coloring, coloring_eng};
    Engine moves = make_engine(seed, Stream::Moves);
    SignSource signs{seed, params.p};

    Trajectory tr;
    tr.seed = seed;
    tr.graph = topo.kind();
    tr.system = params.system;
    tr.n = topo.n();
    tr.p = params.p;
    tr.has_series = params.record_series;
    tr.max_occupancy = cfg.max_site_count();

    const Site core = star ? topo.core() : 0;
    std::uint64_t m = 0;
    auto record = [&](std::uint64_t t) {
        if (star && t == two_n) {
            tr.a_at_2n = cfg.total();
            tr.m_at_2n = m;
        }
        if (!params.record_series)
            return;
        tr.a_series.push_back(cfg.total());
        tr.c_series.push_back(star ? cfg.occupancy(core).count : 0);
        tr.m_series.push_back(m);
        tr.occupancy_series.push_back(cfg.max_site_count());
    };
    record(0);

    std::uint64_t t = 0;
    while (!cfg.empty()) {
        if (t == max_steps)
            break;
        ++t;
        ParticleHandle mover;
        std::int8_t sign = 0;
        if (two_type) {
            sign = static_cast<std::int8_t>(signs.next());
            mover = cfg.sample_of_color(sign > 0 ? Color::Blue : Color::Red, moves);
        } else {
            mover = cfg.sample_of_color(Color::Blue, moves);
        }
        const StepOutcome out = cfg.move_and_resolve(mover, moves);
        if (out.collided)
            ++tr.collision_count;
        if (out.core_departure_without_collision)
            ++m;
        tr.max_occupancy = std::max(tr.max_occupancy, cfg.max_site_count());

        if (params.record_series) {
            StepKind kind;
            if (!star)
                kind = out.collided ? StepKind::Collision : StepKind::Move;
            else if (topo.is_core(out.from))
                kind = out.collided ? StepKind::CoreToLeafCollision : StepKind::CoreToLeaf;
            else
                kind = out.collided ? StepKind::LeafToCoreCollision : StepKind::LeafToCore;
            tr.step_kinds.push_back(kind);
            tr.sign_series.push_back(sign);
            if (out.collided)
                tr.collision_times.push_back(t);
        }
        record(t);
    }

    tr.steps = t;
    tr.final_m = m;
    if (cfg.empty())
        tr.extinction_time = t;
    return tr;
}

struct IdentityReport
{
    bool holds = true;
    std::optional<std::uint64_t> first_violation;
};

/// Checks A_t = 2n - t + C_t + 2 M_t at every recorded step of a star
/// trajectory, and A_t >= 2n - t for t <= 2n.
inline IdentityReport verify_master_identity(const Trajectory& tr)
{
    if (tr.graph != GraphKind::Star)
        throw std::invalid_argument("master identity: star trajectories only");
    if (!tr.has_series)
        throw std::invalid_argument("master identity: trajectory has no recorded series");
    const std::int64_t two_n = 2ll * tr.n;
    const std::size_t len = tr.a_series.size();
    if (tr.c_series.size() != len || tr.m_series.size() != len)
        throw std::invalid_argument("master identity: series lengths differ");
    for (std::size_t t = 0; t < len; ++t) {
        const auto ti = static_cast<std::int64_t>(t);
        const auto a = static_cast<std::int64_t>(tr.a_series[t]);
        const auto rhs = two_n - ti + static_cast<std::int64_t>(tr.c_series[t]) +
                         2 * static_cast<std::int64_t>(tr.m_series[t]);
        if (a != rhs || (ti <= two_n && a < two_n - ti))
            return {false, t};
    }
    return {};
}

inline std::uint32_t max_occupancy(const Trajectory& tr)
{
    return tr.max_occupancy;
}

/// Max occupancy through step min(T, horizon); needs recorded series.
inline std::uint32_t max_occupancy(const Trajectory& tr, std::uint64_t horizon)
{
    if (!tr.has_series)
        throw std::invalid_argument("max_occupancy: trajectory has no recorded series");
    const auto end = std::min<std::uint64_t>(tr.occupancy_series.size(), horizon + 1);
    return *std::max_element(tr.occupancy_series.begin(),
                             tr.occupancy_series.begin() + static_cast<std::ptrdiff_t>(end));
}

} // namespace annihilate
