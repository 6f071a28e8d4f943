#pragma once

#include "comparison_processes.hpp"
#include "dynamics.hpp"
#include "exact_laws.hpp"
#include "experiment.hpp"
#include "parallel.hpp"
#include "stats.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace annihilate {

struct CheckResult
{
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

template <class... Parts>
std::string cat(const Parts&... parts)
{
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
}

inline std::vector<std::uint64_t> law_samples(const GeometricSumLaw& law, std::uint64_t count,
                                              std::uint64_t seed, unsigned jobs)
{
    std::vector<std::uint64_t> out(count);
    parallel_for(count, jobs, [&](std::size_t i) {
        Engine eng{trial_seed(seed, 0xfeed, i)};
        out[i] = sample_law(law, eng);
    });
    return out;
}

} // namespace detail

/// Simulated extinction times against independent draws from the exact law.
/// `system` OneType uses the one-type laws; TwoType runs p = 1.
inline TestVerdict exact_law_equality(SystemKind system, GraphKind graph, std::uint32_t n, std::uint64_t trials,
                                      std::uint64_t seed, double alpha, unsigned jobs = default_jobs(),
                                      CompleteTargets targets = CompleteTargets::OtherSites)
{
    SimulationParams params;
    params.topology = Topology{graph, n};
    params.system = system;
    params.p = system == SystemKind::OneType ? 0.5 : 1.0;
    const auto simulated = extinction_times(params, trials, seed, 0, jobs);
    GeometricSumLaw law;
    if (system == SystemKind::OneType)
        law = graph == GraphKind::Star ? one_type_star_law(n) : one_type_complete_law(n, targets);
    else
        law = two_type_p1_law(graph, n, targets);
    return dkw_equality_test(simulated, detail::law_samples(law, trials, seed, jobs), alpha);
}

struct IdentityTally
{
    std::uint64_t trajectories = 0;
    std::uint64_t identity_violations = 0;
    std::uint64_t below_2n = 0; // star runs with T < 2n
};

/// Runs star trajectories with recorded series and checks the master
/// identity at every step.
inline IdentityTally master_identity_tally(std::uint32_t n, double p, std::uint64_t trials, std::uint64_t seed,
                                           unsigned jobs = default_jobs())
{
    SimulationParams params;
    params.topology = Topology::star(n);
    params.p = p;
    params.record_series = true;
    std::atomic<std::uint64_t> bad{0}, short_runs{0};
    for_each_trial(params, trials, seed, 0, jobs, [&](std::size_t, Trajectory&& tr) {
        if (!verify_master_identity(tr).holds)
            ++bad;
        if (!tr.reached() || *tr.extinction_time < 2ull * n)
            ++short_runs;
    });
    return {trials, bad.load(), short_runs.load()};
}

struct CouplingTally
{
    std::uint64_t trajectories = 0;
    std::uint64_t violations = 0;
    SampleSummary increments_when_positive; // D'_{t+1} - D'_t given D'_t > 0
};

inline CouplingTally coupling_tally(std::uint32_t n, std::uint64_t trials, std::uint64_t seed,
                                    unsigned jobs = default_jobs())
{
    SimulationParams params;
    params.topology = Topology::star(n);
    params.p = 0.5;
    params.record_series = true;
    std::vector<SampleSummary> incs(trials);
    std::vector<std::uint8_t> violated(trials, 0);
    for_each_trial(params, trials, seed, 0, jobs, [&](std::size_t i, Trajectory&& tr) {
        try {
            const auto path = coupled_core_walk(tr);
            const auto& d = path.dprime_series;
            for (std::size_t t = 0; t + 1 < d.size(); ++t)
                if (d[t] > 0)
                    incs[i].add(static_cast<double>(d[t + 1]) - static_cast<double>(d[t]));
        } catch (const CouplingViolation&) {
            violated[i] = 1;
        }
    });
    CouplingTally tally;
    tally.trajectories = trials;
    for (std::size_t i = 0; i < trials; ++i) {
        tally.violations += violated[i];
        tally.increments_when_positive.merge(incs[i]);
    }
    return tally;
}

/// Paired differences M_2n - D_2n / 8 where D_2n comes from the same sign
/// stream that drove the trajectory.
inline SampleSummary m_bound_margin(std::uint32_t n, double p, std::uint64_t trials, std::uint64_t seed,
                                    unsigned jobs = default_jobs())
{
    SimulationParams params;
    params.topology = Topology::star(n);
    params.p = p;
    std::vector<double> diff(trials);
    for_each_trial(params, trials, seed, 0, jobs, [&](std::size_t i, Trajectory&& tr) {
        SignSource signs{tr.seed, p};
        const auto d = displacement_at(2ull * n, signs);
        diff[i] = static_cast<double>(tr.m_at_2n.value()) - static_cast<double>(d) / 8.0;
    });
    return SampleSummary::of(diff);
}

/// Monte Carlo D_t for t steps of the p-biased walk.
inline SampleSummary displacement_summary(std::uint64_t t, double p, std::uint64_t walks, std::uint64_t seed,
                                          unsigned jobs = default_jobs())
{
    std::vector<double> d(walks);
    parallel_for(walks, jobs, [&](std::size_t i) {
        SignSource signs{trial_seed(seed, 0xd15, i), p};
        d[i] = static_cast<double>(displacement_at(t, signs));
    });
    return SampleSummary::of(d);
}

/// Largest even t' <= t where the exact E D_t' exceeds sqrt(t'), or 0.
inline std::uint64_t displacement_sqrt_violation(std::uint64_t t)
{
    long double central = 1.0L;
    long double mean = 1.0L; // t' = 2
    if (mean > std::sqrt(2.0L))
        return 2;
    for (std::uint64_t k = 1; 2 * (k + 1) <= t; ++k) {
        central *= static_cast<long double>(2 * k - 1) / static_cast<long double>(2 * k);
        mean += central;
        if (mean > std::sqrt(static_cast<long double>(2 * (k + 1))))
            return 2 * (k + 1);
    }
    return 0;
}

inline SampleSummary summarize_times(const std::vector<std::uint64_t>& times)
{
    return SampleSummary::of(times);
}

// ---------------------------------------------------------------------------
// The `verify` suite.

struct VerifyScale
{
    std::uint64_t law_trials;
    std::uint64_t path_trials;
    std::uint64_t mean_trials;
    std::uint32_t star_n;
    std::uint32_t complete_n;
    std::uint64_t walks;

    static VerifyScale quick() { return {4000, 200, 1000, 50, 50, 2000}; }
    static VerifyScale full() { return {20000, 1000, 10000, 100, 100, 10000}; }
};

inline std::vector<CheckResult> run_verify_suite(const VerifyScale& sc, std::uint64_t seed, unsigned jobs)
{
    using detail::cat;
    std::vector<CheckResult> out;
    std::uint64_t point = 0;
    auto next_seed = [&] { return trial_seed(seed, 0x5eed, point++); };

    for (auto graph : {GraphKind::Complete, GraphKind::Star}) {
        const auto v = exact_law_equality(SystemKind::OneType, graph, 4, sc.law_trials, next_seed(), 0.01, jobs);
        out.push_back({cat("one-type ", to_string(graph), " n=4 law equality"), v.pass, v.details});
        const auto w = exact_law_equality(SystemKind::TwoType, graph, 4, sc.law_trials, next_seed(), 0.01, jobs);
        out.push_back({cat("two-type p=1 ", to_string(graph), " n=4 law equality"), w.pass, w.details});
    }

    for (double p : {0.5, 0.9}) {
        const auto tally = master_identity_tally(sc.star_n, p, sc.path_trials, next_seed(), jobs);
        out.push_back({cat("master identity star n=", sc.star_n, " p=", p),
                       tally.identity_violations == 0 && tally.below_2n == 0,
                       cat(tally.identity_violations, " violations, ", tally.below_2n, " runs with T<2n in ",
                           tally.trajectories)});
    }

    {
        const auto tally = coupling_tally(sc.star_n, sc.path_trials, next_seed(), jobs);
        out.push_back({cat("core coupling star n=", sc.star_n), tally.violations == 0,
                       cat(tally.violations, " violations in ", tally.trajectories)});
    }

    for (double p : {0.5, 0.75}) {
        SimulationParams params;
        params.topology = Topology::complete(sc.complete_n);
        params.p = p;
        const auto sim = extinction_times(params, sc.mean_trials, next_seed(), 0, jobs);
        const auto p1 = two_type_p1_law(GraphKind::Complete, sc.complete_n, CompleteTargets::OtherSites);
        const auto law = detail::law_samples(p1, sc.mean_trials, next_seed(), jobs);
        const auto v = dominance_check(sim, law, 0.01);
        out.push_back({cat("complete-graph dominance n=", sc.complete_n, " p=", p), v.pass, v.details});
    }

    for (double p : {0.6, 0.75, 0.9}) {
        SimulationParams params;
        params.topology = Topology::star(sc.star_n);
        params.p = p;
        const auto s = summarize_times(extinction_times(params, sc.mean_trials, next_seed(), 0, jobs));
        const double n = sc.star_n;
        const auto v = bound_check(s, (2.0 + (2.0 * p - 1.0) / 2.0) * n - 1.0, 2.0 * n / (1.0 - p));
        out.push_back({cat("universal speed bounds star n=", sc.star_n, " p=", p), v.pass, v.details});
    }

    for (double p : {0.5, 0.8}) {
        const auto s = m_bound_margin(sc.star_n, p, sc.mean_trials, next_seed(), jobs);
        out.push_back({cat("M_2n >= D_2n/8 - 1 star n=", sc.star_n, " p=", p),
                       s.mean() + 3.0 * s.stderr_mean() >= -1.0,
                       cat("mean margin ", s.mean(), " +- ", 3.0 * s.stderr_mean())});
    }

    {
        const std::uint64_t t = 2ull * sc.star_n * 10;
        const double exact = static_cast<double>(displacement_mean_exact(t));
        const auto s = displacement_summary(t, 0.5, sc.walks, next_seed(), jobs);
        const bool ok = std::abs(s.mean() - exact) <= 3.0 * s.stderr_mean() &&
                        displacement_sqrt_violation(t) == 0;
        out.push_back({cat("displacement mean t=", t), ok,
                       cat("exact ", exact, " simulated ", s.mean(), " +- ", 3.0 * s.stderr_mean())});
    }

    {
        SimulationParams params;
        params.topology = Topology::star(sc.star_n);
        params.p = 0.75;
        params.record_series = true;
        const std::uint64_t s = next_seed();
        const bool same = run_trajectory(params, s) == run_trajectory(params, s);
        out.push_back({"determinism", same, same ? "identical trajectories" : "trajectories differ"});
    }
    return out;
}

} // namespace annihilate
