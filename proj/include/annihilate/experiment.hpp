#pragma once

#include "comparison_processes.hpp"
#include "dynamics.hpp"
#include "exact_laws.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "stats.hpp"

#include "json.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace annihilate {

// ---------------------------------------------------------------------------
// Running many trajectories.

/// Runs `trials` trajectories with seeds trial_seed(base_seed, point_index, i)
/// and hands each to `visit(i, trajectory)`. Results land by trial index, so
/// the outcome does not depend on scheduling.
template <class Visit>
void for_each_trial(const SimulationParams& params, std::uint64_t trials, std::uint64_t base_seed,
                    std::uint64_t point_index, unsigned jobs, Visit&& visit)
{
    params.validate();
    parallel_for(trials, jobs, [&](std::size_t i) {
        visit(i, run_trajectory(params, trial_seed(base_seed, point_index, i)));
    });
}

inline std::vector<Trajectory> run_trials(const SimulationParams& params, std::uint64_t trials,
                                          std::uint64_t base_seed, std::uint64_t point_index = 0,
                                          unsigned jobs = default_jobs())
{
    std::vector<Trajectory> out(trials);
    for_each_trial(params, trials, base_seed, point_index, jobs,
                   [&](std::size_t i, Trajectory&& tr) { out[i] = std::move(tr); });
    return out;
}

/// Extinction times of a batch; throws if any trajectory hit max_steps.
inline std::vector<std::uint64_t> extinction_times(const SimulationParams& params, std::uint64_t trials,
                                                   std::uint64_t base_seed, std::uint64_t point_index = 0,
                                                   unsigned jobs = default_jobs())
{
    std::vector<std::uint64_t> out(trials);
    SimulationParams lean = params;
    lean.record_series = false;
    for_each_trial(lean, trials, base_seed, point_index, jobs, [&](std::size_t i, Trajectory&& tr) {
        if (!tr.reached())
            throw std::runtime_error("trajectory did not reach extinction within max_steps");
        out[i] = *tr.extinction_time;
    });
    return out;
}

// ---------------------------------------------------------------------------
// CSV records.

inline std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string csv_escape(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

/// RFC-4180 line splitter for a single record without embedded newlines.
inline std::vector<std::string> csv_split(std::string_view line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

struct ResultRecord
{
    static constexpr std::string_view header =
        "system,topology,n,p,trials,mean_T,stderr_T,mean_M,mean_maxocc,verdicts,seed,wall_ms";

    std::string system;
    std::string topology;
    std::uint32_t n = 0;
    double p = 0.5;
    std::uint64_t trials = 0;
    double mean_T = 0;
    double stderr_T = 0;
    double mean_M = 0;
    double mean_maxocc = 0;
    std::string verdicts;
    std::uint64_t seed = 0;
    std::uint64_t wall_ms = 0;

    std::string to_csv_row() const
    {
        std::ostringstream os;
        os << csv_escape(system) << ',' << csv_escape(topology) << ',' << n << ',' << format_number(p)
           << ',' << trials << ',' << format_number(mean_T) << ',' << format_number(stderr_T) << ','
           << format_number(mean_M) << ',' << format_number(mean_maxocc) << ',' << csv_escape(verdicts)
           << ',' << seed << ',' << wall_ms;
        return os.str();
    }

    bool all_passed() const { return verdicts.find(":fail") == std::string::npos; }
};

/// Parses a CSV produced by append_records; rejects a foreign header.
inline std::vector<ResultRecord> read_records(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("csv: missing header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != ResultRecord::header)
        throw std::runtime_error("csv: unexpected header");
    std::vector<ResultRecord> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = csv_split(line);
        if (f.size() != 12)
            throw std::runtime_error("csv: expected 12 fields, got " + std::to_string(f.size()));
        ResultRecord r;
        r.system = f[0];
        r.topology = f[1];
        r.n = static_cast<std::uint32_t>(std::stoul(f[2]));
        r.p = std::stod(f[3]);
        r.trials = std::stoull(f[4]);
        r.mean_T = std::stod(f[5]);
        r.stderr_T = std::stod(f[6]);
        r.mean_M = std::stod(f[7]);
        r.mean_maxocc = std::stod(f[8]);
        r.verdicts = f[9];
        r.seed = std::stoull(f[10]);
        r.wall_ms = std::stoull(f[11]);
        out.push_back(std::move(r));
    }
    return out;
}

/// Appends rows, writing the header first when the file is new or empty.
inline void append_records(const std::filesystem::path& path, const std::vector<ResultRecord>& rows)
{
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out{path, std::ios::app | std::ios::binary};
    if (!out)
        throw std::runtime_error("csv: cannot open " + path.string());
    if (fresh)
        out << ResultRecord::header << '\n';
    for (const auto& r : rows)
        out << r.to_csv_row() << '\n';
}

// ---------------------------------------------------------------------------
// One grid point.

namespace detail {

struct TrialSummary
{
    std::optional<std::uint64_t> extinction_time;
    std::uint64_t final_m = 0;
    std::uint32_t max_occupancy = 0;
    std::optional<bool> identity_holds;
};

inline void add_verdict(std::string& list, const std::string& name, bool pass)
{
    if (!list.empty())
        list += ';';
    list += name + (pass ? ":pass" : ":fail");
}

} // namespace detail

/// Per-point checks that apply to the simulated system, as "name:pass|fail"
/// joined by ';'.
inline std::string point_verdicts(const SimulationParams& params, const std::vector<detail::TrialSummary>& trials)
{
    std::string list;
    SampleSummary t_summary;
    std::uint64_t unreached = 0;
    bool star_floor = true;
    std::optional<bool> identity;
    const std::uint32_t n = params.topology.n();
    for (const auto& tr : trials) {
        if (!tr.extinction_time) {
            ++unreached;
            continue;
        }
        t_summary.add(static_cast<double>(*tr.extinction_time));
        if (params.topology.is_star() && *tr.extinction_time < 2ull * n)
            star_floor = false;
        if (tr.identity_holds)
            identity = identity.value_or(true) && *tr.identity_holds;
    }
    detail::add_verdict(list, "reached", unreached == 0);
    if (params.topology.is_star())
        detail::add_verdict(list, "T>=2n", star_floor);
    if (identity)
        detail::add_verdict(list, "master_identity", *identity);
    if (t_summary.count() < 30)
        return list;

    const bool star = params.topology.is_star();
    constexpr auto walk = CompleteTargets::OtherSites;
    if (params.system == SystemKind::OneType) {
        const double mean =
            static_cast<double>(star ? one_type_star_law(n).exact_mean : one_type_complete_law(n, walk).exact_mean);
        detail::add_verdict(list, "exact_mean", bound_check(t_summary, mean, mean).pass);
    } else if (params.p == 1.0) {
        const double mean = static_cast<double>(two_type_p1_law(params.topology.kind(), n, walk).exact_mean);
        detail::add_verdict(list, "p1_exact_mean", bound_check(t_summary, mean, mean).pass);
    } else if (!star) {
        const double lower = static_cast<double>(two_type_p1_law(GraphKind::Complete, n, walk).exact_mean);
        detail::add_verdict(list, "klb_mean", bound_check(t_summary, lower, std::nullopt).pass);
    } else if (params.p > 0.5) {
        const double p = params.p;
        const double lower = (2.0 + (2.0 * p - 1.0) / 2.0) * n - 1.0;
        const double upper = 2.0 * n / (1.0 - p);
        detail::add_verdict(list, "universal_p_bounds", bound_check(t_summary, lower, upper).pass);
    }
    return list;
}

inline ResultRecord run_point(const SimulationParams& params, std::uint64_t trials, std::uint64_t base_seed,
                              std::uint64_t point_index, unsigned jobs)
{
    if (trials == 0)
        throw std::invalid_argument("run_point: trials must be positive");
    const auto start = std::chrono::steady_clock::now();
    std::vector<detail::TrialSummary> summaries(trials);
    for_each_trial(params, trials, base_seed, point_index, jobs, [&](std::size_t i, Trajectory&& tr) {
        auto& s = summaries[i];
        s.extinction_time = tr.extinction_time;
        s.final_m = tr.final_m;
        s.max_occupancy = tr.max_occupancy;
        if (tr.has_series && tr.graph == GraphKind::Star)
            s.identity_holds = verify_master_identity(tr).holds;
    });

    // Sequential reduction in trial order keeps the record bit-identical
    // for any job count.
    SampleSummary t, m, occ;
    for (const auto& s : summaries) {
        if (s.extinction_time)
            t.add(static_cast<double>(*s.extinction_time));
        m.add(static_cast<double>(s.final_m));
        occ.add(static_cast<double>(s.max_occupancy));
    }
    ResultRecord r;
    r.system = to_string(params.system);
    r.topology = to_string(params.topology.kind());
    r.n = params.topology.n();
    r.p = params.p;
    r.trials = trials;
    r.mean_T = t.mean();
    r.stderr_T = t.stderr_mean();
    r.mean_M = m.mean();
    r.mean_maxocc = occ.mean();
    r.verdicts = point_verdicts(params, summaries);
    r.seed = base_seed;
    r.wall_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
    return r;
}

// ---------------------------------------------------------------------------
// Sweeps.

inline SystemKind parse_system(std::string_view s)
{
    if (s == "one")
        return SystemKind::OneType;
    if (s == "two")
        return SystemKind::TwoType;
    throw std::invalid_argument("unknown system '" + std::string(s) + "' (expected one|two)");
}

inline GraphKind parse_graph(std::string_view s)
{
    if (s == "complete")
        return GraphKind::Complete;
    if (s == "star")
        return GraphKind::Star;
    throw std::invalid_argument("unknown graph '" + std::string(s) + "' (expected complete|star)");
}

inline Coloring parse_coloring(std::string_view s)
{
    if (s == "random_balanced")
        return Coloring::RandomBalanced;
    if (s == "alternating")
        return Coloring::Alternating;
    throw std::invalid_argument("unknown coloring '" + std::string(s) + "'");
}

struct ExperimentSpec
{
    SystemKind system = SystemKind::TwoType;
    GraphKind topology = GraphKind::Star;
    std::vector<std::uint32_t> n_grid;
    std::vector<double> p_grid{0.5};
    std::uint64_t trials = 1;
    std::uint64_t base_seed = 0;
    std::string csv_path;
    bool record_series = false;
    Coloring coloring = Coloring::RandomBalanced;
    std::optional<std::uint64_t> max_steps;

    void validate() const
    {
        if (n_grid.empty() || p_grid.empty())
            throw std::invalid_argument("experiment: grids must be nonempty");
        if (trials == 0)
            throw std::invalid_argument("experiment: trials must be at least 1");
        for (auto n : n_grid)
            if (n == 0)
                throw std::invalid_argument("experiment: n must be positive");
        for (double p : p_grid)
            if (!(p >= 0.5 && p <= 1.0))
                throw std::invalid_argument("experiment: p must lie in [1/2, 1]");
    }

    /// Grid points in row order: n outer, p inner. The one-type system has
    /// no speed parameter and contributes a single p = 1/2 point per n.
    std::vector<SimulationParams> points() const
    {
        validate();
        std::vector<SimulationParams> out;
        for (auto n : n_grid) {
            const std::vector<double> ps = system == SystemKind::OneType ? std::vector<double>{0.5} : p_grid;
            for (double p : ps) {
                SimulationParams sp;
                sp.topology = Topology{topology, n};
                sp.system = system;
                sp.p = p;
                sp.max_steps = max_steps;
                sp.record_series = record_series;
                sp.coloring = coloring;
                out.push_back(sp);
            }
        }
        return out;
    }

    static ExperimentSpec from_json(const nlohmann::json& j)
    {
        ExperimentSpec s;
        s.system = parse_system(j.at("system").get<std::string>());
        s.topology = parse_graph(j.at("topology").get<std::string>());
        s.n_grid = j.at("n_grid").get<std::vector<std::uint32_t>>();
        if (j.contains("p_grid"))
            s.p_grid = j.at("p_grid").get<std::vector<double>>();
        s.trials = j.at("trials").get<std::uint64_t>();
        s.base_seed = j.value("base_seed", std::uint64_t{0});
        if (j.contains("outputs"))
            s.csv_path = j.at("outputs").value("csv", std::string{});
        s.record_series = j.value("record_series", false);
        if (j.contains("coloring"))
            s.coloring = parse_coloring(j.at("coloring").get<std::string>());
        if (j.contains("max_steps") && !j.at("max_steps").is_null())
            s.max_steps = j.at("max_steps").get<std::uint64_t>();
        s.validate();
        return s;
    }
};

/// Runs every grid point in order; rows are ordered by point index.
inline std::vector<ResultRecord> run_sweep(const ExperimentSpec& spec, unsigned jobs)
{
    std::vector<ResultRecord> rows;
    const auto points = spec.points();
    for (std::size_t i = 0; i < points.size(); ++i)
        rows.push_back(run_point(points[i], spec.trials, spec.base_seed, i, jobs));
    return rows;
}

} // namespace annihilate
