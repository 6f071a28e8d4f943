#pragma once

#include "exact_laws.hpp"
#include "experiment.hpp"
#include "parallel.hpp"
#include "stats.hpp"
#include "verification.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace annihilate {

namespace detail {

inline int cmd_simulate(const SimulationParams& params, std::uint64_t trials, std::uint64_t seed,
                        const std::string& csv, unsigned jobs, std::ostream& out)
{
    const ResultRecord r = run_point(params, trials, seed, 0, jobs);
    out << std::setprecision(10);
    out << "system " << r.system << " graph " << r.topology << " n " << r.n << " p " << r.p << " trials "
        << r.trials << '\n';
    out << "mean_T " << r.mean_T << " stderr_T " << r.stderr_T << '\n';
    out << "mean_M " << r.mean_M << " mean_maxocc " << r.mean_maxocc << '\n';
    out << "verdicts " << r.verdicts << '\n';
    if (!csv.empty())
        append_records(csv, {r});
    return 0;
}

inline GeometricSumLaw law_by_name(const std::string& name, std::uint32_t n, CompleteTargets targets)
{
    if (name == "k1")
        return one_type_complete_law(n, targets);
    if (name == "s1")
        return one_type_star_law(n);
    if (name == "kp1")
        return two_type_p1_law(GraphKind::Complete, n, targets);
    return two_type_p1_law(GraphKind::Star, n);
}

inline int cmd_exact(const std::string& name, std::uint32_t n, CompleteTargets targets, std::uint64_t samples,
                     std::uint64_t seed, unsigned jobs, std::ostream& out)
{
    const auto law = law_by_name(name, n, targets);
    out << std::setprecision(16);
    out << "law " << name << " n " << n << " scale " << law.scale << '\n';
    out << "probs ";
    for (std::size_t i = 0; i < law.probs.size(); ++i)
        out << (i ? "," : "") << format_number(law.probs[i]);
    out << '\n';
    out << "mean " << static_cast<double>(law.exact_mean) << '\n';
    out << "variance " << static_cast<double>(law.exact_variance) << '\n';
    if (samples > 0) {
        const auto s = SampleSummary::of(law_samples(law, samples, seed, jobs));
        out << "sample_mean " << s.mean() << " stderr " << s.stderr_mean() << " samples " << s.count() << '\n';
    }
    return 0;
}

inline int cmd_sweep(const std::string& config, const std::string& csv_override,
                     std::optional<std::uint64_t> trials, std::optional<std::uint64_t> seed, unsigned jobs,
                     std::ostream& out, std::ostream& err)
{
    std::ifstream in{config};
    if (!in) {
        err << "sweep: cannot read " << config << '\n';
        return 2;
    }
    ExperimentSpec spec;
    try {
        spec = ExperimentSpec::from_json(nlohmann::json::parse(in));
    } catch (const std::exception& e) {
        err << "sweep: bad config: " << e.what() << '\n';
        return 2;
    }
    if (!csv_override.empty())
        spec.csv_path = csv_override;
    if (trials)
        spec.trials = *trials;
    if (seed)
        spec.base_seed = *seed;
    if (spec.csv_path.empty()) {
        err << "sweep: no output csv (set outputs.csv or --csv)\n";
        return 2;
    }
    const auto points = spec.points();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = run_point(points[i], spec.trials, spec.base_seed, i, jobs);
        append_records(spec.csv_path, {row});
        out << row.to_csv_row() << '\n';
    }
    return 0;
}

inline int cmd_verify(bool quick, std::uint64_t seed, unsigned jobs, std::ostream& out)
{
    const auto results = run_verify_suite(quick ? VerifyScale::quick() : VerifyScale::full(), seed, jobs);
    bool all = true;
    for (const auto& r : results) {
        out << (r.pass ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
        all = all && r.pass;
    }
    out << (all ? "all checks passed\n" : "some checks FAILED\n");
    return all ? 0 : 1;
}

inline int cmd_fit(const std::string& csv, std::ostream& out, std::ostream& err)
{
    std::ifstream in{csv};
    if (!in) {
        err << "fit: cannot read " << csv << '\n';
        return 2;
    }
    std::vector<ResultRecord> rows;
    try {
        rows = read_records(in);
    } catch (const std::exception& e) {
        err << "fit: " << e.what() << '\n';
        return 2;
    }
    std::map<std::tuple<std::string, std::string, double>, std::vector<const ResultRecord*>> groups;
    for (const auto& r : rows)
        groups[{r.system, r.topology, r.p}].push_back(&r);
    int fitted = 0;
    out << std::setprecision(8);
    for (const auto& [key, members] : groups) {
        std::vector<double> ns, means, ses;
        for (const auto* r : members) {
            ns.push_back(r->n);
            means.push_back(r->mean_T);
            ses.push_back(r->stderr_T);
        }
        const auto& [system, topology, p] = key;
        const Baseline base = topology == "star" ? Baseline::TwoN : Baseline::Zero;
        for (auto model : {FitModel::SqrtN, FitModel::SqrtNLogN, FitModel::NLogN}) {
            try {
                const auto f = fit_second_order(ns, means, ses, model, base);
                out << system << ' ' << topology << " p " << p << " model " << to_string(model)
                    << " coefficient " << f.coefficient << " residual " << f.residual_norm << '\n';
                ++fitted;
            } catch (const std::invalid_argument& e) {
                out << system << ' ' << topology << " p " << p << " skipped: " << e.what() << '\n';
                break;
            }
        }
    }
    if (fitted == 0) {
        err << "fit: no group with at least 4 distinct n\n";
        return 2;
    }
    return 0;
}

} // namespace detail

/// Entry point of the command-line tool. Exit codes: 0 success, 1 failed
/// verification or runtime error, 2 usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Annihilating random walks on complete and star graphs"};
    app.require_subcommand(1);
    unsigned jobs = default_jobs();
    app.add_option("--jobs", jobs, "worker threads (default: ANNIHILATE_JOBS or logical cores)")
        ->check(CLI::PositiveNumber);

    auto* simulate = app.add_subcommand("simulate", "run one parameter point");
    std::string system = "two", graph = "star", csv, coloring = "random_balanced";
    std::uint32_t n = 0;
    double p = 0.5;
    std::uint64_t trials = 1, seed = 0, max_steps = 0;
    bool record_series = false;
    simulate->add_option("--system", system)->check(CLI::IsMember({"one", "two"}));
    simulate->add_option("--graph", graph)->check(CLI::IsMember({"complete", "star"}));
    simulate->add_option("--n", n)->required()->check(CLI::PositiveNumber);
    auto* p_opt = simulate->add_option("--p", p)->check(CLI::Range(0.5, 1.0));
    simulate->add_option("--trials", trials)->check(CLI::PositiveNumber);
    simulate->add_option("--seed", seed);
    simulate->add_option("--max-steps", max_steps)->check(CLI::PositiveNumber);
    simulate->add_flag("--record-series", record_series);
    simulate->add_option("--coloring", coloring)->check(CLI::IsMember({"random_balanced", "alternating"}));
    simulate->add_option("--csv", csv, "append a result row to this CSV");

    auto* exact = app.add_subcommand("exact", "print an exact geometric-sum law");
    std::string law = "k1";
    std::uint32_t law_n = 0;
    std::uint64_t samples = 0, law_seed = 0;
    exact->add_option("--law", law)->required()->check(CLI::IsMember({"k1", "s1", "kp1", "sp1"}));
    exact->add_option("--n", law_n)->required()->check(CLI::PositiveNumber);
    exact->add_option("--samples", samples);
    exact->add_option("--seed", law_seed);
    bool other_sites = false;
    exact->add_flag("--other-sites", other_sites, "complete-graph laws over 2n-1 destinations (the simulated walk)");

    auto* sweep = app.add_subcommand("sweep", "run a grid from a JSON config");
    std::string config, sweep_csv;
    std::optional<std::uint64_t> sweep_trials, sweep_seed;
    sweep->add_option("--config", config)->required();
    sweep->add_option("--csv", sweep_csv, "overrides outputs.csv");
    sweep->add_option("--trials", sweep_trials)->check(CLI::PositiveNumber);
    sweep->add_option("--seed", sweep_seed);

    auto* verify = app.add_subcommand("verify", "run the invariant and lemma checks");
    bool quick = false;
    std::uint64_t verify_seed = 20240601;
    verify->add_flag("--quick", quick);
    verify->add_option("--seed", verify_seed);

    auto* fit = app.add_subcommand("fit", "fit second-order terms to a sweep CSV");
    std::string fit_csv;
    fit->add_option("csv", fit_csv)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate) {
            if (system == "one" && p_opt->count() > 0 && p != 0.5) {
                err << "simulate: --p is meaningless for the one-type system\n";
                return 2;
            }
            SimulationParams params;
            params.topology = Topology{parse_graph(graph), n};
            params.system = parse_system(system);
            params.p = params.system == SystemKind::OneType ? 0.5 : p;
            if (max_steps > 0)
                params.max_steps = max_steps;
            params.record_series = record_series;
            params.coloring = parse_coloring(coloring);
            return detail::cmd_simulate(params, trials, seed, csv, jobs, out);
        }
        if (*exact)
            return detail::cmd_exact(law, law_n, other_sites ? CompleteTargets::OtherSites : CompleteTargets::AllSites, samples, law_seed, jobs, out);
        if (*sweep)
            return detail::cmd_sweep(config, sweep_csv, sweep_trials, sweep_seed, jobs, out, err);
        if (*verify)
            return detail::cmd_verify(quick, verify_seed, jobs, out);
        if (*fit)
            return detail::cmd_fit(fit_csv, out, err);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace annihilate
