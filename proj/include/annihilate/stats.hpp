#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace annihilate {

/// Welford accumulator; merge() is Chan's parallel update, so per-thread
/// summaries combine independent of order up to rounding.
class SampleSummary
{
public:
    void add(double x)
    {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
        min_ = std::min(min_, x);
        max_ = std::max(max_, x);
    }

    void merge(const SampleSummary& other)
    {
        if (other.count_ == 0)
            return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(other.count_);
        const double delta = other.mean_ - mean_;
        const double total = na + nb;
        mean_ += delta * nb / total;
        m2_ += other.m2_ + delta * delta * na * nb / total;
        count_ += other.count_;
        min_ = std::min(min_, other.min_);
        max_ = std::max(max_, other.max_);
    }

    template <class Range>
    static SampleSummary of(const Range& values)
    {
        SampleSummary s;
        for (const auto& v : values)
            s.add(static_cast<double>(v));
        return s;
    }

    std::uint64_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }
    /// Unbiased sample variance; 0 for fewer than two samples.
    double variance() const noexcept
    {
        return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
    }
    double stderr_mean() const noexcept
    {
        return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0;
    double m2_ = 0;
    double min_ = std::numeric_limits<double>::infinity();
    double max_ = -std::numeric_limits<double>::infinity();
};

enum class VerdictKind
{
    Equality,
    Dominance,
    BoundCheck,
};

struct TestVerdict
{
    VerdictKind kind;
    double statistic = 0;
    double threshold = 0;
    bool pass = false;
    std::string details;
};

/// Two-sided DKW radius summed over both samples.
inline double dkw_budget(std::size_t m_a, std::size_t m_b, double alpha)
{
    const double l = std::log(2.0 / alpha);
    return std::sqrt(l / (2.0 * static_cast<double>(m_a))) +
           std::sqrt(l / (2.0 * static_cast<double>(m_b)));
}

namespace detail {

template <class T>
void check_samples(const std::vector<T>& a, const std::vector<T>& b, double alpha)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("statistical test: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("statistical test: alpha must lie in (0, 1)");
}

// max over x of (ECDF_a(x) - ECDF_b(x)) and of its negation.
template <class T>
std::pair<double, double> ecdf_gaps(std::vector<T> a, std::vector<T> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double a_over = 0, b_over = 0;
    while (i < a.size() || j < b.size()) {
        T x;
        if (j == b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i];
        else
            x = b[j];
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
        const double gap = static_cast<double>(i) / na - static_cast<double>(j) / nb;
        a_over = std::max(a_over, gap);
        b_over = std::max(b_over, -gap);
    }
    return {a_over, b_over};
}

inline std::string describe(double statistic, double threshold)
{
    std::ostringstream os;
    os << "sup-gap " << statistic << " vs budget " << threshold;
    return os.str();
}

} // namespace detail

/// Passes iff sup |ECDF_a - ECDF_b| is within the DKW budget.
template <class T>
TestVerdict dkw_equality_test(const std::vector<T>& a, const std::vector<T>& b, double alpha)
{
    detail::check_samples(a, b, alpha);
    const auto [ab, ba] = detail::ecdf_gaps(a, b);
    const double stat = std::max(ab, ba);
    const double budget = dkw_budget(a.size(), b.size(), alpha);
    return {VerdictKind::Equality, stat, budget, stat <= budget, detail::describe(stat, budget)};
}

/// Passes iff ECDF_upper(x) <= ECDF_lower(x) + budget for all x, i.e. the
/// data do not contradict `upper` stochastically dominating `lower`.
template <class T>
TestVerdict dominance_check(const std::vector<T>& upper, const std::vector<T>& lower, double alpha)
{
    detail::check_samples(upper, lower, alpha);
    const double stat = detail::ecdf_gaps(upper, lower).first;
    const double budget = dkw_budget(upper.size(), lower.size(), alpha);
    return {VerdictKind::Dominance, stat, budget, stat <= budget, detail::describe(stat, budget)};
}

inline TestVerdict bound_check(const SampleSummary& summary, std::optional<double> lower,
                               std::optional<double> upper, double slack_sigmas = 3.0)
{
    if (summary.count() < 30)
        throw std::invalid_argument("bound_check: need at least 30 samples");
    const double mean = summary.mean();
    const double slack = slack_sigmas * summary.stderr_mean();
    const bool lower_ok = !lower || mean + slack >= *lower;
    const bool upper_ok = !upper || mean - slack <= *upper;
    std::ostringstream os;
    os << "mean " << mean << " +- " << slack;
    if (lower)
        os << ", lower " << *lower;
    if (upper)
        os << ", upper " << *upper;
    const double threshold = !lower_ok ? *lower : (!upper_ok ? *upper : (lower ? *lower : upper.value_or(0)));
    return {VerdictKind::BoundCheck, mean, threshold, lower_ok && upper_ok, os.str()};
}

enum class FitModel
{
    SqrtN,
    SqrtNLogN,
    NLogN,
};

inline const char* to_string(FitModel m)
{
    switch (m) {
    case FitModel::SqrtN: return "sqrt(n)";
    case FitModel::SqrtNLogN: return "sqrt(n)log(n)";
    case FitModel::NLogN: return "n log(n)";
    }
    return "?";
}

inline double regressor(FitModel m, double n)
{
    switch (m) {
    case FitModel::SqrtN: return std::sqrt(n);
    case FitModel::SqrtNLogN: return std::sqrt(n) * std::log(n);
    case FitModel::NLogN: return n * std::log(n);
    }
    return 0;
}

enum class Baseline
{
    Zero,
    TwoN, // star graphs
};

struct FitResult
{
    double coefficient = 0;
    double residual_norm = 0; // ||y - c x|| / ||y||, weighted
};

/// Least-squares fit through the origin of (mean - baseline) against the
/// model regressor, weighted by 1/stderr^2 when stderrs are given.
inline FitResult fit_second_order(const std::vector<double>& n_grid, const std::vector<double>& means,
                                  const std::vector<double>& stderrs, FitModel model, Baseline baseline)
{
    if (n_grid.size() != means.size() || (!stderrs.empty() && stderrs.size() != means.size()))
        throw std::invalid_argument("fit: grid and means differ in length");
    const std::set<double> distinct(n_grid.begin(), n_grid.end());
    if (distinct.size() < 4)
        throw std::invalid_argument("fit: need at least 4 distinct grid points");
    if (*distinct.begin() <= 1.0)
        throw std::invalid_argument("fit: grid points must exceed 1");
    const bool weighted = !stderrs.empty() &&
                          std::all_of(stderrs.begin(), stderrs.end(), [](double s) { return s > 0; });
    double sxy = 0, sxx = 0;
    std::vector<double> xs, ys, ws;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const double x = regressor(model, n_grid[i]);
        const double y = means[i] - (baseline == Baseline::TwoN ? 2.0 * n_grid[i] : 0.0);
        const double w = weighted ? 1.0 / (stderrs[i] * stderrs[i]) : 1.0;
        sxy += w * x * y;
        sxx += w * x * x;
        xs.push_back(x);
        ys.push_back(y);
        ws.push_back(w);
    }
    FitResult fit;
    fit.coefficient = sxy / sxx;
    double rss = 0, yy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - fit.coefficient * xs[i];
        rss += ws[i] * r * r;
        yy += ws[i] * ys[i] * ys[i];
    }
    fit.residual_norm = yy > 0 ? std::sqrt(rss / yy) : 0.0;
    return fit;
}

} // namespace annihilate
