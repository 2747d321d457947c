#include "rfpca/spacings.hpp"

#include "rfpca/parallel.hpp"
#include "rfpca/random.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace rfpca {

double GapEnsemble::evaluate(Index i, double z) const {
    if (polynomial_override) {
        double acc = 0.0;
        const Vector& c = *polynomial_override;
        for (Index k = c.size(); k-- > 0;) acc = acc * z + c(k);
        return acc;
    }
    return coefficients(i) * std::pow(z, degree);
}

void GapEnsemble::validate() const {
    if (degree < 1) throw DomainError("ensemble degree must be >= 1");
    if (!polynomial_override && size() > 0 && !(coefficients.minCoeff() > 0.0)) {
        throw DomainError("ensemble coefficients must be strictly positive");
    }
}

double maxgap_bound(const GapEnsemble& ensemble) {
    if (ensemble.polynomial_override || ensemble.size() == 0) return 0.0;
    const double amin = ensemble.coefficients.minCoeff();
    if (ensemble.degree == 2) return amin / 50.0;
    const double d = ensemble.degree;
    const double logn = std::log(static_cast<double>(ensemble.size()));
    return (d / 50.0) * std::pow(amin, 2.0 / d) * std::pow(logn, 0.5 - 1.0 / d);
}

double median(Vector values) {
    if (values.size() == 0) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const Index m = values.size() / 2;
    return values.size() % 2 ? values(m) : 0.5 * (values(m - 1) + values(m));
}

SpacingTrialStats spacing_trials(const GapEnsemble& ensemble, Index trials, std::uint64_t seed) {
    ensemble.validate();
    if (trials < 1) throw DomainError("spacing_trials needs at least one trial");
    const Index n = ensemble.size();
    if (n < 1) throw DomainError("ensemble must have at least one polynomial");

    SpacingTrialStats out;
    out.n = n;
    out.trials = trials;
    out.bound_value = maxgap_bound(ensemble);
    out.maxgap_samples.resize(trials);
    out.mingap_samples.resize(trials);
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        StreamRng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
        Vector values(n);
        for (Index i = 0; i < n; ++i) values(i) = ensemble.evaluate(i, rng.normal());
        const auto ti = static_cast<Index>(t);
        out.maxgap_samples(ti) = maxgap(values);
        out.mingap_samples(ti) = n >= 2 ? mingap(values) : std::numeric_limits<double>::quiet_NaN();
    });
    const auto hits = (out.maxgap_samples.array() >= out.bound_value).count();
    out.success_frequency = static_cast<double>(hits) / static_cast<double>(trials);
    return out;
}

namespace {

template <typename Eval>
std::vector<GapScalingRow> scaling_table(const std::vector<Index>& n_values, Index trials, std::uint64_t seed,
                                         Eval eval) {
    if (trials < 1) throw DomainError("need at least one trial");
    std::vector<GapScalingRow> rows;
    for (Index n : n_values) {
        if (n < 2) throw DomainError("gap scaling needs n >= 2");
        Vector maxgaps(trials), mingaps(trials);
        parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
            StreamRng rng(derive_seed(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t)}));
            Vector values(n);
            for (Index i = 0; i < n; ++i) values(i) = eval(n, rng.normal());
            maxgaps(static_cast<Index>(t)) = maxgap(values);
            mingaps(static_cast<Index>(t)) = mingap(values);
        });
        rows.push_back({n, trials, median(maxgaps), median(mingaps)});
    }
    return rows;
}

} // namespace

std::vector<GapScalingRow> gaussian_gap_scaling(const std::vector<Index>& n_values, Index trials, std::uint64_t seed) {
    return scaling_table(n_values, trials, seed, [](Index, double z) { return z; });
}

std::vector<GapScalingRow> cubic_counterexample(const std::vector<Index>& n_values, Index trials, std::uint64_t seed) {
    return scaling_table(n_values, trials, seed, [](Index n, double z) {
        const double a2 = 2.0 * std::log(static_cast<double>(n));
        return z * (z * z - a2);
    });
}

std::vector<GapScalingRow> quadratic_control(const std::vector<Index>& n_values, Index trials, std::uint64_t seed) {
    return scaling_table(n_values, trials, seed, [](Index, double z) { return z * z; });
}

double loglog_slope(const std::vector<GapScalingRow>& rows) {
    if (rows.size() < 2) throw DomainError("slope needs at least two rows");
    const auto m = static_cast<Index>(rows.size());
    Vector x(m), y(m);
    for (Index i = 0; i < m; ++i) {
        x(i) = std::log(static_cast<double>(rows[static_cast<std::size_t>(i)].n));
        y(i) = std::log(rows[static_cast<std::size_t>(i)].median_maxgap);
    }
    const double xm = x.mean(), ym = y.mean();
    return ((x.array() - xm) * (y.array() - ym)).sum() / (x.array() - xm).square().sum();
}

RecurrenceResult recurrence_check(double a, double b, Index iterations) {
    if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0)) throw DomainError("recurrence needs a, b in [0, 1]");
    if (!(a <= b * b / 8.0)) throw DomainError("recurrence hypothesis a <= b^2/8 fails");
    if (iterations < 0) throw DomainError("iteration count must be non-negative");
    RecurrenceResult out;
    double y = 0.0;
    out.iterates.reserve(static_cast<std::size_t>(iterations));
    for (Index i = 0; i < iterations; ++i) {
        // b == 0 forces a == 0 and every iterate stays 0
        const double ratio = b > 0.0 ? y / b : 0.0;
        y = (1.0 + y * y) * (a + ratio * ratio);
        out.iterates.push_back(y);
        out.max_y = std::max(out.max_y, y);
        if (!(y <= 2.0 * a)) out.ok = false;
    }
    return out;
}

SpacingTableRow to_table_row(const SpacingTrialStats& stats) {
    SpacingTableRow row;
    row.n = stats.n;
    row.trials = stats.trials;
    row.median_maxgap = median(stats.maxgap_samples);
    row.median_mingap = stats.n >= 2 ? median(stats.mingap_samples) : std::numeric_limits<double>::quiet_NaN();
    row.success_frequency = stats.success_frequency;
    row.bound_value = stats.bound_value;
    return row;
}

SpacingTableRow to_table_row(const GapScalingRow& r) {
    SpacingTableRow row;
    row.n = r.n;
    row.trials = r.trials;
    row.median_maxgap = r.median_maxgap;
    row.median_mingap = r.median_mingap;
    row.success_frequency = std::numeric_limits<double>::quiet_NaN();
    row.bound_value = std::numeric_limits<double>::quiet_NaN();
    return row;
}

void write_spacing_csv(std::ostream& out, const std::vector<SpacingTableRow>& rows) {
    const auto old_precision = out.precision(17);
    out << "n,trials,median_maxgap,median_mingap,success_frequency,bound_value\n";
    for (const auto& r : rows) {
        out << r.n << ',' << r.trials << ',' << r.median_maxgap << ',' << r.median_mingap << ','
            << r.success_frequency << ',' << r.bound_value << '\n';
    }
    out.precision(old_precision);
}

} // namespace rfpca
