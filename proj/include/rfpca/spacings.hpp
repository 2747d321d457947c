#pragma once

#include "rfpca/types.hpp"

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace rfpca {

/// Largest difference between successive values in sorted order; 0 for a
/// single value.
template <typename Derived>
typename Derived::Scalar maxgap(const Eigen::DenseBase<Derived>& values) {
    using Scalar = typename Derived::Scalar;
    if (values.size() < 1) throw DomainError("maxgap of an empty set");
    VectorT<Scalar> sorted = values.derived().reshaped();
    std::sort(sorted.begin(), sorted.end());
    Scalar best(0);
    for (Index i = 1; i < sorted.size(); ++i) best = std::max(best, Scalar(sorted(i) - sorted(i - 1)));
    return best;
}

/// Smallest difference between successive values in sorted order.
template <typename Derived>
typename Derived::Scalar mingap(const Eigen::DenseBase<Derived>& values) {
    using Scalar = typename Derived::Scalar;
    if (values.size() < 2) throw DomainError("mingap needs at least two values");
    VectorT<Scalar> sorted = values.derived().reshaped();
    std::sort(sorted.begin(), sorted.end());
    Scalar best = sorted(1) - sorted(0);
    for (Index i = 2; i < sorted.size(); ++i) best = std::min(best, Scalar(sorted(i) - sorted(i - 1)));
    return best;
}

inline double maxgap(const std::vector<double>& values) {
    return maxgap(Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())));
}
inline double mingap(const std::vector<double>& values) {
    return mingap(Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())));
}

/// Family p_i(z) = a_i z^d, or a shared polynomial (ascending coefficients)
/// when `polynomial_override` is set.
struct GapEnsemble {
    Vector coefficients;
    int degree = 2;
    std::optional<Vector> polynomial_override;

    Index size() const { return coefficients.size(); }
    double evaluate(Index i, double z) const;
    void validate() const;
};

/// Lower bound on the max gap: min a_i / 50 for d = 2,
/// (d/50) min a_i^{2/d} ln(n)^{1/2 - 1/d} otherwise. 0 for overridden
/// polynomials.
double maxgap_bound(const GapEnsemble& ensemble);

struct SpacingTrialStats {
    Index n = 0;
    Index trials = 0;
    Vector maxgap_samples;
    Vector mingap_samples; ///< NaN when n < 2
    double success_frequency = 0.0;
    double bound_value = 0.0;
};

/// Trial t draws its Gaussians from derive_seed(seed, {t}).
SpacingTrialStats spacing_trials(const GapEnsemble& ensemble, Index trials, std::uint64_t seed);

struct GapScalingRow {
    Index n = 0;
    Index trials = 0;
    double median_maxgap = 0.0;
    double median_mingap = 0.0;
};

/// n i.i.d. N(0,1) points per trial.
std::vector<GapScalingRow> gaussian_gap_scaling(const std::vector<Index>& n_values, Index trials, std::uint64_t seed);

/// p(x) = x (x - a)(x + a), a = sqrt(2 ln n), at n i.i.d. N(0,1) points.
std::vector<GapScalingRow> cubic_counterexample(const std::vector<Index>& n_values, Index trials, std::uint64_t seed);
/// Degree-2 control (a_i = 1) on the same grid.
std::vector<GapScalingRow> quadratic_control(const std::vector<Index>& n_values, Index trials, std::uint64_t seed);

/// Least-squares slope of ln(median_maxgap) against ln(n).
double loglog_slope(const std::vector<GapScalingRow>& rows);

double median(Vector values);

struct RecurrenceResult {
    double max_y = 0.0;
    bool ok = true;
    std::vector<double> iterates; ///< y_1 .. y_iterations
};

/// Iterates y_{i+1} = (1 + y_i^2)(a + (y_i / b)^2) from y_0 = 0 and checks
/// y_i <= 2a. Requires a, b in [0, 1] and a <= b^2 / 8.
RecurrenceResult recurrence_check(double a, double b, Index iterations);

/// Tidy CSV: n,trials,median_maxgap,median_mingap,success_frequency,bound_value
struct SpacingTableRow {
    Index n = 0;
    Index trials = 0;
    double median_maxgap = 0.0;
    double median_mingap = 0.0;
    double success_frequency = 0.0;
    double bound_value = 0.0;
};

SpacingTableRow to_table_row(const SpacingTrialStats& stats);
SpacingTableRow to_table_row(const GapScalingRow& row);
void write_spacing_csv(std::ostream& out, const std::vector<SpacingTableRow>& rows);

} // namespace rfpca
