#pragma once

#include "rfpca/models.hpp"
#include "rfpca/types.hpp"

#include <cmath>
#include <string>

namespace rfpca {

/// Frequency vector together with the scale it was drawn at.
struct FourierPoint {
    Vector u;
    double sigma = 1.0;
};

/// Empirical reweighted statistics at a frequency u.
struct WeightedStats {
    Complex mean_weight;  ///< (1/N) sum e^{iu^T x}
    CVector mu_u;         ///< sum w(x) x
    CMatrix sigma_u;      ///< -sum w(x) (x - mu_u)(x - mu_u)^T, symmetrized
    Index n_samples = 0;
};

/// Denominator collapse threshold relative to N.
inline constexpr double kDegenerateWeightFloor = 1e-6;

namespace detail {
/// e^{iu^T x_r} for every row.
template <typename Derived>
CVector phases(const Eigen::MatrixBase<Derived>& data, const Vector& u) {
    if (data.cols() != u.size()) {
        throw DimensionError("frequency has length " + std::to_string(u.size()) + ", data has " +
                             std::to_string(data.cols()) + " columns");
    }
    const Vector angle = data * u;
    CVector e(angle.size());
    for (Index r = 0; r < angle.size(); ++r) e(r) = std::polar(1.0, angle(r));
    return e;
}

inline Complex checked_total(const CVector& e) {
    const Complex total = e.sum();
    if (std::abs(total) < static_cast<double>(e.size()) * kDegenerateWeightFloor) {
        throw DegenerateFrequencyError("Fourier weight denominator collapsed (|mean weight| = " +
                                       std::to_string(std::abs(total) / static_cast<double>(e.size())) + ")");
    }
    return total;
}
} // namespace detail

/// w(x) = e^{iu^T x} / sum_x e^{iu^T x}. Throws DegenerateFrequencyError when
/// |sum| < N * 1e-6.
template <typename Derived>
CVector fourier_weights(const Eigen::MatrixBase<Derived>& data, const Vector& u) {
    CVector e = detail::phases(data, u);
    const Complex total = detail::checked_total(e);
    return e / total;
}

inline CVector fourier_weights(const SampleSet& samples, const Vector& u) {
    return fourier_weights(samples.data(), u);
}

/// Reweighted mean and covariance, the empirical estimate of D^2 psi(u).
template <typename Derived>
WeightedStats reweighted_covariance(const Eigen::MatrixBase<Derived>& data, const Vector& u) {
    const Index count = data.rows();
    if (count < 2) throw DomainError("reweighted covariance needs at least 2 samples");
    CVector e = detail::phases(data, u);
    const Complex total = detail::checked_total(e);
    const CVector w = e / total;

    // The weighted covariance is translation invariant; centering on the
    // sample mean keeps the accumulation well conditioned.
    const Vector center = data.colwise().mean().transpose();
    const Matrix centered = data.rowwise() - center.transpose();
    const Vector wr = w.real();
    const Vector wi = w.imag();
    const Vector mr = centered.transpose() * wr;
    const Vector mi = centered.transpose() * wi;
    const Matrix sr = centered.transpose() * (centered.array().colwise() * wr.array()).matrix();
    const Matrix si = centered.transpose() * (centered.array().colwise() * wi.array()).matrix();

    CVector mu(mr.size());
    mu.real() = mr;
    mu.imag() = mi;
    CMatrix sigma(sr.rows(), sr.cols());
    sigma.real() = -(sr - (mr * mr.transpose() - mi * mi.transpose()));
    sigma.imag() = -(si - (mr * mi.transpose() + mi * mr.transpose()));
    sigma = (0.5 * (sigma + sigma.transpose())).eval();

    WeightedStats out;
    out.mean_weight = total / static_cast<double>(count);
    out.mu_u = mu;
    out.mu_u.real() += center;
    out.sigma_u = std::move(sigma);
    out.n_samples = count;
    return out;
}

inline WeightedStats reweighted_covariance(const SampleSet& samples, const Vector& u) {
    return reweighted_covariance(samples.data(), u);
}

/// Re(sigma_u) only. Same arithmetic as reweighted_covariance(...).sigma_u.real()
/// but skips the imaginary accumulation; used when screening many frequencies.
/// `data` must already be centered.
Matrix real_reweighted_covariance_centered(const Eigen::Ref<const Matrix>& centered, const Vector& u);

/// Closed-form g(t) = d^2/dt^2 log E[e^{its}] for a source.
/// Throws UnsupportedOracleError when the characteristic function vanishes.
Complex source_g(const SourceSpec& spec, double t);

/// A diag(g_i((A^T u)_i)) A^T.
CMatrix analytic_d2psi(const ICAModel& model, const Vector& u);

/// Fourth-order truncation -1 + cum4 t^2 / 2 of g around 0.
double truncated_g(const SourceSpec& spec, double t);

} // namespace rfpca
