#include "rfpca/charfun.hpp"

#include <numbers>

namespace rfpca {

Matrix real_reweighted_covariance_centered(const Eigen::Ref<const Matrix>& centered, const Vector& u) {
    CVector e = detail::phases(centered, u);
    const Complex total = detail::checked_total(e);
    const CVector w = e / total;
    const Vector wr = w.real();
    const Vector mr = centered.transpose() * wr;
    const Vector mi = centered.transpose() * w.imag();
    Matrix sr = centered.transpose() * (centered.array().colwise() * wr.array()).matrix();
    Matrix out = -(sr - (mr * mr.transpose() - mi * mi.transpose()));
    return 0.5 * (out + out.transpose());
}

Complex source_g(const SourceSpec& spec, double t) {
    switch (spec.kind) {
    case SourceKind::gaussian:
        return -1.0;
    case SourceKind::rademacher: {
        const double c = std::cos(t);
        if (std::abs(c) < 1e-300) throw UnsupportedOracleError("characteristic function vanishes at t");
        return -1.0 / (c * c);
    }
    case SourceKind::uniform_symmetric: {
        // psi = log(sin(at)/(at)), psi'' = 1/t^2 - a^2 / sin^2(at)
        const double a = std::numbers::sqrt3;
        const double x = a * t;
        if (std::abs(x) < 1e-3) {
            const double t2 = t * t;
            return -1.0 - 0.6 * t2 - (2.0 / 7.0) * t2 * t2;
        }
        const double s = std::sin(x);
        if (std::abs(s) < 1e-300) throw UnsupportedOracleError("characteristic function vanishes at t");
        return 1.0 / (t * t) - a * a / (s * s);
    }
    case SourceKind::discrete_symmetric: {
        Complex phi = 0.0, d1 = 0.0, d2 = 0.0;
        for (std::size_t k = 0; k < spec.values.size(); ++k) {
            const double v = spec.values[k];
            const Complex e = spec.probs[k] * std::polar(1.0, v * t);
            phi += e;
            d1 += Complex(0.0, v) * e;
            d2 += -v * v * e;
        }
        if (std::abs(phi) < 1e-300) throw UnsupportedOracleError("characteristic function vanishes at t");
        return (d2 * phi - d1 * d1) / (phi * phi);
    }
    }
    throw UnsupportedOracleError("no closed-form oracle for source " + spec.name());
}

CMatrix analytic_d2psi(const ICAModel& model, const Vector& u) {
    if (u.size() != model.dim()) throw DimensionError("frequency length does not match model dimension");
    const Matrix& A = model.mixing();
    const Vector t = A.transpose() * u;
    CVector g(t.size());
    for (Index i = 0; i < t.size(); ++i) g(i) = source_g(model.sources()[static_cast<std::size_t>(i)], t(i));
    const CMatrix Ac = A.cast<Complex>();
    CMatrix out = Ac * g.asDiagonal() * Ac.transpose();
    return 0.5 * (out + out.transpose());
}

double truncated_g(const SourceSpec& spec, double t) {
    return -1.0 + source_moments(spec).cum4 * t * t / 2.0;
}

} // namespace rfpca
