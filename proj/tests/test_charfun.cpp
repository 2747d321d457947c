#include "rfpca/charfun.hpp"
#include "rfpca/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rfpca;

namespace {

double spectral_norm(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); }

ICAModel rademacher_identity(Index n) { return ICAModel(Matrix::Identity(n, n), std::vector<SourceSpec>(n, SourceSpec::rademacher())); }

// Second derivative of log phi by central differences; phi given directly.
template <typename Phi>
double fd_second_log(Phi phi, double t, double h = 1e-4) {
    return (std::log(phi(t + h)) - 2.0 * std::log(phi(t)) + std::log(phi(t - h))) / (h * h);
}

} // namespace

TEST_CASE("fourier_weights examples") {
    RowMatrix x(3, 2);
    x << 1, 2, -0.5, 4, 3, 3;
    const CVector w0 = fourier_weights(x, Vector::Zero(2));
    for (Index i = 0; i < 3; ++i) CHECK(std::abs(w0(i) - Complex(1.0 / 3.0, 0.0)) < 1e-15);

    RowMatrix pair(2, 1);
    pair << 0.0, std::numbers::pi;
    Vector u(1);
    u << 1.0;
    CHECK_THROWS_AS(fourier_weights(pair, u), DegenerateFrequencyError);

    pair << 0.0, std::numbers::pi / 2;
    const CVector w = fourier_weights(pair, u);
    const Complex i(0.0, 1.0);
    CHECK(std::abs(w(0) - 1.0 / (1.0 + i)) < 1e-15);
    CHECK(std::abs(w(1) - i / (1.0 + i)) < 1e-15);

    CHECK_THROWS_AS(fourier_weights(pair, Vector::Zero(2)), DimensionError);
}

TEST_CASE("fourier weights sum to one") {
    const SampleSet s = sample(rademacher_identity(4), 20000, 5);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        StreamRng rng(seed);
        const CVector w = fourier_weights(s, gaussian_vector(rng, 4, 0.7));
        CHECK(std::abs(w.sum() - 1.0) < 1e-10);
    }
}

TEST_CASE("reweighted covariance at u = 0 is minus the sample covariance") {
    const ICAModel model(random_mixing(3, MixingKind::orthogonal(), 1), std::vector<SourceSpec>(3, SourceSpec::uniform_symmetric()));
    const SampleSet s = sample(model, 100000, 2);
    const WeightedStats st = reweighted_covariance(s, Vector::Zero(3));
    CHECK(spectral_norm(st.sigma_u.real() + Matrix::Identity(3, 3)) < 0.03);
    CHECK(st.sigma_u.imag().norm() < 1e-12);
    CHECK((st.mu_u.real() - s.data().colwise().mean().transpose()).norm() < 1e-12);
    CHECK(std::abs(st.mean_weight - 1.0) < 1e-12);
}

TEST_CASE("one-dimensional Rademacher matches -sec^2 t") {
    const SampleSet s = sample(rademacher_identity(1), 1000000, 17);
    Vector u(1);
    u << 0.3;
    const WeightedStats st = reweighted_covariance(s, u);
    const double exact = -1.0 / std::pow(std::cos(0.3), 2);
    CHECK(exact == doctest::Approx(-1.09569).epsilon(1e-5));
    CHECK(std::abs(st.sigma_u(0, 0).real() - exact) < 0.02);
    CHECK(std::abs(st.mean_weight) <= 1.0 + 1e-12);
}

TEST_CASE("independent coordinates give a diagonal estimate") {
    const SampleSet s = sample(rademacher_identity(2), 1000000, 3);
    Vector u(2);
    u << 0.2, 0.4;
    const WeightedStats st = reweighted_covariance(s, u);
    CHECK(std::abs(st.sigma_u(0, 1)) < 0.02);
    CHECK((st.sigma_u - st.sigma_u.transpose()).norm() <= 1e-10 * st.sigma_u.norm());
}

TEST_CASE("real-only fast path agrees with the full estimator") {
    const ICAModel model(random_mixing(4, MixingKind::orthogonal(), 3), std::vector<SourceSpec>(4, SourceSpec::rademacher()));
    const SampleSet s = sample(model, 5000, 1);
    const Matrix centered = s.data().rowwise() - s.data().colwise().mean();
    StreamRng rng(8);
    const Vector u = gaussian_vector(rng, 4, 0.5);
    CHECK((real_reweighted_covariance_centered(centered, u) - reweighted_covariance(s, u).sigma_u.real()).norm() < 1e-10);
}

TEST_CASE("analytic_d2psi closed forms") {
    const Matrix Q = random_mixing(5, MixingKind::orthogonal(), 12);
    const ICAModel gauss(Q, std::vector<SourceSpec>(5, SourceSpec::gaussian()), true);
    StreamRng rng(4);
    const CMatrix g = analytic_d2psi(gauss, gaussian_vector(rng, 5));
    CHECK((g + CMatrix::Identity(5, 5)).norm() < 1e-12);

    const double t = 0.37;
    Vector u = Vector::Zero(3);
    u(0) = t;
    const CMatrix r = analytic_d2psi(rademacher_identity(3), u);
    CHECK(std::abs(r(0, 0) - Complex(-1.0 / std::pow(std::cos(t), 2))) < 1e-14);
    CHECK(std::abs(r(1, 1) + 1.0) < 1e-14);
    CHECK(std::abs(r(0, 1)) < 1e-14);

    CHECK(std::abs(source_g(SourceSpec::uniform_symmetric(), 0.0) + 1.0) < 1e-14);
    CHECK(std::abs(source_g(SourceSpec::uniform_symmetric(), 1e-7) + 1.0) < 1e-12);
}

TEST_CASE("source_g matches finite differences of log phi") {
    const double a = std::numbers::sqrt3;
    const double r2 = std::sqrt(2.0);
    const SourceSpec three = SourceSpec::discrete_symmetric({-r2, 0.0, r2}, {0.25, 0.5, 0.25});
    for (double t : {-0.6, -0.2, 0.05, 0.3, 0.8}) {
        CAPTURE(t);
        const double uni = fd_second_log([&](double s) { return std::sin(a * s) / (a * s); }, t);
        CHECK(std::abs(source_g(SourceSpec::uniform_symmetric(), t).real() - uni) < 1e-5);
        const double rad = fd_second_log([](double s) { return std::cos(s); }, t);
        CHECK(std::abs(source_g(SourceSpec::rademacher(), t).real() - rad) < 1e-5);
        const double disc = fd_second_log([&](double s) { return 0.5 + 0.5 * std::cos(r2 * s); }, t);
        CHECK(std::abs(source_g(three, t).real() - disc) < 1e-5);
        CHECK(std::abs(source_g(three, t).imag()) < 1e-14);
    }
}

TEST_CASE("analytic_d2psi is invariant under joint permutation of sources and columns") {
    const Matrix A = random_mixing(3, MixingKind::conditioned(2.0), 6);
    const std::vector<SourceSpec> src{SourceSpec::rademacher(), SourceSpec::uniform_symmetric(), SourceSpec::gaussian()};
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
    perm.indices() << 2, 0, 1;
    const Matrix Ap = A * perm;
    std::vector<SourceSpec> srcp(3);
    for (Index j = 0; j < 3; ++j) srcp[static_cast<std::size_t>(j)] = src[static_cast<std::size_t>(perm.indices()(j))];
    Vector u(3);
    u << 0.3, -0.5, 0.2;
    CHECK((analytic_d2psi(ICAModel(A, src), u) - analytic_d2psi(ICAModel(Ap, srcp), u)).norm() < 1e-13);
}

TEST_CASE("truncated_g") {
    CHECK(truncated_g(SourceSpec::rademacher(), 0.1) == doctest::Approx(-1.01));
    const double exact = -1.0 / std::pow(std::cos(0.1), 2);
    CHECK(exact == doctest::Approx(-1.010067).epsilon(1e-6));
    CHECK(std::abs(truncated_g(SourceSpec::rademacher(), 0.1) - exact) <= std::pow(0.1, 4));
    for (const auto& spec : {SourceSpec::rademacher(), SourceSpec::uniform_symmetric(), SourceSpec::gaussian()}) {
        CHECK(truncated_g(spec, 0.0) == -1.0);
    }
    CHECK(truncated_g(SourceSpec::gaussian(), 0.9) == -1.0);
}

TEST_CASE("empirical diagonal at small frequency stays within the remainder bound") {
    const ICAModel model(Matrix::Identity(3, 3), {SourceSpec::rademacher(), SourceSpec::uniform_symmetric(), SourceSpec::rademacher()});
    const SampleSet s = sample(model, 200000, 21);
    StreamRng rng(31);
    for (int trial = 0; trial < 8; ++trial) {
        Vector u = gaussian_vector(rng, 3, 0.1).cwiseMax(-0.25).cwiseMin(0.25);
        const WeightedStats st = reweighted_covariance(s, u);
        for (Index i = 0; i < 3; ++i) {
            const auto& spec = model.sources()[static_cast<std::size_t>(i)];
            const double t = u(i);
            const double bound = std::pow(std::abs(t), 3) * (std::pow(4.0, 7) / std::pow(3.0, 5)) *
                                 source_moments(spec).abs_moment5 * 1.5;
            // sampling noise at this N is ~1e-2; include it explicitly
            CHECK(std::abs(st.sigma_u(i, i).real() - truncated_g(spec, t)) <= bound + 0.02);
        }
    }
}

TEST_CASE("estimator error shrinks like 1/sqrt(N)") {
    const ICAModel model = rademacher_identity(2);
    Vector u(2);
    u << 0.3, -0.45;
    const Matrix exact = analytic_d2psi(model, u).real();
    auto rms = [&](Index N) {
        double acc = 0.0;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const SampleSet s = sample(model, N, 1000 + seed * 7 + static_cast<std::uint64_t>(N));
            acc += std::pow(spectral_norm(reweighted_covariance(s, u).sigma_u.real() - exact), 2);
        }
        return std::sqrt(acc / 40);
    };
    const double ratio = rms(100000) / rms(25000);
    CHECK(ratio >= 0.5 / 1.5);
    CHECK(ratio <= 0.5 * 1.5);
}
