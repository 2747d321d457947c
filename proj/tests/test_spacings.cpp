#include "rfpca/random.hpp"
#include "rfpca/spacings.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

using namespace rfpca;

namespace {

// For every value, the distance to the nearest strictly larger value (or an
// equal value elsewhere); no sorting involved.
std::pair<double, double> brute_gaps(const std::vector<double>& v) {
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        double next = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (j != i && v[j] >= v[i] && (v[j] > v[i] || j > i)) next = std::min(next, v[j] - v[i]);
        }
        if (std::isfinite(next)) {
            hi = std::max(hi, next);
            lo = std::min(lo, next);
        }
    }
    return {hi, lo};
}

GapEnsemble constant_ensemble(Index n, double c, int degree = 2) {
    GapEnsemble e;
    e.coefficients = Vector::Constant(n, c);
    e.degree = degree;
    return e;
}

} // namespace

TEST_CASE("maxgap and mingap examples") {
    CHECK(maxgap(std::vector<double>{3.0}) == 0.0);
    CHECK(maxgap(std::vector<double>{1, 2, 4, 7}) == 3.0);
    CHECK(maxgap(std::vector<double>{7, 1, 4, 2}) == 3.0);
    CHECK(mingap(std::vector<double>{1, 2, 4, 7}) == 1.0);
    CHECK(mingap(std::vector<double>{2.5, 2.5, 2.5}) == 0.0);
    CHECK(mingap(std::vector<double>{0, 10, 10.5}) == 0.5);
    CHECK_THROWS_AS(maxgap(std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(mingap(std::vector<double>{1.0}), DomainError);
    CHECK(maxgap(Vector{{0.0, 1.0}}) == 1.0);
}

TEST_CASE("gap properties against a sort-free oracle") {
    StreamRng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(2 + trial % 9);
        std::vector<double> v(n);
        for (auto& x : v) x = trial % 3 == 0 ? std::round(3.0 * rng.normal()) : rng.normal();
        const auto [hi, lo] = brute_gaps(v);
        CHECK(maxgap(v) == hi);
        CHECK(mingap(v) == lo);
        CHECK(maxgap(v) >= mingap(v));

        std::vector<double> shuffled = v;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(maxgap(shuffled) == maxgap(v));
        CHECK(mingap(shuffled) == mingap(v));

        std::vector<double> moved = v, scaled = v;
        for (auto& x : moved) x += 0.75;
        for (auto& x : scaled) x *= 4.0;
        CHECK(maxgap(moved) == doctest::Approx(maxgap(v)).epsilon(1e-12));
        CHECK(mingap(moved) == doctest::Approx(mingap(v)).epsilon(1e-12).scale(1.0));
        CHECK(maxgap(scaled) == 4.0 * maxgap(v));
    }
    CHECK(maxgap(std::vector<double>{0, 1, 2, 3}) == mingap(std::vector<double>{0, 1, 2, 3}));
    CHECK(maxgap(std::vector<double>{0, 1, 3}) > mingap(std::vector<double>{0, 1, 3}));
}

TEST_CASE("maxgap bound") {
    CHECK(maxgap_bound(constant_ensemble(256, 1.0)) == doctest::Approx(0.02));
    GapEnsemble e = constant_ensemble(100, 1.0, 4);
    e.coefficients(3) = 0.25;
    CHECK(maxgap_bound(e) == doctest::Approx((4.0 / 50.0) * 0.5 * std::pow(std::log(100.0), 0.25)));
    GapEnsemble bad = constant_ensemble(3, 1.0);
    bad.coefficients(1) = 0.0;
    CHECK_THROWS_AS(spacing_trials(bad, 1, 0), DomainError);
}

TEST_CASE("spacing_trials") {
    SUBCASE("a single polynomial never has a gap") {
        const SpacingTrialStats s = spacing_trials(constant_ensemble(1, 1.0), 50, 1);
        CHECK(s.maxgap_samples.cwiseAbs().maxCoeff() == 0.0);
        CHECK(std::isnan(to_table_row(s).median_mingap));
    }
    SUBCASE("homogeneous in the coefficients") {
        const SpacingTrialStats a = spacing_trials(constant_ensemble(20, 1.5), 100, 2);
        const SpacingTrialStats b = spacing_trials(constant_ensemble(20, 3.0), 100, 2);
        CHECK((b.maxgap_samples - 2.0 * a.maxgap_samples).cwiseAbs().maxCoeff() == 0.0);
        CHECK((b.mingap_samples - 2.0 * a.mingap_samples).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("deterministic and keyed by trial") {
        const GapEnsemble e = constant_ensemble(30, 1.0);
        const SpacingTrialStats a = spacing_trials(e, 40, 9);
        const SpacingTrialStats b = spacing_trials(e, 80, 9);
        CHECK(a.maxgap_samples == b.maxgap_samples.head(40));
        StreamRng rng(derive_seed(9, {7}));
        Vector values(30);
        for (Index i = 0; i < 30; ++i) values(i) = std::pow(rng.normal(), 2);
        CHECK(a.maxgap_samples(7) == maxgap(values));
        CHECK(a.mingap_samples(7) == mingap(values));
        const double hits = static_cast<double>((a.maxgap_samples.array() >= a.bound_value).count());
        CHECK(a.success_frequency == hits / 40.0);
    }
}

TEST_CASE("gaussian gap scaling with two points") {
    const auto rows = gaussian_gap_scaling({2}, 1, 4);
    StreamRng rng(derive_seed(4, {2, 0}));
    const double z1 = rng.normal(), z2 = rng.normal();
    CHECK(rows[0].median_maxgap == std::abs(z1 - z2));
    CHECK(rows[0].median_mingap == std::abs(z1 - z2));
    CHECK_THROWS_AS(gaussian_gap_scaling({1}, 10, 4), DomainError);
}

TEST_CASE("cubic counterexample with two points") {
    const auto rows = cubic_counterexample({2}, 1, 5);
    StreamRng rng(derive_seed(5, {2, 0}));
    const double a = std::sqrt(2.0 * std::log(2.0));
    const auto p = [a](double x) { return x * (x - a) * (x + a); };
    const double z1 = rng.normal(), z2 = rng.normal();
    CHECK(rows[0].median_maxgap == doctest::Approx(std::abs(p(z1) - p(z2))).epsilon(1e-14));
}

TEST_CASE("loglog slope and median") {
    std::vector<GapScalingRow> rows;
    for (Index n : {8, 64, 512}) rows.push_back({n, 1, 3.0 * std::pow(static_cast<double>(n), -0.6), 0.0});
    CHECK(loglog_slope(rows) == doctest::Approx(-0.6));
    CHECK(median(Vector{{3.0, 1.0, 2.0}}) == 2.0);
    CHECK(median(Vector{{4.0, 1.0, 2.0, 3.0}}) == 2.5);
}

TEST_CASE("recurrence_check") {
    const RecurrenceResult r = recurrence_check(0.01, 0.4, 100);
    CHECK(r.iterates.size() == 100);
    CHECK(r.iterates[0] == 0.01);
    CHECK(r.iterates[1] == doctest::Approx((1.0 + 1e-4) * (0.01 + std::pow(0.01 / 0.4, 2))));
    CHECK(r.max_y <= 0.02);
    CHECK(r.ok);

    const RecurrenceResult zero = recurrence_check(0.0, 0.3, 50);
    CHECK(std::all_of(zero.iterates.begin(), zero.iterates.end(), [](double y) { return y == 0.0; }));

    CHECK_THROWS_AS(recurrence_check(0.1, 0.5, 10), DomainError);
    CHECK_THROWS_AS(recurrence_check(-0.1, 0.5, 10), DomainError);
    CHECK_THROWS_AS(recurrence_check(0.0, 1.5, 10), DomainError);

    for (double a : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const double b_min = std::sqrt(8.0 * a);
        for (int k = 0; k <= 20; ++k) {
            const double b = std::min(1.0, b_min + (1.0 - b_min) * k / 20.0);
            if (a > b * b / 8.0) continue;
            CHECK(recurrence_check(a, b, 100).ok);
        }
    }
}

TEST_CASE("spacing table csv") {
    std::ostringstream out;
    write_spacing_csv(out, {to_table_row(spacing_trials(constant_ensemble(4, 1.0), 3, 1))});
    const std::string text = out.str();
    CHECK(text.rfind("n,trials,median_maxgap,median_mingap,success_frequency,bound_value\n", 0) == 0);
    CHECK(text.find("\n4,3,") != std::string::npos);
}
