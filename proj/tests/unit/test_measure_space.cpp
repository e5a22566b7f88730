#include "doctest.h"

#include "mkvlab/error.hpp"
#include "mkvlab/measure_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

using namespace mkvlab;

namespace {

double euclid(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

/// Minimum over all n! assignments.
double brute_force_wp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
    std::vector<std::size_t> perm(mu.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) s += std::pow(euclid(mu.point(i), nu.point(perm[i])), p);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow(best / static_cast<double>(mu.size()), 1.0 / p);
}

EmpiricalMeasure random_measure(std::mt19937_64& gen, std::size_t m, std::size_t n) {
    std::normal_distribution<double> z;
    std::vector<double> c(m * n);
    for (double& x : c) x = z(gen);
    return EmpiricalMeasure(m, c);
}

}  // namespace

TEST_CASE("w1 examples") {
    const EmpiricalMeasure a(1, {0.0, 1.0}), b(1, {0.0, 0.0});
    CHECK(w1_distance(a, a) == 0.0);
    CHECK(w1_distance(a, b) == doctest::Approx(0.5));
    const EmpiricalMeasure c(2, {0.0, 0.0, 1.0, 0.0}), d(2, {0.0, 0.0, 0.0, 0.0});
    CHECK(w1_distance(c, d) == doctest::Approx(0.5));
    CHECK_THROWS_AS(w1_distance(a, c), InvalidArgument);
    const EmpiricalMeasure e(2, {0.0, 0.0});
    CHECK_THROWS_AS(w1_distance(c, e), InvalidArgument);
}

TEST_CASE("wp examples") {
    const EmpiricalMeasure a(1, {0.0, 2.0}), b(1, {0.0, 0.0});
    CHECK(wp_distance(a, a, 3.0) == 0.0);
    CHECK(wp_distance(a, b, 2.0) == doctest::Approx(std::sqrt(2.0)));
    const EmpiricalMeasure c(1, {0.0, 1.0});
    CHECK(wp_distance(c, b, 1.0) == w1_distance(c, b));
}

TEST_CASE("wp(., ., 1) and w1 agree bit for bit") {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t m = 1 + rep % 3, n = 2 + rep % 5;
        const auto mu = random_measure(gen, m, n), nu = random_measure(gen, m, n);
        CHECK(wp_distance(mu, nu, 1.0) == w1_distance(mu, nu));
    }
}

TEST_CASE("1D unequal support sizes use the common quantile coupling") {
    const EmpiricalMeasure a(1, {0.0, 1.0, 2.0}), b(1, {0.0, 3.0});
    // Quantile functions on (0,1/3),(1/3,1/2),(1/2,2/3),(2/3,1): a = 0,1,1,2 ; b = 0,0,3,3
    const double expected = (1.0 / 3.0) * 0.0 + (1.0 / 6.0) * 1.0 + (1.0 / 6.0) * 2.0 + (1.0 / 3.0) * 1.0;
    CHECK(w1_distance(a, b) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("metric properties against a brute-force oracle") {
    std::mt19937_64 gen(2024);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 1 + rep % 3, n = 1 + rep % 6;
        const auto x = random_measure(gen, m, n), y = random_measure(gen, m, n), z = random_measure(gen, m, n);
        const double dxy = w1_distance(x, y), dyx = w1_distance(y, x);
        CHECK(std::abs(dxy - brute_force_wp(x, y, 1.0)) <= 1e-9);
        CHECK(dxy >= 0.0);
        CHECK(std::abs(dxy - dyx) <= 1e-12);
        CHECK(w1_distance(x, x) == 0.0);
        CHECK(w1_distance(x, z) <= dxy + w1_distance(y, z) + 1e-12);
        // Permuted copy is the same multiset.
        std::vector<double> c = x.coords();
        std::rotate(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(m), c.end());
        CHECK(w1_distance(x, EmpiricalMeasure(m, c)) <= 1e-12);
        if (n <= 5) CHECK(std::abs(wp_distance(x, y, 2.0) - brute_force_wp(x, y, 2.0)) <= 1e-9);
    }
}

TEST_CASE("wp is nondecreasing in p") {
    std::mt19937_64 gen(5);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t m = 1 + rep % 3;
        const auto x = random_measure(gen, m, 5), y = random_measure(gen, m, 5);
        const double a = wp_distance(x, y, 1.0), b = wp_distance(x, y, 1.5), c = wp_distance(x, y, 2.0);
        CHECK(a <= b + 1e-12);
        CHECK(b <= c + 1e-12);
    }
}

TEST_CASE("coupled mean distance dominates w1") {
    std::mt19937_64 gen(9);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t m = 1 + rep % 3, n = 1 + rep % 6;
        const auto x = random_measure(gen, m, n), y = random_measure(gen, m, n);
        double coupled = 0.0;
        for (std::size_t i = 0; i < n; ++i) coupled += euclid(x.point(i), y.point(i));
        CHECK(w1_distance(x, y) <= coupled / static_cast<double>(n) + 1e-12);
    }
}

TEST_CASE("moments") {
    CHECK(moment(EmpiricalMeasure::point_mass(2, 4), 1.0) == 0.0);
    CHECK(moment(EmpiricalMeasure(1, {-1.0, 3.0}), 1.0) == doctest::Approx(2.0));
    const EmpiricalMeasure a(1, {0.0, 1.0});
    CHECK(moment(a, 1.0) == doctest::Approx(0.5));
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t m = 1 + rep % 3, n = 1 + rep % 6;
        const auto x = random_measure(gen, m, n);
        CHECK(std::abs(moment(x, 1.0) - w1_distance(x, EmpiricalMeasure::point_mass(m, n))) <= 1e-12);
    }
}

TEST_CASE("measure functionals") {
    const EmpiricalMeasure a(1, {2.0, 2.0}), b(1, {1.0, 1.0});
    MeasureFunctionalSpec w1;
    CHECK(theta_eval(w1, a, a) == 0.0);
    MeasureFunctionalSpec pw{PowerOfW1{1.0}, 1.0};
    CHECK(theta_eval(pw, a, b) == w1_distance(a, b));
    PsiFunction id;
    id.kind = PsiFunction::Kind::linear;
    id.weights = {1.0};
    MeasureFunctionalSpec diff{PsiIntegralDifference{id, PostMap::positive_part}, 1.0};
    CHECK(theta_eval(diff, a, b) == doctest::Approx(1.0));
    CHECK(theta_eval(diff, b, a) == 0.0);
    MeasureFunctionalSpec bad{WassersteinP{0.5}, 1.0};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    MeasureFunctionalSpec bad_beta{PowerOfW1{1.5}, 1.0};
    CHECK_THROWS_AS(bad_beta.validate(), InvalidArgument);
}

TEST_CASE("domination checks") {
    const EmpiricalMeasure a(1, {0.0, 1.0}), b(1, {1.0, 3.0});
    std::vector<CoupledSample> same{{a, a}};
    const auto r0 = check_domination(MeasureFunctionalSpec{}, same);
    CHECK(r0.all_pass);
    CHECK(r0.rows[0].theta == 0.0);
    CHECK(r0.rows[0].bound == 0.0);

    std::vector<CoupledSample> pairs{{a, b}, {b, a}};
    CHECK(check_domination(MeasureFunctionalSpec{}, pairs).all_pass);

    MeasureFunctionalSpec zero{PowerOfW1{1.0}, 0.0};
    const auto r = check_domination(zero, pairs);
    CHECK_FALSE(r.all_pass);
    CHECK_FALSE(r.rows[0].pass);
}

TEST_CASE("integrability curves") {
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto lin = Modulus::power(1.0);
    const std::vector<double> two(5, 2.0), one(5, 1.0);
    const auto z = theta_integrability_curve(CoefficientFn::constant(0.0), lin, grid, two);
    CHECK(z.integral == 0.0);
    CHECK(z.locally_integrable);
    const auto c = theta_integrability_curve(CoefficientFn::constant(1.0), lin, grid, two);
    CHECK(c.integral == doctest::Approx(2.0));
    const auto s = theta_integrability_curve(CoefficientFn::polynomial({0.0, 1.0}, 0.0), lin, grid, one);
    CHECK(s.integral == doctest::Approx(0.5));
    CHECK_THROWS_AS(theta_integrability_curve(CoefficientFn::constant(1.0), lin, grid, std::vector<double>(3, 1.0)),
                    InvalidArgument);
}

TEST_CASE("CSV round trip keeps every bit") {
    const EmpiricalMeasure a(2, {0.1, -1.0 / 3.0, 1e-300, 12345.678901234567});
    std::stringstream ss;
    write_measure_csv(ss, a);
    CHECK(ss.str().rfind("x1,x2\n", 0) == 0);
    const auto b = read_measure_csv(ss);
    CHECK(b.dim() == 2);
    CHECK(b.coords() == a.coords());
}
