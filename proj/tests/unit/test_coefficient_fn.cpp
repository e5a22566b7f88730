#include "doctest.h"

#include "mkvlab/coefficient_fn.hpp"
#include "mkvlab/error.hpp"

#include <cmath>
#include <vector>

using namespace mkvlab;

TEST_CASE("constant and polynomial evaluation") {
    const auto c = CoefficientFn::constant(2.5);
    CHECK(c(-100.0) == 2.5);
    CHECK(c.integral(0.0, 4.0) == doctest::Approx(10.0).epsilon(1e-15));

    const auto p = CoefficientFn::polynomial({1.0, 0.0, 3.0}, 0.0);  // 1 + 3 t^2
    CHECK(p(2.0) == doctest::Approx(13.0));
    CHECK(p.integral(0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(p(-0.5), InvalidArgument);
}

TEST_CASE("piecewise functions integrate exactly across breakpoints") {
    // 1 on [0,1), t on [1, inf)
    const auto f = CoefficientFn::piecewise({0.0, 1.0}, {{1.0}, {0.0, 1.0}});
    CHECK(f(0.5) == 1.0);
    CHECK(f(3.0) == 3.0);
    CHECK(f.integral(0.0, 2.0) == doctest::Approx(1.0 + 1.5).epsilon(1e-15));
    const auto F = f.antiderivative(0.0);
    CHECK(F(2.0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(F(0.0) == 0.0);
    CHECK(f.integral(2.0, 0.0) == doctest::Approx(-2.5));
}

TEST_CASE("vector and matrix shapes") {
    const auto v = CoefficientFn::constant_vector({1.0, -2.0});
    CHECK(v.rows() == 2);
    CHECK(v.cols() == 1);
    CHECK(v.values(0.0) == std::vector<double>{1.0, -2.0});
    CHECK_THROWS_AS(v(0.0), InvalidArgument);
    const auto m = CoefficientFn::constant_matrix(2, 2, {1.0, 2.0, 3.0, 4.0});
    CHECK(m.entry(0.0, 1, 0) == 3.0);
    CHECK(m.component(0, 1)(5.0) == 2.0);
    CHECK(CoefficientFn::zero(3).is_zero());
    CHECK_FALSE(v.is_zero());
}

TEST_CASE("arithmetic merges breakpoints") {
    const auto a = CoefficientFn::piecewise({0.0, 1.0}, {{1.0}, {2.0}});
    const auto b = CoefficientFn::polynomial({0.0, 1.0}, 0.0);
    const auto s = a + b;
    CHECK(s(0.5) == doctest::Approx(1.5));
    CHECK(s(2.0) == doctest::Approx(4.0));
    const auto p = a * b;
    CHECK(p(2.0) == doctest::Approx(4.0));
    CHECK(a.scaled(-2.0)(0.5) == -2.0);
}

TEST_CASE("resample_formula bisects at a change of branch") {
    const auto t = CoefficientFn::piecewise({0.0, 4.0}, {{-1.0, 1.0}, {-1.0, 1.0}});  // t - 1
    const CoefficientFn* inputs[] = {&t};
    const auto pos = resample_formula(inputs, [&](double x) { return std::max(t(x), 0.0); });
    for (double s : {0.0, 0.3, 0.99, 1.0, 1.01, 1.7, 2.5, 3.9})
        CHECK(pos(s) == doctest::Approx(std::max(s - 1.0, 0.0)).epsilon(1e-9).scale(1.0));
}

TEST_CASE("sampled_min sees interior minima") {
    const auto f = CoefficientFn::polynomial({1.0, -2.0, 1.0}, 0.0);  // (t - 1)^2
    CHECK(f.sampled_min(0, 0, 0.0, 2.0) == doctest::Approx(0.0).epsilon(1e-3).scale(1.0));
}
