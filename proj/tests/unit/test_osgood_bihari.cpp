#include "doctest.h"

#include "mkvlab/coeff_calc.hpp"
#include "mkvlab/error.hpp"
#include "mkvlab/osgood_bihari.hpp"

#include <cmath>
#include <random>

using namespace mkvlab;

namespace {

std::vector<Modulus> all_forms() {
    return {Modulus::power(0.5),
            Modulus::power(1.0),
            Modulus::power(2.0, 0.5),
            Modulus::linear(3.0),
            Modulus::log_modulus(0.5),
            Modulus::max_of({Modulus::power(0.5), Modulus::power(1.0)}),
            Modulus::tabulated({1e-3, 1e-1, 1.0, 10.0}, {1e-3, 0.2, 1.0, 30.0})};
}

/// Random (v, w) with Phi(v) + w comfortably below Phi(inf).
BihariDomainPoint random_point(const Modulus& rho, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> lv(-3.0, 2.0), uw(0.0, 3.0);
    const double v = std::exp(lv(gen));
    double w = uw(gen);
    const auto top = phi_rho_endpoints(rho).at_infinity;
    if (top.is_finite()) w = std::min(w, 0.5 * (top.value - phi_rho(rho, v)));
    return {v, std::max(w, 0.0)};
}

}  // namespace

TEST_CASE("phi examples") {
    CHECK(phi_rho(Modulus::power(1.0), std::exp(1.0)) == doctest::Approx(1.0));
    for (const auto& rho : all_forms()) CHECK(phi_rho(rho, 1.0) == 0.0);
    CHECK(phi_rho(Modulus::power(0.5), 4.0) == doctest::Approx(2.0));
    CHECK(phi_rho(Modulus::power(0.5), 0.25) < 0.0);
    CHECK_THROWS_AS(phi_rho(Modulus::power(1.0), 0.0), InvalidArgument);
}

TEST_CASE("phi endpoints") {
    const auto p1 = phi_rho_endpoints(Modulus::power(1.0));
    CHECK(p1.at_zero.kind == ExtendedValue::Kind::neg_infinity);
    CHECK(p1.at_infinity.kind == ExtendedValue::Kind::pos_infinity);
    const auto ph = phi_rho_endpoints(Modulus::power(0.5));
    CHECK(ph.at_zero.is_finite());
    CHECK(ph.at_zero.value == doctest::Approx(-2.0));
    CHECK(ph.at_infinity.kind == ExtendedValue::Kind::pos_infinity);
    const auto p2 = phi_rho_endpoints(Modulus::power(2.0));
    CHECK(p2.at_zero.kind == ExtendedValue::Kind::neg_infinity);
    CHECK(p2.at_infinity.value == doctest::Approx(1.0));
    // Slopes within rounding of the divergence threshold are not classified from table data.
    const auto t = phi_rho_endpoints(Modulus::tabulated({0.1, 1.0, 10.0}, {std::pow(0.1, 1.0 + 1e-10), 1.0, 10.0}));
    CHECK(t.at_zero.kind == ExtendedValue::Kind::unknown);
    CHECK(std::isnan(t.at_zero.as_double()));
}

TEST_CASE("domain membership") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int k = 0; k < 20; ++k) CHECK(in_domain(Modulus::power(1.0), {u(gen) + 1e-3, u(gen)}));
    CHECK_FALSE(in_domain(Modulus::power(2.0), {1.0, 2.0}));
    CHECK(in_domain(Modulus::power(2.0), {2.0, 0.25}));
    CHECK_THROWS_AS(psi_rho(Modulus::power(2.0), 1.0, 2.0), InvalidArgument);
}

TEST_CASE("psi examples") {
    CHECK(psi_rho(Modulus::power(1.0), 2.0, std::log(3.0)) == doctest::Approx(6.0));
    CHECK(psi_rho(Modulus::power(0.5), 1.0, 2.0) == doctest::Approx(4.0));
    for (const auto& rho : all_forms()) CHECK(psi_rho(rho, 0.7, 0.0) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("Phi(Psi(v, w)) = Phi(v) + w for every form") {
    std::mt19937_64 gen(77);
    for (const auto& rho : all_forms()) {
        CAPTURE(rho.form_name());
        for (int k = 0; k < 1000; ++k) {
            const auto p = random_point(rho, gen);
            const double psi = psi_rho(rho, p.v, p.w);
            CHECK(std::abs(phi_rho(rho, psi) - (phi_rho(rho, p.v) + p.w)) <= 1e-8 * (1.0 + std::abs(phi_rho(rho, p.v))));
        }
    }
}

TEST_CASE("psi is nondecreasing in each argument") {
    std::mt19937_64 gen(78);
    for (const auto& rho : all_forms()) {
        for (int k = 0; k < 100; ++k) {
            const auto p = random_point(rho, gen);
            CHECK(psi_rho(rho, p.v, p.w) <= psi_rho(rho, p.v * 1.1, p.w) * (1.0 + 1e-10));
            CHECK(psi_rho(rho, p.v, 0.8 * p.w) <= psi_rho(rho, p.v, p.w) * (1.0 + 1e-10));
        }
    }
}

TEST_CASE("quadrature path agrees with closed forms") {
    std::mt19937_64 gen(79);
    for (double alpha : {0.5, 0.75, 1.0, 2.0}) {
        const auto rho = Modulus::power(alpha);
        for (int k = 0; k < 100; ++k) {
            const auto p = random_point(rho, gen);
            const double exact = psi_rho(rho, p.v, p.w);
            CHECK(std::abs(psi_rho_numeric(rho, p.v, p.w) - exact) <= 1e-6 * exact);
            CHECK(std::abs(phi_rho_numeric(rho, p.v) - phi_rho(rho, p.v)) <= 1e-8 * (1.0 + std::abs(phi_rho(rho, p.v))));
        }
    }
}

TEST_CASE("Osgood verdicts") {
    CHECK(osgood_diverges_at_zero(Modulus::power(1.0), 1) == OsgoodVerdict::diverges);
    CHECK(osgood_diverges_at_zero(Modulus::power(0.5), 2) == OsgoodVerdict::diverges);
    CHECK(osgood_diverges_at_zero(Modulus::power(0.5), 1) == OsgoodVerdict::converges);
    CHECK(osgood_diverges_at_zero(Modulus::power(0.4), 2) == OsgoodVerdict::converges);
    CHECK(osgood_diverges_at_zero(Modulus::log_modulus(1.0), 1) == OsgoodVerdict::diverges);
    CHECK(osgood_diverges_at_zero(Modulus::max_of({Modulus::power(1.0), Modulus::power(0.5)}), 1) ==
          OsgoodVerdict::converges);
    CHECK(osgood_diverges_at_zero(Modulus::tabulated({0.1, 1.0}, {std::pow(0.1, 1.0 + 1e-10), 1.0}), 1) ==
          OsgoodVerdict::unknown);
    CHECK(osgood_diverges_at_zero(Modulus::tabulated({0.1, 1.0}, {0.01, 1.0}), 1) == OsgoodVerdict::diverges);
    CHECK(osgood_diverges_at_zero(Modulus::tabulated({0.1, 1.0}, {0.5, 1.0}), 1) == OsgoodVerdict::converges);
    CHECK_THROWS_AS(osgood_diverges_at_zero(Modulus::power(1.0), 3), InvalidArgument);
}

TEST_CASE("modulus flags are verified") {
    CHECK_THROWS_AS(Modulus::power(2.0).declare_concavity_exponent(1.0), InvalidArgument);
    CHECK_NOTHROW(Modulus::power(0.5).declare_concavity_exponent(0.5));
    CHECK_THROWS_AS(Modulus::linear(0.0), InvalidArgument);
    CHECK_THROWS_AS(Modulus::tabulated({1.0, 2.0}, {1.0, -1.0}), InvalidArgument);
}

TEST_CASE("Bihari curves") {
    const std::vector<double> grid{0.0, 0.25, 0.5, 1.0, 1.5};
    const auto flat = bihari_bound_curve(Modulus::power(0.5), 0.3, CoefficientFn::constant(0.0),
                                         CoefficientFn::constant(0.0), grid);
    for (double v : flat.values) CHECK(v == doctest::Approx(0.3));
    CHECK(std::isinf(flat.t0_plus));

    const auto e = bihari_bound_curve(Modulus::power(1.0), 1.0, CoefficientFn::constant(0.0),
                                      CoefficientFn::constant(1.0), grid);
    CHECK(e.values[3] == doctest::Approx(std::exp(1.0)));

    const auto blow = bihari_bound_curve(Modulus::power(2.0), 1.0, CoefficientFn::constant(0.0),
                                         CoefficientFn::constant(1.0), grid);
    CHECK(blow.t0_plus == doctest::Approx(1.0));
    CHECK(std::isinf(blow.values[3]));
    CHECK(std::isfinite(blow.values[2]));
    CHECK(blow.values[2] == doctest::Approx(2.0));
}

TEST_CASE("Bihari with the identity modulus reduces to Gronwall") {
    std::mt19937_64 gen(80);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(0.05 * k);
    for (int rep = 0; rep < 10; ++rep) {
        const auto mult = CoefficientFn::piecewise({0.0, 0.7}, {{u(gen), u(gen)}, {u(gen)}});
        const double init = 0.1 + u(gen);
        const auto b = bihari_bound_curve(Modulus::power(1.0), init, CoefficientFn::constant(0.0), mult, grid);
        const auto g = gronwall_curve(mult, init, CoefficientFn::constant(0.0), grid);
        for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(b.values[k] - g[k]) <= 1e-6);

        // With a nonzero additive part the Bihari bound dominates the Gronwall curve of the same inputs.
        const auto add = CoefficientFn::constant(u(gen));
        const auto b2 = bihari_bound_curve(Modulus::power(1.0), init, add, mult, grid);
        const auto g2 = gronwall_curve(mult, init, add, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) CHECK(b2.values[k] >= g2[k] - 1e-9);
    }
}
