#include "doctest.h"

#include "mkvlab/coeff_calc.hpp"
#include "mkvlab/error.hpp"
#include "mkvlab/mkv_picard.hpp"

#include <cmath>
#include <sstream>

using namespace mkvlab;

namespace {

ModelSpec mean_field_ou() {
    auto m = ModelSpec::zero(1, 1);
    m.linear_eta = CoefficientFn::constant_vector({-2.0});
    m.measure_terms.push_back({CoefficientFn::constant_matrix(1, 1, {1.0}), MeasureMap{MeanMap{}}});
    m.diffusion[0].terms.push_back({CoefficientFn::constant_vector({0.3}), 0.5});
    return m;
}

SimConfig config(std::size_t N, double dt = 0.01, std::uint64_t seed = 7) {
    SimConfig c;
    c.T = 1.0;
    c.dt = dt;
    c.N = N;
    c.seed = seed;
    c.record_every = 5;
    return c;
}

MeasureFlowGrid delta0(const SimConfig& cfg) {
    std::vector<double> grid;
    for (std::size_t k = 0; k <= cfg.steps(); k += cfg.record_every) grid.push_back(cfg.time_at(k));
    if (grid.back() != cfg.T) grid.push_back(cfg.T);
    return MeasureFlowGrid::point_mass(grid, 1, cfg.N);
}

std::vector<double> flow_means(const MeasureFlowGrid& f) {
    std::vector<double> out;
    for (const auto& mu : f.measures) out.push_back(mu.mean()[0]);
    return out;
}

}  // namespace

TEST_CASE("exponential series tails") {
    CHECK(exp_series_tail(0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(exp_series_tail(2, 1.0) == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
    CHECK(exp_series_tail(1, 0.0) == 0.0);
    CHECK(exp_series_tail(0, 0.0) == 1.0);
    // Tiny tails are summed directly rather than lost to cancellation.
    CHECK(exp_series_tail(30, 1.0) == doctest::Approx(1.0 / std::tgamma(31.0)).epsilon(0.05));
    CHECK(exp_series_tail(30, 1.0) > 0.0);
    double prev = 1e300;
    for (std::size_t n = 0; n < 40; ++n) {
        const double t = exp_series_tail(n, 2.5);
        CHECK(t < prev);
        prev = t;
    }
    for (std::size_t n = 20; n < 30; ++n)
        CHECK(exp_series_tail(n + 1, 2.5) / exp_series_tail(n, 2.5) == doctest::Approx(2.5 / (n + 1)).epsilon(0.15));
}

TEST_CASE("error bound examples") {
    const auto zero = CoefficientFn::constant(0.0);
    const auto one = CoefficientFn::constant(1.0);
    CHECK(picard_error_bound(0, 1.0, 1.0, 1.0, zero, one) == doctest::Approx(std::exp(1.0)));
    CHECK(picard_error_bound(2, 1.0, 1.0, 1.0, zero, one) == doctest::Approx(std::exp(1.0) - 2.0));
    CHECK(picard_error_bound(1, 3.0, 2.0, 1.0, zero, zero) == 0.0);
    // x = int_0^1 e^{-(1-s)} ds = 1 - e^{-1}.
    const double x = 1.0 - std::exp(-1.0);
    CHECK(picard_error_bound(1, 1.0, 0.5, 2.0, CoefficientFn::constant(-1.0), one) ==
          doctest::Approx(0.5 * (std::exp(2.0 * x) - 1.0)));
}

TEST_CASE("law-independent model is a fixed point after one sweep") {
    auto model = mean_field_ou();
    model.measure_terms.clear();
    const auto cfg = config(300);
    const auto run = picard_solve(model, InitialSampler::constant({1.0}), cfg, delta0(cfg));
    REQUIRE(run.distances.size() >= 2);
    CHECK(run.distances[0] > 0.0);
    CHECK(run.distances[1] == 0.0);
    CHECK(run.converged);
}

TEST_CASE("mean-field OU converges to the mean ODE") {
    const auto cfg = config(2000);
    const auto xi = InitialSampler::constant({1.0});
    const auto run = picard_solve(mean_field_ou(), xi, cfg, delta0(cfg));
    CHECK(run.converged);
    CHECK(run.iterations_used <= 8);
    CHECK(run.delta_from_point_mass);
    CHECK(run.delta == doctest::Approx(1.0));
    CHECK(run.kernel_integral == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-6));
    for (double d : run.distances) CHECK(d >= 0.0);
    for (std::size_t n = 1; n < run.theoretical_tail.size(); ++n)
        CHECK(run.theoretical_tail[n] <= run.theoretical_tail[n - 1]);

    const auto& flow = run.final_flow();
    for (std::size_t k = 0; k < flow.grid.size(); ++k) {
        const auto& pts = flow.measures[k].coords();
        double mean = 0.0, sq = 0.0;
        for (double v : pts) mean += v;
        mean /= static_cast<double>(pts.size());
        for (double v : pts) sq += (v - mean) * (v - mean);
        const double se = std::sqrt(sq / static_cast<double>(pts.size() - 1) / static_cast<double>(pts.size()));
        CHECK(std::abs(mean - std::exp(-flow.grid[k])) <= 3.0 * se + 2.0 * cfg.dt);
    }

    // Feeding the limit back in stops at once.
    const auto again = picard_solve(mean_field_ou(), xi, cfg, flow);
    CHECK(again.distances[0] <= 5e-3);
    CHECK(again.converged);

    // Reruns are bitwise identical.
    const auto twice = picard_solve(mean_field_ou(), xi, cfg, delta0(cfg));
    CHECK(twice.distances == run.distances);
    CHECK(flow_means(twice.final_flow()) == flow_means(run.final_flow()));

    std::ostringstream os;
    write_picard_csv(os, run);
    CHECK(os.str().rfind("n,distance,se,theoretical_bound\n", 0) == 0);

    const auto note = series_variant_check(run);
    CHECK(note.rows.size() == run.distances.size());
    CHECK(!note.matched.empty());
}

TEST_CASE("growth envelope") {
    // Every step recorded, so the frozen measure lags by one step only.
    auto cfg = config(2000);
    cfg.record_every = 1;
    const auto pm = delta0(cfg);
    const auto ok = growth_envelope_check(pm, CoefficientFn::constant(0.0), CoefficientFn::constant(0.0), 0.0);
    CHECK(ok.pass);

    const auto run = picard_solve(mean_field_ou(), InitialSampler::constant({1.0}), cfg, pm);
    const auto good = growth_envelope_check(run.final_flow(), CoefficientFn::constant(-1.0), CoefficientFn::constant(0.0), 1.0);
    CHECK(good.pass);
    const auto spec = derive_growth_spec(mean_field_ou());
    CHECK(growth_envelope_check(run.final_flow(), spec, 1.0).pass);
    const auto bad = growth_envelope_check(run.final_flow(), CoefficientFn::constant(-10.0), CoefficientFn::constant(0.0), 1.0);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("existence mode is required") {
    auto model = mean_field_ou();
    model.diffusion[0].eta0 = CoefficientFn::constant_vector({0.1});
    const auto cfg = config(50);
    CHECK_THROWS_AS(picard_solve(model, InitialSampler::constant({1.0}), cfg, delta0(cfg)), InvalidArgument);
}

TEST_CASE("flow distance and its standard error") {
    MeasureFlowGrid a, b;
    a.grid = b.grid = {0.0, 1.0};
    a.measures = {EmpiricalMeasure(1, {0.0, 1.0}), EmpiricalMeasure(1, {0.0, 2.0})};
    b.measures = {EmpiricalMeasure(1, {0.0, 1.0}), EmpiricalMeasure(1, {1.0, 3.0})};
    const auto d = flow_distance(a, b);
    CHECK(d.value == doctest::Approx(1.0));
    CHECK(d.node == 1);
    CHECK(d.standard_error == 0.0);
}
