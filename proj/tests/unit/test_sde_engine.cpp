#include "doctest.h"

#include "mkvlab/error.hpp"
#include "mkvlab/measure_space.hpp"
#include "mkvlab/sde_engine.hpp"

#include <cmath>
#include <numeric>

using namespace mkvlab;

namespace {

SimConfig config(double T, double dt, std::size_t N, std::uint64_t seed = 1) {
    SimConfig c;
    c.T = T;
    c.dt = dt;
    c.N = N;
    c.seed = seed;
    return c;
}

ModelSpec linear_model(double a, double sigma) {
    auto m = ModelSpec::zero(1, 1);
    m.linear_eta = CoefficientFn::constant_vector({a});
    m.diffusion[0].eta0 = CoefficientFn::constant_vector({sigma});
    return m;
}

ModelSpec sqrt_model() {
    auto m = ModelSpec::zero(1, 1);
    m.linear_eta = CoefficientFn::constant_vector({-1.0});
    m.diffusion[0].terms.push_back({CoefficientFn::constant_vector({0.5}), 0.5});
    return m;
}

double node_mean(const PathEnsemble& e, std::size_t node) {
    double s = 0.0;
    for (std::size_t p = 0; p < e.N; ++p) s += e.at(node, p);
    return s / static_cast<double>(e.N);
}

double node_var(const PathEnsemble& e, std::size_t node) {
    const double mu = node_mean(e, node);
    double s = 0.0;
    for (std::size_t p = 0; p < e.N; ++p) s += (e.at(node, p) - mu) * (e.at(node, p) - mu);
    return s / static_cast<double>(e.N - 1);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("configuration validation") {
    auto c = config(1.0, 0.3, 10);
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = config(1.0, 0.25, 0);
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = config(1.0, 0.25, 1);
    c.scheme = "milstein";
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = config(1.0, 0.1, 1);
    CHECK_NOTHROW(c.validate());
    CHECK(c.steps() == 10);
}

TEST_CASE("zero model keeps constant paths") {
    const auto ens = simulate_particle_system(ModelSpec::zero(2, 3), InitialSampler::constant({1.5, -2.0}), config(1.0, 0.1, 5));
    REQUIRE(ens.nodes() == 11);
    for (std::size_t n = 0; n < ens.nodes(); ++n)
        for (std::size_t p = 0; p < 5; ++p) {
            CHECK(ens.at(n, p, 0) == 1.5);
            CHECK(ens.at(n, p, 1) == -2.0);
        }
    CHECK(ens.grid.back() == 1.0);
}

TEST_CASE("deterministic decay matches the Euler product") {
    const auto ens = simulate_particle_system(linear_model(-1.0, 0.0), InitialSampler::constant({1.0}), config(1.0, 1e-3, 3));
    const double xT = ens.at(ens.nodes() - 1, 0);
    CHECK(xT == doctest::Approx(std::pow(1.0 - 1e-3, 1000)).epsilon(1e-12));
    CHECK(std::abs(xT - std::exp(-1.0)) < 1e-3);
}

TEST_CASE("additive noise has the Gaussian variance") {
    const double sigma = 0.7, T = 2.0;
    const std::size_t N = 10000;
    const auto ens = simulate_particle_system(linear_model(0.0, sigma), InitialSampler::constant({0.0}), config(T, 0.01, N, 11));
    const double v = node_var(ens, ens.nodes() - 1);
    const double exact = sigma * sigma * T;
    CHECK(std::abs(v - exact) <= 3.0 * exact * std::sqrt(2.0 / static_cast<double>(N)));
}

TEST_CASE("frozen and interacting runs agree without measure terms") {
    const auto model = sqrt_model();
    InitialSampler xi;
    xi.kind = InitialSampler::Kind::uniform;
    xi.a = {0.5};
    xi.b = {1.5};
    const auto cfg = config(1.0, 0.01, 64, 5);
    const auto a = simulate_particle_system(model, xi, cfg);
    const auto flow = MeasureFlowGrid::point_mass({0.0, 0.5, 1.0}, 1, 3);
    const auto b = simulate_frozen(model, flow, xi, cfg);
    CHECK(a.states == b.states);
}

TEST_CASE("mean-field decay with identical particles") {
    auto m = linear_model(-2.0, 0.0);
    m.measure_terms.push_back({CoefficientFn::constant_matrix(1, 1, {1.0}), MeasureMap{MeanMap{}}});
    for (std::size_t N : {std::size_t{1}, std::size_t{7}}) {
        const auto ens = simulate_particle_system(m, InitialSampler::constant({1.0}), config(2.0, 1e-3, N));
        for (std::size_t p = 0; p < N; ++p) {
            CHECK(ens.at(ens.nodes() - 1, p) == doctest::Approx(std::pow(1.0 - 1e-3, 2000)).epsilon(1e-12));
            CHECK(std::abs(ens.at(ens.nodes() - 1, p) - std::exp(-2.0)) < 1e-3);
        }
    }
}

TEST_CASE("frozen flow drives the measure term") {
    auto m = ModelSpec::zero(1, 1);
    m.measure_terms.push_back({CoefficientFn::constant_matrix(1, 1, {1.0}), MeasureMap{MeanMap{}}});
    // Flow with mean 2 on [0, 0.5) and mean -1 afterwards: dX = mean dt.
    MeasureFlowGrid flow;
    flow.grid = {0.0, 0.5, 1.0};
    flow.measures = {EmpiricalMeasure(1, {2.0, 2.0}), EmpiricalMeasure(1, {-1.0, -1.0}), EmpiricalMeasure(1, {5.0, 5.0})};
    const auto ens = simulate_frozen(m, flow, InitialSampler::constant({0.0}), config(1.0, 0.125, 2));
    CHECK(ens.at(ens.nodes() - 1, 0) == doctest::Approx(0.5));
    MeasureFlowGrid late;
    late.grid = {0.25};
    late.measures = {EmpiricalMeasure(1, {0.0})};
    CHECK_THROWS_AS(simulate_frozen(m, late, InitialSampler::constant({0.0}), config(1.0, 0.125, 2)), InvalidArgument);
}

TEST_CASE("coupled runs") {
    const auto model = sqrt_model();
    const auto cfg = config(1.0, 0.01, 50, 3);
    InitialSampler xi;
    xi.kind = InitialSampler::Kind::normal;
    xi.a = {1.0};
    xi.b = {0.2};
    const auto [a, b] = simulate_coupled(model, model, xi, xi, cfg);
    CHECK(a.states == b.states);

    const double eps = 0.5;
    auto pa = linear_model(-1.0, 0.0);
    pa.kappa = CoefficientFn::constant_vector({eps});
    const auto pb = linear_model(-1.0, 0.0);
    const auto [x, y] = simulate_coupled(pa, pb, InitialSampler::constant({2.0}), InitialSampler::constant({1.0}),
                                         config(1.0, 1e-4, 2));
    const double yT = x.at(x.nodes() - 1, 0) - y.at(y.nodes() - 1, 0);
    CHECK(std::abs(std::abs(yT) - ((1.0 - eps) * std::exp(-1.0) + eps)) < 1e-3);

    const auto [u, v] = simulate_coupled(pb, pb, InitialSampler::constant({3.0}), InitialSampler::constant({1.0}),
                                         config(1.0, 1e-3, 2));
    CHECK(std::abs(u.at(u.nodes() - 1, 0) - v.at(v.nodes() - 1, 0) - 2.0 * std::exp(-1.0)) < 1e-3);
}

TEST_CASE("results do not depend on the thread count") {
    auto model = sqrt_model();
    model.measure_terms.push_back({CoefficientFn::constant_matrix(1, 1, {0.3}), MeasureMap{MeanMap{}}});
    auto cfg = config(1.0, 0.01, 1000, 99);
    cfg.record_every = 7;
    cfg.threads = 1;
    const auto one = simulate_particle_system(model, InitialSampler::constant({1.0}), cfg);
    cfg.threads = 4;
    const auto four = simulate_particle_system(model, InitialSampler::constant({1.0}), cfg);
    CHECK(one.states == four.states);
    CHECK(one.grid == four.grid);
    CHECK(one.grid.back() == 1.0);
    CHECK(one.model_fingerprint == four.model_fingerprint);
    CHECK(one.model_fingerprint.size() == 64);
}

TEST_CASE("weak order one for a linear model") {
    const double a = 1.0, sigma = 0.5, T = 1.0;
    const std::size_t N = 1000000;
    std::vector<double> dts{0.1, 0.05, 0.025, 0.0125}, mean_err, var_err;
    const double mean_exact = std::exp(a * T);
    const double var_exact = sigma * sigma * (std::exp(2.0 * a * T) - 1.0) / (2.0 * a);
    for (double dt : dts) {
        const auto ens = simulate_particle_system(linear_model(a, sigma), InitialSampler::constant({1.0}), config(T, dt, N, 17));
        mean_err.push_back(std::abs(node_mean(ens, ens.nodes() - 1) - mean_exact));
        var_err.push_back(std::abs(node_var(ens, ens.nodes() - 1) - var_exact));
    }
    const double sm = slope(dts, mean_err), sv = slope(dts, var_err);
    CAPTURE(sm);
    CAPTURE(sv);
    CHECK(sm >= 0.8);
    CHECK(sm <= 1.2);
    CHECK(sv >= 0.8);
    CHECK(sv <= 1.2);
}

TEST_CASE("consecutive laws approach each other as the step shrinks") {
    const auto model = sqrt_model();
    double prev = 1e300;
    for (double dt : {0.04, 0.01, 0.0025}) {
        const auto ens = simulate_particle_system(model, InitialSampler::constant({1.0}), config(0.2, dt, 2000, 8));
        double worst = 0.0;
        for (std::size_t n = 0; n + 1 < ens.nodes(); ++n)
            worst = std::max(worst, w1_distance(ens.measure_at(n), ens.measure_at(n + 1)));
        CHECK(worst < prev);
        prev = worst;
    }
}

TEST_CASE("blow-up truncates at the last complete node") {
    const auto model = linear_model(50.0, 0.0);
    auto cfg = config(1.0, 0.01, 4);
    cfg.record_every = 5;
    const auto ens = simulate_particle_system(model, InitialSampler::constant({1.0}), cfg);
    REQUIRE(ens.blow_up.has_value());
    CHECK(ens.blow_up->particle == 0);
    CHECK(ens.grid.back() < ens.blow_up->time);
    CHECK(ens.states.size() == ens.nodes() * ens.N);
    for (double x : ens.states) CHECK(std::abs(x) <= 1e9);
    CHECK_THROWS_AS(require_complete(ens), BlowUpError);
    try {
        require_complete(ens);
    } catch (const BlowUpError& e) {
        CHECK(std::string(e.what()).find("particle") != std::string::npos);
    }
}

TEST_CASE("root policy") {
    const auto model = sqrt_model();
    auto cfg = config(2.0, 0.05, 4000, 21);
    const auto absorbed = simulate_particle_system(model, InitialSampler::constant({0.2}), cfg);
    for (double x : absorbed.states) CHECK(x >= 0.0);
    cfg.root_policy = RootPolicy::none;
    const auto plain = simulate_particle_system(model, InitialSampler::constant({0.2}), cfg);
    CHECK(std::any_of(plain.states.begin(), plain.states.end(), [](double x) { return x < 0.0; }));
    // Rows with an additive part are never absorbed.
    auto noisy = linear_model(-1.0, 0.3);
    cfg.root_policy = RootPolicy::absorb;
    const auto n = simulate_particle_system(noisy, InitialSampler::constant({0.2}), cfg);
    CHECK(std::any_of(n.states.begin(), n.states.end(), [](double x) { return x < 0.0; }));
}

TEST_CASE("initial samplers") {
    InitialSampler pts;
    pts.kind = InitialSampler::Kind::points;
    pts.points = {1.0, 2.0, 3.0};
    auto cfg = config(0.1, 0.1, 7);
    const auto e = simulate_particle_system(ModelSpec::zero(1, 1), pts, cfg);
    for (std::size_t p = 0; p < 7; ++p) CHECK(e.at(0, p) == pts.points[p % 3]);

    InitialSampler nrm;
    nrm.kind = InitialSampler::Kind::normal;
    nrm.a = {3.0};
    nrm.b = {2.0};
    cfg.N = 40000;
    const auto g = simulate_particle_system(ModelSpec::zero(1, 1), nrm, cfg);
    CHECK(std::abs(node_mean(g, 0) - 3.0) < 4.0 * 2.0 / 200.0);
    CHECK(std::abs(node_var(g, 0) - 4.0) < 4.0 * 4.0 * std::sqrt(2.0 / 40000.0));

    InitialSampler bad;
    bad.kind = InitialSampler::Kind::uniform;
    bad.a = {1.0};
    bad.b = {0.0};
    CHECK_THROWS_AS(bad.validate(1), InvalidArgument);
    CHECK_THROWS_AS(InitialSampler::constant({1.0, 2.0}).validate(1), InvalidArgument);
}
