#include "mkvlab/mkv_picard.hpp"

#include "mkvlab/error.hpp"
#include "mkvlab/thread_pool.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <ostream>

namespace mkvlab {

namespace {

double pair_norm(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
    return std::sqrt(s);
}

double paired_se(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    const std::size_t n = a.size();
    if (n < 2 || b.size() != n) return 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += pair_norm(a.point(i), b.point(i));
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = pair_norm(a.point(i), b.point(i)) - mean;
        var += e * e;
    }
    var /= static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
}

bool is_origin_point_mass(const MeasureFlowGrid& flow) {
    for (const auto& mu : flow.measures)
        for (double v : mu.coords())
            if (v != 0.0) return false;
    return true;
}

}  // namespace

FlowDistance flow_distance(const MeasureFlowGrid& a, const MeasureFlowGrid& b, std::size_t threads) {
    if (a.grid != b.grid) throw InvalidArgument("flow_distance: flows must share the time grid");
    const std::size_t nodes = a.grid.size();
    std::vector<double> d(nodes);
    ThreadPool pool(resolve_thread_count(threads));
    pool.parallel_for(nodes, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) d[k] = w1_distance(a.measures[k], b.measures[k]);
    });
    FlowDistance out;
    for (std::size_t k = 0; k < nodes; ++k)
        if (d[k] > out.value) {
            out.value = d[k];
            out.node = k;
        }
    out.standard_error = paired_se(a.measures[out.node], b.measures[out.node]);
    return out;
}

double exp_series_tail(std::size_t n, double y) {
    if (!(y >= 0.0) || !std::isfinite(y)) throw InvalidArgument("exp_series_tail: argument must be finite and >= 0");
    if (n == 0) return std::exp(y);
    if (y == 0.0) return 0.0;
    // Kahan-compensated partial sum of the first n terms.
    double sum = 0.0, comp = 0.0, term = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) term *= y / static_cast<double>(i);
        const double yk = term - comp;
        const double t = sum + yk;
        comp = (t - sum) - yk;
        sum = t;
    }
    const double diff = std::exp(y) - sum;
    // Cancellation leaves few significant digits when the tail is tiny; sum it directly then.
    if (diff > 1e-6 * std::exp(y)) return diff;
    double tail = 0.0;
    term *= y / static_cast<double>(n);
    for (std::size_t i = n; term > 1e-18 * tail || i == n; ++i) {
        tail += term;
        term *= y / static_cast<double>(i + 1);
        if (term == 0.0) break;
    }
    return tail;
}

double picard_error_bound(std::size_t n, double t, double delta, double c_P, const CoefficientFn& gamma_P0,
                          const CoefficientFn& lambda0, double t0) {
    if (!(delta >= 0.0)) throw InvalidArgument("picard_error_bound: Delta must be >= 0");
    if (!(c_P > 0.0)) throw InvalidArgument("picard_error_bound: c_P must be > 0");
    if (t <= t0) return n == 0 ? delta : 0.0;
    const std::vector<double> grid{t0, t};
    const double x = gronwall_curve(gamma_P0, 0.0, lambda0, grid).back();
    return delta * exp_series_tail(n, c_P * std::max(0.0, x));
}

PicardRun picard_solve(const ModelSpec& model, const InitialSampler& xi, const SimConfig& cfg,
                       const MeasureFlowGrid& mu0, const PicardOptions& options) {
    model.validate();
    cfg.validate();
    if (!model.diffusion_vanishes_at_origin())
        throw InvalidArgument("picard_solve: the diffusion must vanish at the origin (eta0 = 0 in every row)");
    if (!(options.tol > 0.0)) throw InvalidArgument("picard_solve: tol must be > 0");
    if (options.max_iter < 1) throw InvalidArgument("picard_solve: max_iter must be >= 1");
    options.theta.validate();

    PicardRun run;
    run.bound_inputs = options.bound_inputs ? *options.bound_inputs : picard_bound_inputs(derive_holder_spec(model));
    run.iterates.push_back(mu0);
    run.delta_from_point_mass = is_origin_point_mass(mu0);

    for (std::size_t sweep = 0; sweep < options.max_iter; ++sweep) {
        auto ens = simulate_frozen(model, run.iterates.back(), xi, cfg);
        require_complete(ens);
        MeasureFlowGrid next = ens.to_flow();
        if (sweep == 0 && mu0.grid != next.grid) {
            // Re-express mu_0 on the simulation grid so every iterate shares one grid.
            MeasureFlowGrid aligned;
            aligned.grid = next.grid;
            for (double t : next.grid) aligned.measures.push_back(mu0.measures[mu0.locate(t)]);
            run.iterates.front() = std::move(aligned);
        }
        const auto d = flow_distance(run.iterates.back(), next, cfg.threads);
        if (sweep == 0) {
            double sup = 0.0;
            for (std::size_t k = 0; k < next.grid.size(); ++k)
                sup = std::max(sup, theta_eval(options.theta, next.measures[k], run.iterates.front().measures[k]));
            run.delta = sup / run.bound_inputs.c_P;
        }
        run.distances.push_back(d.value);
        run.distance_se.push_back(d.standard_error);
        run.distance_nodes.push_back(d.node);
        run.iterates.push_back(std::move(next));
        run.iterations_used = sweep + 1;
        if (d.value <= options.tol) {
            run.converged = true;
            break;
        }
    }

    const std::vector<double> ends{cfg.t0, cfg.T};
    run.kernel_integral =
        std::max(0.0, gronwall_curve(run.bound_inputs.gamma_P0, 0.0, run.bound_inputs.lambda0, ends).back());
    for (std::size_t n = 0; n < run.distances.size(); ++n)
        run.theoretical_tail.push_back(run.delta * exp_series_tail(n, run.bound_inputs.c_P * run.kernel_integral));
    return run;
}

GrowthEnvelopeReport growth_envelope_check(const MeasureFlowGrid& flow, const CoefficientFn& f_P,
                                           const CoefficientFn& forcing, double xi_mean, double k_se) {
    flow.validate();
    GrowthEnvelopeReport rep;
    rep.k_se = k_se;
    rep.grid = flow.grid;
    rep.envelope = gronwall_curve(f_P, xi_mean, forcing, flow.grid);
    const std::size_t dim = flow.measures.front().dim();
    const std::vector<double> origin(dim, 0.0);
    for (std::size_t k = 0; k < flow.grid.size(); ++k) {
        const auto& mu = flow.measures[k];
        const std::size_t n = mu.size();
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += pair_norm(mu.point(i), origin);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = pair_norm(mu.point(i), origin) - mean;
            var += e * e;
        }
        const double se = n > 1 ? std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        rep.observed.push_back(mean);
        rep.standard_error.push_back(se);
        rep.margin.push_back(rep.envelope[k] - mean);
        if (mean - k_se * se > rep.envelope[k]) rep.pass = false;
    }
    return rep;
}

GrowthEnvelopeReport growth_envelope_check(const MeasureFlowGrid& flow, const GrowthTermSpec& spec, double xi_mean,
                                           double k_se) {
    const auto c = f_g_P(spec);
    return growth_envelope_check(flow, c.f_P, c.kappa0 + c.g_P, xi_mean, k_se);
}

SeriesVariantNote series_variant_check(const PicardRun& run, double k_se) {
    SeriesVariantNote note;
    note.delta = run.delta;
    note.c_P = run.bound_inputs.c_P;
    note.kernel_integral = run.kernel_integral;
    note.k_se = k_se;
    const double y = note.c_P * note.kernel_integral;
    bool fact_all = true, harm_all = true;
    for (std::size_t n = 0; n < run.distances.size(); ++n) {
        SeriesVariantRow row;
        row.n = n;
        row.observed = run.distances[n];
        row.standard_error = run.distance_se[n];
        row.factorial_tail = run.delta * exp_series_tail(n, y);
        const double slack = k_se * row.standard_error;
        row.factorial_ok = row.observed <= row.factorial_tail + slack;
        if (n >= 1) {
            row.harmonic_step = run.delta * std::pow(y, static_cast<double>(n)) / static_cast<double>(n);
            row.harmonic_ok = row.observed <= row.harmonic_step + slack;
        } else {
            row.harmonic_step = std::numeric_limits<double>::quiet_NaN();
        }
        fact_all = fact_all && row.factorial_ok;
        harm_all = harm_all && row.harmonic_ok;
        note.rows.push_back(row);
    }
    note.matched = fact_all ? (harm_all ? "both" : "factorial") : (harm_all ? "harmonic" : "neither");
    return note;
}

void write_picard_csv(std::ostream& os, const PicardRun& run) {
    os << "n,distance,se,theoretical_bound\n";
    char buf[128];
    for (std::size_t n = 0; n < run.distances.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", n, run.distances[n], run.distance_se[n],
                      run.theoretical_tail[n]);
        os << buf;
    }
}

}  // namespace mkvlab
