#include "mkvlab/cli.hpp"

#include "mkvlab/coeff_calc.hpp"
#include "mkvlab/error.hpp"
#include "mkvlab/mkv_picard.hpp"
#include "mkvlab/osgood_bihari.hpp"
#include "mkvlab/stability_lab.hpp"
#include "mkvlab/yw_approx.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace mkvlab::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

/// Columns of equal length under a header; rows every `stride` entries (last row always kept).
std::string columns_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& cols,
                        std::size_t stride = 1) {
    std::ostringstream os;
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << '\n';
    const std::size_t rows = cols.empty() ? 0 : cols.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        if (r % stride != 0 && r + 1 != rows) continue;
        for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << num(cols[c][r]);
        os << '\n';
    }
    return os.str();
}

std::vector<std::size_t> strided_nodes(std::size_t nodes, std::size_t stride) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < nodes; ++k)
        if (k % stride == 0 || k + 1 == nodes) out.push_back(k);
    return out;
}

/// One file per coordinate: a header row of times, then one row per particle.
void write_flow_bundle(const fs::path& dir, const std::string& prefix, const MeasureFlowGrid& flow,
                       std::size_t stride) {
    const auto nodes = strided_nodes(flow.grid.size(), stride);
    const std::size_t m = flow.measures.front().dim(), n = flow.measures.front().size();
    for (std::size_t c = 0; c < m; ++c) {
        std::ostringstream os;
        for (std::size_t j = 0; j < nodes.size(); ++j) os << (j ? "," : "") << num(flow.grid[nodes[j]]);
        os << '\n';
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t j = 0; j < nodes.size(); ++j)
                os << (j ? "," : "") << num(flow.measures[nodes[j]].point(p)[c]);
            os << '\n';
        }
        write_file(dir / (prefix + std::to_string(c + 1) + ".csv"), os.str());
    }
}

void write_ensemble_bundle(const fs::path& dir, const std::string& prefix, const PathEnsemble& ens,
                           std::size_t stride) {
    const auto nodes = strided_nodes(ens.nodes(), stride);
    for (std::size_t c = 0; c < ens.m; ++c) {
        std::ostringstream os;
        for (std::size_t j = 0; j < nodes.size(); ++j) os << (j ? "," : "") << num(ens.grid[nodes[j]]);
        os << '\n';
        for (std::size_t p = 0; p < ens.N; ++p) {
            for (std::size_t j = 0; j < nodes.size(); ++j) os << (j ? "," : "") << num(ens.at(nodes[j], p, c));
            os << '\n';
        }
        write_file(dir / (prefix + std::to_string(c + 1) + ".csv"), os.str());
    }
}

/// Per-node mean and standard error of every coordinate of a flow.
std::string mean_curve_csv(const MeasureFlowGrid& flow, std::size_t stride) {
    const std::size_t m = flow.measures.front().dim(), n = flow.measures.front().size();
    std::vector<std::string> header{"t"};
    for (std::size_t c = 0; c < m; ++c) {
        header.push_back("mean_x" + std::to_string(c + 1));
        header.push_back("se_x" + std::to_string(c + 1));
    }
    std::vector<std::vector<double>> cols(1 + 2 * m);
    cols[0] = flow.grid;
    for (const auto& mu : flow.measures) {
        const auto mean = mu.mean();
        for (std::size_t c = 0; c < m; ++c) {
            double var = 0.0;
            for (std::size_t p = 0; p < n; ++p) var += (mu.point(p)[c] - mean[c]) * (mu.point(p)[c] - mean[c]);
            const double se = n > 1 ? std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
            cols[1 + 2 * c].push_back(mean[c]);
            cols[2 + 2 * c].push_back(se);
        }
    }
    return columns_csv(header, cols, stride);
}

Json blow_up_json(const BlowUp& b) {
    return {{"particle", b.particle}, {"step", b.step}, {"time", b.time}, {"value", b.value}};
}

/// Mean over particles of sum_i |u_i'(a_p - b_p)| at the first node.
double initial_frame_distance(const PathEnsemble& a, const PathEnsemble& b, const ModelSpec& model) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.N; ++p)
        for (std::size_t i = 0; i < model.m; ++i) {
            double v = 0.0;
            for (std::size_t r = 0; r < model.m; ++r) v += model.frame(r, i) * (a.at(0, p, r) - b.at(0, p, r));
            s += std::abs(v);
        }
    return s / static_cast<double>(a.N);
}

struct Context {
    ModelSpec model;
    bool has_model = false;
    SimConfig sim;
    bool has_sim = false;
    fs::path out_dir;
    std::string fingerprint;
};

const Json& empty_object() {
    static const Json j = Json::object();
    return j;
}

InitialSampler read_sampler(JsonReader& params, const std::string& key, const ModelSpec& model) {
    auto r = params.at(key);
    auto xi = sampler_from_json(r);
    try {
        xi.validate(model.m);
    } catch (const InvalidArgument& e) {
        throw ConfigError(r.path(), e.what());
    }
    return xi;
}

ModelSpec read_model_ref(JsonReader& params, const std::string& key, const std::string& id_key) {
    if (auto r = params.find(key)) return model_from_json(*r);
    if (auto r = params.find(id_key)) {
        const auto& entry = catalog_entry(r->string());
        return model_from_json(JsonReader(entry.model, r->path()));
    }
    throw ConfigError(params.path() + "." + key, "required field is missing");
}

void require_model(const Context& ctx, const std::string& experiment) {
    if (!ctx.has_model) throw ConfigError("config.model", "experiment '" + experiment + "' needs a model");
    if (!ctx.has_sim) throw ConfigError("config.sim", "experiment '" + experiment + "' needs a sim block");
}

// ---------------------------------------------------------------- experiments

Json run_simulate(Context& ctx, JsonReader params, std::ostream& err, int& code) {
    require_model(ctx, "simulate");
    const auto xi = params.has("xi") ? read_sampler(params, "xi", ctx.model)
                                     : InitialSampler::constant(std::vector<double>(ctx.model.m, 0.0));
    const auto stride = static_cast<std::size_t>(params.uint_or("export_every", 1));
    params.finish();
    auto ens = simulate_particle_system(ctx.model, xi, ctx.sim);
    write_ensemble_bundle(ctx.out_dir, "x", ens, stride);
    write_file(ctx.out_dir / "mean.csv", mean_curve_csv(ens.to_flow(), stride));
    Json v = {{"experiment", "simulate"}, {"nodes", ens.nodes()}, {"particles", ens.N}};
    if (ens.blow_up) {
        err << "error: engine blow-up at particle " << ens.blow_up->particle << ", step " << ens.blow_up->step
            << " (t = " << ens.blow_up->time << ")\n";
        v["status"] = "blow_up";
        v["blow_up"] = blow_up_json(*ens.blow_up);
        v["pass"] = false;
        code = kExitError;
    } else {
        v["status"] = "complete";
        v["pass"] = true;
    }
    return v;
}

Json run_couple(Context& ctx, JsonReader params) {
    require_model(ctx, "couple");
    ModelSpec model_b = (params.has("model_b") || params.has("model_b_id"))
                            ? read_model_ref(params, "model_b", "model_b_id")
                            : ctx.model;
    const auto xi_a = read_sampler(params, "xi_a", ctx.model);
    const auto xi_b = read_sampler(params, "xi_b", ctx.model);
    const auto stride = static_cast<std::size_t>(params.uint_or("export_every", 1));
    params.finish();
    auto [a, b] = simulate_coupled(ctx.model, model_b, xi_a, xi_b, ctx.sim);
    require_complete(a);
    require_complete(b);
    const auto curve = estimate_moment_curve(a, b, DifferenceNorm::euclidean);
    write_file(ctx.out_dir / "moment_curve.csv",
               columns_csv({"t", "estimate", "se"}, {curve.grid, curve.estimates, curve.standard_errors}, stride));
    return {{"experiment", "couple"}, {"status", "complete"}, {"pass", true}, {"final_estimate", curve.estimates.back()}};
}

Json run_stability_check(Context& ctx, JsonReader params) {
    require_model(ctx, "stability-check");
    const auto xi_a = read_sampler(params, "xi_a", ctx.model);
    const auto xi_b = read_sampler(params, "xi_b", ctx.model);
    SlackPolicy policy;
    policy.k_se = params.number_or("k_se", 3.0);
    policy.rel_slack = params.number_or("rel_slack", 0.0);
    policy.m = ctx.model.m;
    policy.sqrt_m = ctx.model.m > 1;
    const auto stride = static_cast<std::size_t>(params.uint_or("export_every", 1));
    params.finish();

    const auto coeffs = gamma_delta_P(derive_holder_spec(ctx.model));
    auto [a, b] = simulate_coupled(ctx.model, ctx.model, xi_a, xi_b, ctx.sim);
    require_complete(a);
    require_complete(b);
    const auto curve = estimate_moment_curve(a, b, DifferenceNorm::euclidean);
    const double y0 = initial_frame_distance(a, b, ctx.model);
    const auto bound = gronwall_curve(coeffs.gamma_P, y0, coeffs.delta_P, curve.grid);
    const auto rep = check_moment_bound(curve, bound, policy);

    std::vector<double> flags;
    for (bool f : rep.flagged) flags.push_back(f ? 1.0 : 0.0);
    write_file(ctx.out_dir / "moment_report.csv",
               columns_csv({"t", "estimate", "se", "bound", "flag"},
                           {rep.grid, rep.estimate, rep.standard_error, rep.bound, flags}, stride));
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rep.grid.size(); ++k)
        worst = std::max(worst, rep.estimate[k] - policy.k_se * rep.standard_error[k] - rep.bound[k]);
    return {{"experiment", "stability-check"},
            {"status", "complete"},
            {"pass", rep.pass},
            {"flagged_nodes", rep.flagged_count},
            {"nodes", rep.grid.size()},
            {"worst_excess", worst},
            {"initial_distance", y0},
            {"k_se", policy.k_se},
            {"rel_slack", policy.rel_slack}};
}

Json run_lyapunov(Context& ctx, JsonReader params) {
    require_model(ctx, "lyapunov");
    const auto xi_a = read_sampler(params, "xi_a", ctx.model);
    const auto xi_b = read_sampler(params, "xi_b", ctx.model);
    const double alpha = params.number_or("alpha", 1.0);
    const double tail = params.number_or("tail_fraction", 0.25);
    const double slack = params.number_or("slack", 0.15);
    const double max_rel_se = params.number_or("max_rel_se", 0.1);
    std::optional<std::vector<double>> window, range;
    if (auto w = params.find("fit_window")) {
        window = w->numbers();
        if (window->size() != 2) w->fail("expected [start, end]");
    }
    if (auto r = params.find("lambda_range")) {
        range = r->numbers();
        if (range->size() != 2) r->fail("expected [low, high]");
    }
    const auto stride = static_cast<std::size_t>(params.uint_or("export_every", 1));
    params.finish();

    auto [a, b] = simulate_coupled(ctx.model, ctx.model, xi_a, xi_b, ctx.sim);
    require_complete(a);
    require_complete(b);
    const auto curve = estimate_moment_curve(a, b, DifferenceNorm::euclidean);
    const auto win = window ? std::pair<double, double>{(*window)[0], (*window)[1]} : reliable_window(curve, max_rel_se);
    const auto fit = fit_moment_lyapunov(curve, alpha, win.first, win.second);
    const auto path = estimate_pathwise_exponent(a, b, alpha, tail);
    write_file(ctx.out_dir / "moment_curve.csv",
               columns_csv({"t", "estimate", "se"}, {curve.grid, curve.estimates, curve.standard_errors}, stride));
    std::vector<double> ids(path.per_path.size());
    for (std::size_t p = 0; p < ids.size(); ++p) ids[p] = static_cast<double>(p);
    write_file(ctx.out_dir / "pathwise.csv", columns_csv({"particle", "exponent"}, {ids, path.per_path}));

    const bool halving = path.q90 <= fit.lambda_hat / 2.0 + slack;
    const bool in_range = !range || (fit.lambda_hat >= (*range)[0] && fit.lambda_hat <= (*range)[1]);
    auto finite_or_null = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    return {{"experiment", "lyapunov"},
            {"status", "complete"},
            {"pass", halving && in_range},
            {"lambda_hat", fit.lambda_hat},
            {"fit_window", {fit.window_start, fit.window_end}},
            {"fit_residual", fit.residual},
            {"fit_nodes", fit.nodes_used},
            {"lambda_in_range", in_range},
            {"pathwise",
             {{"median", finite_or_null(path.median)},
              {"q90", finite_or_null(path.q90)},
              {"max", finite_or_null(path.max)},
              {"degenerate_count", path.degenerate_count},
              {"paths", path.paths},
              {"window_start", path.window_start}}},
            {"halving_bound", fit.lambda_hat / 2.0 + slack},
            {"halving_pass", halving}};
}

Json run_picard(Context& ctx, JsonReader params) {
    require_model(ctx, "picard");
    const auto xi = read_sampler(params, "xi", ctx.model);
    PicardOptions opts;
    opts.tol = params.number_or("tol", opts.tol);
    opts.max_iter = static_cast<std::size_t>(params.uint_or("max_iter", opts.max_iter));
    const double k_se = params.number_or("k_se", 3.0);
    const auto stride = static_cast<std::size_t>(params.uint_or("export_stride", 10));
    const auto mu0_kind = params.string_or("mu0", "delta0");
    if (mu0_kind != "delta0") throw ConfigError(params.path() + ".mu0", "only \"delta0\" is supported");
    params.finish();

    std::vector<double> grid;
    for (std::size_t k = 0; k <= ctx.sim.steps(); ++k) grid.push_back(ctx.sim.time_at(k));
    grid.back() = ctx.sim.T;
    const auto mu0 = MeasureFlowGrid::point_mass(grid, ctx.model.m, ctx.sim.N);
    const auto run = picard_solve(ctx.model, xi, ctx.sim, mu0, opts);
    const auto note = series_variant_check(run, k_se);

    std::ostringstream pc;
    write_picard_csv(pc, run);
    write_file(ctx.out_dir / "picard.csv", pc.str());
    write_file(ctx.out_dir / "mean_curve.csv", mean_curve_csv(run.final_flow(), stride));
    write_flow_bundle(ctx.out_dir, "flow_x", run.final_flow(), stride);

    Json rows = Json::array();
    bool bound_ok = true;
    for (const auto& r : note.rows) {
        rows.push_back({{"n", r.n},
                        {"observed", r.observed},
                        {"se", r.standard_error},
                        {"factorial_tail", r.factorial_tail},
                        {"pass", r.factorial_ok}});
        bound_ok = bound_ok && r.factorial_ok;
    }

    Json growth = {{"checked", false}};
    bool growth_ok = true;
    try {
        const auto spec = derive_growth_spec(ctx.model);
        double xi_mean = 0.0;
        const auto& first = run.final_flow().measures.front();
        for (std::size_t p = 0; p < first.size(); ++p)
            for (std::size_t i = 0; i < ctx.model.m; ++i) {
                double v = 0.0;
                for (std::size_t r = 0; r < ctx.model.m; ++r) v += ctx.model.frame(r, i) * first.point(p)[r];
                xi_mean += std::abs(v);
            }
        xi_mean /= static_cast<double>(first.size());
        const auto rep = growth_envelope_check(run.final_flow(), spec, xi_mean, k_se);
        write_file(ctx.out_dir / "growth.csv",
                   columns_csv({"t", "observed", "se", "envelope"},
                               {rep.grid, rep.observed, rep.standard_error, rep.envelope}, stride));
        growth_ok = rep.pass;
        double min_margin = std::numeric_limits<double>::infinity();
        for (double m : rep.margin) min_margin = std::min(min_margin, m);
        growth = {{"checked", true}, {"pass", rep.pass}, {"min_margin", min_margin}};
    } catch (const InvalidArgument& e) {
        growth["reason"] = e.what();
    }

    return {{"experiment", "picard"},
            {"status", "complete"},
            {"pass", run.converged && bound_ok && growth_ok},
            {"converged", run.converged},
            {"iterations_used", run.iterations_used},
            {"final_distance", run.distances.back()},
            {"tol", opts.tol},
            {"delta", run.delta},
            {"delta_from_point_mass", run.delta_from_point_mass},
            {"kernel_integral", run.kernel_integral},
            {"c_P", run.bound_inputs.c_P},
            {"error_bound_check", {{"k_se", k_se}, {"pass", bound_ok}, {"rows", rows}}},
            {"growth_check", growth}};
}

Json run_bounds(Context& ctx, JsonReader params) {
    const auto spec = holder_spec_from_json(params.at("holder_spec"));
    double t0 = 0.0, T = 1.0;
    std::size_t points = 101;
    if (auto g = params.find("grid")) {
        t0 = g->number_or("t0", t0);
        T = g->number_or("T", T);
        points = static_cast<std::size_t>(g->uint_or("points", points));
        g->finish();
        if (!(T > t0) || points < 2) g->fail("need T > t0 and at least 2 points");
    }
    const double initial = params.number_or("initial", 1.0);
    std::optional<JsonReader> bihari = params.find("bihari");
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k)
        grid[k] = t0 + (T - t0) * static_cast<double>(k) / static_cast<double>(points - 1);

    const auto coeffs = gamma_delta_P(spec);
    std::vector<double> gam, del;
    for (double t : grid) {
        gam.push_back(coeffs.gamma_P(t));
        del.push_back(coeffs.delta_P(t));
    }
    write_file(ctx.out_dir / "coefficients.csv", columns_csv({"t", "gamma_P", "delta_P"}, {grid, gam, del}));
    const auto gr = gronwall_curve(coeffs.gamma_P, initial, coeffs.delta_P, grid);
    write_file(ctx.out_dir / "gronwall.csv", columns_csv({"t", "bound"}, {grid, gr}));
    Json v = {{"experiment", "bounds"}, {"status", "complete"}, {"pass", true}, {"final_bound", gr.back()}};
    if (bihari) {
        const auto rho = modulus_from_json(bihari->at("rho"));
        const double b0 = bihari->number_or("initial", initial);
        const auto add = coefficient_from_json(bihari->at("additive"));
        const auto mult = coefficient_from_json(bihari->at("multiplicative"));
        bihari->finish();
        const auto curve = bihari_bound_curve(rho, b0, add, mult, grid);
        write_file(ctx.out_dir / "bihari.csv", columns_csv({"t", "bound"}, {curve.grid, curve.values}));
        v["bihari_t0_plus"] = std::isfinite(curve.t0_plus) ? Json(curve.t0_plus) : Json(nullptr);
    }
    params.finish();
    return v;
}

Json run_yw_demo(Context& ctx, JsonReader params) {
    const auto rho = params.has("rho") ? modulus_from_json(params.at("rho")) : Modulus::power(0.5);
    const auto N = static_cast<int>(params.uint_or("n", 12));
    const auto grid_size = static_cast<std::size_t>(params.uint_or("grid_size", 1000));
    const double tol = params.number_or("tol", 1e-8);
    params.finish();
    if (N < 1 || N > 64) throw ConfigError("config.params.n", "must lie in [1, 64]");

    const auto seq = yw_sequence(rho, N);
    std::vector<double> ns, cut;
    Json checks = Json::array();
    bool pass = true;
    for (const auto& a : seq) {
        ns.push_back(a.n());
        cut.push_back(a.a_n());
        const auto rep = verify(a, grid_size, tol);
        for (const auto& c : rep.checks)
            checks.push_back({{"n", a.n()}, {"check", c.name}, {"violation", c.violation}, {"pass", c.pass}});
        pass = pass && rep.pass;
    }
    write_file(ctx.out_dir / "cutoffs.csv", columns_csv({"n", "a_n"}, {ns, cut}));
    const auto& last = seq.back();
    std::vector<double> xs, p0, p1, p2;
    const double lo = std::log(last.a_n() / 10.0), hi = std::log(10.0 * last.a_prev());
    for (std::size_t k = 0; k < grid_size; ++k) {
        const double x = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_size - 1));
        xs.push_back(x);
        p0.push_back(last.psi(x));
        p1.push_back(last.psi_prime(x));
        p2.push_back(last.psi_second(x));
    }
    write_file(ctx.out_dir / "psi.csv", columns_csv({"x", "psi", "psi_prime", "psi_second"}, {xs, p0, p1, p2}));
    return {{"experiment", "yw-demo"}, {"status", "complete"}, {"pass", pass}, {"checks", checks}};
}

Json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path, "cannot open configuration file");
    try {
        return Json::parse(is);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
}

/// Strip the manifest wrapper if present, checking its hash.
Json unwrap_manifest(Json j) {
    if (j.is_object() && j.contains("config") && j.contains("config_hash")) {
        Json cfg = j.at("config");
        if (sha256_hex(cfg.dump()) != j.at("config_hash").get<std::string>())
            throw ConfigError("manifest.config_hash", "does not match the embedded configuration");
        return cfg;
    }
    return j;
}

}  // namespace

void apply_override(Json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must have the form key=value");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }
    Json* node = &config;
    std::string walked = "config";
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string seg = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (seg.empty()) throw ConfigError(key, "empty path segment in override");
        walked += "." + seg;
        Json* child = nullptr;
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(seg);
            } catch (const std::exception&) {
                throw ConfigError(walked, "array index expected");
            }
            if (idx >= node->size()) throw ConfigError(walked, "array index out of range");
            child = &(*node)[idx];
        } else {
            if (node->is_null()) *node = Json::object();
            if (!node->is_object()) throw ConfigError(walked, "cannot descend into a non-object value");
            child = &(*node)[seg];
        }
        if (dot == std::string::npos) {
            *child = value;
            return;
        }
        node = child;
        start = dot + 1;
    }
}

int run_config(Json config, const RunOptions& options, std::ostream& out, std::ostream& err) {
    try {
        for (const auto& o : options.overrides) apply_override(config, o);
        if (options.seed) {
            if (!config.contains("sim")) config["sim"] = Json::object();
            config["sim"]["seed"] = std::to_string(*options.seed);
        }
        if (options.out_dir) config["output_dir"] = *options.out_dir;

        JsonReader root(config, "config");
        root.expect_object();
        const std::string experiment = root.at("experiment").string();
        root.skip("description");
        Context ctx;
        if (root.has("model") && root.has("model_id"))
            throw ConfigError("config.model_id", "give either model or model_id, not both");
        if (auto m = root.find("model")) {
            ctx.model = model_from_json(*m);
            ctx.has_model = true;
        } else if (auto id = root.find("model_id")) {
            const auto& entry = catalog_entry(id->string());
            ctx.model = model_from_json(JsonReader(entry.model, "config.model"));
            ctx.has_model = true;
        }
        if (auto s = root.find("sim")) {
            ctx.sim = sim_config_from_json(*s);
            ctx.has_sim = true;
        }
        ctx.sim.threads = options.threads;
        ctx.out_dir = root.string_or("output_dir", "mkvlab_out");
        const Json& params_json = config.contains("params") ? config.at("params") : empty_object();
        root.skip("params");
        root.finish();
        JsonReader params(params_json, "config.params");
        params.expect_object();

        fs::create_directories(ctx.out_dir);
        Json hashed = config;
        hashed.erase("output_dir");
        Json manifest = {{"experiment", experiment},
                         {"config", hashed},
                         {"config_hash", sha256_hex(hashed.dump())},
                         {"seed", std::to_string(ctx.sim.seed)},
                         {"model_fingerprint", ctx.has_model ? model_fingerprint(ctx.model) : ""},
                         {"versions", {{"mkvlab", kVersion}, {"json", "nlohmann 3.11.3"}}}};

        int code = kExitPass;
        Json verdict;
        if (experiment == "simulate") {
            verdict = run_simulate(ctx, params, err, code);
        } else if (experiment == "couple") {
            verdict = run_couple(ctx, params);
        } else if (experiment == "stability-check") {
            verdict = run_stability_check(ctx, params);
        } else if (experiment == "lyapunov") {
            verdict = run_lyapunov(ctx, params);
        } else if (experiment == "picard") {
            verdict = run_picard(ctx, params);
        } else if (experiment == "bounds") {
            verdict = run_bounds(ctx, params);
        } else if (experiment == "yw-demo") {
            verdict = run_yw_demo(ctx, params);
        } else {
            throw ConfigError("config.experiment", "unknown experiment '" + experiment + "'");
        }
        write_file(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
        write_file(ctx.out_dir / "verdict.json", verdict.dump(2) + "\n");
        if (code == kExitPass && !verdict.value("pass", true)) code = kExitVerdictFail;
        out << experiment << ": " << (code == kExitPass ? "pass" : code == kExitVerdictFail ? "FAIL" : "error")
            << " (" << ctx.out_dir.string() << ")\n";
        return code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const BlowUpError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
    } catch (const NumericalError& e) {
        err << "error: numerical failure: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitError;
}

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    Json config;
    try {
        config = unwrap_manifest(load_json_file(options.config_path));
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return run_config(std::move(config), options, out, err);
}

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> v;
        v.push_back({"mean_field_ou",
                     "mean-field OU: dX = (-2X + E[X]) dt + 0.3 |X|^(1/2) dW",
                     Json::parse(R"({"m": 1, "d": 1,
                        "drift": {"linear_eta": [-2.0],
                                  "measure_terms": [{"lambda": [[1.0]], "g": {"type": "mean"}}]},
                        "diffusion": [{"eta0": [0.0], "terms": [{"eta": [0.3], "alpha": 0.5}]}]})"),
                     Json::parse(R"({"kind": "constant", "value": [1.0]})")});
        v.push_back({"sqrt_contraction",
                     "square-root-diffusion contraction: dX = -X dt + 0.5 |X|^(1/2) dW",
                     Json::parse(R"({"m": 1, "d": 1,
                        "drift": {"linear_eta": [-1.0]},
                        "diffusion": [{"eta0": [0.0], "terms": [{"eta": [0.5], "alpha": 0.5}]}]})"),
                     Json::parse(R"({"kind": "constant", "value": [1.0]})")});
        v.push_back({"odd_poly",
                     "odd-polynomial drift in R^2: dX = (-X - X^3 + 0.5 E[X]) dt + diag(0.3 |X_1|^(1/2), 0.2 |X_2|) dW",
                     Json::parse(R"({"m": 2, "d": 2,
                        "drift": {"linear_eta": [-1.0, -1.0],
                                  "nonlinear_terms": [{"eta": [1.0, 1.0], "f": {"type": "odd_poly_neg", "degree": 3}}],
                                  "measure_terms": [{"lambda": [[0.5, 0.0], [0.0, 0.5]], "g": {"type": "mean"}}]},
                        "diffusion": [{"eta0": [0.0, 0.0], "terms": [{"eta": [0.3, 0.0], "alpha": 0.5}]},
                                      {"eta0": [0.0, 0.0], "terms": [{"eta": [0.0, 0.2], "alpha": 1.0}]}]})"),
                     Json::parse(R"({"kind": "uniform", "low": [-1.0, -1.0], "high": [1.0, 1.0]})")});
        v.push_back({"pure_sde",
                     "no measure term: dX = -2X dt + 0.3 |X|^(1/2) dW",
                     Json::parse(R"({"m": 1, "d": 1,
                        "drift": {"linear_eta": [-2.0]},
                        "diffusion": [{"eta0": [0.0], "terms": [{"eta": [0.3], "alpha": 0.5}]}]})"),
                     Json::parse(R"({"kind": "constant", "value": [1.0]})")});
        v.push_back({"zero", "zero drift and zero diffusion in R^1",
                     Json::parse(R"({"m": 1, "d": 1})"),
                     Json::parse(R"({"kind": "constant", "value": [0.5]})")});
        return v;
    }();
    return entries;
}

const CatalogEntry& catalog_entry(const std::string& id) {
    for (const auto& e : catalog())
        if (e.id == id) return e;
    throw ConfigError("model_id", "unknown catalog model '" + id + "'");
}

int main_entry(int argc, char** argv) {
    CLI::App app{"mkvlab: McKean-Vlasov numerical laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    RunOptions opts;
    std::string out_dir;
    std::uint64_t seed = 0;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment configuration (or a manifest.json)");
    run_cmd->add_option("--config", opts.config_path, "JSON configuration or manifest")->required();
    run_cmd->add_option("--set", opts.overrides, "Override a config value: dotted.path=value (repeatable)");
    auto* out_opt = run_cmd->add_option("--out", out_dir, "Output directory");
    auto* seed_opt = run_cmd->add_option("--seed", seed, "64-bit seed (overrides sim.seed)");
    run_cmd->add_option("--threads", opts.threads, "Worker threads; results do not depend on it")
        ->check(CLI::NonNegativeNumber);

    auto* list_cmd = app.add_subcommand("list-models", "List built-in models");
    std::string show_id;
    auto* show_cmd = app.add_subcommand("show-model", "Print a built-in model as JSON");
    show_cmd->add_option("id", show_id, "Model id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitError;
    }

    if (*list_cmd) {
        for (const auto& e : catalog()) std::cout << e.id << "\t" << e.description << "\n";
        return 0;
    }
    if (*show_cmd) {
        try {
            const auto& e = catalog_entry(show_id);
            std::cout << Json{{"model", e.model}, {"xi", e.xi}}.dump(2) << "\n";
            return 0;
        } catch (const ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitError;
        }
    }
    if (*out_opt) opts.out_dir = out_dir;
    if (*seed_opt) opts.seed = seed;
    return run(opts, std::cout, std::cerr);
}

}  // namespace mkvlab::cli
