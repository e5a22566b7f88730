#include "mkvlab/sde_engine.hpp"

#include "mkvlab/error.hpp"
#include "mkvlab/model_io.hpp"
#include "mkvlab/rng.hpp"
#include "mkvlab/thread_pool.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mkvlab {

namespace {

constexpr double kBlowUpThreshold = 1e9;

/// Coefficient values shared by all particles at one step.
struct StepCoefficients {
    std::vector<double> drift_const;                 // u'(kappa + measure drift), m
    std::vector<double> eta;                         // m
    std::vector<std::vector<double>> eta_n;          // per nonlinear term, m
    std::vector<double> eta0;                        // m x d
    std::vector<std::vector<double>> eta_k;          // per row: terms x d
};

class Stepper {
public:
    Stepper(const ModelSpec& model, const SimConfig& cfg)
        : model_(model), cfg_(cfg), m_(model.m), d_(model.d), identity_(model.has_identity_frame()) {
        absorbing_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) absorbing_[i] = model.diffusion[i].eta0.is_zero();
        c_.drift_const.resize(m_);
        c_.eta.resize(m_);
        c_.eta_n.assign(model.nonlinear_terms.size(), std::vector<double>(m_));
        c_.eta0.resize(m_ * d_);
        c_.eta_k.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) c_.eta_k[i].resize(model.diffusion[i].terms.size() * d_);
    }

    /// Evaluate time-dependent coefficients; `measure_drift` is sum_k lambda_k g_k(mu) in x-coordinates.
    void prepare(double t, const std::vector<double>& measure_drift) {
        const auto kappa = model_.kappa.values(t);
        for (std::size_t i = 0; i < m_; ++i) {
            double s = 0.0;
            for (std::size_t r = 0; r < m_; ++r) s += model_.frame(r, i) * (kappa[r] + measure_drift[r]);
            c_.drift_const[i] = s;
        }
        model_.linear_eta.values_into(t, c_.eta);
        for (std::size_t n = 0; n < c_.eta_n.size(); ++n) model_.nonlinear_terms[n].eta.values_into(t, c_.eta_n[n]);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = model_.diffusion[i];
            row.eta0.values_into(t, std::span<double>(c_.eta0.data() + i * d_, d_));
            for (std::size_t k = 0; k < row.terms.size(); ++k)
                row.terms[k].eta.values_into(t, std::span<double>(c_.eta_k[i].data() + k * d_, d_));
        }
    }

    /// One Euler-Maruyama step of one particle; returns false on blow-up.
    bool advance(const double* x, double* out, std::size_t particle, std::size_t step, double* v, double* z) const {
        counter_normals(cfg_.seed, static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(step),
                        NoiseStream::brownian, d_, z);
        const double sqdt = std::sqrt(cfg_.dt);
        for (std::size_t j = 0; j < d_; ++j) z[j] *= sqdt;
        if (identity_) {
            std::copy(x, x + m_, v);
        } else {
            for (std::size_t i = 0; i < m_; ++i) {
                double s = 0.0;
                for (std::size_t r = 0; r < m_; ++r) s += model_.frame(r, i) * x[r];
                v[i] = s;
            }
        }
        double* vn = v + m_;
        for (std::size_t i = 0; i < m_; ++i) {
            const double vi = v[i];
            double b = c_.drift_const[i] + c_.eta[i] * vi;
            for (std::size_t n = 0; n < c_.eta_n.size(); ++n) {
                const double e = c_.eta_n[n][i];
                if (e != 0.0) b += e * model_.nonlinear_terms[n].f[i](vi);
            }
            const auto& terms = model_.diffusion[i].terms;
            const double av = std::abs(vi);
            double noise = 0.0;
            for (std::size_t j = 0; j < d_; ++j) {
                double s = c_.eta0[i * d_ + j];
                for (std::size_t k = 0; k < terms.size(); ++k) {
                    const double e = c_.eta_k[i][k * d_ + j];
                    if (e == 0.0) continue;
                    const double a = terms[k].alpha;
                    s += e * (a == 0.5 ? std::sqrt(av) : (a == 1.0 ? av : std::pow(av, a)));
                }
                noise += s * z[j];
            }
            const double drift_only = vi + b * cfg_.dt;
            double next = drift_only + noise;
            if (cfg_.root_policy == RootPolicy::absorb && absorbing_[i] && vi != 0.0) {
                const bool crosses = (vi > 0.0) ? next <= 0.0 : next >= 0.0;
                const bool drift_crosses = (vi > 0.0) ? drift_only <= 0.0 : drift_only >= 0.0;
                if (crosses && !drift_crosses) next = 0.0;
            }
            vn[i] = next;
        }
        if (identity_) {
            std::copy(vn, vn + m_, out);
        } else {
            for (std::size_t r = 0; r < m_; ++r) {
                double s = 0.0;
                for (std::size_t i = 0; i < m_; ++i) s += model_.frame(r, i) * vn[i];
                out[r] = s;
            }
        }
        for (std::size_t r = 0; r < m_; ++r)
            if (!std::isfinite(out[r]) || std::abs(out[r]) > kBlowUpThreshold) return false;
        return true;
    }

private:
    const ModelSpec& model_;
    const SimConfig& cfg_;
    std::size_t m_, d_;
    bool identity_;
    std::vector<char> absorbing_;
    StepCoefficients c_;
};

/// Source of the measure argument at a given step.
class MeasureSource {
public:
    virtual ~MeasureSource() = default;
    /// sum_k lambda_k(t) g_k(mu_t), x-coordinates.
    virtual std::vector<double> drift(const ModelSpec& model, double t, std::span<const double> current) = 0;
};

std::vector<double> measure_drift_of(const ModelSpec& model, double t, std::span<const double> states) {
    std::vector<double> out(model.m, 0.0);
    for (const auto& term : model.measure_terms) {
        const std::size_t k = term.g.out_dim(model.m);
        std::vector<double> g(k);
        term.g.eval(states, model.m, g);
        const auto lam = term.lambda.values(t);
        for (std::size_t r = 0; r < model.m; ++r)
            for (std::size_t c = 0; c < k; ++c) out[r] += lam[r * k + c] * g[c];
    }
    return out;
}

class InteractingSource : public MeasureSource {
public:
    std::vector<double> drift(const ModelSpec& model, double t, std::span<const double> current) override {
        return measure_drift_of(model, t, current);
    }
};

class FrozenSource : public MeasureSource {
public:
    explicit FrozenSource(const MeasureFlowGrid& flow) : flow_(flow) {}
    std::vector<double> drift(const ModelSpec& model, double t, std::span<const double>) override {
        const std::size_t idx = flow_.locate(t);
        // g_k(mu) is constant between nodes; lambda_k(t) is not.
        if (idx != cached_node_) {
            cached_node_ = idx;
            cached_g_.clear();
            for (const auto& term : model.measure_terms) {
                std::vector<double> g(term.g.out_dim(model.m));
                term.g.eval(flow_.measures[idx].coords(), model.m, g);
                cached_g_.push_back(std::move(g));
            }
        }
        std::vector<double> out(model.m, 0.0);
        for (std::size_t n = 0; n < model.measure_terms.size(); ++n) {
            const auto& g = cached_g_[n];
            const auto lam = model.measure_terms[n].lambda.values(t);
            for (std::size_t r = 0; r < model.m; ++r)
                for (std::size_t c = 0; c < g.size(); ++c) out[r] += lam[r * g.size() + c] * g[c];
        }
        return out;
    }

private:
    const MeasureFlowGrid& flow_;
    std::size_t cached_node_ = static_cast<std::size_t>(-1);
    std::vector<std::vector<double>> cached_g_;
};

PathEnsemble run(const ModelSpec& model, const InitialSampler& xi, const SimConfig& cfg, MeasureSource& source,
                 const std::string& fingerprint) {
    const std::size_t m = model.m, N = cfg.N, steps = cfg.steps(), stride = cfg.record_every;
    PathEnsemble ens;
    ens.N = N;
    ens.m = m;
    ens.seed = cfg.seed;
    ens.model_fingerprint = fingerprint;
    std::size_t nodes = 1 + steps / stride + (steps % stride ? 1 : 0);
    ens.grid.reserve(nodes);
    ens.states.resize(nodes * N * m);

    std::vector<double> cur(N * m), next(N * m);
    for (std::size_t p = 0; p < N; ++p) xi.sample(cfg.seed, p, std::span<double>(cur.data() + p * m, m));
    std::copy(cur.begin(), cur.end(), ens.states.begin());
    ens.grid.push_back(cfg.t0);

    ThreadPool pool(resolve_thread_count(cfg.threads));
    Stepper stepper(model, cfg);
    std::vector<char> bad(N, 0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = cfg.time_at(k);
        const auto md = model.measure_terms.empty() ? std::vector<double>(m, 0.0) : source.drift(model, t, cur);
        stepper.prepare(t, md);
        pool.parallel_for(N, [&](std::size_t begin, std::size_t end) {
            std::vector<double> v(2 * m), z(model.d + 4);
            for (std::size_t p = begin; p < end; ++p)
                bad[p] = !stepper.advance(cur.data() + p * m, next.data() + p * m, p, k, v.data(), z.data());
        });
        const auto first_bad = std::find(bad.begin(), bad.end(), 1);
        if (first_bad != bad.end()) {
            const std::size_t p = static_cast<std::size_t>(first_bad - bad.begin());
            ens.blow_up = BlowUp{p, k + 1, cfg.time_at(k + 1), next[p * m]};
            break;
        }
        cur.swap(next);
        if ((k + 1) % stride == 0 || k + 1 == steps) {
            std::copy(cur.begin(), cur.end(), ens.states.begin() + static_cast<std::ptrdiff_t>(ens.grid.size() * N * m));
            ens.grid.push_back(k + 1 == steps ? cfg.T : cfg.time_at(k + 1));
        }
    }
    ens.states.resize(ens.grid.size() * N * m);
    return ens;
}

}  // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("sim.dt: must be > 0");
    if (!(T > t0)) throw InvalidArgument("sim.T: must exceed t0");
    const double ratio = (T - t0) / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw InvalidArgument("sim.dt: (T - t0) / dt must be an integer");
    if (std::round(ratio) > 4.0e9) throw InvalidArgument("sim.dt: too many steps");
    if (N < 1) throw InvalidArgument("sim.N: must be >= 1");
    if (N > 0xffffffffULL) throw InvalidArgument("sim.N: exceeds the counter stream range");
    if (scheme != "euler_maruyama") throw InvalidArgument("sim.scheme: only euler_maruyama is supported");
    if (record_every < 1) throw InvalidArgument("sim.record_every: must be >= 1");
}

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround((T - t0) / dt)); }

MeasureFlowGrid MeasureFlowGrid::point_mass(std::vector<double> grid, std::size_t dim, std::size_t n) {
    MeasureFlowGrid f;
    f.measures.assign(grid.size(), EmpiricalMeasure::point_mass(dim, n));
    f.grid = std::move(grid);
    return f;
}

void MeasureFlowGrid::validate() const {
    if (grid.empty() || grid.size() != measures.size())
        throw InvalidArgument("measure flow: need one measure per grid node");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw InvalidArgument("measure flow: grid must be strictly increasing");
    for (const auto& mu : measures)
        if (mu.dim() != measures.front().dim() || mu.size() != measures.front().size())
            throw InvalidArgument("measure flow: all measures must share dimension and size");
}

std::size_t MeasureFlowGrid::locate(double t) const {
    const double tol = 1e-9 * (1.0 + std::abs(t));
    auto it = std::upper_bound(grid.begin(), grid.end(), t + tol);
    if (it == grid.begin()) throw InvalidArgument("measure flow: time before the first node");
    return static_cast<std::size_t>(it - grid.begin()) - 1;
}

InitialSampler InitialSampler::constant(std::vector<double> x0) {
    InitialSampler s;
    s.a = std::move(x0);
    return s;
}

void InitialSampler::validate(std::size_t m) const {
    switch (kind) {
        case Kind::constant:
            if (a.size() != m) throw InvalidArgument("xi.value: need m entries");
            break;
        case Kind::normal:
        case Kind::uniform:
            if (a.size() != m || b.size() != m) throw InvalidArgument("xi: need m entries for both parameters");
            for (std::size_t k = 0; k < m; ++k) {
                if (kind == Kind::normal && !(b[k] >= 0.0)) throw InvalidArgument("xi.std: must be >= 0");
                if (kind == Kind::uniform && !(b[k] >= a[k])) throw InvalidArgument("xi.high: must be >= low");
            }
            break;
        case Kind::points:
            if (points.empty() || points.size() % m != 0) throw InvalidArgument("xi.points: need rows of m entries");
            break;
    }
    for (double v : a)
        if (!std::isfinite(v)) throw InvalidArgument("xi: non-finite parameter");
    for (double v : b)
        if (!std::isfinite(v)) throw InvalidArgument("xi: non-finite parameter");
}

void InitialSampler::sample(std::uint64_t seed, std::size_t particle, std::span<double> out) const {
    const std::size_t m = out.size();
    switch (kind) {
        case Kind::constant: std::copy(a.begin(), a.end(), out.begin()); break;
        case Kind::normal: {
            std::vector<double> z(m);
            counter_normals(seed, static_cast<std::uint32_t>(particle), 0, NoiseStream::initial, m, z.data());
            for (std::size_t k = 0; k < m; ++k) out[k] = a[k] + b[k] * z[k];
            break;
        }
        case Kind::uniform: {
            std::vector<double> u(m);
            counter_uniforms(seed, static_cast<std::uint32_t>(particle), 0, NoiseStream::initial, m, u.data());
            for (std::size_t k = 0; k < m; ++k) out[k] = a[k] + (b[k] - a[k]) * u[k];
            break;
        }
        case Kind::points: {
            const std::size_t rows = points.size() / m;
            const std::size_t r = particle % rows;
            std::copy(points.begin() + static_cast<std::ptrdiff_t>(r * m),
                      points.begin() + static_cast<std::ptrdiff_t>((r + 1) * m), out.begin());
            break;
        }
    }
}

EmpiricalMeasure PathEnsemble::measure_at(std::size_t node) const {
    const auto s = node_states(node);
    return EmpiricalMeasure(m, std::vector<double>(s.begin(), s.end()));
}

MeasureFlowGrid PathEnsemble::to_flow() const {
    MeasureFlowGrid f;
    f.grid = grid;
    f.measures.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) f.measures.push_back(measure_at(k));
    return f;
}

BlowUpError::BlowUpError(const BlowUp& b)
    : std::runtime_error("engine blow-up: particle " + std::to_string(b.particle) + " at step " +
                         std::to_string(b.step) + " (t = " + std::to_string(b.time) +
                         ", value = " + std::to_string(b.value) + ")"),
      where(b) {}

void require_complete(const PathEnsemble& ens) {
    if (ens.blow_up) throw BlowUpError(*ens.blow_up);
}

PathEnsemble simulate_frozen(const ModelSpec& model, const MeasureFlowGrid& flow, const InitialSampler& xi,
                             const SimConfig& cfg) {
    model.validate();
    cfg.validate();
    xi.validate(model.m);
    flow.validate();
    if (flow.measures.front().dim() != model.m) throw InvalidArgument("simulate_frozen: flow dimension mismatch");
    if (flow.grid.front() > cfg.t0 + 1e-9 * (1.0 + std::abs(cfg.t0)) ||
        flow.grid.back() < cfg.time_at(cfg.steps() - 1) - 1e-9 * (1.0 + std::abs(cfg.T)))
        throw InvalidArgument("simulate_frozen: measure flow does not cover [t0, T]");
    FrozenSource source(flow);
    return run(model, xi, cfg, source, model_fingerprint(model));
}

PathEnsemble simulate_particle_system(const ModelSpec& model, const InitialSampler& xi, const SimConfig& cfg) {
    model.validate();
    cfg.validate();
    xi.validate(model.m);
    InteractingSource source;
    return run(model, xi, cfg, source, model_fingerprint(model));
}

std::pair<PathEnsemble, PathEnsemble> simulate_coupled(const ModelSpec& model_a, const ModelSpec& model_b,
                                                        const InitialSampler& xi_a, const InitialSampler& xi_b,
                                                        const SimConfig& cfg) {
    if (model_a.m != model_b.m || model_a.d != model_b.d)
        throw InvalidArgument("simulate_coupled: models must share (m, d)");
    auto a = simulate_particle_system(model_a, xi_a, cfg);
    auto b = simulate_particle_system(model_b, xi_b, cfg);
    return {std::move(a), std::move(b)};
}

}  // namespace mkvlab
