#include "mkvlab/coeff_calc.hpp"

#include "mkvlab/error.hpp"
#include "mkvlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>

namespace mkvlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_exponents(const std::vector<double>& alpha, const std::vector<double>& beta, const char* what) {
    if (alpha.size() != beta.size()) throw InvalidArgument(std::string(what) + ": alpha and beta differ in length");
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (!(alpha[k] > 0.0 && alpha[k] <= 1.0))
            throw InvalidArgument(std::string(what) + ".alpha[" + std::to_string(k) + "]: must lie in (0,1]");
        if (!(beta[k] > 0.0 && beta[k] <= 1.0))
            throw InvalidArgument(std::string(what) + ".beta[" + std::to_string(k) + "]: must lie in (0,1]");
    }
}

void check_terms(const std::vector<double>& alpha, const std::vector<CoefficientFn>& mats,
                 const std::vector<CoefficientFn>& vecs, const CoefficientFn& c0z, double c_P, const char* what) {
    if (mats.size() != alpha.size() || vecs.size() != alpha.size())
        throw InvalidArgument(std::string(what) + ": one matrix and one vector per term required");
    if (!c0z.is_scalar()) throw InvalidArgument(std::string(what) + ".c0_zeta0: must be scalar");
    if (!(c_P >= 0.0)) throw InvalidArgument(std::string(what) + ".c_P: must be >= 0");
    if (mats.empty()) return;
    const std::size_t m = mats.front().rows();
    for (std::size_t k = 0; k < mats.size(); ++k) {
        const std::string where = std::string(what) + "[" + std::to_string(k) + "]";
        if (mats[k].rows() != m || mats[k].cols() != m) throw InvalidArgument(where + ": matrix must be m x m");
        if (vecs[k].rows() != m || vecs[k].cols() != 1) throw InvalidArgument(where + ": vector must have m entries");
        const double a = std::isinf(mats[k].start()) ? 0.0 : mats[k].start();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (i != j && mats[k].sampled_min(i, j, a, a + 100.0) < 0.0)
                    throw InvalidArgument(where + ": off-diagonal entries must be >= 0");
    }
}

struct Aggregate {
    CoefficientFn exponential;
    CoefficientFn drift;
};

/// Shared algebra of (gamma_P, delta_P) and (f_P, g_P).
Aggregate aggregate(const std::vector<double>& alpha, const std::vector<double>& beta,
                    const std::vector<CoefficientFn>& mats, const std::vector<CoefficientFn>& vecs,
                    const CoefficientFn& c0z, double c_P, bool include_measure) {
    std::vector<const CoefficientFn*> inputs{&c0z};
    for (const auto& f : mats) inputs.push_back(&f);
    for (const auto& f : vecs) inputs.push_back(&f);
    const std::size_t l = alpha.size();
    const std::size_t m = l ? mats.front().rows() : 0;

    auto column_brackets = [&](double t, std::size_t k) {
        const auto M = mats[k].values(t);
        const double q = dual_exponent(alpha[k]);
        std::vector<double> out(m);
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += M[i * m + j];
            out[j] = bracket_norm(s, q);
        }
        return out;
    };
    auto lambda0 = [&](double t, std::size_t k) {
        if (!include_measure) return 0.0;
        double s = 0.0;
        for (double v : vecs[k].values(t)) s += std::max(v, 0.0);
        return std::pow(c_P, beta[k]) * s;
    };

    Aggregate out;
    out.exponential = resample_formula(inputs, [&](double t) {
        double best = l ? -kInf : 0.0;
        std::vector<double> per_column(m, 0.0);
        double measure = 0.0;
        for (std::size_t k = 0; k < l; ++k) {
            const auto br = column_brackets(t, k);
            for (std::size_t j = 0; j < m; ++j) per_column[j] += alpha[k] * br[j];
            measure += beta[k] * lambda0(t, k);
        }
        for (std::size_t j = 0; j < m; ++j) best = std::max(best, per_column[j] + measure);
        return c0z(t) + best;
    });
    out.drift = resample_formula(inputs, [&](double t) {
        double s = 0.0;
        for (std::size_t k = 0; k < l; ++k) {
            const auto br = column_brackets(t, k);
            for (double b : br) s += (1.0 - alpha[k]) * b;
            s += (1.0 - beta[k]) * lambda0(t, k);
        }
        return s;
    });
    return out;
}

CoefficientFn positive_sum(const CoefficientFn& v) {
    const CoefficientFn* in[] = {&v};
    return resample_formula(in, [&](double t) {
        double s = 0.0;
        for (double x : v.values(t)) s += std::max(x, 0.0);
        return s;
    });
}

/// Scalar functions t -> |u_i' A(t)| * scale for each frame row i; A is m x c.
std::vector<CoefficientFn> frame_row_norms(const ModelSpec& model, const CoefficientFn& A, double scale) {
    std::vector<CoefficientFn> out;
    const CoefficientFn* in[] = {&A};
    const std::size_t m = model.m, c = A.cols();
    for (std::size_t i = 0; i < m; ++i) {
        out.push_back(resample_formula(in, [&, i](double t) {
            const auto vals = A.values(t);
            double s = 0.0;
            for (std::size_t col = 0; col < c; ++col) {
                double r = 0.0;
                for (std::size_t row = 0; row < m; ++row) r += model.frame(row, i) * vals[row * c + col];
                s += r * r;
            }
            return scale * std::sqrt(s);
        }));
    }
    return out;
}

CoefficientFn diagonal(const std::vector<CoefficientFn>& diag) {
    const std::size_t m = diag.size();
    std::vector<CoefficientFn> entries;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) entries.push_back(i == j ? diag[i] : CoefficientFn::constant(0.0));
    return CoefficientFn::stack(m, m, entries);
}

/// Per-term coordinate accumulators keyed by (alpha, beta).
struct TermAccumulator {
    std::vector<CoefficientFn> diag;
    std::vector<CoefficientFn> vec;
};

TermAccumulator& term_for(std::map<std::pair<double, double>, TermAccumulator>& terms, double alpha, double beta,
                          std::size_t m) {
    auto& t = terms[{alpha, beta}];
    if (t.diag.empty()) {
        t.diag.assign(m, CoefficientFn::constant(0.0));
        t.vec.assign(m, CoefficientFn::constant(0.0));
    }
    return t;
}

}  // namespace

double dual_exponent(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("dual_exponent: alpha must lie in (0,1]");
    return alpha == 1.0 ? kInf : 1.0 / (1.0 - alpha);
}

double bracket_norm(double x, double p) {
    if (!(p >= 1.0)) throw InvalidArgument("bracket_norm: p must be >= 1");
    return std::isinf(p) ? x : std::max(x, 0.0);
}

void HolderTermSpec::validate() const {
    check_exponents(alpha, beta, "holder_spec");
    check_terms(alpha, eta, lambda, c0_zeta0, c_P, "holder_spec.eta");
    if (!epsilon.is_scalar()) throw InvalidArgument("holder_spec.epsilon: must be scalar");
}

void GrowthTermSpec::validate() const {
    check_exponents(alpha, beta, "growth_spec");
    check_terms(alpha, upsilon, chi, c0_zeta0, c_P, "growth_spec.upsilon");
    if (!upsilon.empty() && (kappa.rows() != upsilon.front().rows() || kappa.cols() != 1))
        throw InvalidArgument("growth_spec.kappa: must have m entries");
}

StabilityCoefficients gamma_delta_P(const HolderTermSpec& spec) {
    spec.validate();
    auto agg = aggregate(spec.alpha, spec.beta, spec.eta, spec.lambda, spec.c0_zeta0, spec.c_P, true);
    return {std::move(agg.exponential), std::move(agg.drift)};
}

GrowthCoefficients f_g_P(const GrowthTermSpec& spec) {
    spec.validate();
    auto agg = aggregate(spec.alpha, spec.beta, spec.upsilon, spec.chi, spec.c0_zeta0, spec.c_P, true);
    return {std::move(agg.exponential), std::move(agg.drift), positive_sum(spec.kappa)};
}

PicardBoundInputs picard_bound_inputs(const HolderTermSpec& spec) {
    spec.validate();
    CoefficientFn lambda0 = CoefficientFn::constant(0.0);
    for (std::size_t k = 0; k < spec.l(); ++k) {
        const auto part = positive_sum(spec.lambda[k]);
        if (spec.beta[k] != 1.0 && !part.is_zero())
            throw InvalidArgument("picard bound: measure terms must be Lipschitz (beta = 1)");
        lambda0 = lambda0 + part;
    }
    auto agg = aggregate(spec.alpha, spec.beta, spec.eta, spec.lambda, spec.c0_zeta0, spec.c_P, false);
    return {std::move(agg.exponential), std::move(lambda0), spec.c_P};
}

std::vector<double> gronwall_curve(const CoefficientFn& gamma, double initial, const CoefficientFn& forcing,
                                   std::span<const double> grid) {
    if (grid.empty()) throw InvalidArgument("gronwall_curve: empty grid");
    if (!gamma.is_scalar() || !forcing.is_scalar()) throw InvalidArgument("gronwall_curve: scalar inputs required");
    const double t0 = grid.front();
    const auto G = gamma.antiderivative(t0);
    std::vector<double> cuts = gamma.breaks();
    cuts.insert(cuts.end(), forcing.breaks().begin(), forcing.breaks().end());
    std::sort(cuts.begin(), cuts.end());

    std::vector<double> out(grid.size());
    out[0] = initial;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k], b = grid[k + 1];
        if (!(b > a)) throw InvalidArgument("gronwall_curve: grid must be strictly increasing");
        if (forcing(a) < -1e-14) throw InvalidArgument("gronwall_curve: forcing must be >= 0");
        const double Gb = G(b);
        std::vector<double> nodes{a};
        for (double c : cuts)
            if (c > a && c < b) nodes.push_back(c);
        nodes.push_back(b);
        double inc = 0.0;
        for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
            const double lo = nodes[s], hi = nodes[s + 1];
            const int chunks = 1 + static_cast<int>(std::min(1e4, std::abs(G(hi) - G(lo)) / 0.5 + (hi - lo)));
            for (int c = 0; c < chunks; ++c) {
                const double x0 = lo + (hi - lo) * c / chunks, x1 = lo + (hi - lo) * (c + 1) / chunks;
                inc += gauss_legendre10([&](double s2) { return std::exp(Gb - G(s2)) * forcing(s2); }, x0, x1);
            }
        }
        out[k + 1] = std::exp(Gb - G(a)) * out[k] + inc;
    }
    return out;
}

void PowerEnvelope::validate() const {
    const std::size_t l = alpha.size();
    if (l == 0 || lambda_hat.size() != l || s.size() != l)
        throw InvalidArgument("power envelope: alpha, lambda_hat and s must have equal nonzero length");
    for (std::size_t k = 0; k < l; ++k) {
        if (!(alpha[k] > 0.0)) throw InvalidArgument("power envelope: alpha entries must be > 0");
        if (k > 0 && !(alpha[k] > alpha[k - 1])) throw InvalidArgument("power envelope: alpha must be strictly increasing");
        if (s[k] > t1) throw InvalidArgument("power envelope: every s_k must be <= t1");
    }
    if (!(lambda_hat.back() < 0.0)) throw InvalidArgument("power envelope: lambda_hat_l must be < 0");
}

double PowerEnvelope::operator()(double t) const {
    double r = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        const double x = t - s[k];
        r += lambda_hat[k] * alpha[k] * (alpha[k] == 1.0 ? 1.0 : std::pow(x, alpha[k] - 1.0));
    }
    return r;
}

PowerEnvelopeReport check_power_envelope(const std::function<double(double)>& gamma_P, const PowerEnvelope& env,
                                         double T, std::size_t grid_points) {
    env.validate();
    if (!(T > env.t1) || grid_points < 2) throw InvalidArgument("power envelope: need T > t1 and at least two points");
    PowerEnvelopeReport r;
    r.alpha_l = env.alpha.back();
    r.lambda_hat_l = env.lambda_hat.back();
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double t = env.t1 + (T - env.t1) * static_cast<double>(k) / static_cast<double>(grid_points - 1);
        const double rhs = env(t);
        const double g = gamma_P(t);
        r.grid.push_back(t);
        if (!std::isfinite(rhs) && !std::isfinite(g)) {
            r.margin.push_back(std::numeric_limits<double>::quiet_NaN());
            ++r.skipped;
            continue;
        }
        const double margin = rhs - g;
        r.margin.push_back(margin);
        if (!(margin >= -1e-12 * (1.0 + std::abs(rhs)))) r.pass = false;
    }
    return r;
}

SeriesCheckReport c11_series_check(const CoefficientFn& gamma_P, double t1, double delta_hat,
                                   std::span<const double> epsilons, double horizon, double delta_tilde) {
    if (!(delta_hat > 0.0)) throw InvalidArgument("c11_series_check: delta_hat must be > 0");
    if (delta_tilde == 0.0) delta_tilde = 0.5 * delta_hat;
    if (!(delta_tilde > 0.0 && delta_tilde < delta_hat))
        throw InvalidArgument("c11_series_check: delta_tilde must lie in (0, delta_hat)");
    if (!(horizon > t1)) throw InvalidArgument("c11_series_check: horizon must exceed t1");
    if (-gamma_P.scaled(-1.0).sampled_min(0, 0, t1, horizon) > 1e-12)
        throw InvalidArgument("c11_series_check: gamma_P must be <= 0 on [t1, horizon]");
    const auto G = gamma_P.antiderivative(t1);
    SeriesCheckReport report;
    report.delta_tilde = delta_tilde;
    for (double eps : epsilons) {
        if (!(eps > 0.0)) throw InvalidArgument("c11_series_check: epsilon must be > 0");
        SeriesCheckRow row;
        row.epsilon = eps;
        auto term = [&](double x) { return std::exp(0.5 * eps * G(t1 + delta_tilde * x)); };
        for (std::size_t n = 1;; ++n) {
            const double tn = t1 + delta_tilde * static_cast<double>(n - 1);
            if (tn > horizon) break;
            const double v = term(static_cast<double>(n - 1));
            row.partial_sum += v;
            row.terms = n;
            row.last_term = v;
            if (v < 1e-15) {
                row.converges = true;
                break;
            }
        }
        row.integral_bound = term(0.0) + integrate(term, 0.0, static_cast<double>(row.terms - 1), 1e-12).value;
        report.rows.push_back(row);
    }
    return report;
}

ExponentCheck exp_power_integral_check(double alpha, double gamma, double delta) {
    if (!(alpha > 0.0 && gamma > 0.0 && delta > 0.0))
        throw InvalidArgument("exp_power_integral_check: alpha, gamma, delta must be > 0");
    ExponentCheck c;
    c.alpha = alpha;
    c.gamma = gamma;
    c.delta = delta;
    c.numeric = integrate([&](double t) { return std::exp(-gamma * std::pow(delta * t, alpha)); }, 0.0, kInf, 1e-14)
                    .value;
    const double g = std::tgamma(1.0 / alpha);
    c.inverse_exponent_form = g / (alpha * std::pow(gamma, 1.0 / alpha) * delta);
    c.direct_exponent_form = g / (alpha * std::pow(gamma, alpha) * delta);
    auto close = [&](double v) { return std::abs(v - c.numeric) <= 1e-8 * std::abs(c.numeric); };
    const bool inv = close(c.inverse_exponent_form), dir = close(c.direct_exponent_form);
    c.matched = inv && dir ? "both" : inv ? "1/alpha" : dir ? "alpha" : "neither";
    return c;
}

HolderTermSpec derive_holder_spec(const ModelSpec& model, double c_P) {
    model.validate();
    const std::size_t m = model.m;
    std::map<std::pair<double, double>, TermAccumulator> terms;
    auto& lip = term_for(terms, 1.0, 1.0, m);
    for (std::size_t i = 0; i < m; ++i) lip.diag[i] = model.linear_eta.component(i);
    for (std::size_t n = 0; n < model.nonlinear_terms.size(); ++n) {
        const auto& term = model.nonlinear_terms[n];
        for (std::size_t i = 0; i < m; ++i) {
            const auto* p = std::get_if<SignedPower>(&term.f[i].form);
            if (!p || p->a <= 0.0) continue;  // nonincreasing: one-sided constant 0
            if (p->alpha > 1.0)
                throw InvalidArgument("derive_holder_spec: nonlinear_terms[" + std::to_string(n) + "].f[" +
                                      std::to_string(i) +
                                      "]: increasing signed power with alpha > 1 has no one-sided Hoelder constant");
            auto& acc = term_for(terms, p->alpha, 1.0, m);
            acc.diag[i] = acc.diag[i] + term.eta.component(i).scaled(p->a * std::pow(2.0, 1.0 - p->alpha));
        }
    }
    for (const auto& mt : model.measure_terms) {
        auto& acc = term_for(terms, 1.0, mt.g.beta(), m);
        const auto norms = frame_row_norms(model, mt.lambda, mt.g.hoelder_constant());
        for (std::size_t i = 0; i < m; ++i) acc.vec[i] = acc.vec[i] + norms[i];
    }
    HolderTermSpec spec;
    spec.c_P = c_P;
    spec.epsilon = CoefficientFn::constant(0.0);
    spec.c0_zeta0 = CoefficientFn::constant(0.0);
    for (auto& [key, acc] : terms) {
        spec.alpha.push_back(key.first);
        spec.beta.push_back(key.second);
        spec.eta.push_back(diagonal(acc.diag));
        spec.lambda.push_back(CoefficientFn::stack(m, 1, acc.vec));
    }
    return spec;
}

GrowthTermSpec derive_growth_spec(const ModelSpec& model, double c_P) {
    model.validate();
    const std::size_t m = model.m;
    std::map<std::pair<double, double>, TermAccumulator> terms;
    auto& lin = term_for(terms, 1.0, 1.0, m);
    for (std::size_t i = 0; i < m; ++i) lin.diag[i] = model.linear_eta.component(i);
    auto kappa_hat = frame_row_norms(model, model.kappa, 1.0);
    for (std::size_t n = 0; n < model.nonlinear_terms.size(); ++n) {
        const auto& term = model.nonlinear_terms[n];
        for (std::size_t i = 0; i < m; ++i) {
            const auto& form = term.f[i].form;
            if (const auto* p = std::get_if<SignedPower>(&form)) {
                if (p->alpha > 1.0) {
                    if (p->a > 0.0)
                        throw InvalidArgument("derive_growth_spec: nonlinear_terms[" + std::to_string(n) + "].f[" +
                                              std::to_string(i) + "]: increasing signed power with alpha > 1");
                    continue;
                }
                auto& acc = term_for(terms, p->alpha, 1.0, m);
                acc.diag[i] = acc.diag[i] + term.eta.component(i).scaled(p->a);
            } else if (std::holds_alternative<DecreasingTable>(form)) {
                const double f0 = std::abs(term.f[i](0.0));
                if (f0 != 0.0) kappa_hat[i] = kappa_hat[i] + term.eta.component(i).scaled(f0);
            }
        }
    }
    for (const auto& mt : model.measure_terms) {
        auto& acc = term_for(terms, 1.0, mt.g.beta(), m);
        const auto norms = frame_row_norms(model, mt.lambda, 1.0);
        const double c = mt.g.norm_at_origin(m), c_hat = mt.g.hoelder_constant();
        for (std::size_t i = 0; i < m; ++i) {
            acc.vec[i] = acc.vec[i] + norms[i].scaled(c_hat);
            if (c != 0.0) kappa_hat[i] = kappa_hat[i] + norms[i].scaled(c);
        }
    }
    GrowthTermSpec spec;
    spec.c_P = c_P;
    spec.c0_zeta0 = CoefficientFn::constant(0.0);
    spec.kappa = CoefficientFn::stack(m, 1, kappa_hat);
    for (auto& [key, acc] : terms) {
        spec.alpha.push_back(key.first);
        spec.beta.push_back(key.second);
        spec.upsilon.push_back(diagonal(acc.diag));
        spec.chi.push_back(CoefficientFn::stack(m, 1, acc.vec));
    }
    return spec;
}

void write_curve_csv(std::ostream& os, std::span<const double> grid, std::span<const double> values,
                     const std::string& value_name) {
    if (grid.size() != values.size()) throw InvalidArgument("write_curve_csv: length mismatch");
    os << "t," << value_name << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k < grid.size(); ++k) os << grid[k] << ',' << values[k] << '\n';
}

}  // namespace mkvlab
