#include "mkvlab/model.hpp"

#include "mkvlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mkvlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Pairwise sum of x[offset + k*stride], k < count; fixed tree, independent of threading.
double pairwise_sum(const double* x, std::size_t count, std::size_t stride) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t k = 0; k < count; ++k) s += x[k * stride];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(x, half, stride) + pairwise_sum(x + half * stride, count - half, stride);
}

void check_shape(const CoefficientFn& f, std::size_t rows, std::size_t cols, const std::string& what) {
    if (f.rows() != rows || f.cols() != cols)
        throw InvalidArgument(what + ": expected shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                              ", got " + std::to_string(f.rows()) + "x" + std::to_string(f.cols()));
}

void check_nonnegative(const CoefficientFn& f, const std::string& what) {
    const double a = std::isinf(f.start()) ? 0.0 : f.start();
    for (std::size_t i = 0; i < f.rows(); ++i)
        for (std::size_t j = 0; j < f.cols(); ++j)
            if (f.sampled_min(i, j, a, a + 100.0) < 0.0) throw InvalidArgument(what + ": entries must be >= 0");
}

}  // namespace

double ScalarFn::operator()(double v) const {
    return std::visit(overloaded{
                          [&](const SignedPower& p) {
                              return p.alpha == 1.0 ? p.a * v : p.a * sgn(v) * std::pow(std::abs(v), p.alpha);
                          },
                          [&](const OddPolyNeg& p) {
                              double r = v;
                              for (int k = 1; k < p.degree; ++k) r *= v;
                              return -r;
                          },
                          [&](const DecreasingTable& t) {
                              const auto& x = t.x;
                              std::size_t k;
                              if (v <= x.front())
                                  k = 0;
                              else if (v >= x.back())
                                  k = x.size() - 2;
                              else
                                  k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), v) - x.begin()) - 1;
                              const double slope = (t.y[k + 1] - t.y[k]) / (x[k + 1] - x[k]);
                              return t.y[k] + slope * (v - x[k]);
                          },
                      },
                      form);
}

bool ScalarFn::is_nonincreasing() const {
    if (const auto* p = std::get_if<SignedPower>(&form)) return p->a <= 0.0;
    return true;
}

void ScalarFn::validate() const {
    std::visit(overloaded{
                   [](const SignedPower& p) {
                       if (!(p.alpha > 0.0) || !std::isfinite(p.alpha) || !std::isfinite(p.a))
                           throw InvalidArgument("signed_power: alpha must be > 0 and a finite");
                   },
                   [](const OddPolyNeg& p) {
                       if (p.degree < 1 || p.degree % 2 == 0)
                           throw InvalidArgument("odd_poly_neg: degree must be a positive odd integer");
                   },
                   [](const DecreasingTable& t) {
                       if (t.x.size() < 2 || t.x.size() != t.y.size())
                           throw InvalidArgument("decreasing_table: need at least two points");
                       for (std::size_t k = 1; k < t.x.size(); ++k) {
                           if (!(t.x[k] > t.x[k - 1]))
                               throw InvalidArgument("decreasing_table: x must be strictly increasing");
                           if (t.y[k] > t.y[k - 1]) throw InvalidArgument("decreasing_table: y must be nonincreasing");
                       }
                   },
               },
               form);
}

std::size_t MeasureMap::out_dim(std::size_t m) const { return std::holds_alternative<MeanMap>(form) ? m : 1; }

void MeasureMap::eval(std::span<const double> states, std::size_t m, std::span<double> out) const {
    const std::size_t n = states.size() / m;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::visit(overloaded{
                   [&](const MeanMap&) {
                       for (std::size_t k = 0; k < m; ++k) out[k] = pairwise_sum(states.data() + k, n, m) * inv_n;
                   },
                   [&](const MomentPowerMap& p) {
                       std::vector<double> norms(n);
                       for (std::size_t i = 0; i < n; ++i) {
                           double s = 0.0;
                           for (std::size_t k = 0; k < m; ++k) s += states[i * m + k] * states[i * m + k];
                           norms[i] = m == 1 ? std::abs(states[i]) : std::sqrt(s);
                       }
                       const double mean = pairwise_sum(norms.data(), n, 1) * inv_n;
                       out[0] = p.beta == 1.0 ? mean : std::pow(mean, p.beta);
                   },
                   [&](const PsiIntegralMap& p) {
                       std::vector<double> vals(n);
                       for (std::size_t i = 0; i < n; ++i) vals[i] = p.psi(states.subspan(i * m, m));
                       out[0] = pairwise_sum(vals.data(), n, 1) * inv_n;
                   },
               },
               form);
}

double MeasureMap::beta() const {
    if (const auto* p = std::get_if<MomentPowerMap>(&form)) return p->beta;
    return 1.0;
}

double MeasureMap::hoelder_constant() const {
    if (const auto* p = std::get_if<PsiIntegralMap>(&form)) return p->psi.lipschitz();
    return 1.0;
}

double MeasureMap::norm_at_origin(std::size_t m) const {
    if (const auto* p = std::get_if<PsiIntegralMap>(&form)) {
        std::vector<double> zero(m, 0.0);
        return std::abs(p->psi(zero));
    }
    return 0.0;
}

ModelSpec ModelSpec::zero(std::size_t m, std::size_t d) {
    ModelSpec s;
    s.m = m;
    s.d = d;
    s.kappa = CoefficientFn::zero(m);
    s.linear_eta = CoefficientFn::zero(m);
    for (std::size_t i = 0; i < m; ++i) s.diffusion.push_back(DiffusionRow{CoefficientFn::zero(d), {}});
    return s;
}

bool ModelSpec::has_identity_frame() const {
    if (u.empty()) return true;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c)
            if (u[r * m + c] != (r == c ? 1.0 : 0.0)) return false;
    return true;
}

double ModelSpec::frame(std::size_t r, std::size_t i) const {
    if (u.empty()) return r == i ? 1.0 : 0.0;
    return u[r * m + i];
}

bool ModelSpec::diffusion_vanishes_at_origin() const {
    return std::all_of(diffusion.begin(), diffusion.end(), [](const DiffusionRow& r) { return r.eta0.is_zero(); });
}

std::vector<const CoefficientFn*> ModelSpec::coefficient_list() const {
    std::vector<const CoefficientFn*> out{&kappa, &linear_eta};
    for (const auto& t : nonlinear_terms) out.push_back(&t.eta);
    for (const auto& t : measure_terms) out.push_back(&t.lambda);
    for (const auto& r : diffusion) {
        out.push_back(&r.eta0);
        for (const auto& t : r.terms) out.push_back(&t.eta);
    }
    return out;
}

void ModelSpec::validate() const {
    if (m == 0 || d == 0) throw InvalidArgument("model: dimensions m and d must be positive");
    if (!u.empty()) {
        if (u.size() != m * m) throw InvalidArgument("model.u: expected an m x m matrix");
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t r = 0; r < m; ++r) s += u[r * m + i] * u[r * m + j];
                if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-12)
                    throw InvalidArgument("model.u: matrix is not orthonormal (u'u != I within 1e-12)");
            }
    }
    check_shape(kappa, m, 1, "model.drift.kappa");
    check_shape(linear_eta, m, 1, "model.drift.linear_eta");
    for (std::size_t n = 0; n < nonlinear_terms.size(); ++n) {
        const std::string where = "model.drift.nonlinear_terms[" + std::to_string(n) + "]";
        const auto& t = nonlinear_terms[n];
        check_shape(t.eta, m, 1, where + ".eta");
        check_nonnegative(t.eta, where + ".eta");
        if (t.f.size() != m) throw InvalidArgument(where + ".f: need one function per coordinate");
        for (const auto& f : t.f) f.validate();
    }
    for (std::size_t k = 0; k < measure_terms.size(); ++k) {
        const std::string where = "model.drift.measure_terms[" + std::to_string(k) + "]";
        const auto& t = measure_terms[k];
        check_shape(t.lambda, m, t.g.out_dim(m), where + ".lambda");
        if (const auto* p = std::get_if<MomentPowerMap>(&t.g.form))
            if (!(p->beta > 0.0 && p->beta <= 1.0)) throw InvalidArgument(where + ".g.beta: must lie in (0,1]");
        if (const auto* p = std::get_if<PsiIntegralMap>(&t.g.form))
            if (p->psi.kind == PsiFunction::Kind::linear && p->psi.weights.size() != m)
                throw InvalidArgument(where + ".g.psi.weights: need m weights");
    }
    if (diffusion.size() != m) throw InvalidArgument("model.diffusion: need one row per coordinate");
    for (std::size_t i = 0; i < m; ++i) {
        const std::string where = "model.diffusion[" + std::to_string(i) + "]";
        check_shape(diffusion[i].eta0, d, 1, where + ".eta0");
        for (std::size_t k = 0; k < diffusion[i].terms.size(); ++k) {
            const auto& t = diffusion[i].terms[k];
            check_shape(t.eta, d, 1, where + ".terms[" + std::to_string(k) + "].eta");
            if (!(t.alpha >= 0.5) || !std::isfinite(t.alpha))
                throw InvalidArgument(where + ".terms[" + std::to_string(k) + "].alpha: must be >= 1/2");
        }
    }
}

}  // namespace mkvlab
