#pragma once

#include "mkvlab/coefficient_fn.hpp"
#include "mkvlab/measure_space.hpp"

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace mkvlab {

/// a * sgn(v) * |v|^alpha
struct SignedPower {
    double a = 1.0;
    double alpha = 1.0;
};

/// -v^degree for odd degree
struct OddPolyNeg {
    int degree = 3;
};

/// Piecewise-linear nonincreasing interpolant through (x, y), linear extrapolation.
struct DecreasingTable {
    std::vector<double> x;
    std::vector<double> y;
};

/// Tagged scalar nonlinearity applied coordinatewise in the u-frame.
struct ScalarFn {
    std::variant<SignedPower, OddPolyNeg, DecreasingTable> form;

    double operator()(double v) const;
    [[nodiscard]] bool is_nonincreasing() const;
    void validate() const;
};

struct NonlinearTerm {
    CoefficientFn eta;         // vector(m), >= 0
    std::vector<ScalarFn> f;   // one per u-frame coordinate
};

struct MeanMap {};
/// (int |x| dmu)^beta
struct MomentPowerMap {
    double beta = 1.0;
};
/// int psi dmu
struct PsiIntegralMap {
    PsiFunction psi;
};

struct MeasureMap {
    std::variant<MeanMap, MomentPowerMap, PsiIntegralMap> form;

    [[nodiscard]] std::size_t out_dim(std::size_t m) const;
    /// Evaluate on n points of dimension m (row-major).
    void eval(std::span<const double> states, std::size_t m, std::span<double> out) const;
    /// Hoelder exponent beta with |g(mu) - g(nu)| <= L * W1(mu, nu)^beta.
    [[nodiscard]] double beta() const;
    [[nodiscard]] double hoelder_constant() const;
    /// |g(delta_0)|
    [[nodiscard]] double norm_at_origin(std::size_t m) const;
};

struct MeasureTerm {
    CoefficientFn lambda;   // matrix m x out_dim
    MeasureMap g;
};

struct DiffusionTerm {
    CoefficientFn eta;      // vector(d)
    double alpha = 0.5;     // power applied to |u_i' x|
};

struct DiffusionRow {
    CoefficientFn eta0;     // vector(d), additive part
    std::vector<DiffusionTerm> terms;
};

/// Structured drift and diffusion of a McKean-Vlasov model.
///
/// With v = u'x (columns of u are the frame vectors u_i):
///   b(t,x,mu) = kappa + u diag(eta) v + sum_n u diag(eta_n) f_n(v) + sum_k lambda_k g_k(mu)
///   sigma(t,x) = u S,  S_i = eta0_i + sum_k eta_{ik} |v_i|^{alpha_k}  (rows in R^d)
struct ModelSpec {
    std::size_t m = 1;
    std::size_t d = 1;
    std::vector<double> u;                 // m x m row-major; empty means identity
    CoefficientFn kappa;                   // vector(m)
    CoefficientFn linear_eta;              // vector(m)
    std::vector<NonlinearTerm> nonlinear_terms;
    std::vector<MeasureTerm> measure_terms;
    std::vector<DiffusionRow> diffusion;   // m rows

    /// Zero drift and zero diffusion in dimension (m, d).
    static ModelSpec zero(std::size_t m, std::size_t d);

    void validate() const;
    [[nodiscard]] bool has_identity_frame() const;
    [[nodiscard]] double frame(std::size_t r, std::size_t i) const;
    /// True if every diffusion row has eta0 identically zero (sigma(.,0) = 0).
    [[nodiscard]] bool diffusion_vanishes_at_origin() const;
    [[nodiscard]] bool has_measure_terms() const { return !measure_terms.empty(); }
    /// Breakpoints of all coefficients (for step-time caching).
    [[nodiscard]] std::vector<const CoefficientFn*> coefficient_list() const;
};

}  // namespace mkvlab
