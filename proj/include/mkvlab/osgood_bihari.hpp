#pragma once

#include "mkvlab/coefficient_fn.hpp"
#include "mkvlab/modulus.hpp"

#include <span>
#include <vector>

namespace mkvlab {

/// Classification threshold: quadrature magnitudes above this count as infinite.
inline constexpr double kInfinityCutoff = 1e12;

struct ExtendedValue {
    enum class Kind { finite, neg_infinity, pos_infinity, unknown };
    Kind kind = Kind::finite;
    double value = 0.0;

    [[nodiscard]] bool is_finite() const { return kind == Kind::finite; }
    /// Numeric view: +-inf for infinite kinds, NaN for unknown.
    [[nodiscard]] double as_double() const;
};

struct PhiEndpoints {
    ExtendedValue at_zero;
    ExtendedValue at_infinity;
};

enum class OsgoodVerdict { diverges, converges, unknown };

struct BihariDomainPoint {
    double v = 0.0;
    double w = 0.0;
};

/// Phi(w) = int_1^w dv / rho(v), closed form where available.
double phi_rho(const Modulus& rho, double w);
/// Phi by adaptive quadrature regardless of form.
double phi_rho_numeric(const Modulus& rho, double w);

PhiEndpoints phi_rho_endpoints(const Modulus& rho);

bool in_domain(const Modulus& rho, BihariDomainPoint point);

/// Psi(v, w) = Phi^{-1}(Phi(v) + w); closed form where available, else bisection.
double psi_rho(const Modulus& rho, double v, double w);
/// Psi through quadrature and bisection regardless of form.
double psi_rho_numeric(const Modulus& rho, double v, double w);

/// Divergence of int_0^1 rho^{-exponent}, exponent in {1, 2}.
OsgoodVerdict osgood_diverges_at_zero(const Modulus& rho, int exponent);

struct BihariCurve {
    std::vector<double> grid;
    /// Psi values; +inf from the first grid point outside the domain on.
    std::vector<double> values;
    /// First grid time outside the domain, +inf if none.
    double t0_plus = 0.0;
};

BihariCurve bihari_bound_curve(const Modulus& rho0, double initial, const CoefficientFn& additive,
                               const CoefficientFn& multiplicative, std::span<const double> grid);

}  // namespace mkvlab
