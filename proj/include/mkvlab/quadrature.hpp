#pragma once

#include <functional>

namespace mkvlab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod (31-point) integration on [a, b]; either limit may be infinite.
/// Throws NumericalError when the result is not finite.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-13);

/// Integrate g(v) dv over [lo, hi] with 0 < lo < hi <= inf through the substitution v = e^u.
QuadResult integrate_log(const std::function<double(double)>& g, double lo, double hi, double rel_tol = 1e-13);

/// Fixed 10-point Gauss-Legendre rule on [a, b].
double gauss_legendre10(const std::function<double(double)>& f, double a, double b);

}  // namespace mkvlab
