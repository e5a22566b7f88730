#include "mkvlab/osgood_bihari.hpp"

#include "mkvlab/error.hpp"
#include "mkvlab/quadrature.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mkvlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tolerance separating an exactly critical power from a numerically critical one.
constexpr double kCriticalTol = 1e-9;

template <class T>
const T* form_as(const Modulus& rho) {
    return std::get_if<T>(&rho.form());
}

/// Points where the integrand has a kink: table knots and branch switches of a max.
void collect_kinks(const Modulus& rho, std::vector<double>& out) {
    if (const auto* t = form_as<TabulatedForm>(rho)) {
        for (double lv : t->log_v) out.push_back(std::exp(lv));
        return;
    }
    const auto* m = form_as<MaxOfForm>(rho);
    if (m == nullptr) return;
    for (const auto& member : m->members) collect_kinks(member, out);
    const auto argmax = [&](double v) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < m->members.size(); ++k)
            if (m->members[k](v) > m->members[best](v)) best = k;
        return best;
    };
    constexpr int kScan = 240;
    double prev_u = -27.6;
    std::size_t prev = argmax(std::exp(prev_u));
    for (int k = 1; k <= kScan; ++k) {
        const double u = -27.6 + 55.2 * k / kScan;
        const std::size_t cur = argmax(std::exp(u));
        if (cur != prev) {
            const auto& a = m->members[prev];
            const auto& b = m->members[cur];
            double lo = prev_u, hi = u;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double z = std::exp(mid);
                (a(z) >= b(z) ? lo : hi) = mid;
            }
            out.push_back(std::exp(0.5 * (lo + hi)));
        }
        prev = cur;
        prev_u = u;
    }
}

std::vector<double> knots_between(const Modulus& rho, double lo, double hi) {
    std::vector<double> kinks;
    collect_kinks(rho, kinks);
    std::sort(kinks.begin(), kinks.end());
    std::vector<double> pts{lo};
    for (double v : kinks)
        if (v > pts.back() && v < hi) pts.push_back(v);
    pts.push_back(hi);
    return pts;
}

/// int_lo^hi dv / rho(v) for 0 <= lo < hi <= inf.
double reciprocal_integral(const Modulus& rho, double lo, double hi) {
    const auto pts = knots_between(rho, lo, hi);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
        total += integrate_log([&](double v) { return 1.0 / rho(v); }, pts[k], pts[k + 1]).value;
    return total;
}

/// Convergence class of int v^{-e*s} |log v|^{-e*l} at an endpoint.
OsgoodVerdict tail_verdict(Asymptotic a, double e, bool at_zero, bool exact) {
    const double es = e * a.s;
    const double el = e * a.l;
    const bool critical = std::abs(es - 1.0) <= (exact ? 0.0 : kCriticalTol);
    if (critical && !exact && es != 1.0) return OsgoodVerdict::unknown;
    if (critical) return el <= 1.0 ? OsgoodVerdict::diverges : OsgoodVerdict::converges;
    if (at_zero) return es > 1.0 ? OsgoodVerdict::diverges : OsgoodVerdict::converges;
    return es < 1.0 ? OsgoodVerdict::diverges : OsgoodVerdict::converges;
}

bool exact_asymptotics(const Modulus& rho) { return form_as<TabulatedForm>(rho) == nullptr; }

bool exact_asymptotics_deep(const Modulus& rho) {
    if (const auto* m = form_as<MaxOfForm>(rho))
        return std::all_of(m->members.begin(), m->members.end(), exact_asymptotics_deep);
    return exact_asymptotics(rho);
}

ExtendedValue classify(double value, ExtendedValue::Kind infinite_kind) {
    if (std::abs(value) > kInfinityCutoff) return {infinite_kind, 0.0};
    return {ExtendedValue::Kind::finite, value};
}

double phi_inverse_closed(const Modulus& rho, double y) {
    if (const auto* p = form_as<PowerForm>(rho)) {
        if (p->alpha == 1.0) return std::exp(p->scale * y);
        const double base = 1.0 + (1.0 - p->alpha) * p->scale * y;
        if (base <= 0.0) return p->alpha < 1.0 ? 0.0 : kInf;
        return std::pow(base, 1.0 / (1.0 - p->alpha));
    }
    if (const auto* c = form_as<LinearCapForm>(rho)) return std::exp(c->c * y);
    const auto& g = std::get<LogForm>(rho.form());
    const double ay = g.a * std::abs(y);
    const double log_w = std::copysign(std::expm1(ay), y);
    return std::exp(log_w);
}

void require_domain(const Modulus& rho, double v, double w) {
    if (!(v >= 0.0) || !(w >= 0.0) || !std::isfinite(v) || !std::isfinite(w))
        throw InvalidArgument("psi_rho: arguments must be finite and nonnegative");
    if (!in_domain(rho, {v, w}))
        throw InvalidArgument("psi_rho: (v, w) = (" + std::to_string(v) + ", " + std::to_string(w) +
                              ") lies outside the Bihari domain");
}

}  // namespace

double ExtendedValue::as_double() const {
    switch (kind) {
        case Kind::finite: return value;
        case Kind::neg_infinity: return -kInf;
        case Kind::pos_infinity: return kInf;
        case Kind::unknown: break;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double phi_rho(const Modulus& rho, double w) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("phi_rho: w must be finite and > 0");
    if (w == 1.0) return 0.0;
    if (const auto* p = form_as<PowerForm>(rho)) {
        if (p->alpha == 1.0) return std::log(w) / p->scale;
        return (std::pow(w, 1.0 - p->alpha) - 1.0) / ((1.0 - p->alpha) * p->scale);
    }
    if (const auto* c = form_as<LinearCapForm>(rho)) return std::log(w) / c->c;
    if (const auto* g = form_as<LogForm>(rho)) {
        const double lw = std::log(w);
        return std::copysign(std::log1p(std::abs(lw)), lw) / g->a;
    }
    return phi_rho_numeric(rho, w);
}

double phi_rho_numeric(const Modulus& rho, double w) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("phi_rho: w must be finite and > 0");
    if (w == 1.0) return 0.0;
    return w > 1.0 ? reciprocal_integral(rho, 1.0, w) : -reciprocal_integral(rho, w, 1.0);
}

PhiEndpoints phi_rho_endpoints(const Modulus& rho) {
    PhiEndpoints out;
    const bool exact = exact_asymptotics_deep(rho);

    switch (tail_verdict(rho.at_zero(), 1.0, true, exact)) {
        case OsgoodVerdict::diverges: out.at_zero = {ExtendedValue::Kind::neg_infinity, 0.0}; break;
        case OsgoodVerdict::unknown: out.at_zero = {ExtendedValue::Kind::unknown, 0.0}; break;
        case OsgoodVerdict::converges:
            if (const auto* p = form_as<PowerForm>(rho))
                out.at_zero = {ExtendedValue::Kind::finite, -1.0 / ((1.0 - p->alpha) * p->scale)};
            else
                out.at_zero = classify(-reciprocal_integral(rho, 0.0, 1.0), ExtendedValue::Kind::neg_infinity);
            break;
    }
    switch (tail_verdict(rho.at_infinity(), 1.0, false, exact)) {
        case OsgoodVerdict::diverges: out.at_infinity = {ExtendedValue::Kind::pos_infinity, 0.0}; break;
        case OsgoodVerdict::unknown: out.at_infinity = {ExtendedValue::Kind::unknown, 0.0}; break;
        case OsgoodVerdict::converges:
            if (const auto* p = form_as<PowerForm>(rho))
                out.at_infinity = {ExtendedValue::Kind::finite, 1.0 / ((p->alpha - 1.0) * p->scale)};
            else
                out.at_infinity = classify(reciprocal_integral(rho, 1.0, kInf), ExtendedValue::Kind::pos_infinity);
            break;
    }
    return out;
}

bool in_domain(const Modulus& rho, BihariDomainPoint point) {
    const auto ends = phi_rho_endpoints(rho);
    if (ends.at_infinity.kind == ExtendedValue::Kind::pos_infinity) return true;
    if (ends.at_infinity.kind == ExtendedValue::Kind::unknown)
        throw NumericalError("in_domain: Phi(inf) is indeterminate for this modulus");
    double phi_v;
    if (point.v == 0.0) {
        if (ends.at_zero.kind == ExtendedValue::Kind::unknown)
            throw NumericalError("in_domain: Phi(0) is indeterminate for this modulus");
        phi_v = ends.at_zero.as_double();
    } else {
        phi_v = phi_rho(rho, point.v);
    }
    return phi_v + point.w < ends.at_infinity.value;
}

double psi_rho(const Modulus& rho, double v, double w) {
    require_domain(rho, v, w);
    if (w == 0.0) return v;
    if (const auto* p = form_as<PowerForm>(rho)) {
        if (p->alpha == 1.0) return v * std::exp(p->scale * w);
        const double base = std::pow(v, 1.0 - p->alpha) + (1.0 - p->alpha) * p->scale * w;
        return std::pow(std::max(base, 0.0), 1.0 / (1.0 - p->alpha));
    }
    if (const auto* c = form_as<LinearCapForm>(rho)) return v * std::exp(c->c * w);
    if (form_as<LogForm>(rho)) {
        if (v == 0.0) return 0.0;
        return phi_inverse_closed(rho, phi_rho(rho, v) + w);
    }
    return psi_rho_numeric(rho, v, w);
}

double psi_rho_numeric(const Modulus& rho, double v, double w) {
    require_domain(rho, v, w);
    if (w == 0.0) return v;
    if (v == 0.0 && phi_rho_endpoints(rho).at_zero.kind == ExtendedValue::Kind::neg_infinity) return 0.0;

    // Root of F(u) = int_v^{e^u} dr / rho(r) - w in the log variable.
    auto F = [&](double u) {
        const double z = std::exp(u);
        if (z == v) return -w;
        return (z > v ? reciprocal_integral(rho, v, z) : -reciprocal_integral(rho, z, v)) - w;
    };
    double lo;
    if (v > 0.0) {
        lo = std::log(v);
    } else {
        lo = -1.0;
        for (double step = 1.0; F(lo) > 0.0; step *= 2.0) {
            lo -= step;
            if (lo < -700.0) throw NumericalError("psi_rho: lower bracket underflow");
        }
    }
    double hi = std::max(lo, 0.0) + 1.0;
    for (double step = 1.0; F(hi) < 0.0; step *= 2.0) {
        hi += step;
        if (hi > 700.0) throw NumericalError("psi_rho: upper bracket overflow");
    }
    const double f_lo = F(lo);
    const double f_hi = F(hi);
    if (f_lo >= 0.0) return std::exp(lo);
    std::uintmax_t max_iter = 200;
    const auto root = boost::math::tools::toms748_solve(
        F, lo, hi, f_lo, f_hi, [](double a, double b) { return std::abs(b - a) <= 1e-11; }, max_iter);
    return std::exp(0.5 * (root.first + root.second));
}

OsgoodVerdict osgood_diverges_at_zero(const Modulus& rho, int exponent) {
    if (exponent != 1 && exponent != 2) throw InvalidArgument("osgood_diverges_at_zero: exponent must be 1 or 2");
    return tail_verdict(rho.at_zero(), static_cast<double>(exponent), true, exact_asymptotics_deep(rho));
}

BihariCurve bihari_bound_curve(const Modulus& rho0, double initial, const CoefficientFn& additive,
                               const CoefficientFn& multiplicative, std::span<const double> grid) {
    if (grid.empty()) throw InvalidArgument("bihari_bound_curve: empty grid");
    if (!(initial >= 0.0)) throw InvalidArgument("bihari_bound_curve: initial value must be >= 0");
    BihariCurve out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.resize(grid.size(), kInf);
    out.t0_plus = kInf;
    const double t0 = grid.front();
    const auto A = additive.antiderivative(t0);
    const auto W = multiplicative.antiderivative(t0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double v = initial + A(grid[k]);
        const double w = W(grid[k]);
        if (v < -1e-12 * (1.0 + initial) || w < -1e-12)
            throw InvalidArgument("bihari_bound_curve: additive and multiplicative must be nonnegative");
        const double vv = std::max(v, 0.0), ww = std::max(w, 0.0);
        if (!in_domain(rho0, {vv, ww})) {
            out.t0_plus = grid[k];
            break;
        }
        out.values[k] = psi_rho(rho0, vv, ww);
    }
    return out;
}

}  // namespace mkvlab
