#include "mkvlab/yw_approx.hpp"

#include "mkvlab/error.hpp"
#include "mkvlab/osgood_bihari.hpp"
#include "mkvlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mkvlab {

namespace {

constexpr double kRamp = 0.25;
constexpr double kKappa = 1.0 / (1.0 - kRamp);
constexpr std::size_t kTableCells = 4096;

/// Plateau hat on [0,1]: quadratic ramps of width kRamp, C^1.
double hat(double tau) {
    if (tau <= 0.0 || tau >= 1.0) return 0.0;
    const double t = std::min(tau, 1.0 - tau) / kRamp;
    if (t >= 1.0) return 1.0;
    if (t <= 0.5) return 2.0 * t * t;
    const double r = 1.0 - t;
    return 1.0 - 2.0 * r * r;
}

/// Antiderivative of hat from 0; total mass 1 - kRamp.
double hat_integral(double tau) {
    if (tau <= 0.0) return 0.0;
    if (tau >= 1.0) return 1.0 - kRamp;
    if (tau > 0.5) return (1.0 - kRamp) - hat_integral(1.0 - tau);
    const double r = kRamp;
    if (tau <= 0.5 * r) return 2.0 * tau * tau * tau / (3.0 * r * r);
    if (tau <= r) {
        const double q = 1.0 - tau / r;
        return tau - 0.5 * r + 2.0 * r / 3.0 * q * q * q;
    }
    return 0.5 * r + (tau - r);
}

double rho_inv2_of(const Modulus& rho, double v) {
    const double r = rho(v);
    return 1.0 / (r * r);
}

double cutoff_integral(const Modulus& rho, double c, double a_prev) {
    return integrate_log([&](double v) { return rho_inv2_of(rho, v); }, c, a_prev).value;
}

}  // namespace

YWApprox::YWApprox(Modulus rho, int n, double a_prev, double a_n)
    : rho_(std::move(rho)), n_(n), a_prev_(a_prev), a_n_(a_n) {}

double YWApprox::rho_inv2(double v) const { return rho_inv2_of(rho_, v); }

YWApprox YWApprox::build(const Modulus& rho, int n, double a_prev) {
    if (n < 1) throw InvalidArgument("yw build: n must be >= 1");
    if (!(a_prev > 0.0 && a_prev <= 1.0)) throw InvalidArgument("yw build: a_prev must lie in (0,1]");
    if (osgood_diverges_at_zero(rho, 2) != OsgoodVerdict::diverges)
        throw InvalidArgument("yw build: int_0^1 rho^-2 must diverge");

    const double target = static_cast<double>(n);
    const double hi_u = std::log(a_prev);
    double lo_u = hi_u;
    for (double step = 1.0; cutoff_integral(rho, std::exp(lo_u), a_prev) < target; step *= 2.0) {
        lo_u -= step;
        if (lo_u < -700.0) throw NumericalError("yw build: cutoff bisection is not bracketing");
    }
    double a = lo_u, b = hi_u;
    while (b - a > 1e-14 * std::max(1.0, std::abs(a))) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        if (cutoff_integral(rho, std::exp(mid), a_prev) > target)
            a = mid;
        else
            b = mid;
    }
    YWApprox out(rho, n, a_prev, std::exp(0.5 * (a + b)));
    out.tabulate();
    return out;
}

void YWApprox::tabulate() {
    const double u0 = std::log(a_n_), u1 = std::log(a_prev_);
    const std::size_t J = kTableCells;
    u_.resize(J + 1);
    tau_.assign(J + 1, 0.0);
    dtau_du_.resize(J + 1);
    for (std::size_t j = 0; j <= J; ++j) {
        u_[j] = u0 + (u1 - u0) * static_cast<double>(j) / static_cast<double>(J);
        const double v = std::exp(u_[j]);
        dtau_du_[j] = v * rho_inv2(v) / n_;
    }
    u_.back() = u1;
    for (std::size_t j = 0; j < J; ++j) {
        const double piece = integrate([&](double u) {
                                 const double v = std::exp(u);
                                 return v * rho_inv2(v);
                             },
                                       u_[j], u_[j + 1])
                                 .value;
        tau_[j + 1] = tau_[j] + piece / n_;
    }
    // Remove the residual of the cutoff solve so that tau(a_prev) = 1 exactly.
    const double total = tau_.back();
    for (std::size_t j = 0; j <= J; ++j) {
        tau_[j] /= total;
        dtau_du_[j] /= total;
    }
    psi_cum_.assign(J + 1, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        const double lo = std::exp(u_[j]), hi = std::exp(u_[j + 1]);
        psi_cum_[j + 1] = psi_cum_[j] + gauss_legendre10([&](double x) { return psi_prime(x); }, lo, hi);
    }
}

double YWApprox::tau(double x) const {
    if (x <= a_n_) return 0.0;
    if (x >= a_prev_) return 1.0;
    const double u = std::log(x);
    const double h = u_[1] - u_[0];
    std::size_t j = static_cast<std::size_t>((u - u_[0]) / h);
    j = std::min(j, u_.size() - 2);
    // Cubic Hermite interpolation of tau in u.
    const double s = (u - u_[j]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    const double t = h00 * tau_[j] + h10 * h * dtau_du_[j] + h01 * tau_[j + 1] + h11 * h * dtau_du_[j + 1];
    return std::clamp(t, 0.0, 1.0);
}

double YWApprox::psi_prime(double x) const {
    if (x <= a_n_) return 0.0;
    if (x >= a_prev_) return 1.0;
    return kKappa * hat_integral(tau(x));
}

double YWApprox::psi_second(double x) const {
    if (x <= a_n_ || x >= a_prev_) return 0.0;
    return second_scale_ * kKappa * hat(tau(x)) * rho_inv2(x) / n_;
}

double YWApprox::psi(double x) const {
    if (x <= a_n_) return 0.0;
    if (x >= a_prev_) return psi_cum_.back() + (x - a_prev_);
    const double u = std::log(x);
    const double h = u_[1] - u_[0];
    std::size_t j = static_cast<std::size_t>((u - u_[0]) / h);
    j = std::min(j, u_.size() - 2);
    const double lo = std::exp(u_[j]);
    if (x <= lo) return psi_cum_[j];
    return psi_cum_[j] + gauss_legendre10([&](double y) { return psi_prime(y); }, lo, x);
}

YWApprox YWApprox::with_scaled_second(double factor) const {
    YWApprox copy = *this;
    copy.second_scale_ *= factor;
    return copy;
}

std::vector<YWApprox> yw_sequence(const Modulus& rho, int N) {
    if (N < 1) throw InvalidArgument("yw sequence: N must be >= 1");
    std::vector<YWApprox> out;
    double a_prev = 1.0;
    for (int n = 1; n <= N; ++n) {
        out.push_back(YWApprox::build(rho, n, a_prev));
        a_prev = out.back().a_n();
    }
    return out;
}

YWReport verify(const YWApprox& approx, std::size_t grid_size, double tolerance) {
    if (grid_size < 8) throw InvalidArgument("yw verify: grid_size must be >= 8");
    const double an = approx.a_n(), ap = approx.a_prev();
    const double n = approx.n();
    const Modulus& rho = approx.rho();

    std::vector<double> grid;
    const double lo = std::log(an) - std::log(10.0), hi = std::log(ap) + std::log(10.0);
    for (std::size_t k = 0; k < grid_size; ++k)
        grid.push_back(std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_size - 1)));

    double v_cutoff = std::abs(cutoff_integral(rho, an, ap) - n);
    double v_origin = std::max({std::abs(approx.psi(0.0)), std::abs(approx.psi_prime(0.0)),
                                std::abs(approx.psi_second(0.0))});
    double v_range = 0.0, v_plateau = 0.0, v_ceiling = 0.0, v_support = 0.0, v_sandwich = 0.0, v_consistency = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = grid[k];
        const double p1 = approx.psi_prime(x), p2 = approx.psi_second(x), p0 = approx.psi(x);
        v_range = std::max({v_range, -p1, p1 - 1.0});
        if (x >= ap) v_plateau = std::max(v_plateau, std::abs(p1 - 1.0));
        const double ceiling = 2.0 / n * rho_inv2_of(rho, x);
        v_ceiling = std::max({v_ceiling, -p2 / ceiling, (p2 - ceiling) / ceiling});
        if (x <= an || x >= ap) v_support = std::max(v_support, std::abs(p2));
        v_sandwich = std::max({v_sandwich, (p0 - x) / x, (x - ap - p0) / x});
        if (k + 1 < grid.size()) {
            const double y = grid[k + 1];
            const double increment = approx.psi_prime(y) - p1;
            // Composite rule: psi'' has derivative jumps inside some cells.
            constexpr int kSub = 16;
            double integral = 0.0;
            for (int j = 0; j < kSub; ++j)
                integral += gauss_legendre10([&](double s) { return approx.psi_second(s); }, x + (y - x) * j / kSub,
                                             x + (y - x) * (j + 1) / kSub);
            v_consistency = std::max(v_consistency, std::abs(increment - integral));
        }
    }
    YWReport report;
    auto add = [&](std::string name, double violation) {
        YWCheck c{std::move(name), std::max(violation, 0.0), std::max(violation, 0.0) <= tolerance};
        report.pass = report.pass && c.pass;
        report.checks.push_back(std::move(c));
    };
    add("cutoff_integral_equals_n", v_cutoff);
    add("zero_at_origin", v_origin);
    add("psi_prime_in_unit_interval", v_range);
    add("psi_prime_plateau", v_plateau);
    add("psi_second_ceiling", v_ceiling);
    add("psi_second_support", v_support);
    add("identity_sandwich", v_sandwich);
    add("psi_second_integrates_to_psi_prime", v_consistency);
    return report;
}

}  // namespace mkvlab
