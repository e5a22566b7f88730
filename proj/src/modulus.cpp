#include "mkvlab/modulus.hpp"

#include "mkvlab/error.hpp"

#include <algorithm>
#include <cmath>

namespace mkvlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double tabulated_eval(const TabulatedForm& f, double v) {
    const double x = std::log(v);
    const auto& lv = f.log_v;
    const auto& lr = f.log_rho;
    std::size_t k;
    if (x <= lv.front()) {
        k = 0;
    } else if (x >= lv.back()) {
        k = lv.size() - 2;
    } else {
        k = static_cast<std::size_t>(std::upper_bound(lv.begin(), lv.end(), x) - lv.begin()) - 1;
    }
    const double slope = (lr[k + 1] - lr[k]) / (lv[k + 1] - lv[k]);
    return std::exp(lr[k] + slope * (x - lv[k]));
}

}  // namespace

Modulus::Modulus(Form form) : form_(std::move(form)) {}

Modulus Modulus::power(double alpha, double scale) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("power modulus: alpha must be > 0");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("power modulus: scale must be > 0");
    Modulus m(PowerForm{alpha, scale});
    m.concavity_ = alpha;
    return m;
}

Modulus Modulus::linear(double c) {
    if (!(c > 0.0) || !std::isfinite(c))
        throw InvalidArgument("linear modulus: c must be > 0 (c = 0 is not positive on (0,inf))");
    Modulus m(LinearCapForm{c});
    m.concavity_ = 1.0;
    return m;
}

Modulus Modulus::log_modulus(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("log modulus: a must be > 0");
    return Modulus(LogForm{a});
}

Modulus Modulus::max_of(std::vector<Modulus> members) {
    if (members.empty()) throw InvalidArgument("max modulus: needs at least one member");
    Modulus m(MaxOfForm{std::move(members)});
    m.increasing_ = m.sampled_increasing();
    return m;
}

Modulus Modulus::tabulated(const std::vector<double>& v, const std::vector<double>& rho) {
    if (v.size() < 2 || v.size() != rho.size())
        throw InvalidArgument("tabulated modulus: need at least two (v, rho) samples of equal length");
    TabulatedForm f;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!(v[k] > 0.0) || !(rho[k] > 0.0) || !std::isfinite(v[k]) || !std::isfinite(rho[k]))
            throw InvalidArgument("tabulated modulus: samples must be finite and strictly positive");
        if (k > 0 && !(v[k] > v[k - 1]))
            throw InvalidArgument("tabulated modulus: abscissae must be strictly increasing");
        f.log_v.push_back(std::log(v[k]));
        f.log_rho.push_back(std::log(rho[k]));
    }
    const double s0 = (f.log_rho[1] - f.log_rho[0]) / (f.log_v[1] - f.log_v[0]);
    if (!(s0 > 0.0)) throw InvalidArgument("tabulated modulus: leading slope must be positive so rho(0) = 0");
    Modulus m(std::move(f));
    m.increasing_ = m.sampled_increasing();
    return m;
}

double Modulus::operator()(double v) const {
    if (!(v >= 0.0)) throw InvalidArgument("modulus evaluated at negative or NaN argument");
    if (v == 0.0) return 0.0;
    return std::visit(overloaded{
                          [&](const PowerForm& f) { return f.scale * std::pow(v, f.alpha); },
                          [&](const LinearCapForm& f) { return f.c * v; },
                          [&](const LogForm& f) { return f.a * v * (std::abs(std::log(v)) + 1.0); },
                          [&](const MaxOfForm& f) {
                              double r = 0.0;
                              for (const auto& m : f.members) r = std::max(r, m(v));
                              return r;
                          },
                          [&](const TabulatedForm& f) { return tabulated_eval(f, v); },
                      },
                      form_);
}

std::string Modulus::form_name() const {
    return std::visit(overloaded{
                          [](const PowerForm&) { return std::string("power"); },
                          [](const LinearCapForm&) { return std::string("linear"); },
                          [](const LogForm&) { return std::string("log"); },
                          [](const MaxOfForm&) { return std::string("max"); },
                          [](const TabulatedForm&) { return std::string("table"); },
                      },
                      form_);
}

bool Modulus::has_closed_form() const {
    return std::holds_alternative<PowerForm>(form_) || std::holds_alternative<LinearCapForm>(form_) ||
           std::holds_alternative<LogForm>(form_);
}

Asymptotic Modulus::at_zero() const {
    return std::visit(overloaded{
                          [](const PowerForm& f) { return Asymptotic{f.alpha, 0.0}; },
                          [](const LinearCapForm&) { return Asymptotic{1.0, 0.0}; },
                          [](const LogForm&) { return Asymptotic{1.0, 1.0}; },
                          [](const MaxOfForm& f) {
                              // Near 0 the largest member has the smallest power, then the largest log power.
                              Asymptotic best = f.members.front().at_zero();
                              for (const auto& m : f.members) {
                                  const auto a = m.at_zero();
                                  if (a.s < best.s || (a.s == best.s && a.l > best.l)) best = a;
                              }
                              return best;
                          },
                          [](const TabulatedForm& f) {
                              return Asymptotic{(f.log_rho[1] - f.log_rho[0]) / (f.log_v[1] - f.log_v[0]), 0.0};
                          },
                      },
                      form_);
}

Asymptotic Modulus::at_infinity() const {
    return std::visit(overloaded{
                          [](const PowerForm& f) { return Asymptotic{f.alpha, 0.0}; },
                          [](const LinearCapForm&) { return Asymptotic{1.0, 0.0}; },
                          [](const LogForm&) { return Asymptotic{1.0, 1.0}; },
                          [](const MaxOfForm& f) {
                              Asymptotic best = f.members.front().at_infinity();
                              for (const auto& m : f.members) {
                                  const auto a = m.at_infinity();
                                  if (a.s > best.s || (a.s == best.s && a.l > best.l)) best = a;
                              }
                              return best;
                          },
                          [](const TabulatedForm& f) {
                              const std::size_t n = f.log_v.size();
                              return Asymptotic{
                                  (f.log_rho[n - 1] - f.log_rho[n - 2]) / (f.log_v[n - 1] - f.log_v[n - 2]), 0.0};
                          },
                      },
                      form_);
}

std::vector<double> Modulus::check_grid() {
    std::vector<double> g(64);
    for (int k = 0; k < 64; ++k) g[k] = std::pow(10.0, -6.0 + 12.0 * k / 63.0);
    return g;
}

bool Modulus::sampled_increasing() const {
    const auto g = check_grid();
    double prev = 0.0;
    for (double v : g) {
        const double r = (*this)(v);
        if (r < prev * (1.0 - 1e-12)) return false;
        prev = r;
    }
    return true;
}

bool Modulus::sampled_concave(double alpha) const {
    const auto g = check_grid();
    auto h = [&](double v) { return std::pow((*this)(v), 1.0 / alpha); };
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
        for (std::size_t j : {k + 1, std::min(g.size() - 1, k + 8)}) {
            const double a = g[k], b = g[j];
            const double mid = h(0.5 * (a + b));
            const double chord = 0.5 * (h(a) + h(b));
            if (mid < chord * (1.0 - 1e-10)) return false;
        }
    }
    return true;
}

Modulus& Modulus::declare_increasing(bool value) {
    if (value && !sampled_increasing())
        throw InvalidArgument(form_name() + " modulus: declared increasing but fails the grid check");
    increasing_ = value;
    return *this;
}

Modulus& Modulus::declare_concavity_exponent(std::optional<double> alpha) {
    if (alpha) {
        if (!(*alpha > 0.0)) throw InvalidArgument("concavity exponent must be > 0");
        if (!sampled_concave(*alpha))
            throw InvalidArgument(form_name() + " modulus: rho^(1/alpha) is not concave on the check grid");
    }
    concavity_ = alpha;
    return *this;
}

void Modulus::validate() const {
    if ((*this)(0.0) != 0.0) throw InvalidArgument(form_name() + " modulus: must vanish at 0");
    for (double v : check_grid()) {
        const double r = (*this)(v);
        if (!std::isfinite(r) || !(r > 0.0))
            throw InvalidArgument(form_name() + " modulus: must be finite and positive on (0,inf)");
    }
    if (increasing_ && !sampled_increasing())
        throw InvalidArgument(form_name() + " modulus: increasing flag fails the grid check");
    if (concavity_ && !sampled_concave(*concavity_))
        throw InvalidArgument(form_name() + " modulus: concavity flag fails the grid check");
    if (const auto* f = std::get_if<MaxOfForm>(&form_))
        for (const auto& m : f->members) m.validate();
}

}  // namespace mkvlab
