#include "mkvlab/measure_space.hpp"

#include "mkvlab/assignment.hpp"
#include "mkvlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace mkvlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double euclidean(std::span<const double> x, std::span<const double> y) {
    if (x.size() == 1) return std::abs(x[0] - y[0]);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return std::sqrt(s);
}

double euclidean_norm(std::span<const double> x) {
    if (x.size() == 1) return std::abs(x[0]);
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double powered(double d, double p) { return p == 1.0 ? d : std::pow(d, p); }

void check_compatible(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.dim() != nu.dim())
        throw InvalidArgument("Wasserstein distance: dimension mismatch (" + std::to_string(mu.dim()) + " vs " +
                              std::to_string(nu.dim()) + ")");
}

/// 1D: quantile coupling of the sorted supports. Unequal sizes use the common refinement.
double sorted_cost(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
    std::vector<double> x = mu.coords(), y = nu.coords();
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const std::size_t n = x.size(), m = y.size();
    double total = 0.0;
    if (n == m) {
        for (std::size_t i = 0; i < n; ++i) total += powered(std::abs(x[i] - y[i]), p);
        return total / static_cast<double>(n);
    }
    // Merge the quantile breakpoints k/n and l/m.
    std::size_t i = 0, j = 0;
    double level = 0.0;
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    while (i < n && j < m) {
        const double next = std::min(static_cast<double>(i + 1) / dn, static_cast<double>(j + 1) / dm);
        total += (next - level) * powered(std::abs(x[i] - y[j]), p);
        level = next;
        if (static_cast<double>(i + 1) / dn <= next) ++i;
        if (static_cast<double>(j + 1) / dm <= next) ++j;
    }
    return total;
}

double assignment_cost(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
    const std::size_t n = mu.size();
    if (nu.size() != n)
        throw InvalidArgument("Wasserstein distance: exact mode in dimension > 1 needs equal support sizes (" +
                              std::to_string(n) + " vs " + std::to_string(nu.size()) + "); resample first");
    if (n > kMaxAssignmentSize)
        throw InvalidArgument("Wasserstein distance: support size " + std::to_string(n) +
                              " exceeds the exact assignment limit " + std::to_string(kMaxAssignmentSize));
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = powered(euclidean(mu.point(i), nu.point(j)), p);
    const auto match = solve_assignment(cost, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + match[i]];
    return total / static_cast<double>(n);
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0) throw InvalidArgument("EmpiricalMeasure: dimension must be positive");
    if (coords_.empty() || coords_.size() % dim_ != 0)
        throw InvalidArgument("EmpiricalMeasure: need n >= 1 points of dimension " + std::to_string(dim_));
    for (double c : coords_)
        if (!std::isfinite(c)) throw InvalidArgument("EmpiricalMeasure: non-finite coordinate");
}

EmpiricalMeasure EmpiricalMeasure::point_mass(std::size_t dim, std::size_t n) {
    return EmpiricalMeasure(dim, std::vector<double>(dim * n, 0.0));
}

std::vector<double> EmpiricalMeasure::mean() const {
    std::vector<double> m(dim_, 0.0);
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < dim_; ++k) m[k] += coords_[i * dim_ + k];
    for (double& v : m) v /= static_cast<double>(n);
    return m;
}

double wp_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
    check_compatible(mu, nu);
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("wp_distance: p must be finite and >= 1");
    const double cost = mu.dim() == 1 ? sorted_cost(mu, nu, p) : assignment_cost(mu, nu, p);
    return p == 1.0 ? cost : std::pow(cost, 1.0 / p);
}

double w1_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) { return wp_distance(mu, nu, 1.0); }

double moment(const EmpiricalMeasure& mu, double p) {
    if (!(p > 0.0)) throw InvalidArgument("moment: p must be > 0");
    double total = 0.0;
    const std::size_t n = mu.size();
    for (std::size_t i = 0; i < n; ++i) total += powered(euclidean_norm(mu.point(i)), p);
    return total / static_cast<double>(n);
}

double PsiFunction::operator()(std::span<const double> x) const {
    switch (kind) {
        case Kind::linear: {
            if (weights.size() != x.size()) throw InvalidArgument("psi: weight count does not match dimension");
            double s = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) s += weights[k] * x[k];
            return s;
        }
        case Kind::norm: return euclidean_norm(x);
        case Kind::tanh:
            if (coordinate >= x.size()) throw InvalidArgument("psi: tanh coordinate out of range");
            return std::tanh(x[coordinate]);
        case Kind::custom:
            if (!custom) throw InvalidArgument("psi: custom function missing");
            return custom(x);
    }
    return 0.0;
}

double PsiFunction::lipschitz() const {
    switch (kind) {
        case Kind::linear: {
            double s = 0.0;
            for (double w : weights) s += w * w;
            return std::sqrt(s);
        }
        case Kind::norm:
        case Kind::tanh: return 1.0;
        case Kind::custom: return custom_lipschitz;
    }
    return 0.0;
}

void MeasureFunctionalSpec::validate() const {
    if (!(domination_constant >= 0.0)) throw InvalidArgument("measure functional: domination constant must be >= 0");
    std::visit(overloaded{
                   [](const WassersteinP& w) {
                       if (!(w.p >= 1.0)) throw InvalidArgument("measure functional: Wasserstein p must be >= 1");
                   },
                   [](const PowerOfW1& b) {
                       if (!(b.beta > 0.0 && b.beta <= 1.0))
                           throw InvalidArgument("measure functional: beta must lie in (0,1]");
                   },
                   [](const PsiIntegralDifference&) {},
               },
               kind);
}

double theta_eval(const MeasureFunctionalSpec& spec, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    spec.validate();
    return std::visit(overloaded{
                          [&](const WassersteinP& w) { return wp_distance(mu, nu, w.p); },
                          [&](const PowerOfW1& b) {
                              const double d = w1_distance(mu, nu);
                              return b.beta == 1.0 ? d : std::pow(d, b.beta);
                          },
                          [&](const PsiIntegralDifference& d) {
                              check_compatible(mu, nu);
                              auto integral = [&](const EmpiricalMeasure& m) {
                                  double s = 0.0;
                                  for (std::size_t i = 0; i < m.size(); ++i) {
                                      const double v = d.psi(m.point(i));
                                      if (!std::isfinite(v)) throw NumericalError("theta_eval: psi is not finite");
                                      s += v;
                                  }
                                  return s / static_cast<double>(m.size());
                              };
                              const double diff = integral(mu) - integral(nu);
                              switch (d.phi) {
                                  case PostMap::identity: return diff;
                                  case PostMap::positive_part: return std::max(diff, 0.0);
                                  case PostMap::absolute: return std::abs(diff);
                              }
                              return diff;
                          },
                      },
                      spec.kind);
}

DominationReport check_domination(const MeasureFunctionalSpec& spec, std::span<const CoupledSample> pairs) {
    DominationReport report;
    for (const auto& pair : pairs) {
        if (pair.a.size() != pair.b.size() || pair.a.dim() != pair.b.dim())
            throw InvalidArgument("check_domination: coupled samples must have equal size and dimension");
        DominationRow row;
        row.theta = theta_eval(spec, pair.a, pair.b);
        double coupled = 0.0;
        for (std::size_t i = 0; i < pair.a.size(); ++i) coupled += euclidean(pair.a.point(i), pair.b.point(i));
        coupled /= static_cast<double>(pair.a.size());
        row.bound = spec.domination_constant * coupled;
        row.pass = row.theta <= row.bound * (1.0 + 1e-12) + 1e-15;
        report.all_pass = report.all_pass && row.pass;
        report.rows.push_back(row);
    }
    return report;
}

ThetaCurve theta_integrability_curve(const CoefficientFn& lambda0, const Modulus& varrho,
                                     std::span<const double> grid, std::span<const double> theta_values,
                                     const ThetaMomentTerm* moment_term) {
    if (grid.size() != theta_values.size())
        throw InvalidArgument("theta_integrability_curve: grid and theta path differ in length");
    if (moment_term && moment_term->y_samples.size() != grid.size())
        throw InvalidArgument("theta_integrability_curve: grid and moment path differ in length");
    ThetaCurve out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double v = lambda0(grid[k]) * varrho(std::max(theta_values[k], 0.0));
        if (moment_term) {
            const auto& y = moment_term->y_samples[k];
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) s += moment_term->rho(euclidean_norm(y.point(i)));
            v += moment_term->eta(grid[k]) * s / static_cast<double>(y.size());
        }
        out.values[k] = v;
        out.locally_integrable = out.locally_integrable && std::isfinite(v);
    }
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        out.integral += 0.5 * (grid[k + 1] - grid[k]) * (out.values[k] + out.values[k + 1]);
    return out;
}

void write_measure_csv(std::ostream& os, const EmpiricalMeasure& mu) {
    for (std::size_t k = 0; k < mu.dim(); ++k) os << (k ? "," : "") << 'x' << (k + 1);
    os << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto p = mu.point(i);
        for (std::size_t k = 0; k < p.size(); ++k) os << (k ? "," : "") << p[k];
        os << '\n';
    }
}

EmpiricalMeasure read_measure_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("measure CSV: missing header");
    const std::size_t dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    std::vector<double> coords;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                coords.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InvalidArgument("measure CSV: row " + std::to_string(row) + ": bad number '" + cell + "'");
            }
            ++cols;
        }
        if (cols != dim) throw InvalidArgument("measure CSV: row " + std::to_string(row) + " has wrong column count");
    }
    return EmpiricalMeasure(dim, std::move(coords));
}

}  // namespace mkvlab
