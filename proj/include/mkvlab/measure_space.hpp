#pragma once

#include "mkvlab/coefficient_fn.hpp"
#include "mkvlab/modulus.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mkvlab {

/// Uniform-weight point cloud in R^m; coordinates stored row-major (n x m).
class EmpiricalMeasure {
public:
    EmpiricalMeasure(std::size_t dim, std::vector<double> coords);

    /// n copies of the origin.
    static EmpiricalMeasure point_mass(std::size_t dim, std::size_t n);

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t size() const { return coords_.size() / dim_; }
    [[nodiscard]] std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }
    [[nodiscard]] const std::vector<double>& coords() const { return coords_; }
    [[nodiscard]] std::vector<double> mean() const;

private:
    std::size_t dim_;
    std::vector<double> coords_;
};

/// Largest support for the exact multi-dimensional assignment route.
inline constexpr std::size_t kMaxAssignmentSize = 2048;

double w1_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
double wp_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p);
/// (1/n) sum |x_i|^p
double moment(const EmpiricalMeasure& mu, double p);

/// Tagged test function on R^m with a known Lipschitz constant.
struct PsiFunction {
    enum class Kind { linear, norm, tanh, custom };
    Kind kind = Kind::linear;
    std::vector<double> weights;          // linear: psi(x) = w . x
    std::size_t coordinate = 0;           // tanh: psi(x) = tanh(x_c)
    std::function<double(std::span<const double>)> custom;
    double custom_lipschitz = 0.0;

    double operator()(std::span<const double> x) const;
    [[nodiscard]] double lipschitz() const;
};

/// Post-map applied to the integral difference.
enum class PostMap { identity, positive_part, absolute };

struct WassersteinP {
    double p = 1.0;
};
struct PsiIntegralDifference {
    PsiFunction psi;
    PostMap phi = PostMap::absolute;
};
struct PowerOfW1 {
    double beta = 1.0;
};

struct MeasureFunctionalSpec {
    std::variant<WassersteinP, PsiIntegralDifference, PowerOfW1> kind = WassersteinP{};
    double domination_constant = 1.0;

    void validate() const;
};

double theta_eval(const MeasureFunctionalSpec& spec, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Coupled samples: point i of `a` is paired with point i of `b`.
struct CoupledSample {
    EmpiricalMeasure a;
    EmpiricalMeasure b;
};

struct DominationRow {
    double theta = 0.0;
    double bound = 0.0;
    bool pass = true;
};

struct DominationReport {
    std::vector<DominationRow> rows;
    bool all_pass = true;
};

DominationReport check_domination(const MeasureFunctionalSpec& spec, std::span<const CoupledSample> pairs);

/// Optional eta(s) * E rho(|Y_s|) term; one sample cloud of Y per grid node.
struct ThetaMomentTerm {
    CoefficientFn eta;
    Modulus rho;
    std::vector<EmpiricalMeasure> y_samples;
};

struct ThetaCurve {
    std::vector<double> grid;
    std::vector<double> values;
    double integral = 0.0;
    bool locally_integrable = true;
};

ThetaCurve theta_integrability_curve(const CoefficientFn& lambda0, const Modulus& varrho,
                                     std::span<const double> grid, std::span<const double> theta_values,
                                     const ThetaMomentTerm* moment_term = nullptr);

/// CSV interchange: header x1..xm, one point per row.
void write_measure_csv(std::ostream& os, const EmpiricalMeasure& mu);
EmpiricalMeasure read_measure_csv(std::istream& is);

}  // namespace mkvlab
