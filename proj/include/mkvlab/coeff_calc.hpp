#pragma once

#include "mkvlab/coefficient_fn.hpp"
#include "mkvlab/model.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mkvlab {

/// q_alpha = 1 / (1 - alpha); +inf at alpha = 1.
double dual_exponent(double alpha);

/// Pseudonorm of a deterministic scalar: x+ for p < inf, x itself for p = inf.
double bracket_norm(double x, double p);

/// Partial Hoelder data of a drift: one entry per term k.
struct HolderTermSpec {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<CoefficientFn> eta;      // m x m per term
    std::vector<CoefficientFn> lambda;   // vector(m) per term
    CoefficientFn epsilon;               // scalar uniform error, forcing of the comparison curve
    CoefficientFn c0_zeta0;
    double c_P = 1.0;

    [[nodiscard]] std::size_t l() const { return alpha.size(); }
    void validate() const;
};

/// Partial growth data; same algebra as HolderTermSpec.
struct GrowthTermSpec {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<CoefficientFn> upsilon;  // m x m per term
    std::vector<CoefficientFn> chi;      // vector(m) per term
    CoefficientFn kappa;                 // vector(m)
    CoefficientFn c0_zeta0;
    double c_P = 1.0;

    [[nodiscard]] std::size_t l() const { return alpha.size(); }
    void validate() const;
};

struct StabilityCoefficients {
    CoefficientFn gamma_P;
    CoefficientFn delta_P;
};

struct GrowthCoefficients {
    CoefficientFn f_P;
    CoefficientFn g_P;
    /// kappa^(0): sum of positive parts of kappa.
    CoefficientFn kappa0;
};

StabilityCoefficients gamma_delta_P(const HolderTermSpec& spec);
GrowthCoefficients f_g_P(const GrowthTermSpec& spec);

/// gamma_P without measure contributions, and lambda_0 = sum_k lambda_k^(0), for the Picard bound.
struct PicardBoundInputs {
    CoefficientFn gamma_P0;
    CoefficientFn lambda0;
    double c_P = 1.0;
};
PicardBoundInputs picard_bound_inputs(const HolderTermSpec& spec);

/// t -> e^{int_t0^t gamma} initial + int_t0^t e^{int_s^t gamma} forcing(s) ds on the grid (t0 = grid[0]).
std::vector<double> gronwall_curve(const CoefficientFn& gamma, double initial, const CoefficientFn& forcing,
                                   std::span<const double> grid);

/// Sum_k lambda_hat_k alpha_k (s - s_k)^{alpha_k - 1}, alpha strictly increasing, lambda_hat_l < 0.
struct PowerEnvelope {
    std::vector<double> alpha;
    std::vector<double> lambda_hat;
    std::vector<double> s;
    double t1 = 0.0;

    void validate() const;
    [[nodiscard]] double operator()(double t) const;
};

struct PowerEnvelopeReport {
    std::vector<double> grid;
    std::vector<double> margin;  // envelope - gamma; NaN where both sides are singular
    std::size_t skipped = 0;
    bool pass = true;
    double alpha_l = 0.0;
    double lambda_hat_l = 0.0;
};

PowerEnvelopeReport check_power_envelope(const std::function<double(double)>& gamma_P, const PowerEnvelope& env,
                                         double T, std::size_t grid_points = 1001);

struct SeriesCheckRow {
    double epsilon = 0.0;
    double partial_sum = 0.0;
    std::size_t terms = 0;
    double last_term = 0.0;
    /// term_1 + int_0^{terms-1} f(x) dx, an upper bound of the partial sum for nonincreasing terms.
    double integral_bound = 0.0;
    bool converges = false;
};

struct SeriesCheckReport {
    double delta_tilde = 0.0;
    std::vector<SeriesCheckRow> rows;
};

/// Partial sums of sum_n exp((eps/2) int_{t1}^{t_n} gamma_P), t_n = t1 + delta_tilde (n - 1).
/// delta_tilde defaults to delta_hat / 2 and must lie in (0, delta_hat).
SeriesCheckReport c11_series_check(const CoefficientFn& gamma_P, double t1, double delta_hat,
                                   std::span<const double> epsilons, double horizon, double delta_tilde = 0.0);

/// Numeric value of int_0^inf exp(-gamma (delta t)^alpha) dt against the two candidate closed forms
/// Gamma(1/alpha) / (alpha gamma^{1/alpha} delta) and Gamma(1/alpha) / (alpha gamma^alpha delta).
struct ExponentCheck {
    double alpha = 0.0, gamma = 0.0, delta = 0.0;
    double numeric = 0.0;
    double inverse_exponent_form = 0.0;
    double direct_exponent_form = 0.0;
    std::string matched;  // "1/alpha", "alpha", "both" or "neither"
};
ExponentCheck exp_power_integral_check(double alpha, double gamma, double delta);

/// Hoelder and growth data read off the structured drift of a model.
HolderTermSpec derive_holder_spec(const ModelSpec& model, double c_P = 1.0);
GrowthTermSpec derive_growth_spec(const ModelSpec& model, double c_P = 1.0);

/// (t, value) CSV with 17 significant digits.
void write_curve_csv(std::ostream& os, std::span<const double> grid, std::span<const double> values,
                     const std::string& value_name = "value");

}  // namespace mkvlab
