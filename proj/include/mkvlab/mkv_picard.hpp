#pragma once

#include "mkvlab/coeff_calc.hpp"
#include "mkvlab/measure_space.hpp"
#include "mkvlab/sde_engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mkvlab {

struct PicardOptions {
    double tol = 5e-3;
    /// Maximum number of frozen-measure sweeps.
    std::size_t max_iter = 8;
    /// Metric used for Delta(t); W1 by default.
    MeasureFunctionalSpec theta{};
    /// Bound inputs; derived from the model's Hoelder data when absent.
    std::optional<PicardBoundInputs> bound_inputs;
};

/// sup_t w1 between two flows on a common grid, with the CRN standard error at the maximizing node.
struct FlowDistance {
    double value = 0.0;
    std::size_t node = 0;
    /// std(|X_i - X~_i|) / sqrt(N) at `node`, pairing particles by index.
    double standard_error = 0.0;
};

FlowDistance flow_distance(const MeasureFlowGrid& a, const MeasureFlowGrid& b, std::size_t threads = 0);

struct PicardRun {
    /// iterates[0] is mu_0; iterates[n] = Law(X^{xi, mu_{n-1}}).
    std::vector<MeasureFlowGrid> iterates;
    /// distances[n] = sup_t w1(iterates[n], iterates[n+1]).
    std::vector<double> distances;
    std::vector<double> distance_se;
    std::vector<std::size_t> distance_nodes;
    /// theoretical_tail[n] = picard_error_bound(n, T, Delta(T), ...).
    std::vector<double> theoretical_tail;
    /// Delta(T) = sup_t theta(mu_1, mu_0) / c_P.
    double delta = 0.0;
    /// mu_0 is a point mass at the origin, so Delta also equals sup_t E|X^{xi, delta_0}_t|.
    bool delta_from_point_mass = false;
    /// int_{t0}^T e^{int_s^T gamma_P0} lambda_0(s) ds.
    double kernel_integral = 0.0;
    PicardBoundInputs bound_inputs;
    bool converged = false;
    std::size_t iterations_used = 0;

    [[nodiscard]] const MeasureFlowGrid& final_flow() const { return iterates.back(); }
};

/// Fixed-point iteration mu_n = Law(X^{xi, mu_{n-1}}) with common random numbers across sweeps.
/// Throws BlowUpError if a sweep blows up.
PicardRun picard_solve(const ModelSpec& model, const InitialSampler& xi, const SimConfig& cfg,
                       const MeasureFlowGrid& mu0, const PicardOptions& options = {});

/// Delta * sum_{i >= n} (c_P x)^i / i!, x = int_{t0}^t e^{int_s^t gamma_P0} lambda_0(s) ds.
double picard_error_bound(std::size_t n, double t, double delta, double c_P, const CoefficientFn& gamma_P0,
                          const CoefficientFn& lambda0, double t0 = 0.0);

/// sum_{i >= n} y^i / i!, computed as e^y minus the compensated partial sum.
double exp_series_tail(std::size_t n, double y);

struct GrowthEnvelopeReport {
    std::vector<double> grid;
    std::vector<double> observed;   // E|X_t| under the flow
    std::vector<double> standard_error;
    std::vector<double> envelope;
    std::vector<double> margin;     // envelope - observed
    double k_se = 3.0;
    bool pass = true;
};

/// First moment of the flow against e^{int f_P} E|xi|_u + int e^{int_s^t f_P} (kappa_0 + g_P).
GrowthEnvelopeReport growth_envelope_check(const MeasureFlowGrid& flow, const GrowthTermSpec& spec, double xi_mean,
                                           double k_se = 3.0);
/// Same check with the exponent and forcing supplied directly.
GrowthEnvelopeReport growth_envelope_check(const MeasureFlowGrid& flow, const CoefficientFn& f_P,
                                           const CoefficientFn& forcing, double xi_mean, double k_se = 3.0);

/// Successive distances against the two candidate per-step factors c^n x^n / n! and c^n x^n / n.
struct SeriesVariantRow {
    std::size_t n = 0;
    double observed = 0.0;
    double standard_error = 0.0;
    double factorial_tail = 0.0;  // Delta * sum_{i >= n} (c x)^i / i!
    double harmonic_step = 0.0;   // Delta * (c x)^n / n, n >= 1
    bool factorial_ok = true;
    bool harmonic_ok = true;
};

struct SeriesVariantNote {
    double delta = 0.0;
    double c_P = 1.0;
    double kernel_integral = 0.0;
    double k_se = 3.0;
    std::vector<SeriesVariantRow> rows;
    /// "factorial", "harmonic", "both" or "neither".
    std::string matched;
};

SeriesVariantNote series_variant_check(const PicardRun& run, double k_se = 3.0);

/// CSV rows (n, distance, se, theoretical_bound).
void write_picard_csv(std::ostream& os, const PicardRun& run);

}  // namespace mkvlab
