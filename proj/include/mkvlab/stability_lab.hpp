#pragma once

#include "mkvlab/sde_engine.hpp"

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace mkvlab {

enum class DifferenceNorm { euclidean, u_frame };

struct MomentCurve {
    std::vector<double> grid;
    std::vector<double> estimates;
    std::vector<double> standard_errors;
    std::size_t N = 0;
};

/// Per node: mean and standard error of |X_t - X~_t| (or sum_i |u_i'(X_t - X~_t)| in the u-frame).
/// `frame` is the m x m frame matrix (row-major, columns u_i); empty means identity.
MomentCurve estimate_moment_curve(const PathEnsemble& a, const PathEnsemble& b,
                                  DifferenceNorm norm = DifferenceNorm::euclidean,
                                  std::span<const double> frame = {});

struct SlackPolicy {
    double k_se = 3.0;
    /// Bound multiplied by (1 + rel_slack).
    double rel_slack = 0.0;
    /// Multiply the bound by sqrt(m) when a u-frame bound is compared with a Euclidean curve.
    bool sqrt_m = false;
    std::size_t m = 1;
};

struct MomentBoundReport {
    std::vector<double> grid;
    std::vector<double> estimate;
    std::vector<double> standard_error;
    std::vector<double> bound;   // after the slack policy
    std::vector<bool> flagged;
    std::size_t flagged_count = 0;
    bool pass = true;
};

MomentBoundReport check_moment_bound(const MomentCurve& curve, std::span<const double> bound,
                                     const SlackPolicy& policy = {});

/// CSV (t, estimate, se, bound, flag).
void write_moment_report_csv(std::ostream& os, const MomentBoundReport& rep);

struct LyapunovFit {
    double alpha = 1.0;
    double lambda_hat = 0.0;
    double intercept = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    /// Root mean square residual of the log-linear fit.
    double residual = 0.0;
    std::size_t nodes_used = 0;
    /// Nodes inside the window dropped because the estimate was zero.
    std::size_t zero_nodes_skipped = 0;
};

/// Least squares of log(estimate) against (t - t0)^alpha over nodes with t in [window_start, window_end];
/// an empty window (start > end) means the whole grid. Throws with fewer than 3 usable nodes.
LyapunovFit fit_moment_lyapunov(const MomentCurve& curve, double alpha, double window_start = 1.0,
                                double window_end = 0.0);

/// [grid[0], t_k] for the longest prefix of nodes whose estimate is positive and whose
/// standard error is at most max_rel_se times the estimate.
std::pair<double, double> reliable_window(const MomentCurve& curve, double max_rel_se = 0.1);

struct PathwiseExponentSummary {
    double median = 0.0;
    double q90 = 0.0;
    double max = 0.0;
    std::size_t degenerate_count = 0;
    std::size_t paths = 0;
    double window_start = 0.0;
    /// Per-path exponents; degenerate paths hold -inf.
    std::vector<double> per_path;
};

/// Per path: sup over the last tail_fraction of the grid of (t - t0)^{-alpha} log|Y_t|.
/// Paths reaching |Y| < 1e-300 anywhere in the window are degenerate (-inf) and counted separately.
PathwiseExponentSummary estimate_pathwise_exponent(const PathEnsemble& a, const PathEnsemble& b, double alpha,
                                                   double tail_fraction = 0.25);

}  // namespace mkvlab
