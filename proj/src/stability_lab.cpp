#include "mkvlab/stability_lab.hpp"

#include "mkvlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace mkvlab {

namespace {

constexpr double kUnderflowFloor = 1e-300;

void check_pair(const PathEnsemble& a, const PathEnsemble& b) {
    if (a.grid != b.grid) throw InvalidArgument("stability: ensembles must share the time grid");
    if (a.N != b.N || a.m != b.m) throw InvalidArgument("stability: ensembles must share N and m");
    if (a.grid.empty() || a.N == 0) throw InvalidArgument("stability: empty ensemble");
}

double difference_norm(const PathEnsemble& a, const PathEnsemble& b, std::size_t node, std::size_t p,
                       DifferenceNorm norm, std::span<const double> frame) {
    const std::size_t m = a.m;
    if (norm == DifferenceNorm::euclidean || m == 1) {
        if (m == 1) return std::abs(a.at(node, p) - b.at(node, p));
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double y = a.at(node, p, r) - b.at(node, p, r);
            s += y * y;
        }
        return std::sqrt(s);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double v = 0.0;
        for (std::size_t r = 0; r < m; ++r)
            v += (frame.empty() ? (r == i ? 1.0 : 0.0) : frame[r * m + i]) * (a.at(node, p, r) - b.at(node, p, r));
        s += std::abs(v);
    }
    return s;
}

/// Pairwise summation, fixed tree shape.
double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double nearest_rank(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

}  // namespace

MomentCurve estimate_moment_curve(const PathEnsemble& a, const PathEnsemble& b, DifferenceNorm norm,
                                  std::span<const double> frame) {
    check_pair(a, b);
    if (!frame.empty() && frame.size() != a.m * a.m) throw InvalidArgument("estimate_moment_curve: frame must be m x m");
    MomentCurve c;
    c.grid = a.grid;
    c.N = a.N;
    std::vector<double> vals(a.N), sq(a.N);
    for (std::size_t k = 0; k < a.grid.size(); ++k) {
        for (std::size_t p = 0; p < a.N; ++p) vals[p] = difference_norm(a, b, k, p, norm, frame);
        const double mean = pairwise_sum(vals.data(), a.N) / static_cast<double>(a.N);
        for (std::size_t p = 0; p < a.N; ++p) sq[p] = (vals[p] - mean) * (vals[p] - mean);
        const double var = a.N > 1 ? pairwise_sum(sq.data(), a.N) / static_cast<double>(a.N - 1) : 0.0;
        c.estimates.push_back(mean);
        c.standard_errors.push_back(std::sqrt(var / static_cast<double>(a.N)));
    }
    return c;
}

MomentBoundReport check_moment_bound(const MomentCurve& curve, std::span<const double> bound,
                                     const SlackPolicy& policy) {
    if (bound.size() != curve.grid.size()) throw InvalidArgument("check_moment_bound: bound must be on the curve grid");
    if (!(policy.k_se >= 0.0) || !(policy.rel_slack >= 0.0))
        throw InvalidArgument("check_moment_bound: slack parameters must be >= 0");
    const double scale = (1.0 + policy.rel_slack) * (policy.sqrt_m ? std::sqrt(static_cast<double>(policy.m)) : 1.0);
    MomentBoundReport rep;
    rep.grid = curve.grid;
    rep.estimate = curve.estimates;
    rep.standard_error = curve.standard_errors;
    for (std::size_t k = 0; k < bound.size(); ++k) {
        const double b = bound[k] * scale;
        const bool flag = curve.estimates[k] - policy.k_se * curve.standard_errors[k] > b;
        rep.bound.push_back(b);
        rep.flagged.push_back(flag);
        if (flag) ++rep.flagged_count;
    }
    rep.pass = rep.flagged_count == 0;
    return rep;
}

void write_moment_report_csv(std::ostream& os, const MomentBoundReport& rep) {
    os << "t,estimate,se,bound,flag\n";
    char buf[160];
    for (std::size_t k = 0; k < rep.grid.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", rep.grid[k], rep.estimate[k],
                      rep.standard_error[k], rep.bound[k], rep.flagged[k] ? 1 : 0);
        os << buf;
    }
}

LyapunovFit fit_moment_lyapunov(const MomentCurve& curve, double alpha, double window_start, double window_end) {
    if (!(alpha > 0.0)) throw InvalidArgument("fit_moment_lyapunov: alpha must be > 0");
    if (curve.grid.empty()) throw InvalidArgument("fit_moment_lyapunov: empty curve");
    const double t0 = curve.grid.front();
    if (window_start > window_end) {
        window_start = curve.grid.front();
        window_end = curve.grid.back();
    }
    LyapunovFit fit;
    fit.alpha = alpha;
    fit.window_start = window_start;
    fit.window_end = window_end;
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < curve.grid.size(); ++k) {
        const double t = curve.grid[k];
        if (t < window_start || t > window_end) continue;
        if (!(curve.estimates[k] > 0.0)) {
            ++fit.zero_nodes_skipped;
            continue;
        }
        xs.push_back(std::pow(t - t0, alpha));
        ys.push_back(std::log(curve.estimates[k]));
    }
    if (xs.size() < 3) throw InvalidArgument("fit_moment_lyapunov: fewer than 3 usable nodes in the window");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("fit_moment_lyapunov: window has no spread in time");
    fit.lambda_hat = sxy / sxx;
    fit.intercept = my - fit.lambda_hat * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - fit.intercept - fit.lambda_hat * xs[i];
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    fit.nodes_used = xs.size();
    return fit;
}

std::pair<double, double> reliable_window(const MomentCurve& curve, double max_rel_se) {
    if (curve.grid.empty()) throw InvalidArgument("reliable_window: empty curve");
    std::size_t last = 0;
    for (std::size_t k = 0; k < curve.grid.size(); ++k) {
        const double e = curve.estimates[k];
        if (!(e > 0.0) || curve.standard_errors[k] > max_rel_se * e) break;
        last = k;
    }
    return {curve.grid.front(), curve.grid[last]};
}

PathwiseExponentSummary estimate_pathwise_exponent(const PathEnsemble& a, const PathEnsemble& b, double alpha,
                                                   double tail_fraction) {
    check_pair(a, b);
    if (!(alpha > 0.0)) throw InvalidArgument("estimate_pathwise_exponent: alpha must be > 0");
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw InvalidArgument("estimate_pathwise_exponent: tail_fraction must lie in (0,1)");
    const double t0 = a.grid.front(), T = a.grid.back();
    const double start = T - tail_fraction * (T - t0);
    std::size_t first = 0;
    while (first < a.grid.size() && (a.grid[first] < start || a.grid[first] <= t0)) ++first;
    if (first >= a.grid.size()) throw InvalidArgument("estimate_pathwise_exponent: tail window holds no nodes");

    PathwiseExponentSummary s;
    s.paths = a.N;
    s.window_start = a.grid[first];
    const double neg_inf = -std::numeric_limits<double>::infinity();
    s.per_path.assign(a.N, neg_inf);
    for (std::size_t p = 0; p < a.N; ++p) {
        double best = neg_inf;
        bool degenerate = false;
        for (std::size_t k = first; k < a.grid.size(); ++k) {
            const double y = difference_norm(a, b, k, p, DifferenceNorm::euclidean, {});
            if (y < kUnderflowFloor) {
                degenerate = true;
                break;
            }
            best = std::max(best, std::log(y) / std::pow(a.grid[k] - t0, alpha));
        }
        if (degenerate) {
            ++s.degenerate_count;
        } else {
            s.per_path[p] = best;
        }
    }
    std::vector<double> sorted = s.per_path;
    std::sort(sorted.begin(), sorted.end());
    s.median = nearest_rank(sorted, 0.5);
    s.q90 = nearest_rank(sorted, 0.9);
    s.max = sorted.back();
    return s;
}

}  // namespace mkvlab
