#include "mkvlab/coefficient_fn.hpp"

#include "mkvlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mkvlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) r[k] += a[k];
    for (std::size_t k = 0; k < b.size(); ++k) r[k] += b[k];
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return Poly{0.0};
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

Poly poly_trim(Poly p) {
    while (p.size() > 1 && p.back() == 0.0) p.pop_back();
    if (p.empty()) p.push_back(0.0);
    return p;
}

Poly poly_integrate(const Poly& p) {
    Poly r(p.size() + 1, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) r[k + 1] = p[k] / static_cast<double>(k + 1);
    return r;
}

/// Interpolating polynomial (monomial basis) through (x_j, y_j) via Newton form.
Poly interpolate(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> c = y;
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = n - 1; i >= j; --i) c[i] = (c[i] - c[i - 1]) / (x[i] - x[i - j]);
    Poly p{c[n - 1]};
    for (std::size_t k = n - 1; k-- > 0;) {
        p = poly_mul(p, Poly{-x[k], 1.0});
        p[0] += c[k];
    }
    return poly_trim(p);
}

}  // namespace

double poly_eval(const Poly& p, double t) {
    double acc = 0.0;
    for (std::size_t k = p.size(); k-- > 0;) acc = acc * t + p[k];
    return acc;
}

CoefficientFn::CoefficientFn() : breaks_{-kInf}, pieces_{{Poly{0.0}}} {}

CoefficientFn::CoefficientFn(std::size_t rows, std::size_t cols, std::vector<double> breaks,
                             std::vector<std::vector<Poly>> pieces)
    : rows_(rows), cols_(cols), breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
    if (rows_ == 0 || cols_ == 0) throw InvalidArgument("CoefficientFn: empty shape");
    if (breaks_.empty() || breaks_.size() != pieces_.size())
        throw InvalidArgument("CoefficientFn: need one piece per breakpoint");
    for (std::size_t k = 0; k < breaks_.size(); ++k) {
        if (std::isnan(breaks_[k]) || breaks_[k] == kInf)
            throw InvalidArgument("CoefficientFn: invalid breakpoint");
        if (k > 0 && !(breaks_[k] > breaks_[k - 1]))
            throw InvalidArgument("CoefficientFn: breakpoints must be strictly increasing");
        if (pieces_[k].size() != rows_ * cols_)
            throw InvalidArgument("CoefficientFn: piece " + std::to_string(k) + " has wrong entry count");
        for (auto& p : pieces_[k]) {
            p = poly_trim(p);
            for (double c : p)
                if (!std::isfinite(c)) throw InvalidArgument("CoefficientFn: non-finite coefficient");
        }
    }
    if (std::isinf(breaks_.front()))
        for (const auto& p : pieces_.front())
            if (p.size() > 1)
                throw InvalidArgument("CoefficientFn: unbounded first piece must be constant");
}

CoefficientFn CoefficientFn::constant(double c) { return constant_matrix(1, 1, {c}); }

CoefficientFn CoefficientFn::constant_vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return constant_matrix(n, 1, std::move(values));
}

CoefficientFn CoefficientFn::constant_matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    if (values.size() != rows * cols) throw InvalidArgument("CoefficientFn: value count does not match shape");
    std::vector<Poly> piece;
    piece.reserve(values.size());
    for (double v : values) piece.push_back(Poly{v});
    return CoefficientFn(rows, cols, {-kInf}, {std::move(piece)});
}

CoefficientFn CoefficientFn::zero(std::size_t rows, std::size_t cols) {
    return constant_matrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

CoefficientFn CoefficientFn::polynomial(Poly p, double t0) {
    return CoefficientFn(1, 1, {t0}, {{std::move(p)}});
}

CoefficientFn CoefficientFn::piecewise(std::vector<double> breaks, std::vector<Poly> pieces) {
    std::vector<std::vector<Poly>> wrapped;
    wrapped.reserve(pieces.size());
    for (auto& p : pieces) wrapped.push_back({std::move(p)});
    return CoefficientFn(1, 1, std::move(breaks), std::move(wrapped));
}

CoefficientFn CoefficientFn::stack(std::size_t rows, std::size_t cols, const std::vector<CoefficientFn>& entries) {
    if (entries.size() != rows * cols) throw InvalidArgument("CoefficientFn: entry count does not match shape");
    std::vector<const CoefficientFn*> ptrs;
    for (const auto& e : entries) {
        if (!e.is_scalar()) throw InvalidArgument("CoefficientFn: stacked entries must be scalar");
        ptrs.push_back(&e);
    }
    const auto breaks = merged_breaks(ptrs);
    std::vector<std::vector<Poly>> pieces(breaks.size());
    for (const auto& e : entries) {
        const auto r = e.refined(breaks);
        for (std::size_t k = 0; k < breaks.size(); ++k) pieces[k].push_back(r.pieces_[k][0]);
    }
    return CoefficientFn(rows, cols, breaks, std::move(pieces));
}

std::size_t CoefficientFn::degree() const {
    std::size_t d = 0;
    for (const auto& piece : pieces_)
        for (const auto& p : piece) d = std::max(d, p.size() - 1);
    return d;
}

bool CoefficientFn::is_zero() const {
    for (const auto& piece : pieces_)
        for (const auto& p : piece)
            if (p.size() != 1 || p[0] != 0.0) return false;
    return true;
}

std::size_t CoefficientFn::piece_index(double t) const {
    if (std::isnan(t)) throw InvalidArgument("CoefficientFn: NaN time");
    const double b0 = breaks_.front();
    if (t < b0 && !(b0 - t <= 1e-9 * (1.0 + std::abs(b0))))
        throw InvalidArgument("CoefficientFn: time " + std::to_string(t) + " before domain start " +
                              std::to_string(b0));
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    return it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
}

double CoefficientFn::operator()(double t) const {
    if (!is_scalar()) throw InvalidArgument("CoefficientFn: scalar evaluation of non-scalar function");
    return poly_eval(pieces_[piece_index(t)][0], t);
}

double CoefficientFn::entry(double t, std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) throw InvalidArgument("CoefficientFn: entry index out of range");
    return poly_eval(pieces_[piece_index(t)][i * cols_ + j], t);
}

void CoefficientFn::values_into(double t, std::span<double> out) const {
    if (out.size() != size()) throw InvalidArgument("CoefficientFn: output size mismatch");
    const auto& piece = pieces_[piece_index(t)];
    for (std::size_t k = 0; k < piece.size(); ++k) out[k] = poly_eval(piece[k], t);
}

std::vector<double> CoefficientFn::values(double t) const {
    std::vector<double> out(size());
    values_into(t, out);
    return out;
}

CoefficientFn CoefficientFn::component(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) throw InvalidArgument("CoefficientFn: component index out of range");
    std::vector<std::vector<Poly>> pieces;
    pieces.reserve(pieces_.size());
    for (const auto& piece : pieces_) pieces.push_back({piece[i * cols_ + j]});
    return CoefficientFn(1, 1, breaks_, std::move(pieces));
}

double CoefficientFn::integral(double a, double b) const {
    if (!is_scalar()) throw InvalidArgument("CoefficientFn: integral of non-scalar function");
    if (a == b) return 0.0;
    if (b < a) return -integral(b, a);
    std::size_t k = piece_index(a);
    double total = 0.0;
    double lo = a;
    while (lo < b) {
        const double hi = (k + 1 < breaks_.size()) ? std::min(b, breaks_[k + 1]) : b;
        const Poly& p = pieces_[k][0];
        if (p.size() == 1) {
            total += p[0] * (hi - lo);
        } else {
            const Poly anti = poly_integrate(p);
            total += poly_eval(anti, hi) - poly_eval(anti, lo);
        }
        lo = hi;
        ++k;
    }
    return total;
}

CoefficientFn CoefficientFn::antiderivative(double t0) const {
    if (!is_scalar()) throw InvalidArgument("CoefficientFn: antiderivative of non-scalar function");
    std::vector<double> breaks;
    std::vector<Poly> pieces;
    const std::size_t k0 = piece_index(t0);
    double value_at_start = 0.0;
    for (std::size_t k = k0; k < breaks_.size(); ++k) {
        const double lo = (k == k0) ? t0 : breaks_[k];
        Poly anti = poly_integrate(pieces_[k][0]);
        anti[0] += value_at_start - poly_eval(anti, lo);
        breaks.push_back(lo);
        if (k + 1 < breaks_.size()) value_at_start = poly_eval(anti, breaks_[k + 1]);
        pieces.push_back(std::move(anti));
    }
    return piecewise(std::move(breaks), std::move(pieces));
}

CoefficientFn CoefficientFn::scaled(double c) const {
    auto pieces = pieces_;
    for (auto& piece : pieces)
        for (auto& p : piece)
            for (double& v : p) v *= c;
    return CoefficientFn(rows_, cols_, breaks_, std::move(pieces));
}

CoefficientFn CoefficientFn::refined(const std::vector<double>& breaks) const {
    std::vector<std::vector<Poly>> pieces;
    pieces.reserve(breaks.size());
    for (double b : breaks) {
        const double probe = std::isinf(b) ? breaks_.front() : b;
        pieces.push_back(pieces_[piece_index(std::max(probe, breaks_.front()))]);
    }
    return CoefficientFn(rows_, cols_, breaks, std::move(pieces));
}

double CoefficientFn::sampled_min(std::size_t i, std::size_t j, double a, double b) const {
    double best = kInf;
    auto probe = [&](double t) { best = std::min(best, entry(t, i, j)); };
    std::vector<double> nodes{a, b};
    for (double x : breaks_)
        if (x > a && x < b) nodes.push_back(x);
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
        for (int s = 0; s <= 32; ++s) probe(nodes[k] + (nodes[k + 1] - nodes[k]) * s / 32.0);
    if (nodes.size() == 1 || a == b) probe(a);
    return best;
}

std::vector<double> merged_breaks(std::span<const CoefficientFn* const> fns) {
    double start = -kInf;
    for (const auto* f : fns) start = std::max(start, f->start());
    std::vector<double> out{start};
    for (const auto* f : fns)
        for (double b : f->breaks())
            if (b > start) out.push_back(b);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CoefficientFn operator+(const CoefficientFn& x, const CoefficientFn& y) {
    if (x.rows_ != y.rows_ || x.cols_ != y.cols_) throw InvalidArgument("CoefficientFn: shape mismatch in sum");
    const CoefficientFn* fns[] = {&x, &y};
    const auto breaks = merged_breaks(fns);
    const auto xr = x.refined(breaks);
    const auto yr = y.refined(breaks);
    auto pieces = xr.pieces_;
    for (std::size_t k = 0; k < pieces.size(); ++k)
        for (std::size_t e = 0; e < pieces[k].size(); ++e) pieces[k][e] = poly_add(pieces[k][e], yr.pieces_[k][e]);
    return CoefficientFn(x.rows_, x.cols_, breaks, std::move(pieces));
}

CoefficientFn operator*(const CoefficientFn& x, const CoefficientFn& y) {
    const bool scalar_left = x.is_scalar();
    if (!scalar_left && !y.is_scalar() && (x.rows_ != y.rows_ || x.cols_ != y.cols_))
        throw InvalidArgument("CoefficientFn: shape mismatch in product");
    const CoefficientFn* fns[] = {&x, &y};
    const auto breaks = merged_breaks(fns);
    const auto xr = x.refined(breaks);
    const auto yr = y.refined(breaks);
    const CoefficientFn& shaped = scalar_left ? yr : xr;
    auto pieces = shaped.pieces_;
    for (std::size_t k = 0; k < pieces.size(); ++k)
        for (std::size_t e = 0; e < pieces[k].size(); ++e) {
            const Poly& a = x.is_scalar() ? xr.pieces_[k][0] : xr.pieces_[k][e];
            const Poly& b = y.is_scalar() ? yr.pieces_[k][0] : yr.pieces_[k][e];
            pieces[k][e] = poly_mul(a, b);
        }
    return CoefficientFn(shaped.rows_, shaped.cols_, breaks, std::move(pieces));
}

namespace {

constexpr int kMaxResampleDepth = 12;

void resample_piece(double lo, double hi, std::size_t degree, const std::function<double(double)>& formula,
                    int depth, std::vector<double>& breaks, std::vector<Poly>& pieces) {
    std::vector<double> x(degree + 1), y(degree + 1);
    if (degree == 0) {
        x[0] = 0.5 * (lo + hi);
    } else {
        for (std::size_t j = 0; j <= degree; ++j)
            x[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(degree);
    }
    for (std::size_t j = 0; j <= degree; ++j) y[j] = formula(x[j]);
    Poly p = interpolate(x, y);
    bool ok = true;
    for (int s = 0; s <= 8 && ok; ++s) {
        const double t = lo + (hi - lo) * (s + 0.5) / 9.0;
        const double f = formula(t);
        ok = std::abs(poly_eval(p, t) - f) <= 1e-12 * (1.0 + std::abs(f));
    }
    if (degree == 0) {
        for (double t : {lo, hi}) ok = ok && std::abs(formula(t) - p[0]) <= 1e-12 * (1.0 + std::abs(p[0]));
    }
    if (ok || depth >= kMaxResampleDepth) {
        breaks.push_back(lo);
        pieces.push_back(std::move(p));
        return;
    }
    const double mid = 0.5 * (lo + hi);
    resample_piece(lo, mid, degree, formula, depth + 1, breaks, pieces);
    resample_piece(mid, hi, degree, formula, depth + 1, breaks, pieces);
}

}  // namespace

CoefficientFn resample_formula(std::span<const CoefficientFn* const> inputs,
                               const std::function<double(double)>& formula) {
    if (inputs.empty()) return CoefficientFn::constant(formula(0.0));
    const auto breaks = merged_breaks(inputs);
    std::size_t degree = 0;
    for (const auto* f : inputs) degree = std::max(degree, f->degree());
    std::vector<double> out_breaks;
    std::vector<Poly> out_pieces;
    for (std::size_t k = 0; k < breaks.size(); ++k) {
        const double lo = breaks[k];
        const bool last = k + 1 == breaks.size();
        if (std::isinf(lo)) {
            // Constant leading piece: value is the formula at any interior point.
            const double probe = last ? 0.0 : breaks[k + 1] - 1.0;
            out_breaks.push_back(lo);
            out_pieces.push_back(Poly{formula(probe)});
            continue;
        }
        if (last) {
            // Unbounded trailing piece: interpolate on a unit window past its start.
            const double span = std::max(1.0, std::abs(lo));
            std::vector<double> x(degree + 1), y(degree + 1);
            for (std::size_t j = 0; j <= degree; ++j) {
                x[j] = lo + span * static_cast<double>(j) / static_cast<double>(std::max<std::size_t>(degree, 1));
                y[j] = formula(x[j]);
            }
            out_breaks.push_back(lo);
            out_pieces.push_back(interpolate(x, y));
            continue;
        }
        resample_piece(lo, breaks[k + 1], degree, formula, 0, out_breaks, out_pieces);
    }
    return CoefficientFn::piecewise(std::move(out_breaks), std::move(out_pieces));
}

}  // namespace mkvlab
