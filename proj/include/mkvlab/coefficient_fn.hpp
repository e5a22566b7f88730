#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mkvlab {

/// Polynomial in absolute time t; coefficients in increasing degree.
using Poly = std::vector<double>;

double poly_eval(const Poly& p, double t);

/// Deterministic piecewise-polynomial function of time with scalar, vector or matrix values.
///
/// Piece k covers [breaks[k], breaks[k+1]); the last piece extends to +inf. The first
/// breakpoint is the domain start and may be -inf only when the first piece is constant.
/// Entries are stored row-major; a vector is a rows x 1 matrix.
class CoefficientFn {
public:
    /// Scalar zero on the whole line.
    CoefficientFn();

    CoefficientFn(std::size_t rows, std::size_t cols, std::vector<double> breaks,
                  std::vector<std::vector<Poly>> pieces);

    static CoefficientFn constant(double c);
    static CoefficientFn constant_vector(std::vector<double> values);
    static CoefficientFn constant_matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    static CoefficientFn zero(std::size_t rows, std::size_t cols = 1);
    /// Scalar polynomial on [t0, inf).
    static CoefficientFn polynomial(Poly p, double t0);
    /// Scalar piecewise polynomial.
    static CoefficientFn piecewise(std::vector<double> breaks, std::vector<Poly> pieces);
    /// Assemble a rows x cols function from scalar entries (row-major).
    static CoefficientFn stack(std::size_t rows, std::size_t cols, const std::vector<CoefficientFn>& entries);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t size() const { return rows_ * cols_; }
    [[nodiscard]] bool is_scalar() const { return rows_ == 1 && cols_ == 1; }
    [[nodiscard]] const std::vector<double>& breaks() const { return breaks_; }
    [[nodiscard]] const std::vector<std::vector<Poly>>& pieces() const { return pieces_; }
    [[nodiscard]] double start() const { return breaks_.front(); }
    [[nodiscard]] std::size_t degree() const;
    [[nodiscard]] bool is_zero() const;
    [[nodiscard]] bool is_constant() const { return degree() == 0 && breaks_.size() == 1; }

    /// Scalar value; throws unless scalar.
    double operator()(double t) const;
    double entry(double t, std::size_t i, std::size_t j = 0) const;
    void values_into(double t, std::span<double> out) const;
    [[nodiscard]] std::vector<double> values(double t) const;

    [[nodiscard]] CoefficientFn component(std::size_t i, std::size_t j = 0) const;
    /// Exact integral of a scalar function over [a, b].
    [[nodiscard]] double integral(double a, double b) const;
    /// Exact antiderivative of a scalar function, vanishing at t0.
    [[nodiscard]] CoefficientFn antiderivative(double t0) const;
    [[nodiscard]] CoefficientFn scaled(double c) const;
    /// Re-express on a refined breakpoint set (must contain the current breakpoints' span).
    [[nodiscard]] CoefficientFn refined(const std::vector<double>& breaks) const;

    /// Minimum of entry (i,j) over sample points of [a, b] (breakpoints plus 32 points per piece).
    [[nodiscard]] double sampled_min(std::size_t i, std::size_t j, double a, double b) const;

    friend CoefficientFn operator+(const CoefficientFn& x, const CoefficientFn& y);
    friend CoefficientFn operator*(const CoefficientFn& x, const CoefficientFn& y);

private:
    [[nodiscard]] std::size_t piece_index(double t) const;

    std::size_t rows_ = 1;
    std::size_t cols_ = 1;
    std::vector<double> breaks_;
    std::vector<std::vector<Poly>> pieces_;
};

/// Union of breakpoints of several functions (domain start = latest start).
std::vector<double> merged_breaks(std::span<const CoefficientFn* const> fns);

/// Re-approximate a pointwise scalar formula of the inputs as a scalar CoefficientFn.
///
/// On each piece of the merged breakpoint set the formula is interpolated at degree+1
/// nodes and the interpolant is checked at extra nodes; finite pieces that fail the
/// check (e.g. a max or positive part changes branch) are bisected up to a fixed depth.
CoefficientFn resample_formula(std::span<const CoefficientFn* const> inputs,
                               const std::function<double(double)>& formula);

}  // namespace mkvlab
