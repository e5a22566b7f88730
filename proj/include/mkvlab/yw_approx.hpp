#pragma once

#include "mkvlab/modulus.hpp"

#include <string>
#include <vector>

namespace mkvlab {

/// One member psi_n of the Yamada-Watanabe approximation of |x| for a modulus rho.
///
/// Cutoffs satisfy int_{a_n}^{a_prev} rho^{-2} = n. With tau(x) = (1/n) int_{a_n}^x rho^{-2},
/// psi'' = kappa * s(tau) * rho^{-2} / n where s is a C^1 plateau hat with ramp width 1/4
/// and kappa = 4/3 normalises the bump to unit mass. The bump peaks at 2/3 of (2/n) rho^{-2}.
class YWApprox {
public:
    static YWApprox build(const Modulus& rho, int n, double a_prev);

    [[nodiscard]] const Modulus& rho() const { return rho_; }
    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] double a_prev() const { return a_prev_; }
    [[nodiscard]] double a_n() const { return a_n_; }

    [[nodiscard]] double psi(double x) const;
    [[nodiscard]] double psi_prime(double x) const;
    [[nodiscard]] double psi_second(double x) const;
    /// Alias of psi_second: the unit-mass weight supported on (a_n, a_prev).
    [[nodiscard]] double bump(double x) const { return psi_second(x); }

    /// Copy whose psi'' is multiplied by `factor` (fault injection for verification tests).
    [[nodiscard]] YWApprox with_scaled_second(double factor) const;

private:
    YWApprox(Modulus rho, int n, double a_prev, double a_n);
    void tabulate();
    [[nodiscard]] double tau(double x) const;
    [[nodiscard]] double rho_inv2(double v) const;

    Modulus rho_;
    int n_;
    double a_prev_;
    double a_n_;
    double second_scale_ = 1.0;
    // Table on a uniform grid in u = log v over [log a_n, log a_prev].
    std::vector<double> u_;
    std::vector<double> tau_;
    std::vector<double> dtau_du_;
    std::vector<double> psi_cum_;
};

/// psi_1..psi_N with a_0 = 1 and chained cutoffs.
std::vector<YWApprox> yw_sequence(const Modulus& rho, int N);

struct YWCheck {
    std::string name;
    double violation = 0.0;
    bool pass = true;
};

struct YWReport {
    std::vector<YWCheck> checks;
    bool pass = true;
};

/// Grid checks of every structural property; violations are absolute for psi' and relative
/// to the ceiling (2/n) rho^{-2} for psi''.
YWReport verify(const YWApprox& approx, std::size_t grid_size, double tolerance = 1e-8);

}  // namespace mkvlab
