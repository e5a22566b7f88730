#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mkvlab {

class Modulus;

/// v -> scale * v^alpha
struct PowerForm {
    double alpha = 1.0;
    double scale = 1.0;
};

/// v -> c * v
struct LinearCapForm {
    double c = 1.0;
};

/// v -> a * v * (|log v| + 1)
struct LogForm {
    double a = 1.0;
};

/// Pointwise maximum of members.
struct MaxOfForm {
    std::vector<Modulus> members;
};

/// Log-log linear interpolation through positive samples, power-law extrapolation at both ends.
struct TabulatedForm {
    std::vector<double> log_v;
    std::vector<double> log_rho;
};

/// Leading behaviour rho(v) ~ C * v^s * |log v|^l at an endpoint.
struct Asymptotic {
    double s = 1.0;
    double l = 0.0;
};

/// Element of the cone of moduli: continuous on [0,inf), zero at 0, positive on (0,inf).
class Modulus {
public:
    using Form = std::variant<PowerForm, LinearCapForm, LogForm, MaxOfForm, TabulatedForm>;

    static Modulus power(double alpha, double scale = 1.0);
    static Modulus linear(double c);
    static Modulus log_modulus(double a);
    static Modulus max_of(std::vector<Modulus> members);
    static Modulus tabulated(const std::vector<double>& v, const std::vector<double>& rho);

    double operator()(double v) const;

    [[nodiscard]] const Form& form() const { return form_; }
    [[nodiscard]] std::string form_name() const;
    [[nodiscard]] bool is_increasing() const { return increasing_; }
    [[nodiscard]] std::optional<double> concavity_exponent() const { return concavity_; }

    /// Declare flags; both are verified on the 64-point log grid and rejected if they fail.
    Modulus& declare_increasing(bool value);
    Modulus& declare_concavity_exponent(std::optional<double> alpha);

    [[nodiscard]] Asymptotic at_zero() const;
    [[nodiscard]] Asymptotic at_infinity() const;

    /// True for forms whose Phi and its inverse are available in closed form.
    [[nodiscard]] bool has_closed_form() const;

    /// Sampled checks: positivity, finiteness, declared flags. Throws InvalidArgument.
    void validate() const;

    static std::vector<double> check_grid();

private:
    explicit Modulus(Form form);
    [[nodiscard]] bool sampled_increasing() const;
    [[nodiscard]] bool sampled_concave(double alpha) const;

    Form form_;
    bool increasing_ = true;
    std::optional<double> concavity_;
};

}  // namespace mkvlab
