#pragma once

#include <variant>

#include "ergoreg/fourier_core.hpp"

namespace ergoreg {

// The four averaging transforms, mode-by-mode in Fourier space:
//   finite_time        G^T_k = f_k (e^{i d T} - 1)/(i d T),  d = k.g(I)
//   damped             F^mu_k = -mu f_k / (i d - mu)
//   stochastic_damped  F^{mu,nu}_k = -mu f_k / (i d - mu - nu |k|^2)
//   limit_average      fbar_k = f_k on {d = 0}, 0 elsewhere
enum class AverageKind { finite_time, damped, stochastic_damped, limit_average };

struct FiniteTime {
    double T;
};
struct Damped {
    double mu;
};
struct StochasticDamped {
    double mu;
    double nu;
};
struct LimitAverage {};

using AverageSpec = std::variant<FiniteTime, Damped, StochasticDamped, LimitAverage>;

AverageKind kind_of(const AverageSpec& spec);
std::string kind_name(AverageKind kind);

// (e^{iz} - 1)/(iz), continued by 1 at z = 0; entire in z.
Complex phase_average(double z);
// d/dz of the above; equals i/2 at z = 0.
Complex phase_average_deriv(double z);

// ---- Per-mode coefficient maps -------------------------------------------
// tol_class is the resonant-classification threshold on |divisor|; the
// default 0 classifies only exact zeros.

Complex finite_time_coeff(Complex f_k, double divisor, double T, double tol_class = 0.0);
Complex damped_coeff(Complex f_k, double divisor, double mu);
Complex stochastic_damped_coeff(Complex f_k, double divisor, double mu, double nu,
                                const ModeIndex& k);
Complex limit_average_coeff(Complex f_k, double divisor, double tol_class = 0.0);

// Coefficient of the generating function: -f_k/(i divisor). Resonant
// divisors are a hard error; the conjugation does not exist there.
Complex chi_coeff(Complex f_k, double divisor, double tol_class = 0.0);

// ---- Whole-field transform -------------------------------------------------

// Result of applying one averaging transform to every mode of a source
// function; coefficients and gradients are evaluated on demand.
class AveragedField : public FourierField {
public:
    AveragedField(PhaseSpaceFunction source, FrequencyModel model, AverageSpec spec,
                  bool difference = false);

    const ActionDomain& domain() const override { return source_.domain(); }
    std::span<const ModeIndex> modes() const override { return source_.modes(); }
    Complex coeff(const ModeIndex& k, std::span<const double> I) const override;
    CVec coeff_gradient(const ModeIndex& k, std::span<const double> I) const override;
    Complex coeff_ae(const ModeIndex& k, std::span<const double> I) const override;
    CVec coeff_gradient_ae(const ModeIndex& k, std::span<const double> I) const override;
    bool real_symmetric() const override { return source_.real_symmetric(); }
    double coeff_sup_hint(const ModeIndex& k) const override;
    const FrequencyModel* frequency_model() const override { return &model_; }
    double divisor_variation_rate() const override { return divisor_rate(); }

    AverageKind kind() const { return kind_; }
    const AverageSpec& spec() const { return spec_; }
    bool is_difference() const { return difference_; }
    const PhaseSpaceFunction& source() const { return source_; }
    const FrequencyModel& model() const { return model_; }

    // mu + nu |k|^2 for the damped kinds.
    double total_damping(const ModeIndex& k) const;
    // Divisor-variation rate used to size quadrature grids: T |k| for the
    // finite-time kind, |k|/(mu + nu |k|^2) for the damped kinds.
    double divisor_rate() const;

private:
    PhaseSpaceFunction source_;
    FrequencyModel model_;
    AverageSpec spec_;
    AverageKind kind_;
    bool difference_;
};

// Builds the transform, validating parameters against the source/model pair.
AveragedField transform(const PhaseSpaceFunction& f, const FrequencyModel& gm,
                        const AverageSpec& spec);

// Mode-wise difference avg - fbar (matching the resonant/nonresonant case
// tables of the four kinds). The limit average has no difference field.
AveragedField difference_field(const AveragedField& avg);

}  // namespace ergoreg
