#include "ergoreg/averaging.hpp"

#include <cmath>

namespace ergoreg {

AverageKind kind_of(const AverageSpec& spec) {
    if (std::holds_alternative<FiniteTime>(spec)) return AverageKind::finite_time;
    if (std::holds_alternative<Damped>(spec)) return AverageKind::damped;
    if (std::holds_alternative<StochasticDamped>(spec)) return AverageKind::stochastic_damped;
    return AverageKind::limit_average;
}

std::string kind_name(AverageKind kind) {
    switch (kind) {
        case AverageKind::finite_time: return "finite_time";
        case AverageKind::damped: return "damped";
        case AverageKind::stochastic_damped: return "stochastic_damped";
        case AverageKind::limit_average: return "limit_average";
    }
    return "?";
}

Complex phase_average(double z) {
    // e^{iz/2} sinc(z/2); removable singularity handled by sinc.
    const double half = 0.5 * z;
    return std::polar(sinc(half), half);
}

Complex phase_average_deriv(double z) {
    const double half = 0.5 * z;
    const Complex rot = std::polar(1.0, half);
    return rot * Complex(0.5 * dsinc(half), 0.5 * sinc(half));
}

Complex finite_time_coeff(Complex f_k, double divisor, double T, double tol_class) {
    if (!(T > 0.0)) throw std::invalid_argument("finite_time_coeff: requires T > 0");
    if (std::abs(divisor) <= tol_class) return f_k;
    return f_k * phase_average(divisor * T);
}

Complex damped_coeff(Complex f_k, double divisor, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("damped_coeff: requires mu > 0");
    return -mu * f_k / Complex(-mu, divisor);
}

Complex stochastic_damped_coeff(Complex f_k, double divisor, double mu, double nu,
                                const ModeIndex& k) {
    if (!(mu > 0.0)) throw std::invalid_argument("stochastic_damped_coeff: requires mu > 0");
    if (nu < 0.0) throw std::invalid_argument("stochastic_damped_coeff: requires nu >= 0");
    return -mu * f_k / Complex(-mu - nu * k.norm2_squared(), divisor);
}

Complex limit_average_coeff(Complex f_k, double divisor, double tol_class) {
    return std::abs(divisor) <= tol_class ? f_k : Complex(0.0, 0.0);
}

Complex chi_coeff(Complex f_k, double divisor, double tol_class) {
    if (std::abs(divisor) <= tol_class) {
        throw small_divisor_error("chi_coeff: resonant divisor, conjugation undefined");
    }
    return -f_k / Complex(0.0, divisor);
}

// ---- AveragedField ---------------------------------------------------------

AveragedField::AveragedField(PhaseSpaceFunction source, FrequencyModel model,
                             AverageSpec spec, bool difference)
    : source_(std::move(source)),
      model_(std::move(model)),
      spec_(spec),
      kind_(kind_of(spec)),
      difference_(difference) {
    if (model_.n != source_.domain().dim()) {
        throw std::invalid_argument("AveragedField: model/source dimension mismatch");
    }
    if (const auto* ft = std::get_if<FiniteTime>(&spec_)) {
        if (!(ft->T > 0.0)) throw std::invalid_argument("transform: requires T > 0");
    } else if (const auto* dm = std::get_if<Damped>(&spec_)) {
        if (!(dm->mu > 0.0)) throw std::invalid_argument("transform: requires mu > 0");
    } else if (const auto* sd = std::get_if<StochasticDamped>(&spec_)) {
        if (!(sd->mu > 0.0)) throw std::invalid_argument("transform: requires mu > 0");
        if (sd->nu < 0.0) throw std::invalid_argument("transform: requires nu >= 0");
    }
    if (difference_ && kind_ == AverageKind::limit_average) {
        throw std::invalid_argument("difference_field: limit average has no difference");
    }
}

double AveragedField::total_damping(const ModeIndex& k) const {
    if (const auto* dm = std::get_if<Damped>(&spec_)) return dm->mu;
    if (const auto* sd = std::get_if<StochasticDamped>(&spec_)) {
        return sd->mu + sd->nu * k.norm2_squared();
    }
    return 0.0;
}

double AveragedField::divisor_rate() const {
    double rate = 0.0;
    for (const ModeIndex& k : modes()) {
        if (k.is_zero()) continue;
        if (const auto* ft = std::get_if<FiniteTime>(&spec_)) {
            rate = std::max(rate, ft->T * k.norm2());
        } else if (kind_ == AverageKind::damped || kind_ == AverageKind::stochastic_damped) {
            rate = std::max(rate, k.norm2() / total_damping(k));
        }
    }
    return rate;
}

Complex AveragedField::coeff(const ModeIndex& k, std::span<const double> I) const {
    const Complex fk = source_.coeff(k, I);
    if (k.is_zero()) {
        // Every transform leaves the angle average in place; differences vanish.
        return difference_ ? Complex(0.0, 0.0) : fk;
    }
    const double d = small_divisor(model_, k, I);
    const double tol = classification_tol(model_, k);
    const bool resonant = std::abs(d) <= tol;

    switch (kind_) {
        case AverageKind::finite_time: {
            const double T = std::get<FiniteTime>(spec_).T;
            if (difference_) return resonant ? Complex(0.0, 0.0) : fk * phase_average(d * T);
            return resonant ? fk : fk * phase_average(d * T);
        }
        case AverageKind::damped: {
            const double mu = std::get<Damped>(spec_).mu;
            if (difference_ && resonant) return Complex(0.0, 0.0);
            return -mu * fk / Complex(-mu, d);
        }
        case AverageKind::stochastic_damped: {
            const auto& sd = std::get<StochasticDamped>(spec_);
            const double a = sd.mu + sd.nu * k.norm2_squared();
            if (difference_ && resonant) return fk * (sd.mu / a - 1.0);
            return -sd.mu * fk / Complex(-a, d);
        }
        case AverageKind::limit_average:
            return resonant ? fk : Complex(0.0, 0.0);
    }
    return Complex(0.0, 0.0);
}

CVec AveragedField::coeff_gradient(const ModeIndex& k, std::span<const double> I) const {
    const int n = model_.n;
    if (k.is_zero()) {
        if (difference_) return CVec(std::size_t(n), Complex(0.0, 0.0));
        return source_.coeff_gradient(k, I);
    }
    const Complex fk = source_.coeff(k, I);
    const CVec gk = source_.coeff_gradient(k, I);
    const double d = small_divisor(model_, k, I);
    const double tol = classification_tol(model_, k);
    const bool resonant = std::abs(d) <= tol;
    const Vec dvec = model_.divisor_gradient(I, k);

    CVec out(static_cast<std::size_t>(n));
    switch (kind_) {
        case AverageKind::finite_time: {
            // G_k = f_k E(d T) is smooth in I; the same formula also serves
            // the difference field a.e. (fbar_k is supported on a null set).
            const double T = std::get<FiniteTime>(spec_).T;
            const Complex E = phase_average(d * T);
            const Complex dE = phase_average_deriv(d * T) * T;
            for (int j = 0; j < n; ++j) {
                out[std::size_t(j)] = gk[std::size_t(j)] * E + fk * dE * dvec[std::size_t(j)];
            }
            return out;
        }
        case AverageKind::damped:
        case AverageKind::stochastic_damped: {
            const double mu = kind_ == AverageKind::damped
                                  ? std::get<Damped>(spec_).mu
                                  : std::get<StochasticDamped>(spec_).mu;
            const double a = total_damping(k);
            const Complex w(-a, d);
            const Complex w2 = w * w;
            for (int j = 0; j < n; ++j) {
                const Complex dw(0.0, dvec[std::size_t(j)]);
                out[std::size_t(j)] = -mu * (gk[std::size_t(j)] * w - fk * dw) / w2;
            }
            return out;
        }
        case AverageKind::limit_average: {
            if (resonant) return gk;
            return CVec(std::size_t(n), Complex(0.0, 0.0));
        }
    }
    return out;
}

Complex AveragedField::coeff_ae(const ModeIndex& k, std::span<const double> I) const {
    if (k.is_zero()) {
        return difference_ ? Complex(0.0, 0.0) : source_.coeff(k, I);
    }
    if (kind_ == AverageKind::limit_average) return Complex(0.0, 0.0);
    const Complex fk = source_.coeff(k, I);
    const double d = small_divisor(model_, k, I);
    if (kind_ == AverageKind::finite_time) {
        return fk * phase_average(d * std::get<FiniteTime>(spec_).T);
    }
    const double mu = kind_ == AverageKind::damped ? std::get<Damped>(spec_).mu
                                                   : std::get<StochasticDamped>(spec_).mu;
    return -mu * fk / Complex(-total_damping(k), d);
}

CVec AveragedField::coeff_gradient_ae(const ModeIndex& k, std::span<const double> I) const {
    if (kind_ == AverageKind::limit_average && !k.is_zero()) {
        return CVec(static_cast<std::size_t>(model_.n), Complex(0.0, 0.0));
    }
    // The other kinds already use the smooth (generic-branch) formulas.
    return coeff_gradient(k, I);
}

double AveragedField::coeff_sup_hint(const ModeIndex& k) const {
    // Every kind contracts coefficient magnitudes mode-by-mode.
    return source_.coeff_sup_hint(k);
}

AveragedField transform(const PhaseSpaceFunction& f, const FrequencyModel& gm,
                        const AverageSpec& spec) {
    return AveragedField(f, gm, spec, /*difference=*/false);
}

AveragedField difference_field(const AveragedField& avg) {
    return AveragedField(avg.source(), avg.model(), avg.spec(), /*difference=*/true);
}

}  // namespace ergoreg
