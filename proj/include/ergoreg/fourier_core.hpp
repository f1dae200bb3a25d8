#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ergoreg/common.hpp"

namespace ergoreg {

// Lattice point k in Z^n indexing one Fourier mode.
class ModeIndex {
public:
    ModeIndex() = default;
    explicit ModeIndex(std::vector<int> k);
    static ModeIndex zero(int n);

    int dim() const { return int(k_.size()); }
    bool is_zero() const { return norm1_ == 0; }
    int norm1() const { return norm1_; }
    int norm2_squared() const { return norm2sq_; }
    double norm2() const { return norm2_; }
    int operator[](int j) const { return k_[std::size_t(j)]; }
    const std::vector<int>& components() const { return k_; }
    ModeIndex negated() const;
    std::string str() const;

    std::strong_ordering operator<=>(const ModeIndex& other) const {
        return k_ <=> other.k_;
    }
    bool operator==(const ModeIndex& other) const { return k_ == other.k_; }

private:
    std::vector<int> k_;
    int norm1_ = 0;
    int norm2sq_ = 0;
    double norm2_ = 0.0;
};

// Open axis-aligned box A in action space.
struct ActionDomain {
    Vec lower;
    Vec upper;
    int quadrature_nodes_per_dim = 33;

    ActionDomain(Vec lo, Vec up, int nodes_per_dim = 33);

    int dim() const { return int(lower.size()); }
    double volume() const;
    double diameter() const;    // Euclidean diameter of the box
    double max_extent() const;  // largest side length
    bool contains(std::span<const double> I) const;  // strict interior
    // Pulls a point onto the interior, at distance >= margin_rel * extent
    // from each face.
    Vec clamp_interior(Vec I, double margin_rel = 1e-12) const;
};

// Frequency map g = grad h with certified constants:
//   ||g|| <= C,  max_ij |dg_i/dI_j| <= D,  m <= |det dg/dI| <= M,
//   ||g(I)-g(I')|| <= lambda ||I-I'||.
struct FrequencyModel {
    std::function<Vec(std::span<const double>)> g;
    // Row-major n x n Jacobian dg_i/dI_j.
    std::function<std::vector<double>(std::span<const double>)> jacobian;
    double C = 0.0;
    double D = 0.0;
    double m = 1.0;
    double M = 1.0;
    double lambda = 1.0;
    int n = 0;

    // (dg/dI)^T k, the gradient of the divisor I -> k . g(I).
    Vec divisor_gradient(std::span<const double> I, const ModeIndex& k) const;
};

struct FrequencyModelCheck {
    bool ok = true;
    double worst_g_norm = 0.0;
    double worst_partial = 0.0;
    double min_det = 0.0;
    double max_det = 0.0;
    double worst_lipschitz_ratio = 0.0;
};

// Verifies the certified constants on a dense grid (and sampled pairs for
// the Lipschitz bound). Tolerance is relative slack on each inequality.
FrequencyModelCheck verify_frequency_model(const FrequencyModel& gm,
                                           const ActionDomain& domain,
                                           int nodes_per_dim = 17,
                                           double tol = 1e-9);

// One Fourier coefficient I -> f_k(I), optionally with analytic gradient.
struct CoefficientFn {
    std::function<Complex(std::span<const double>)> value;
    std::function<CVec(std::span<const double>)> gradient;  // empty = use FD
    double sup_norm = 0.0;
    std::optional<Vec> grad_sup_norms;
};

// Bisection tolerance on |k.g| for resonance location.
inline constexpr double kTolRes = 1e-12;

// Scale-aware threshold below which a divisor is classified resonant.
double classification_tol(const FrequencyModel& gm, const ModeIndex& k);

// Common interface of truncated Fourier representations: a finite mode set
// with complex action-coefficients and (analytic or FD) gradients.
class FourierField {
public:
    virtual ~FourierField() = default;

    virtual const ActionDomain& domain() const = 0;
    virtual std::span<const ModeIndex> modes() const = 0;  // sorted, stable
    virtual Complex coeff(const ModeIndex& k, std::span<const double> I) const = 0;
    virtual CVec coeff_gradient(const ModeIndex& k, std::span<const double> I) const = 0;
    // Almost-everywhere representatives: fields whose coefficients branch on
    // a measure-zero resonant set report the generic-branch value here, so
    // quadrature over A realizes the integral over the nonresonant set.
    virtual Complex coeff_ae(const ModeIndex& k, std::span<const double> I) const {
        return coeff(k, I);
    }
    virtual CVec coeff_gradient_ae(const ModeIndex& k, std::span<const double> I) const {
        return coeff_gradient(k, I);
    }
    virtual bool real_symmetric() const = 0;
    // Cheap upper estimate of sup_A |u_k|; used for tolerance scaling.
    virtual double coeff_sup_hint(const ModeIndex& k) const = 0;
    // Model generating divisor structure, when the field has one.
    virtual const FrequencyModel* frequency_model() const { return nullptr; }
    // How fast coefficients oscillate/peak against the divisor; plain
    // functions are tame and report 0. Drives quadrature grid sizing.
    virtual double divisor_variation_rate() const { return 0.0; }

    // Sum over stored modes of u_k(I) e^{i k.phi}. Throws std::domain_error
    // for I outside A. Real-symmetric fields report a zero imaginary part.
    Complex evaluate(std::span<const double> I, std::span<const double> phi) const;
    // Same sum without the reality projection (for residue checks).
    Complex evaluate_raw(std::span<const double> I, std::span<const double> phi) const;

    double sup_hint_total() const;
    bool has_mode(const ModeIndex& k) const;
};

// Truncated Fourier representation of a phase-space function f(I, phi).
class PhaseSpaceFunction : public FourierField {
public:
    PhaseSpaceFunction(ActionDomain domain, int truncation_radius, bool real_flag,
                       bool allow_finite_differences = true);

    // Construction-phase only; operations afterwards are pure.
    void set_mode(const ModeIndex& k, CoefficientFn fn);

    const ActionDomain& domain() const override { return domain_; }
    std::span<const ModeIndex> modes() const override { return mode_list_; }
    Complex coeff(const ModeIndex& k, std::span<const double> I) const override;
    CVec coeff_gradient(const ModeIndex& k, std::span<const double> I) const override;
    bool real_symmetric() const override { return real_flag_; }
    double coeff_sup_hint(const ModeIndex& k) const override;

    const std::map<ModeIndex, CoefficientFn>& mode_map() const { return modes_; }
    const CoefficientFn& mode_fn(const ModeIndex& k) const;
    int truncation_radius() const { return truncation_radius_; }
    bool allow_finite_differences() const { return allow_fd_; }
    double fd_step() const;  // 1e-5 * box diameter

private:
    ActionDomain domain_;
    std::map<ModeIndex, CoefficientFn> modes_;
    std::vector<ModeIndex> mode_list_;
    int truncation_radius_;
    bool real_flag_;
    bool allow_fd_;
};

// A located zero of I -> k.g(I) carrying the witness data |f_k(I_bar)|.
struct ResonancePoint {
    ModeIndex k;
    Vec I_bar;
    double divisor_residual = 0.0;
    double coeff_magnitude = 0.0;
};

// k . g(I); throws std::invalid_argument on the zero mode.
double small_divisor(const FrequencyModel& gm, const ModeIndex& k,
                     std::span<const double> I);

// Scans grid lines of search_box for a sign change of k.g and bisects it to
// |k.g| <= tol_res. Absence of a sign change is a valid (empty) result.
std::optional<ResonancePoint> find_resonance(const FrequencyModel& gm,
                                             const FourierField& f,
                                             const ModeIndex& k,
                                             const ActionDomain& search_box,
                                             double tol_res = kTolRes);

// All k in Z^n with |k|_inf <= K, sorted lexicographically.
std::vector<ModeIndex> lattice_modes(int n, int K);

// ---- Model systems and test spectra -------------------------------------

ActionDomain default_domain(int n);      // (-1,1)^n
int default_truncation(int n);           // 8 for n <= 2, else 4

// g(I) = I on (-1,1)^n: C = sqrt(n), D = 1, m = M = 1, lambda = 1.
FrequencyModel linear_model(int n);

// g(I) = diag(scale) I + offset with constants certified over `domain`.
FrequencyModel affine_model(const Vec& scale, const Vec& offset,
                            const ActionDomain& domain);

// f_k(I) = amplitude * e^{-decay * |k|_1} (1 + tilt * I_1) over the full
// truncated lattice, real-symmetrized; analytic gradients.
PhaseSpaceFunction exp_decay_spectrum(int n, int K, const ActionDomain& domain,
                                      double amplitude = 1.0, double decay = 1.0,
                                      double tilt = 0.5);

// Default test function on the default domain.
PhaseSpaceFunction default_spectrum(int n, int K = 0);

// f = cos phi in n = 1: modes +-1 with constant coefficient 1/2.
PhaseSpaceFunction cos_phi_function();

// Random real-symmetrized spectrum with affine action dependence; smooth
// with analytic gradients. Deterministic in `seed`.
PhaseSpaceFunction random_spectrum(int n, int K, std::uint64_t seed,
                                   const ActionDomain& domain);

}  // namespace ergoreg
