#pragma once

#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "ergoreg/averaging.hpp"
#include "ergoreg/bounds.hpp"
#include "ergoreg/fourier_core.hpp"

namespace ergoreg {

enum class ExperimentKind { sweep_T, sweep_munu, mc_validate, lower_bounds, inequalities, norms };
enum class MunuRule { mu_eq_nu_squared, mu_eq_nu, nu_eq_mu_squared, custom };
// What the (mu_i, nu_i) sequence does in the limit; decides the expected
// convergence behavior of |F^{mu,nu} - fbar|^1.
enum class SequenceRegime { mu_over_nu_to_zero, ratio_constant, nu_over_mu_to_zero };

std::string experiment_name(ExperimentKind kind);
std::string regime_name(SequenceRegime regime);

struct ExperimentConfig {
    int schema = 1;

    std::string model = "linear";  // linear | affine
    Vec model_scale, model_offset;
    int dimension = 1;
    int truncation = 0;  // 0: default for the dimension

    std::string spectrum_family = "exp_decay";  // exp_decay | cos_phi | random
    double spectrum_amplitude = 1.0;
    double spectrum_decay = 1.0;
    double spectrum_tilt = 0.5;
    bool spectrum_gradients = true;

    Vec domain_lower, domain_upper;  // empty: (-1,1)^n

    std::string quadrature_scheme = "midpoint";  // midpoint | gauss_legendre
    int quadrature_nodes = 0;                    // 0: auto from the field
    int quadrature_per_wavelength = 8;
    int angle_nodes = 64;

    ExperimentKind experiment = ExperimentKind::sweep_T;

    Vec T_list{10.0, 100.0, 1000.0};
    MunuRule munu_rule = MunuRule::mu_eq_nu_squared;
    int munu_i_begin = 2;
    int munu_i_end = 8;
    std::vector<std::pair<double, double>> munu_pairs;  // rule = custom

    std::vector<std::pair<double, double>> mc_munu{{0.1, 0.1}};
    int mc_paths = 10000;
    double mc_dt = 0.0;  // 0: min(0.01, 0.1/(mu+nu))
    int mc_points = 5;   // random (I, phi) pairs per parameter set
    Vec mc_I, mc_phi;    // when set, overrides the random points

    std::string lower_kind = "finite_time";  // finite_time | damped
    Vec mu_list{1e-1, 1e-2, 1e-3};
    std::vector<int> lower_mode;  // empty: (1, 0, ..., 0)
    double lower_delta = 0.25;

    std::string norm_kind = "finite_time";
    double norm_T = 100.0;
    double norm_mu = 0.1;
    double norm_nu = 0.1;
    bool norm_difference = true;

    std::string out_dir = "results";
    std::uint64_t seed = 20240901;
    unsigned threads = 0;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;  // canonical form (also hashed)
    std::string hash() const;        // FNV-1a over the canonical dump
};

struct SweepRow {
    double param1 = 0.0;
    std::optional<double> param2;
    std::optional<double> norm_inf, norm_0, norm_1;
    std::optional<double> bound_0, bound_1, lower_bound_1;
    std::optional<double> mc_mean, mc_stderr;
    std::string error;  // per-row failure note; cells stay empty
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;
    nlohmann::json extra;  // per-row diagnostics (closed forms, estimates...)
    bool invariant_violation = false;
};

// Executes the configured experiment; deterministic given config + seed.
// Per-row quadrature failures are recorded in the row and the run continues.
SweepResult run(const ExperimentConfig& config);

// UTF-8, LF line endings, 17 significant digits, fixed header:
// param1,param2,norm_inf,norm_0,norm_1,bound_0,bound_1,lower_bound_1,mc_mean,mc_stderr
void emit_csv(const SweepResult& result, const std::string& path);

// JSON sidecar: config, hash, seeds, grid sizes, notes, timestamp.
void emit_metadata(const SweepResult& result, const ExperimentConfig& config,
                   const std::string& path);

// The (mu_i, nu_i) grid generated by a rule, and its regime classification.
std::vector<std::pair<double, double>> munu_sequence(const ExperimentConfig& config);
SequenceRegime classify_sequence(MunuRule rule,
                                 const std::vector<std::pair<double, double>>& pairs);

// Model/spectrum assembly shared by run() and the acceptance suite.
ActionDomain config_domain(const ExperimentConfig& config);
FrequencyModel config_model(const ExperimentConfig& config);
PhaseSpaceFunction config_spectrum(const ExperimentConfig& config);

}  // namespace ergoreg
