#include "ergoreg/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "ergoreg/norms.hpp"
#include "ergoreg/rng.hpp"
#include "ergoreg/stochastic.hpp"

namespace ergoreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

template <class T>
T field_or(const nlohmann::json& j, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config field '" + key + "': " + e.what());
    }
}

ExperimentKind parse_experiment(const std::string& name) {
    if (name == "sweep_T" || name == "sweep-t") return ExperimentKind::sweep_T;
    if (name == "sweep_munu" || name == "sweep-munu") return ExperimentKind::sweep_munu;
    if (name == "mc_validate" || name == "mc-validate") return ExperimentKind::mc_validate;
    if (name == "lower_bounds" || name == "lower-bounds") return ExperimentKind::lower_bounds;
    if (name == "inequalities") return ExperimentKind::inequalities;
    if (name == "norms") return ExperimentKind::norms;
    throw config_error("config field 'experiment': unknown value '" + name + "'");
}

MunuRule parse_rule(const std::string& name) {
    if (name == "mu=nu^2") return MunuRule::mu_eq_nu_squared;
    if (name == "mu=nu") return MunuRule::mu_eq_nu;
    if (name == "nu=mu^2") return MunuRule::nu_eq_mu_squared;
    if (name == "custom") return MunuRule::custom;
    throw config_error("config field 'munu_rule': unknown value '" + name + "'");
}

std::string rule_name(MunuRule rule) {
    switch (rule) {
        case MunuRule::mu_eq_nu_squared: return "mu=nu^2";
        case MunuRule::mu_eq_nu: return "mu=nu";
        case MunuRule::nu_eq_mu_squared: return "nu=mu^2";
        case MunuRule::custom: return "custom";
    }
    return "?";
}

std::vector<std::pair<double, double>> parse_pairs(const nlohmann::json& j,
                                                   const std::string& key) {
    std::vector<std::pair<double, double>> out;
    if (!j.contains(key)) return out;
    try {
        for (const auto& item : j.at(key)) {
            if (!item.is_array() || item.size() != 2) {
                throw config_error("config field '" + key + "': expects [mu, nu] pairs");
            }
            out.emplace_back(item.at(0).get<double>(), item.at(1).get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config field '" + key + "': " + e.what());
    }
    return out;
}

QuadratureScheme parse_scheme(const std::string& name) {
    if (name == "midpoint") return QuadratureScheme::midpoint;
    if (name == "gauss_legendre") return QuadratureScheme::gauss_legendre;
    throw config_error("config field 'quadrature_scheme': unknown value '" + name + "'");
}

// Report grids run at twice the auto-sized resolution so the two-level
// refinement estimate reflects the accuracy of the reported value.
QuadratureGrid report_grid(const FourierField& field, const ExperimentConfig& config,
                           SweepResult& result) {
    const QuadratureScheme scheme = parse_scheme(config.quadrature_scheme);
    if (config.quadrature_nodes > 0) {
        return QuadratureGrid::build(field.domain(), scheme, config.quadrature_nodes);
    }
    const GridSpec spec = auto_grid_spec(field, config.quadrature_per_wavelength);
    int nodes = spec.nodes_per_dim;
    if (!spec.capped) {
        const int n = field.domain().dim();
        const int cap = int(std::floor(std::pow(double(1 << 20), 1.0 / n)));
        nodes = std::min(2 * nodes, cap);
    } else {
        result.notes.push_back("quadrature grid capped at 2^20 total nodes (" +
                               std::to_string(nodes) + " per dim)");
    }
    if (scheme == QuadratureScheme::gauss_legendre && nodes > 8192) {
        nodes = 8192;
        result.notes.push_back("gauss_legendre grid clamped to 8192 nodes per dim");
    }
    return QuadratureGrid::build(field.domain(), scheme, nodes);
}

ModeIndex lower_bound_mode(const ExperimentConfig& config) {
    if (!config.lower_mode.empty()) {
        if (int(config.lower_mode.size()) != config.dimension) {
            throw config_error("config field 'lower_mode': dimension mismatch");
        }
        return ModeIndex(config.lower_mode);
    }
    std::vector<int> k(std::size_t(config.dimension), 0);
    k[0] = 1;
    return ModeIndex(k);
}

struct LowerSetup {
    ResonancePoint witness;
    LowerBoundConstants lc;
};

LowerSetup lower_setup(const ExperimentConfig& config, const FrequencyModel& gm,
                       const PhaseSpaceFunction& f, SweepResult& result) {
    const ModeIndex kbar = lower_bound_mode(config);
    ActionDomain search = f.domain();
    search.quadrature_nodes_per_dim = 33;
    const auto rp = find_resonance(gm, f, kbar, search);
    if (!rp) {
        throw config_error("lower bounds: no resonance witness found for mode " + kbar.str());
    }
    LowerSetup setup{*rp, estimate_lower_constants(gm, f, *rp, config.lower_delta)};
    nlohmann::json j;
    j["mode"] = kbar.str();
    j["I_bar"] = setup.witness.I_bar;
    j["divisor_residual"] = setup.witness.divisor_residual;
    j["coeff_magnitude"] = setup.witness.coeff_magnitude;
    j["lambda1"] = setup.lc.lambda1;
    j["lambda2"] = setup.lc.lambda2;
    j["delta"] = setup.lc.delta;
    j["delta_tilde"] = setup.lc.delta_tilde;
    j["M"] = setup.lc.M;
    result.extra["lower_bound_constants"] = j;
    return setup;
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::sweep_T: return "sweep_T";
        case ExperimentKind::sweep_munu: return "sweep_munu";
        case ExperimentKind::mc_validate: return "mc_validate";
        case ExperimentKind::lower_bounds: return "lower_bounds";
        case ExperimentKind::inequalities: return "inequalities";
        case ExperimentKind::norms: return "norms";
    }
    return "?";
}

std::string regime_name(SequenceRegime regime) {
    switch (regime) {
        case SequenceRegime::mu_over_nu_to_zero: return "mu/nu -> 0";
        case SequenceRegime::ratio_constant: return "ratio constant";
        case SequenceRegime::nu_over_mu_to_zero: return "nu/mu -> 0";
    }
    return "?";
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.schema = field_or(j, "schema", 1);
    if (c.schema != 1) {
        throw config_error("config field 'schema': unsupported version " +
                           std::to_string(c.schema));
    }
    c.model = field_or<std::string>(j, "model", "linear");
    if (c.model != "linear" && c.model != "affine") {
        throw config_error("config field 'model': unknown value '" + c.model + "'");
    }
    c.model_scale = field_or(j, "model_scale", Vec{});
    c.model_offset = field_or(j, "model_offset", Vec{});
    c.dimension = field_or(j, "dimension", 1);
    if (c.dimension < 1 || c.dimension > 4) {
        throw config_error("config field 'dimension': expected 1..4");
    }
    c.truncation = field_or(j, "truncation", 0);
    c.spectrum_family = field_or<std::string>(j, "spectrum_family", "exp_decay");
    if (c.spectrum_family != "exp_decay" && c.spectrum_family != "cos_phi" &&
        c.spectrum_family != "random") {
        throw config_error("config field 'spectrum_family': unknown value '" +
                           c.spectrum_family + "'");
    }
    c.spectrum_amplitude = field_or(j, "spectrum_amplitude", 1.0);
    c.spectrum_decay = field_or(j, "spectrum_decay", 1.0);
    c.spectrum_tilt = field_or(j, "spectrum_tilt", 0.5);
    c.spectrum_gradients = field_or(j, "spectrum_gradients", true);
    c.domain_lower = field_or(j, "domain_lower", Vec{});
    c.domain_upper = field_or(j, "domain_upper", Vec{});
    c.quadrature_scheme = field_or<std::string>(j, "quadrature_scheme", "midpoint");
    parse_scheme(c.quadrature_scheme);
    c.quadrature_nodes = field_or(j, "quadrature_nodes", 0);
    c.quadrature_per_wavelength = field_or(j, "quadrature_per_wavelength", 8);
    c.angle_nodes = field_or(j, "angle_nodes", 64);
    c.experiment = parse_experiment(field_or<std::string>(j, "experiment", "sweep_T"));
    c.T_list = field_or(j, "T_list", Vec{10.0, 100.0, 1000.0});
    c.munu_rule = parse_rule(field_or<std::string>(j, "munu_rule", "mu=nu^2"));
    c.munu_i_begin = field_or(j, "munu_i_begin", 2);
    c.munu_i_end = field_or(j, "munu_i_end", 8);
    c.munu_pairs = parse_pairs(j, "munu_pairs");
    c.mc_munu = parse_pairs(j, "mc_munu");
    if (c.mc_munu.empty()) c.mc_munu = {{0.1, 0.1}};
    c.mc_paths = field_or(j, "mc_paths", 10000);
    c.mc_dt = field_or(j, "mc_dt", 0.0);
    c.mc_points = field_or(j, "mc_points", 5);
    c.mc_I = field_or(j, "mc_I", Vec{});
    c.mc_phi = field_or(j, "mc_phi", Vec{});
    c.lower_kind = field_or<std::string>(j, "lower_kind", "finite_time");
    if (c.lower_kind != "finite_time" && c.lower_kind != "damped") {
        throw config_error("config field 'lower_kind': unknown value '" + c.lower_kind + "'");
    }
    c.mu_list = field_or(j, "mu_list", Vec{1e-1, 1e-2, 1e-3});
    c.lower_mode = field_or(j, "lower_mode", std::vector<int>{});
    c.lower_delta = field_or(j, "lower_delta", 0.25);
    c.norm_kind = field_or<std::string>(j, "norm_kind", "finite_time");
    c.norm_T = field_or(j, "norm_T", 100.0);
    c.norm_mu = field_or(j, "norm_mu", 0.1);
    c.norm_nu = field_or(j, "norm_nu", 0.1);
    c.norm_difference = field_or(j, "norm_difference", true);
    c.out_dir = field_or<std::string>(j, "out", "results");
    c.seed = field_or<std::uint64_t>(j, "seed", 20240901ULL);
    c.threads = field_or(j, "threads", 0u);
    return c;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["schema"] = schema;
    j["model"] = model;
    j["model_scale"] = model_scale;
    j["model_offset"] = model_offset;
    j["dimension"] = dimension;
    j["truncation"] = truncation;
    j["spectrum_family"] = spectrum_family;
    j["spectrum_amplitude"] = spectrum_amplitude;
    j["spectrum_decay"] = spectrum_decay;
    j["spectrum_tilt"] = spectrum_tilt;
    j["spectrum_gradients"] = spectrum_gradients;
    j["domain_lower"] = domain_lower;
    j["domain_upper"] = domain_upper;
    j["quadrature_scheme"] = quadrature_scheme;
    j["quadrature_nodes"] = quadrature_nodes;
    j["quadrature_per_wavelength"] = quadrature_per_wavelength;
    j["angle_nodes"] = angle_nodes;
    j["experiment"] = experiment_name(experiment);
    j["T_list"] = T_list;
    j["munu_rule"] = rule_name(munu_rule);
    j["munu_i_begin"] = munu_i_begin;
    j["munu_i_end"] = munu_i_end;
    j["munu_pairs"] = munu_pairs;
    j["mc_munu"] = mc_munu;
    j["mc_paths"] = mc_paths;
    j["mc_dt"] = mc_dt;
    j["mc_points"] = mc_points;
    j["mc_I"] = mc_I;
    j["mc_phi"] = mc_phi;
    j["lower_kind"] = lower_kind;
    j["mu_list"] = mu_list;
    j["lower_mode"] = lower_mode;
    j["lower_delta"] = lower_delta;
    j["norm_kind"] = norm_kind;
    j["norm_T"] = norm_T;
    j["norm_mu"] = norm_mu;
    j["norm_nu"] = norm_nu;
    j["norm_difference"] = norm_difference;
    j["out"] = out_dir;
    j["seed"] = seed;
    j["threads"] = threads;
    return j;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(to_json().dump()); }

ActionDomain config_domain(const ExperimentConfig& config) {
    if (config.domain_lower.empty() && config.domain_upper.empty()) {
        return default_domain(config.dimension);
    }
    if (int(config.domain_lower.size()) != config.dimension ||
        int(config.domain_upper.size()) != config.dimension) {
        throw config_error("config field 'domain_lower/domain_upper': dimension mismatch");
    }
    try {
        return ActionDomain(config.domain_lower, config.domain_upper);
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config field 'domain_lower/domain_upper': ") + e.what());
    }
}

FrequencyModel config_model(const ExperimentConfig& config) {
    const ActionDomain domain = config_domain(config);
    const int n = config.dimension;
    if (config.model == "linear") {
        return affine_model(Vec(std::size_t(n), 1.0), Vec(std::size_t(n), 0.0), domain);
    }
    if (int(config.model_scale.size()) != n || int(config.model_offset.size()) != n) {
        throw config_error("config field 'model_scale/model_offset': dimension mismatch");
    }
    try {
        return affine_model(config.model_scale, config.model_offset, domain);
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config field 'model_scale': ") + e.what());
    }
}

PhaseSpaceFunction config_spectrum(const ExperimentConfig& config) {
    const ActionDomain domain = config_domain(config);
    const int n = config.dimension;
    const int K = config.truncation > 0 ? config.truncation : default_truncation(n);

    PhaseSpaceFunction f = [&] {
        if (config.spectrum_family == "cos_phi") {
            if (n != 1) throw config_error("config field 'spectrum_family': cos_phi needs dimension 1");
            return cos_phi_function();
        }
        if (config.spectrum_family == "random") {
            return random_spectrum(n, K, config.seed, domain);
        }
        return exp_decay_spectrum(n, K, domain, config.spectrum_amplitude,
                                  config.spectrum_decay, config.spectrum_tilt);
    }();

    if (!config.spectrum_gradients) {
        // Strip analytic gradients; consumers fall back to finite differences.
        PhaseSpaceFunction stripped(f.domain(), f.truncation_radius(), f.real_symmetric());
        for (const auto& [k, fn] : f.mode_map()) {
            CoefficientFn copy = fn;
            copy.gradient = nullptr;
            copy.grad_sup_norms.reset();
            stripped.set_mode(k, copy);
        }
        return stripped;
    }
    return f;
}

std::vector<std::pair<double, double>> munu_sequence(const ExperimentConfig& config) {
    if (config.munu_rule == MunuRule::custom) {
        if (config.munu_pairs.empty()) {
            throw config_error("config field 'munu_pairs': required for rule 'custom'");
        }
        return config.munu_pairs;
    }
    if (config.munu_i_begin > config.munu_i_end) {
        throw config_error("config field 'munu_i_begin': exceeds munu_i_end");
    }
    std::vector<std::pair<double, double>> pairs;
    for (int i = config.munu_i_begin; i <= config.munu_i_end; ++i) {
        const double base = std::pow(2.0, -i);
        switch (config.munu_rule) {
            case MunuRule::mu_eq_nu_squared: pairs.emplace_back(base * base, base); break;
            case MunuRule::mu_eq_nu: pairs.emplace_back(base, base); break;
            case MunuRule::nu_eq_mu_squared: pairs.emplace_back(base, base * base); break;
            case MunuRule::custom: break;
        }
    }
    return pairs;
}

SequenceRegime classify_sequence(MunuRule rule,
                                 const std::vector<std::pair<double, double>>& pairs) {
    switch (rule) {
        case MunuRule::mu_eq_nu_squared: return SequenceRegime::mu_over_nu_to_zero;
        case MunuRule::mu_eq_nu: return SequenceRegime::ratio_constant;
        case MunuRule::nu_eq_mu_squared: return SequenceRegime::nu_over_mu_to_zero;
        case MunuRule::custom: break;
    }
    if (pairs.size() < 2) return SequenceRegime::ratio_constant;
    const double first = pairs.front().first / pairs.front().second;
    const double last = pairs.back().first / pairs.back().second;
    if (last < 0.1 * first) return SequenceRegime::mu_over_nu_to_zero;
    if (last > 10.0 * first) return SequenceRegime::nu_over_mu_to_zero;
    return SequenceRegime::ratio_constant;
}

namespace {

void run_sweep_T(const ExperimentConfig& config, SweepResult& result) {
    const FrequencyModel gm = config_model(config);
    const PhaseSpaceFunction f = config_spectrum(config);
    const BoundInputs bi = BoundInputs::from_field(f, gm);
    std::optional<LowerSetup> lower;
    try {
        lower = lower_setup(config, gm, f, result);
    } catch (const std::exception& e) {
        result.notes.push_back(std::string("lower-bound constants unavailable: ") + e.what());
    }

    nlohmann::json grids = nlohmann::json::array();
    for (double T : config.T_list) {
        SweepRow row;
        row.param1 = T;
        try {
            const auto diff = difference_field(transform(f, gm, FiniteTime{T}));
            const auto grid = report_grid(diff, config, result);
            grids.push_back(grid.nodes_per_dim());
            const auto rep = norm_report(diff, grid);
            row.norm_inf = rep.norm_inf;
            row.norm_0 = rep.norm_0;
            row.norm_1 = rep.norm_1;
            row.bound_0 = bound_finite_time(bi, T).value;
            if (lower) row.lower_bound_1 = lower_bound_w1_finite_time(lower->lc, T);
            if (*row.norm_0 > *row.bound_0) result.invariant_violation = true;
            if (row.lower_bound_1 &&
                *row.norm_1 < *row.lower_bound_1 - rep.refinement_estimate) {
                result.invariant_violation = true;
            }
            result.extra["refinement"].push_back(rep.refinement_estimate);
        } catch (const quadrature_error& e) {
            row.error = e.what();
            result.notes.push_back("row T=" + format_g17(T) + ": " + row.error);
        }
        result.rows.push_back(std::move(row));
    }
    result.extra["grid_nodes_per_dim"] = grids;
}

void run_sweep_munu(const ExperimentConfig& config, SweepResult& result) {
    const FrequencyModel gm = config_model(config);
    const PhaseSpaceFunction f = config_spectrum(config);
    const BoundInputs bi = BoundInputs::from_field(f, gm);
    const auto pairs = munu_sequence(config);
    const SequenceRegime regime = classify_sequence(config.munu_rule, pairs);
    result.notes.push_back("sequence regime: " + regime_name(regime));
    result.extra["regime"] = regime_name(regime);

    nlohmann::json grids = nlohmann::json::array();
    for (const auto& [mu, nu] : pairs) {
        SweepRow row;
        row.param1 = mu;
        row.param2 = nu;
        try {
            const auto diff = difference_field(transform(f, gm, StochasticDamped{mu, nu}));
            const auto grid = report_grid(diff, config, result);
            grids.push_back(grid.nodes_per_dim());
            const auto rep = norm_report(diff, grid);
            row.norm_inf = rep.norm_inf;
            row.norm_0 = rep.norm_0;
            row.norm_1 = rep.norm_1;
            row.bound_0 = bound_stochastic(bi, mu, nu).value;
            if (nu > 0.0) row.bound_1 = bound_w1(bi, mu, nu).value;
            if (*row.norm_0 > *row.bound_0) result.invariant_violation = true;
            if (row.bound_1 && *row.norm_1 > *row.bound_1) result.invariant_violation = true;
            result.extra["refinement"].push_back(rep.refinement_estimate);
        } catch (const quadrature_error& e) {
            row.error = e.what();
            result.notes.push_back("row mu=" + format_g17(mu) + " nu=" + format_g17(nu) +
                                   ": " + row.error);
        }
        result.rows.push_back(std::move(row));
    }
    result.extra["grid_nodes_per_dim"] = grids;
}

void run_mc_validate(const ExperimentConfig& config, SweepResult& result) {
    const FrequencyModel gm = config_model(config);
    const PhaseSpaceFunction f = config_spectrum(config);
    const ActionDomain domain = f.domain();
    const int n = domain.dim();

    nlohmann::json checks = nlohmann::json::array();
    std::size_t row_index = 0;
    for (const auto& [mu, nu] : config.mc_munu) {
        const auto closed_field = transform(f, gm, StochasticDamped{mu, nu});
        const double dt =
            config.mc_dt > 0.0 ? config.mc_dt : std::min(0.01, 0.1 / (mu + nu));
        const bool fixed_point = !config.mc_I.empty();
        const int points = fixed_point ? 1 : config.mc_points;
        for (int p = 0; p < points; ++p, ++row_index) {
            Vec I(static_cast<std::size_t>(n)), phi(static_cast<std::size_t>(n));
            if (fixed_point) {
                I = config.mc_I;
                phi = config.mc_phi.empty() ? Vec(std::size_t(n), 0.0) : config.mc_phi;
            } else {
                Xoshiro256 rng(mix_seed(config.seed, 0xabcd0000ULL + row_index));
                for (int j = 0; j < n; ++j) {
                    const double lo = domain.lower[std::size_t(j)];
                    const double up = domain.upper[std::size_t(j)];
                    I[std::size_t(j)] =
                        lo + (0.05 + 0.9 * rng.next_double()) * (up - lo);
                    phi[std::size_t(j)] = 2.0 * kPi * rng.next_double();
                }
            }

            SweepRow row;
            row.param1 = mu;
            row.param2 = nu;
            nlohmann::json entry;
            try {
                const double closed = closed_field.evaluate(I, phi).real();
                const auto est =
                    mc_estimate(f, gm, I, phi, mu, nu, config.mc_paths, dt,
                                mix_seed(config.seed, 0x4d43ULL + row_index), config.threads);
                row.mc_mean = est.mean;
                row.mc_stderr = est.std_error;
                const double err = std::abs(est.mean - closed);
                const double threshold = 3.0 * est.std_error + est.tail_bound;
                entry["I"] = I;
                entry["phi"] = phi;
                entry["closed_form"] = closed;
                entry["abs_error"] = err;
                entry["threshold"] = threshold;
                entry["dt"] = dt;
                entry["pass"] = err <= threshold;
                if (err > threshold) result.invariant_violation = true;
            } catch (const std::exception& e) {
                row.error = e.what();
                entry["error"] = row.error;
                result.notes.push_back("mc row " + std::to_string(row_index) + ": " + row.error);
            }
            checks.push_back(entry);
            result.rows.push_back(std::move(row));
        }
    }
    result.extra["mc_checks"] = checks;
}

void run_lower_bounds(const ExperimentConfig& config, SweepResult& result) {
    const FrequencyModel gm = config_model(config);
    const PhaseSpaceFunction f = config_spectrum(config);
    const LowerSetup setup = lower_setup(config, gm, f, result);

    const bool finite_time = config.lower_kind == "finite_time";
    const Vec& params = finite_time ? config.T_list : config.mu_list;
    double prev_norm = -1.0;
    for (double param : params) {
        SweepRow row;
        row.param1 = param;
        try {
            const AverageSpec spec = finite_time
                                         ? AverageSpec(FiniteTime{param})
                                         : AverageSpec(StochasticDamped{param, 0.0});
            const auto diff = difference_field(transform(f, gm, spec));
            const auto grid = report_grid(diff, config, result);
            const auto one = norm_one_refined(diff, grid);
            row.norm_1 = one.value;
            const double lb = finite_time ? lower_bound_w1_finite_time(setup.lc, param)
                                          : lower_bound_w1_damped(setup.lc, param);
            row.lower_bound_1 = lb;
            if (finite_time) {
                if (one.value < lb - one.refinement_estimate) result.invariant_violation = true;
                if (prev_norm >= 0.0 && one.value <= prev_norm) result.invariant_violation = true;
                prev_norm = one.value;
            } else if (one.value < 0.9 * lb) {
                result.invariant_violation = true;
            }
            result.extra["refinement"].push_back(one.refinement_estimate);
        } catch (const quadrature_error& e) {
            row.error = e.what();
            result.notes.push_back("row param=" + format_g17(param) + ": " + row.error);
        }
        result.rows.push_back(std::move(row));
    }
}

void run_inequalities(SweepResult& result) {
    const auto rep = inequality_suite(200001);
    nlohmann::json j;
    j["quartic_ok"] = rep.quartic_ok;
    j["quartic_min_margin"] = rep.quartic_min_margin;
    j["quartic_worst_y"] = rep.quartic_worst_y;
    j["unit_circle_ok"] = rep.unit_circle_ok;
    j["unit_circle_max_err"] = rep.unit_circle_max_err;
    j["l0"] = rep.l0;
    j["l0_estimate"] = rep.l0_estimate;
    j["l0_ok"] = rep.l0_ok;
    j["l1"] = rep.l1;
    j["l1_ok"] = rep.l1_ok;
    j["all_ok"] = rep.all_ok;
    result.extra["inequalities"] = j;
    if (!rep.all_ok) result.invariant_violation = true;
    result.notes.push_back(rep.all_ok ? "inequality suite: all checks passed"
                                      : "inequality suite: FAILURE");
}

void run_norms(const ExperimentConfig& config, SweepResult& result) {
    const FrequencyModel gm = config_model(config);
    const PhaseSpaceFunction f = config_spectrum(config);

    AverageSpec spec = FiniteTime{config.norm_T};
    SweepRow row;
    if (config.norm_kind == "finite_time") {
        spec = FiniteTime{config.norm_T};
        row.param1 = config.norm_T;
    } else if (config.norm_kind == "damped") {
        spec = Damped{config.norm_mu};
        row.param1 = config.norm_mu;
    } else if (config.norm_kind == "stochastic_damped") {
        spec = StochasticDamped{config.norm_mu, config.norm_nu};
        row.param1 = config.norm_mu;
        row.param2 = config.norm_nu;
    } else if (config.norm_kind == "limit_average") {
        spec = LimitAverage{};
        row.param1 = 0.0;
    } else {
        throw config_error("config field 'norm_kind': unknown value '" + config.norm_kind + "'");
    }

    const auto base = transform(f, gm, spec);
    const bool difference = config.norm_difference && base.kind() != AverageKind::limit_average;
    const auto field = difference ? difference_field(base) : base;
    const auto grid = report_grid(field, config, result);
    const auto rep = norm_report(field, grid);
    row.norm_inf = rep.norm_inf;
    row.norm_0 = rep.norm_0;
    row.norm_1 = rep.norm_1;
    result.extra["refinement"].push_back(rep.refinement_estimate);
    result.extra["sup_at_boundary"] = rep.sup_at_boundary;
    result.rows.push_back(std::move(row));
}

}  // namespace

SweepResult run(const ExperimentConfig& config) {
    SweepResult result;
    result.config_hash = config.hash();
    result.seed = config.seed;
    switch (config.experiment) {
        case ExperimentKind::sweep_T: run_sweep_T(config, result); break;
        case ExperimentKind::sweep_munu: run_sweep_munu(config, result); break;
        case ExperimentKind::mc_validate: run_mc_validate(config, result); break;
        case ExperimentKind::lower_bounds: run_lower_bounds(config, result); break;
        case ExperimentKind::inequalities: run_inequalities(result); break;
        case ExperimentKind::norms: run_norms(config, result); break;
    }
    return result;
}

void emit_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");

    out << "param1,param2,norm_inf,norm_0,norm_1,bound_0,bound_1,lower_bound_1,mc_mean,mc_stderr\n";
    auto cell = [](const std::optional<double>& v) {
        return v ? format_g17(*v) : std::string();
    };
    for (const SweepRow& row : result.rows) {
        out << format_g17(row.param1) << ',' << cell(row.param2) << ','
            << cell(row.norm_inf) << ',' << cell(row.norm_0) << ',' << cell(row.norm_1)
            << ',' << cell(row.bound_0) << ',' << cell(row.bound_1) << ','
            << cell(row.lower_bound_1) << ',' << cell(row.mc_mean) << ','
            << cell(row.mc_stderr) << '\n';
    }
    if (!out.good()) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

void emit_metadata(const SweepResult& result, const ExperimentConfig& config,
                   const std::string& path) {
    nlohmann::json j;
    j["schema"] = 1;
    j["config"] = config.to_json();
    j["config_hash"] = result.config_hash;
    j["seed"] = result.seed;
    j["rows"] = result.rows.size();
    j["notes"] = result.notes;
    j["extra"] = result.extra;
    j["invariant_violation"] = result.invariant_violation;
    j["timestamp"] = iso_timestamp();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_metadata: cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out.good()) throw std::runtime_error("emit_metadata: write failed for '" + path + "'");
}

}  // namespace ergoreg
