// Acceptance suite: end-to-end checks of the averaging transforms, norms,
// bounds, and stochastic oracle on the default desk-scale model. Each
// criterion prints a single PASS/FAIL line; the exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ergoreg/averaging.hpp"
#include "ergoreg/bounds.hpp"
#include "ergoreg/experiment.hpp"
#include "ergoreg/norms.hpp"
#include "ergoreg/rng.hpp"
#include "ergoreg/stochastic.hpp"

using namespace ergoreg;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kSeed = 20240901ULL;

struct Criterion {
    std::string label;
    bool pass = true;
    std::ostringstream details;
};

std::vector<Criterion> g_results;

Criterion& begin(const std::string& label) {
    g_results.emplace_back();
    g_results.back().label = label;
    return g_results.back();
}

void require(Criterion& c, bool ok, const std::string& what) {
    if (!ok) {
        c.pass = false;
        c.details << (c.details.tellp() > 0 ? "; " : "") << what;
    }
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---- 1. Closed form vs Monte Carlo --------------------------------------

void criterion_mc_closed_form() {
    auto& c = begin("closed-form vs Monte Carlo ("
                    "3 parameter sets x 5 points, 1e4 paths)");
    const auto t0 = std::chrono::steady_clock::now();

    const auto f = cos_phi_function();
    const auto gm = linear_model(1);
    const ActionDomain domain = f.domain();

    std::vector<std::pair<double, double>> sets{{0.1, 0.1}, {0.01, 0.1}, {0.1, 0.01}};
    std::vector<std::pair<Vec, Vec>> points;
    Xoshiro256 rng(mix_seed(kSeed, 0xC1));
    for (int p = 0; p < 5; ++p) {
        const double I = domain.lower[0] + (0.05 + 0.9 * rng.next_double()) * 2.0;
        const double phi = 2.0 * kPi * rng.next_double();
        points.push_back({Vec{I}, Vec{phi}});
    }

    int set_idx = 0;
    for (const auto& [mu, nu] : sets) {
        const auto closed_field = transform(f, gm, StochasticDamped{mu, nu});
        const double dt = std::min(0.01, 0.1 / (mu + nu));
        int point_idx = 0;
        for (const auto& [I, phi] : points) {
            const double closed = closed_field.evaluate(I, phi).real();
            const auto est = mc_estimate(f, gm, I, phi, mu, nu, 10000, dt,
                                         mix_seed(kSeed, 0x100 + set_idx * 8 + point_idx));
            const double err = std::abs(est.mean - closed);
            const double tol = 3.0 * est.std_error + est.tail_bound;
            require(c, err <= tol,
                    "mu=" + fmt(mu) + " nu=" + fmt(nu) + " point " +
                        std::to_string(point_idx) + ": |mc-closed|=" + fmt(err) + " > " +
                        fmt(tol));
            ++point_idx;
        }
        ++set_idx;
    }

    const double elapsed = seconds_since(t0);
    require(c, elapsed < 120.0, "runtime " + fmt(elapsed) + "s exceeds 120s");
    c.details << (c.details.tellp() > 0 ? "; " : "") << "runtime " << fmt(elapsed) << "s";
}

// ---- 2. Characteristic function of the noisy flow ------------------------

void criterion_characteristic() {
    auto& c = begin("characteristic function e^{-nu|k|^2 t} (9 of 10 seeds, z<=3)");
    struct Case {
        double nu;
        ModeIndex k;
        double t;
    };
    const std::vector<Case> cases{{1.0, ModeIndex({1}), 1.0},
                                  {0.5, ModeIndex({1, 1}), 2.0},
                                  {0.1, ModeIndex({2}), 1.0}};
    for (const auto& cs : cases) {
        int ok = 0;
        double worst = 0.0;
        for (std::uint64_t s = 1; s <= 10; ++s) {
            const auto chk = characteristic_check(cs.nu, cs.k, cs.t, 10000, mix_seed(kSeed, s));
            worst = std::max(worst, chk.z_score);
            if (chk.z_score <= 3.0) ++ok;
        }
        require(c, ok >= 9,
                "nu=" + fmt(cs.nu) + " |k|^2=" + std::to_string(cs.k.norm2_squared()) +
                    " t=" + fmt(cs.t) + ": only " + std::to_string(ok) +
                    "/10 seeds with z<=3 (worst z=" + fmt(worst) + ")");
    }
}

// ---- 3. |.|^0 convergence upper bounds ------------------------------------

void criterion_upper_bounds() {
    auto& c = begin("|.|^0 upper bounds dominate measurements (refinement < 5%)");
    const auto t0 = std::chrono::steady_clock::now();

    const auto f = default_spectrum(1, 8);
    const auto gm = linear_model(1);
    const auto bi = BoundInputs::from_field(f, gm);

    for (double T : {10.0, 100.0, 1000.0}) {
        const auto diff = difference_field(transform(f, gm, FiniteTime{T}));
        const auto grid = auto_grid(diff, QuadratureScheme::midpoint, 32);
        const auto measured = norm_zero_refined(diff, grid);
        const double bound = bound_finite_time(bi, T).value;
        require(c, measured.value <= bound,
                "T=" + fmt(T) + ": measured " + fmt(measured.value) + " > bound " + fmt(bound));
        require(c, measured.refinement_estimate < 0.05 * measured.value,
                "T=" + fmt(T) + ": refinement " + fmt(measured.refinement_estimate) +
                    " >= 5% of " + fmt(measured.value));
    }

    for (double mu : {0.3, 0.1, 0.03}) {
        for (double nu : {0.3, 0.1, 0.03}) {
            const auto diff = difference_field(transform(f, gm, StochasticDamped{mu, nu}));
            const auto grid = auto_grid(diff, QuadratureScheme::midpoint, 32);
            const auto measured = norm_zero_refined(diff, grid);
            const double bound = bound_stochastic(bi, mu, nu).value;
            require(c, measured.value <= bound,
                    "mu=" + fmt(mu) + " nu=" + fmt(nu) + ": measured " + fmt(measured.value) +
                        " > bound " + fmt(bound));
            require(c, measured.refinement_estimate < 0.05 * measured.value,
                    "mu=" + fmt(mu) + " nu=" + fmt(nu) + ": refinement " +
                        fmt(measured.refinement_estimate) + " >= 5% of " +
                        fmt(measured.value));
        }
    }

    const double elapsed = seconds_since(t0);
    require(c, elapsed < 300.0, "runtime " + fmt(elapsed) + "s exceeds 300s");
    c.details << (c.details.tellp() > 0 ? "; " : "") << "runtime " << fmt(elapsed) << "s";
}

// ---- 4. |.|^inf non-convergence -------------------------------------------

void criterion_uniform_non_convergence() {
    auto& c = begin("|.|^inf stays above the witness magnitude |f_1(0)|");
    const auto f = default_spectrum(1, 8);
    const auto gm = linear_model(1);
    const double witness = std::abs(f.coeff(ModeIndex({1}), Vec{0.0}));  // e^{-1}
    const double floor_value = witness - 1e-3;

    for (double T : {10.0, 100.0, 1000.0}) {
        const auto diff = difference_field(transform(f, gm, FiniteTime{T}));
        const double v = norm_uniform(diff, auto_grid(diff));
        require(c, v >= floor_value,
                "G^T T=" + fmt(T) + ": |.|^inf=" + fmt(v) + " < " + fmt(floor_value));
    }
    for (double mu : {0.1, 0.01}) {
        const auto diff = difference_field(transform(f, gm, Damped{mu}));
        const double v = norm_uniform(diff, auto_grid(diff));
        require(c, v >= floor_value,
                "F^mu mu=" + fmt(mu) + ": |.|^inf=" + fmt(v) + " < " + fmt(floor_value));
    }
    for (int i = 2; i <= 6; ++i) {
        const double munu = std::pow(2.0, -i);
        const auto diff = difference_field(transform(f, gm, StochasticDamped{munu, munu}));
        const double v = norm_uniform(diff, auto_grid(diff));
        require(c, v >= floor_value,
                "F^{mu,nu} i=" + std::to_string(i) + ": |.|^inf=" + fmt(v) + " < " +
                    fmt(floor_value));
    }
}

// ---- 5. |.|^1 convergence along mu_i = nu_i^2 -----------------------------

void criterion_w1_convergence() {
    auto& c = begin("|.|^1 of F^{mu,nu}-fbar vanishes along mu_i=nu_i^2");
    const auto f = default_spectrum(1, 8);
    const auto gm = linear_model(1);
    const auto bi = BoundInputs::from_field(f, gm);

    Vec values;
    for (int i = 2; i <= 8; ++i) {
        const double nu = std::pow(2.0, -i);
        const double mu = nu * nu;
        const auto diff = difference_field(transform(f, gm, StochasticDamped{mu, nu}));
        const auto grid = auto_grid(diff, QuadratureScheme::midpoint, 16);
        const double v = norm_one(diff, grid);
        const double bound = bound_w1(bi, mu, nu).value;
        require(c, v <= bound,
                "i=" + std::to_string(i) + ": measured " + fmt(v) + " > bound " + fmt(bound));
        values.push_back(v);
    }
    for (std::size_t s = 3; s + 1 < values.size(); ++s) {  // i >= 4
        require(c, values[s + 1] < values[s],
                "not decreasing between i=" + std::to_string(s + 2) + " and i=" +
                    std::to_string(s + 3));
    }
    require(c, values.back() < 0.05 * values.front(),
            "final " + fmt(values.back()) + " >= 5% of initial " + fmt(values.front()));
    c.details << (c.details.tellp() > 0 ? "; " : "") << "|.|^1: " << fmt(values.front())
              << " -> " << fmt(values.back());
}

// ---- 6. |.|^1 non-convergence of G^T and F^mu ------------------------------

void criterion_w1_non_convergence() {
    auto& c = begin("|.|^1 non-convergence: G^T grows, F^mu stays above arctan bound");
    const auto f = default_spectrum(1, 8);
    const auto gm = linear_model(1);

    ActionDomain search = f.domain();
    search.quadrature_nodes_per_dim = 33;
    const auto rp = find_resonance(gm, f, ModeIndex({1}), search);
    if (!rp) {
        require(c, false, "no resonance witness for k=1");
        return;
    }
    const auto lc = estimate_lower_constants(gm, f, *rp, 0.25);

    double prev = -1.0;
    for (double T : {10.0, 100.0, 1000.0}) {
        const auto diff = difference_field(transform(f, gm, FiniteTime{T}));
        const auto grid = auto_grid(diff, QuadratureScheme::midpoint, 16);
        const auto one = norm_one_refined(diff, grid);
        const double lb = lower_bound_w1_finite_time(lc, T);
        require(c, one.value > prev, "G^T |.|^1 not increasing at T=" + fmt(T));
        require(c, one.value >= lb - one.refinement_estimate,
                "T=" + fmt(T) + ": measured " + fmt(one.value) + " < lower bound " + fmt(lb));
        prev = one.value;
    }

    for (double mu : {1e-1, 1e-2, 1e-3}) {
        const auto diff = difference_field(transform(f, gm, Damped{mu}));
        const auto grid = auto_grid(diff, QuadratureScheme::midpoint, 16);
        const double v = norm_one(diff, grid);
        const double lb = lower_bound_w1_damped(lc, mu);
        require(c, v > 0.9 * lb,
                "mu=" + fmt(mu) + ": measured " + fmt(v) + " <= 0.9 x " + fmt(lb));
    }
}

// ---- 7. Elementary inequality suite ---------------------------------------

void criterion_inequalities() {
    auto& c = begin("inequality suite on >= 1e5-point grids");
    const auto rep = inequality_suite(200001);
    require(c, rep.quartic_ok, "quartic lower bound violated near y=" + fmt(rep.quartic_worst_y));
    require(c, rep.unit_circle_ok,
            "unit-circle identity error " + fmt(rep.unit_circle_max_err) + " > 1e-12");
    require(c, rep.l0_estimate <= 1e-6, "l0 quadrature estimate " + fmt(rep.l0_estimate));
    require(c, rep.l0 <= 3.0, "l0 = " + fmt(rep.l0) + " > 3");
    require(c, std::abs(rep.l1 - 0.88137) <= 1e-5, "l1 = " + fmt(rep.l1));
    require(c, rep.l1 <= 1.0, "l1 > 1");
    c.details << (c.details.tellp() > 0 ? "; " : "") << "l0=" << fmt(rep.l0)
              << " l1=" << fmt(rep.l1);
}

// ---- 8. W^{1,1} sandwich ----------------------------------------------------

void criterion_sandwich() {
    auto& c = begin("(2pi)^{-n} W^{1,1} sandwich for 10 random fields, n in {1,2}");
    int idx = 0;
    for (int n : {1, 2}) {
        for (std::uint64_t s = 1; s <= 5; ++s, ++idx) {
            const auto dom = default_domain(n);
            const auto u = random_spectrum(n, n == 1 ? 4 : 2, mix_seed(kSeed, 0x58 + idx), dom);
            const auto grid =
                QuadratureGrid::build(dom, QuadratureScheme::midpoint, n == 1 ? 96 : 24);
            const auto sw = sobolev_sandwich_check(u, grid, n == 1 ? 64 : 32);
            require(c, sw.lhs <= sw.mid + 1e-9 * (1.0 + sw.mid),
                    "field " + std::to_string(idx) + ": lhs " + fmt(sw.lhs) + " > mid " +
                        fmt(sw.mid));
            require(c, sw.mid <= sw.rhs + 1e-6,
                    "field " + std::to_string(idx) + ": mid " + fmt(sw.mid) + " > rhs " +
                        fmt(sw.rhs) + " + 1e-6");
        }
    }
}

// ---- 9. Determinism ---------------------------------------------------------

void criterion_determinism() {
    auto& c = begin("re-running identical configs reproduces identical cells");

    ExperimentConfig sweep;
    sweep.experiment = ExperimentKind::sweep_munu;
    sweep.truncation = 3;
    sweep.munu_i_begin = 2;
    sweep.munu_i_end = 5;
    sweep.seed = kSeed;

    ExperimentConfig mc;
    mc.experiment = ExperimentKind::mc_validate;
    mc.spectrum_family = "cos_phi";
    mc.mc_munu = {{0.2, 0.2}};
    mc.mc_paths = 2000;
    mc.mc_points = 2;
    mc.seed = kSeed;

    for (const ExperimentConfig& cfg : {sweep, mc}) {
        const auto r1 = run(cfg);
        const auto r2 = run(cfg);
        require(c, r1.rows.size() == r2.rows.size(), "row count differs");
        for (std::size_t i = 0; i < r1.rows.size(); ++i) {
            const auto& a = r1.rows[i];
            const auto& b = r2.rows[i];
            const bool same = a.param1 == b.param1 && a.param2 == b.param2 &&
                              a.norm_inf == b.norm_inf && a.norm_0 == b.norm_0 &&
                              a.norm_1 == b.norm_1 && a.bound_0 == b.bound_0 &&
                              a.bound_1 == b.bound_1 && a.lower_bound_1 == b.lower_bound_1 &&
                              a.mc_mean == b.mc_mean && a.mc_stderr == b.mc_stderr;
            require(c, same,
                    experiment_name(cfg.experiment) + " row " + std::to_string(i) +
                        " differs between runs");
        }
        require(c, r1.config_hash == r2.config_hash, "config hash differs");
    }

    // Thread count must not change Monte Carlo cells either.
    mc.threads = 1;
    const auto tr1 = run(mc);
    mc.threads = 2;
    const auto tr2 = run(mc);
    for (std::size_t i = 0; i < tr1.rows.size(); ++i) {
        require(c, tr1.rows[i].mc_mean == tr2.rows[i].mc_mean &&
                       tr1.rows[i].mc_stderr == tr2.rows[i].mc_stderr,
                "mc cells depend on the thread count (row " + std::to_string(i) + ")");
    }
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_mc_closed_form();
    criterion_characteristic();
    criterion_upper_bounds();
    criterion_uniform_non_convergence();
    criterion_w1_convergence();
    criterion_w1_non_convergence();
    criterion_inequalities();
    criterion_sandwich();
    criterion_determinism();

    int failures = 0;
    for (std::size_t i = 0; i < g_results.size(); ++i) {
        const auto& c = g_results[i];
        const std::string detail = c.details.str();
        std::printf("[%s] %zu. %s%s%s\n", c.pass ? "PASS" : "FAIL", i + 1, c.label.c_str(),
                    detail.empty() ? "" : " -- ", detail.c_str());
        failures += c.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed (total %.1fs)\n", int(g_results.size()) - failures,
                g_results.size(), seconds_since(t0));
    return failures;
}
