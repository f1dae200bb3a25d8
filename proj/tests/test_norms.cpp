#include <doctest.h>

#include <cmath>

#include "ergoreg/norms.hpp"
#include "ergoreg/rng.hpp"

using namespace ergoreg;

namespace {


// Single-mode helper: u with one stored mode k and coefficient `value`.
PhaseSpaceFunction single_mode(const ActionDomain& box, const ModeIndex& k,
                               std::function<Complex(std::span<const double>)> value,
                               std::function<CVec(std::span<const double>)> gradient,
                               double sup) {
    PhaseSpaceFunction u(box, std::max(1, std::abs(k[0])), false);
    CoefficientFn fn;
    fn.value = std::move(value);
    fn.gradient = std::move(gradient);
    fn.sup_norm = sup;
    u.set_mode(k, fn);
    return u;
}

PhaseSpaceFunction scale_field(const PhaseSpaceFunction& f, double c) {
    PhaseSpaceFunction out(f.domain(), f.truncation_radius(), f.real_symmetric());
    for (const auto& [k, fn] : f.mode_map()) {
        CoefficientFn scaled;
        auto value = fn.value;
        scaled.value = [value, c](std::span<const double> I) { return c * value(I); };
        if (fn.gradient) {
            auto gradient = fn.gradient;
            scaled.gradient = [gradient, c](std::span<const double> I) {
                CVec g = gradient(I);
                for (Complex& v : g) v *= c;
                return g;
            };
        }
        scaled.sup_norm = std::abs(c) * fn.sup_norm;
        out.set_mode(k, scaled);
    }
    return out;
}

PhaseSpaceFunction add_fields(const PhaseSpaceFunction& a, const PhaseSpaceFunction& b) {
    PhaseSpaceFunction out(a.domain(),
                           std::max(a.truncation_radius(), b.truncation_radius()),
                           a.real_symmetric() && b.real_symmetric());
    auto add_mode = [&](const ModeIndex& k) {
        const bool in_a = a.has_mode(k), in_b = b.has_mode(k);
        CoefficientFn fn;
        if (in_a && in_b) {
            auto va = a.mode_fn(k).value;
            auto vb = b.mode_fn(k).value;
            fn.value = [va, vb](std::span<const double> I) { return va(I) + vb(I); };
            if (a.mode_fn(k).gradient && b.mode_fn(k).gradient) {
                auto ga = a.mode_fn(k).gradient;
                auto gb = b.mode_fn(k).gradient;
                fn.gradient = [ga, gb](std::span<const double> I) {
                    CVec g = ga(I);
                    const CVec h = gb(I);
                    for (std::size_t j = 0; j < g.size(); ++j) g[j] += h[j];
                    return g;
                };
            }
            fn.sup_norm = a.mode_fn(k).sup_norm + b.mode_fn(k).sup_norm;
        } else {
            const auto& src = in_a ? a.mode_fn(k) : b.mode_fn(k);
            fn = src;
        }
        out.set_mode(k, fn);
    };
    for (const ModeIndex& k : a.modes()) add_mode(k);
    for (const ModeIndex& k : b.modes()) {
        if (!a.has_mode(k)) add_mode(k);
    }
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("norms");

TEST_CASE("quadrature grids: weights sum to the volume, nodes interior") {
    for (int n : {1, 2, 3}) {
        ActionDomain box(Vec(std::size_t(n), -1.0), Vec(std::size_t(n), 1.0));
        for (auto scheme : {QuadratureScheme::midpoint, QuadratureScheme::gauss_legendre}) {
            const auto grid = QuadratureGrid::build(box, scheme, n == 3 ? 9 : 16);
            Vec w(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                w[i] = grid.weight(i);
                CHECK(box.contains(grid.node(i)));
                CHECK(grid.weight(i) > 0.0);
            }
            CHECK(pairwise_sum(w) == doctest::Approx(box.volume()).epsilon(1e-12));
        }
    }
}

TEST_CASE("integrate: volume, linear, polynomial exactness, error path") {
    ActionDomain unit(Vec{0.0}, Vec{1.0});
    const auto mid = QuadratureGrid::build(unit, QuadratureScheme::midpoint, 64);
    const auto gl = QuadratureGrid::build(unit, QuadratureScheme::gauss_legendre, 8);

    CHECK(integrate([](std::span<const double>) { return 1.0; }, mid) ==
          doctest::Approx(1.0).epsilon(1e-13));
    CHECK(integrate([](std::span<const double> I) { return I[0]; }, mid) ==
          doctest::Approx(0.5).epsilon(1e-13));
    CHECK(integrate([](std::span<const double> I) { return I[0]; }, gl) ==
          doctest::Approx(0.5).epsilon(1e-13));
    CHECK(std::abs(integrate([](std::span<const double> I) { return I[0] * I[0]; }, gl) -
                   1.0 / 3.0) <= 1e-12);

    CHECK_THROWS_AS(integrate(
                        [](std::span<const double> I) {
                            return I[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN()
                                              : 1.0;
                        },
                        mid),
                    quadrature_error);
}

TEST_CASE("integrate_refined reports a usable two-level estimate") {
    ActionDomain unit(Vec{0.0}, Vec{1.0});
    const auto grid = QuadratureGrid::build(unit, QuadratureScheme::midpoint, 128);
    const auto res = integrate_refined(
        [](std::span<const double> I) { return std::cos(3.0 * I[0]); }, grid);
    const double exact = std::sin(3.0) / 3.0;
    CHECK(std::abs(res.value - exact) <= res.refinement_estimate);
}

TEST_CASE("norm_uniform: constants and boundary suprema") {
    ActionDomain unit(Vec{0.0}, Vec{1.0});
    const auto grid = QuadratureGrid::build(unit, QuadratureScheme::midpoint, 64);

    const auto u_const = single_mode(
        unit, ModeIndex({1}), [](std::span<const double>) { return Complex(1.0, 0.0); },
        [](std::span<const double>) { return CVec{Complex(0.0, 0.0)}; }, 1.0);
    CHECK(norm_uniform(u_const, grid) == doctest::Approx(1.0).epsilon(1e-12));

    // sup of u_1(I) = I on (0,1) sits at the (open) boundary.
    const auto u_lin = single_mode(
        unit, ModeIndex({1}), [](std::span<const double> I) { return Complex(I[0], 0.0); },
        [](std::span<const double>) { return CVec{Complex(1.0, 0.0)}; }, 1.0);
    CHECK(norm_uniform(u_lin, grid) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(norm_uniform(u_lin, grid) <= 1.0);
    const auto rep = norm_report(u_lin, grid);
    CHECK(rep.sup_at_boundary);
}

TEST_CASE("norm_uniform of G^T - fbar stays above the witness magnitude") {
    const auto f = cos_phi_function();
    const auto gm = linear_model(1);
    for (double T : {10.0, 100.0, 1000.0}) {
        const auto diff = difference_field(transform(f, gm, FiniteTime{T}));
        const auto grid = auto_grid(diff);
        CHECK(norm_uniform(diff, grid) >= 0.5 - 1e-3);
        // And never above the contraction bound sum |f_k|^inf = 1.
        CHECK(norm_uniform(diff, grid) <= 1.0 + 1e-12);
    }
}

TEST_CASE("norm_zero: constants and the null limit average") {
    ActionDomain unit(Vec{0.0}, Vec{1.0});
    const auto grid = QuadratureGrid::build(unit, QuadratureScheme::midpoint, 64);
    const auto u_const = single_mode(
        unit, ModeIndex({1}), [](std::span<const double>) { return Complex(1.0, 0.0); },
        [](std::span<const double>) { return CVec{Complex(0.0, 0.0)}; }, 1.0);
    CHECK(norm_zero(u_const, grid) == doctest::Approx(1.0).epsilon(1e-12));

    // fbar of cos phi vanishes except on the measure-zero resonance.
    const auto f = cos_phi_function();
    const auto gm = linear_model(1);
    const auto fbar = transform(f, gm, LimitAverage{});
    const auto dgrid = QuadratureGrid::build(default_domain(1), QuadratureScheme::midpoint, 128);
    CHECK(norm_zero(fbar, dgrid) == 0.0);
}

TEST_CASE("norm_one: hand-computed single-mode values") {
    ActionDomain unit(Vec{0.0}, Vec{1.0});
    const auto grid = QuadratureGrid::build(unit, QuadratureScheme::midpoint, 64);

    const auto u1 = single_mode(
        unit, ModeIndex({1}), [](std::span<const double>) { return Complex(1.0, 0.0); },
        [](std::span<const double>) { return CVec{Complex(0.0, 0.0)}; }, 1.0);
    CHECK(norm_one(u1, grid) == doctest::Approx(2.0).epsilon(1e-12));

    const auto u2 = single_mode(
        unit, ModeIndex({2}), [](std::span<const double> I) { return Complex(I[0], 0.0); },
        [](std::span<const double>) { return CVec{Complex(1.0, 0.0)}; }, 1.0);
    // 0.5 + 1 + 2 * 0.5
    CHECK(norm_one(u2, grid) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("norm_one of G^T - fbar grows with T") {
    const auto f = cos_phi_function();
    const auto gm = linear_model(1);
    double prev = -1.0;
    for (double T : {10.0, 1000.0}) {
        const auto diff = difference_field(transform(f, gm, FiniteTime{T}));
        const double v = norm_one(diff, auto_grid(diff));
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("norm homogeneity and triangle inequality") {
    const auto dom = default_domain(1);
    const auto u = random_spectrum(1, 3, 2024, dom);
    const auto v = random_spectrum(1, 3, 777, dom);
    const auto grid = QuadratureGrid::build(dom, QuadratureScheme::midpoint, 96);

    const double u_inf = norm_uniform(u, grid);
    const double u_0 = norm_zero(u, grid);
    const double u_1 = norm_one(u, grid);
    for (double c : {0.0, 2.0, 10.0}) {
        const auto cu = scale_field(u, c);
        CHECK(norm_uniform(cu, grid) == doctest::Approx(c * u_inf).epsilon(1e-10));
        CHECK(norm_zero(cu, grid) == doctest::Approx(c * u_0).epsilon(1e-10));
        CHECK(norm_one(cu, grid) == doctest::Approx(c * u_1).epsilon(1e-10));
    }

    const auto sum = add_fields(u, v);
    const double slack = 1.0 + 1e-12;
    CHECK(norm_uniform(sum, grid) <= (u_inf + norm_uniform(v, grid)) * slack);
    CHECK(norm_zero(sum, grid) <= (u_0 + norm_zero(v, grid)) * slack);
    CHECK(norm_one(sum, grid) <= (u_1 + norm_one(v, grid)) * slack);
}

TEST_CASE("refinement stability on smooth fields") {
    const auto dom = default_domain(1);
    const auto u = random_spectrum(1, 4, 99, dom);
    const auto grid = QuadratureGrid::build(dom, QuadratureScheme::midpoint, 64);
    const auto doubled = QuadratureGrid::build(dom, QuadratureScheme::midpoint, 128);

    const auto z = norm_zero_refined(u, grid);
    CHECK(std::abs(norm_zero(u, doubled) - z.value) <= z.refinement_estimate);
    const auto o = norm_one_refined(u, grid);
    CHECK(std::abs(norm_one(u, doubled) - o.value) <= o.refinement_estimate);
}

TEST_CASE("integral norms are insensitive to nodes on the resonant manifold") {
    // Odd midpoint grids on (-1,1) place a node exactly at the resonance
    // I = 0 of every mode of the linear model; the integral norms must see
    // the nonresonant-branch integrand there (the branch set is null).
    const auto f = default_spectrum(1, 4);
    const auto gm = linear_model(1);
    const double mu = 0.03, nu = 0.1;
    const auto diff = difference_field(transform(f, gm, StochasticDamped{mu, nu}));

    const auto dom = default_domain(1);
    const auto odd = QuadratureGrid::build(dom, QuadratureScheme::midpoint, 257);
    const auto even = QuadratureGrid::build(dom, QuadratureScheme::midpoint, 256);
    const double v_odd = norm_zero(diff, odd);
    const double v_even = norm_zero(diff, even);
    CHECK(std::abs(v_odd - v_even) <= 2e-3 * v_even);

    // Nonzero modes of the limit average vanish off the resonances; only the
    // angle average survives almost everywhere.
    const auto fbar_cos = transform(cos_phi_function(), gm, LimitAverage{});
    CHECK(norm_zero(fbar_cos, odd) == 0.0);
    const auto fbar = transform(f, gm, LimitAverage{});
    CHECK(norm_zero(fbar, odd) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(norm_one(fbar, odd) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("norm_report: totals match per-mode entries, norm_1 >= norm_0") {
    const auto f = default_spectrum(1, 4);
    const auto gm = linear_model(1);
    const auto diff = difference_field(transform(f, gm, Damped{0.2}));
    const auto rep = norm_report(diff, auto_grid(diff));

    CHECK(rep.norm_1 >= rep.norm_0);
    CHECK(rep.norm_0 >= 0.0);
    double sum_inf = 0.0, sum_0 = 0.0, sum_1 = 0.0;
    for (const auto& [k, pm] : rep.per_mode) {
        sum_inf += pm.inf;
        sum_0 += pm.zero;
        sum_1 += pm.one;
    }
    CHECK(rep.norm_inf == doctest::Approx(sum_inf).epsilon(1e-12));
    CHECK(rep.norm_0 == doctest::Approx(sum_0).epsilon(1e-12));
    CHECK(rep.norm_1 == doctest::Approx(sum_1).epsilon(1e-12));
}

TEST_CASE("auto grid sizing follows the divisor rate and caps") {
    const auto f = default_spectrum(1, 8);
    const auto gm = linear_model(1);
    const auto diff = difference_field(transform(f, gm, FiniteTime{1000.0}));
    const auto spec = auto_grid_spec(diff);
    CHECK(spec.nodes_per_dim >= 20000);
    CHECK(!spec.capped);

    const auto f2 = default_spectrum(2, 8);
    const auto gm2 = linear_model(2);
    const auto diff2 = difference_field(transform(f2, gm2, FiniteTime{1000.0}));
    const auto spec2 = auto_grid_spec(diff2);
    CHECK(spec2.capped);
    CHECK(spec2.nodes_per_dim == 1024);
}

TEST_CASE("sobolev sandwich: single mode, zero field, strict multi-mode gap") {
    const auto dom = default_domain(1);
    const auto grid = QuadratureGrid::build(dom, QuadratureScheme::midpoint, 64);

    const auto u1 = single_mode(
        dom, ModeIndex({2}), [](std::span<const double> I) { return Complex(0.3 + I[0], 0.0); },
        [](std::span<const double>) { return CVec{Complex(1.0, 0.0)}; }, 1.3);
    const auto s1 = sobolev_sandwich_check(u1, grid, 48);
    CHECK(s1.ok);
    CHECK(s1.lhs == doctest::Approx(s1.mid).epsilon(1e-9));
    CHECK(s1.mid == doctest::Approx(s1.rhs).epsilon(1e-12));

    PhaseSpaceFunction zero(dom, 1, true);
    CoefficientFn z;
    z.value = [](std::span<const double>) { return Complex(0.0, 0.0); };
    z.gradient = [](std::span<const double>) { return CVec{Complex(0.0, 0.0)}; };
    z.sup_norm = 0.0;
    zero.set_mode(ModeIndex({1}), z);
    const auto s0 = sobolev_sandwich_check(zero, grid, 16);
    CHECK(s0.ok);
    CHECK(s0.lhs == 0.0);
    CHECK(s0.mid == 0.0);
    CHECK(s0.rhs == 0.0);

    // Two modes with opposing phases: the triangle inequality is strict.
    PhaseSpaceFunction two(dom, 2, false);
    CoefficientFn m1, m2;
    m1.value = [](std::span<const double>) { return Complex(1.0, 0.0); };
    m1.gradient = [](std::span<const double>) { return CVec{Complex(0.0, 0.0)}; };
    m1.sup_norm = 1.0;
    m2.value = [](std::span<const double>) { return Complex(-1.0, 0.0); };
    m2.gradient = [](std::span<const double>) { return CVec{Complex(0.0, 0.0)}; };
    m2.sup_norm = 1.0;
    two.set_mode(ModeIndex({1}), m1);
    two.set_mode(ModeIndex({2}), m2);
    const auto s2 = sobolev_sandwich_check(two, grid, 64);
    CHECK(s2.ok);
    CHECK(s2.lhs < s2.mid - 1e-6);
}

TEST_CASE("sandwich holds for random truncated fields in n = 1 and 2") {
    for (int n : {1, 2}) {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            const auto dom = default_domain(n);
            const auto u = random_spectrum(n, n == 1 ? 4 : 2, seed, dom);
            const auto grid =
                QuadratureGrid::build(dom, QuadratureScheme::midpoint, n == 1 ? 64 : 24);
            const auto s = sobolev_sandwich_check(u, grid, n == 1 ? 64 : 32);
            CHECK(s.ok);
            CHECK(s.lhs <= s.mid + s.tolerance);
            CHECK(s.mid <= s.rhs + s.tolerance);
        }
    }
}

TEST_SUITE_END();
