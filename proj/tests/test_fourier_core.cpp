#include <doctest.h>

#include <cmath>

#include "ergoreg/fourier_core.hpp"
#include "ergoreg/rng.hpp"

using namespace ergoreg;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec vec1(double x) { return Vec{x}; }

}  // namespace

TEST_SUITE_BEGIN("fourier_core");

TEST_CASE("mode index norms") {
    ModeIndex k({2, -3});
    CHECK(k.norm1() == 5);
    CHECK(k.norm2_squared() == 13);
    CHECK(k.norm2() == doctest::Approx(std::sqrt(13.0)));
    CHECK(!k.is_zero());
    CHECK(ModeIndex::zero(3).is_zero());

    // norm1 >= norm2 >= 0, with norm2 = 0 iff zero mode.
    Xoshiro256 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + int(rng.next_u64() % 3);
        std::vector<int> comps(static_cast<std::size_t>(n));
        for (int& c : comps) c = int(rng.next_u64() % 17) - 8;
        ModeIndex m(comps);
        CHECK(double(m.norm1()) >= m.norm2());
        CHECK(m.norm2() >= 0.0);
        CHECK((m.norm2() == 0.0) == m.is_zero());
    }
}

TEST_CASE("action domain validation and geometry") {
    CHECK_THROWS_AS(ActionDomain(Vec{1.0}, Vec{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ActionDomain(Vec{0.0}, Vec{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ActionDomain(Vec{0.0, 0.0}, Vec{1.0}), std::invalid_argument);

    ActionDomain box(Vec{-1.0, 0.0}, Vec{1.0, 3.0});
    CHECK(box.volume() == doctest::Approx(6.0));
    CHECK(box.diameter() == doctest::Approx(std::sqrt(4.0 + 9.0)));
    CHECK(box.max_extent() == doctest::Approx(3.0));
    CHECK(box.contains(Vec{0.0, 1.0}));
    CHECK(!box.contains(Vec{1.0, 1.0}));  // boundary is outside the open box
    CHECK(!box.contains(Vec{0.0, 3.5}));
}

TEST_CASE("linear model constants certify on a grid") {
    for (int n : {1, 2, 3}) {
        const auto gm = linear_model(n);
        const auto rep = verify_frequency_model(gm, default_domain(n), 9);
        CHECK(rep.ok);
        CHECK(rep.min_det == doctest::Approx(1.0));
        CHECK(rep.max_det == doctest::Approx(1.0));
    }
}

TEST_CASE("affine model constants certify on a grid") {
    ActionDomain box(Vec{-1.0, -0.5}, Vec{1.0, 2.0});
    const auto gm = affine_model(Vec{2.0, -0.5}, Vec{0.1, 0.3}, box);
    CHECK(gm.m == doctest::Approx(1.0));
    CHECK(gm.M == doctest::Approx(1.0));
    CHECK(gm.D == doctest::Approx(2.0));
    const auto rep = verify_frequency_model(gm, box, 9);
    CHECK(rep.ok);
    CHECK_THROWS_AS(affine_model(Vec{0.0, 1.0}, Vec{0.0, 0.0}, box), std::invalid_argument);
}

TEST_CASE("evaluate: constant, cosine, domain error") {
    // Single zero mode f_0 = 1 evaluates to 1 everywhere.
    PhaseSpaceFunction constant(default_domain(1), 1, true);
    CoefficientFn one;
    one.value = [](std::span<const double>) { return Complex(1.0, 0.0); };
    one.sup_norm = 1.0;
    constant.set_mode(ModeIndex::zero(1), one);
    CHECK(constant.evaluate(vec1(0.3), vec1(1.7)).real() == doctest::Approx(1.0));
    CHECK(constant.evaluate(vec1(-0.9), vec1(0.0)).real() == doctest::Approx(1.0));

    const auto f = cos_phi_function();
    CHECK(f.evaluate(vec1(0.3), vec1(0.0)).real() == doctest::Approx(1.0));
    CHECK(f.evaluate(vec1(0.3), vec1(kPi / 3.0)).real() == doctest::Approx(0.5));
    CHECK(f.evaluate(vec1(0.3), vec1(kPi / 3.0)).imag() == 0.0);

    CHECK_THROWS_AS(f.evaluate(vec1(1.5), vec1(0.0)), std::domain_error);
    CHECK_THROWS_AS(f.evaluate(vec1(-1.0), vec1(0.0)), std::domain_error);
}

TEST_CASE("reality symmetry and imaginary residue") {
    const auto f = default_spectrum(1);
    const auto g2 = default_spectrum(2, 4);
    Xoshiro256 rng(7);
    const double budget1 = 1e-10 * f.sup_hint_total();
    const double budget2 = 1e-10 * g2.sup_hint_total();
    for (int trial = 0; trial < 50; ++trial) {
        const double I = 2.0 * rng.next_double() - 1.0;
        const double phi = 2.0 * kPi * rng.next_double();
        CHECK(std::abs(f.evaluate_raw(vec1(0.999 * I), vec1(phi)).imag()) <= budget1);

        const Vec I2{0.999 * (2.0 * rng.next_double() - 1.0),
                     0.999 * (2.0 * rng.next_double() - 1.0)};
        const Vec phi2{2.0 * kPi * rng.next_double(), 2.0 * kPi * rng.next_double()};
        CHECK(std::abs(g2.evaluate_raw(I2, phi2).imag()) <= budget2);
    }

    // Coefficient-level symmetry: f_{-k} == conj(f_k) at grid points.
    for (const ModeIndex& k : g2.modes()) {
        for (double x : {-0.7, -0.1, 0.4, 0.9}) {
            const Vec I{x, -0.3 * x};
            const Complex a = g2.coeff(k, I);
            const Complex b = g2.coeff(k.negated(), I);
            CHECK(std::abs(a - std::conj(b)) == 0.0);
        }
    }
}

TEST_CASE("small divisor examples and bilinearity") {
    const auto gm2 = linear_model(2);
    CHECK(small_divisor(gm2, ModeIndex({1, -1}), Vec{0.3, 0.3}) == doctest::Approx(0.0));
    CHECK(small_divisor(gm2, ModeIndex({1, 0}), Vec{0.25, 0.9}) == doctest::Approx(0.25));
    CHECK(small_divisor(gm2, ModeIndex({2, 3}), Vec{0.1, 0.2}) == doctest::Approx(0.8));
    CHECK_THROWS_AS(small_divisor(gm2, ModeIndex::zero(2), Vec{0.1, 0.2}),
                    std::invalid_argument);

    Xoshiro256 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> a(2), b(2);
        for (int j = 0; j < 2; ++j) {
            a[std::size_t(j)] = int(rng.next_u64() % 9) - 4;
            b[std::size_t(j)] = int(rng.next_u64() % 9) - 4;
        }
        std::vector<int> s{a[0] + b[0], a[1] + b[1]};
        if ((a[0] == 0 && a[1] == 0) || (b[0] == 0 && b[1] == 0) || (s[0] == 0 && s[1] == 0))
            continue;
        const Vec I{2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0};
        const double lhs = small_divisor(gm2, ModeIndex(s), I);
        const double rhs = small_divisor(gm2, ModeIndex(a), I) + small_divisor(gm2, ModeIndex(b), I);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
    }
}

TEST_CASE("find_resonance: root, absence, and bisection convergence") {
    const auto gm = linear_model(1);
    const auto f = cos_phi_function();
    const ModeIndex k1({1});

    ActionDomain box(Vec{-1.0}, Vec{1.0}, 33);
    const auto rp = find_resonance(gm, f, k1, box);
    REQUIRE(rp.has_value());
    CHECK(std::abs(rp->I_bar[0]) <= 1e-10);
    CHECK(rp->divisor_residual <= kTolRes);
    CHECK(rp->coeff_magnitude == doctest::Approx(0.5));

    ActionDomain away(Vec{0.5}, Vec{1.0}, 33);
    CHECK(!find_resonance(gm, f, k1, away).has_value());

    // Tightening the tolerance tightens the residual.
    const auto coarse = find_resonance(gm, f, k1, box, 1e-6);
    const auto fine = find_resonance(gm, f, k1, box, 1e-7);
    REQUIRE(coarse.has_value());
    REQUIRE(fine.has_value());
    CHECK(coarse->divisor_residual <= 1e-6);
    CHECK(fine->divisor_residual <= 1e-7);

    CHECK_THROWS_AS(find_resonance(gm, f, ModeIndex::zero(1), box), std::invalid_argument);
    CHECK_THROWS_AS(find_resonance(gm, f, ModeIndex({7}), box), std::invalid_argument);
}

TEST_CASE("find_resonance on the diagonal resonance in n=2") {
    const auto gm = linear_model(2);
    // f_k == 1 for the probed mode.
    PhaseSpaceFunction f(default_domain(2), 1, false);
    CoefficientFn one;
    one.value = [](std::span<const double>) { return Complex(1.0, 0.0); };
    one.sup_norm = 1.0;
    const ModeIndex k({1, -1});
    f.set_mode(k, one);

    ActionDomain box(Vec{-1.0, -1.0}, Vec{1.0, 1.0}, 33);
    const auto rp = find_resonance(gm, f, k, box);
    REQUIRE(rp.has_value());
    CHECK(rp->I_bar[0] == doctest::Approx(rp->I_bar[1]).epsilon(1e-9));
    CHECK(rp->coeff_magnitude == doctest::Approx(1.0));
    CHECK(rp->divisor_residual <= kTolRes);

    // Oracle: dense scan of the divisor along the returned point's grid line
    // never beats the bisected residual.
    double dense_min = 1e300;
    for (int i = 0; i <= 4000; ++i) {
        const double x = -1.0 + 2.0 * (i + 0.5) / 4001.0;
        dense_min = std::min(dense_min, std::abs(small_divisor(gm, k, Vec{x, rp->I_bar[1]})));
    }
    CHECK(rp->divisor_residual <= dense_min + 1e-12);
}

TEST_CASE("default spectrum: sup norms hold and gradients match FD") {
    const auto f = default_spectrum(1, 4);
    for (const ModeIndex& k : f.modes()) {
        const auto& fn = f.mode_fn(k);
        for (double x = -0.95; x <= 0.95; x += 0.05) {
            CHECK(std::abs(fn.value(vec1(x))) <= fn.sup_norm * (1.0 + 1e-12));
        }
        // Analytic gradient against central differences.
        const double h = 1e-6;
        const Complex fd = (fn.value(vec1(0.2 + h)) - fn.value(vec1(0.2 - h))) / (2.0 * h);
        CHECK(std::abs(fn.gradient(vec1(0.2))[0] - fd) <= 1e-8);
    }
}

TEST_CASE("finite-difference fallback gradient") {
    PhaseSpaceFunction f(default_domain(1), 2, false);
    CoefficientFn fn;
    fn.value = [](std::span<const double> I) {
        return Complex(std::sin(2.0 * I[0]), std::cos(I[0]));
    };
    fn.sup_norm = std::hypot(1.0, 1.0);
    f.set_mode(ModeIndex({1}), fn);

    const CVec grad = f.coeff_gradient(ModeIndex({1}), vec1(0.4));
    const Complex expected(2.0 * std::cos(0.8), -std::sin(0.4));
    CHECK(std::abs(grad[0] - expected) <= 1e-8);

    PhaseSpaceFunction strict(default_domain(1), 2, false, /*allow_fd=*/false);
    strict.set_mode(ModeIndex({1}), fn);
    CHECK_THROWS_AS(strict.coeff_gradient(ModeIndex({1}), vec1(0.4)), config_error);
}

TEST_CASE("lattice mode enumeration") {
    CHECK(lattice_modes(1, 8).size() == 17);
    CHECK(lattice_modes(2, 8).size() == 17 * 17);
    CHECK(lattice_modes(3, 4).size() == 9 * 9 * 9);
    CHECK(default_truncation(1) == 8);
    CHECK(default_truncation(2) == 8);
    CHECK(default_truncation(3) == 4);
}

TEST_SUITE_END();
