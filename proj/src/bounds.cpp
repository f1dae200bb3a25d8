#include "ergoreg/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ergoreg/rng.hpp"

namespace ergoreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

double floored_log(double arg, bool& floored) {
    if (arg <= 1.0) {
        floored = true;
        return 0.0;
    }
    return std::log(arg);
}

Vec grad_sup_estimate(const PhaseSpaceFunction& f, const ModeIndex& k,
                      int nodes_per_dim) {
    const ActionDomain& box = f.domain();
    const int n = box.dim();
    Vec sups(static_cast<std::size_t>(n), 0.0);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
        Vec I(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            I[std::size_t(j)] = box.lower[std::size_t(j)] +
                                (idx[std::size_t(j)] + 0.5) *
                                    (box.upper[std::size_t(j)] - box.lower[std::size_t(j)]) /
                                    nodes_per_dim;
        }
        const CVec g = f.coeff_gradient(k, I);
        for (int j = 0; j < n; ++j) {
            sups[std::size_t(j)] = std::max(sups[std::size_t(j)], std::abs(g[std::size_t(j)]));
        }
        int j = 0;
        while (j < n && ++idx[std::size_t(j)] == nodes_per_dim) idx[std::size_t(j++)] = 0;
        if (j == n) break;
    }
    return sups;
}

}  // namespace

BoundInputs BoundInputs::from_field(const PhaseSpaceFunction& f, const FrequencyModel& gm) {
    BoundInputs bi;
    bi.gm = gm;
    bi.n = f.domain().dim();
    for (const auto& [k, fn] : f.mode_map()) {
        ModeData md;
        md.sup = fn.sup_norm;
        if (fn.grad_sup_norms) {
            md.grad_sups = *fn.grad_sup_norms;
        } else {
            md.grad_sups = grad_sup_estimate(f, k, 33);
        }
        bi.mode_data.emplace(k, std::move(md));
    }
    return bi;
}

BoundValue bound_finite_time(const BoundInputs& bi, double T, bool statement_form) {
    if (!(T > 0.0)) throw std::invalid_argument("bound_finite_time: requires T > 0");
    const double prefactor =
        4.0 * std::pow(bi.gm.C, bi.n - 1) / (bi.gm.m * T);
    BoundValue out;
    Vec terms;
    for (const auto& [k, md] : bi.mode_data) {
        if (k.is_zero()) continue;
        const double bracket = 3.0 + floored_log(k.norm2() * T * bi.gm.C, out.log_floored);
        const double mode_scale = statement_form ? 1.0 : 1.0 / k.norm2();
        terms.push_back(prefactor * md.sup * mode_scale * bracket);
    }
    out.value = pairwise_sum(terms);
    return out;
}

BoundValue bound_stochastic(const BoundInputs& bi, double mu, double nu) {
    if (!(mu > 0.0)) throw std::invalid_argument("bound_stochastic: requires mu > 0");
    if (nu < 0.0) throw std::invalid_argument("bound_stochastic: requires nu >= 0");
    const double prefactor = 2.0 * std::pow(bi.gm.C, bi.n - 1) / bi.gm.m;
    BoundValue out;
    Vec terms;
    for (const auto& [k, md] : bi.mode_data) {
        if (k.is_zero()) continue;
        const double damping = mu + nu * k.norm2_squared();
        const double bracket =
            1.0 + floored_log(k.norm2() * bi.gm.C / damping, out.log_floored);
        terms.push_back(prefactor * md.sup * (mu / k.norm2()) * bracket);
    }
    out.value = pairwise_sum(terms);
    return out;
}

BoundValue bound_damped(const BoundInputs& bi, double mu) {
    return bound_stochastic(bi, mu, 0.0);
}

BoundValue bound_w1(const BoundInputs& bi, double mu, double nu) {
    if (!(mu > 0.0)) throw std::invalid_argument("bound_w1: requires mu > 0");
    if (!(nu > 0.0)) throw std::invalid_argument("bound_w1: requires nu > 0");
    const double prefactor = 2.0 * std::pow(bi.gm.C, bi.n - 1) / bi.gm.m;
    BoundValue out;
    Vec terms;
    for (const auto& [k, md] : bi.mode_data) {
        if (k.is_zero()) continue;
        if (md.grad_sups.empty()) {
            throw config_error("bound_w1: missing gradient sups for mode " + k.str());
        }
        const double damping = mu + nu * k.norm2_squared();
        const double bracket =
            1.0 + floored_log(k.norm2() * bi.gm.C / damping, out.log_floored);
        double grad_total = 0.0;
        for (double g : md.grad_sups) grad_total += g;
        const double log_part = mu * bracket * ((1.0 + bi.n) * md.sup + grad_total);
        const double pi_part =
            0.5 * double(bi.n) * double(bi.n) * kPi * bi.gm.D * (mu / damping) * md.sup;
        terms.push_back(prefactor * (log_part + pi_part));
    }
    out.value = pairwise_sum(terms);
    return out;
}

std::vector<Vec> unit_sphere_directions(int n, int count) {
    std::vector<Vec> dirs;
    // Coordinate directions first: exact minimizers for diagonal Jacobians.
    for (int j = 0; j < n; ++j) {
        for (double sign : {1.0, -1.0}) {
            Vec e(static_cast<std::size_t>(n), 0.0);
            e[std::size_t(j)] = sign;
            dirs.push_back(std::move(e));
        }
    }
    if (n == 1) return dirs;

    const double golden = 0.6180339887498949;
    if (n == 2) {
        for (int i = 0; i < count; ++i) {
            const double theta = 2.0 * kPi * std::fmod(double(i) * golden, 1.0);
            dirs.push_back(Vec{std::cos(theta), std::sin(theta)});
        }
    } else if (n == 3) {
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double theta = 2.0 * kPi * std::fmod(double(i) * golden, 1.0);
            dirs.push_back(Vec{r * std::cos(theta), r * std::sin(theta), z});
        }
    } else {
        Xoshiro256 rng(0x5f3759df);
        for (int i = 0; i < count; ++i) {
            Vec u(static_cast<std::size_t>(n));
            double norm = 0.0;
            for (double& v : u) {
                v = rng.next_normal();
                norm += v * v;
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            for (double& v : u) v /= norm;
            dirs.push_back(std::move(u));
        }
    }
    return dirs;
}

LowerBoundConstants estimate_lower_constants(const FrequencyModel& gm,
                                             const PhaseSpaceFunction& f,
                                             const ResonancePoint& rp, double delta,
                                             int ball_nodes_per_dim,
                                             int sphere_samples_per_dim) {
    if (!(delta > 0.0)) {
        throw std::invalid_argument("estimate_lower_constants: requires delta > 0");
    }
    const ActionDomain& box = f.domain();
    const int n = box.dim();
    for (int j = 0; j < n; ++j) {
        if (!(box.lower[std::size_t(j)] < rp.I_bar[std::size_t(j)] - delta &&
              rp.I_bar[std::size_t(j)] + delta < box.upper[std::size_t(j)])) {
            throw std::invalid_argument(
                "estimate_lower_constants: ball of radius delta leaves the domain");
        }
    }

    const auto dirs = unit_sphere_directions(n, sphere_samples_per_dim * n);

    double grad_total = 0.0;
    {
        const auto& fn = f.mode_fn(rp.k);
        const Vec gs = fn.grad_sup_norms ? *fn.grad_sup_norms : grad_sup_estimate(f, rp.k, 17);
        for (double g : gs) grad_total += g;
    }

    LowerBoundConstants lc;
    lc.k = rp.k;
    lc.I_bar = rp.I_bar;
    lc.M = gm.M;

    double radius = delta;
    for (int pass = 0; pass < 16; ++pass) {
        // Ball grid: midpoint nodes of the enclosing box, kept when inside.
        double lambda1 = std::numeric_limits<double>::infinity();
        double lambda2 = std::numeric_limits<double>::infinity();
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        for (;;) {
            Vec I(static_cast<std::size_t>(n));
            double dist2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double x = rp.I_bar[std::size_t(j)] - radius +
                                 (idx[std::size_t(j)] + 0.5) * (2.0 * radius) /
                                     ball_nodes_per_dim;
                I[std::size_t(j)] = x;
                dist2 += (x - rp.I_bar[std::size_t(j)]) * (x - rp.I_bar[std::size_t(j)]);
            }
            if (dist2 <= radius * radius) {
                lambda1 = std::min(lambda1, std::abs(f.coeff(rp.k, I)));
                const std::vector<double> jac = gm.jacobian(I);
                for (const Vec& u : dirs) {
                    double norm1 = 0.0;
                    for (int j = 0; j < n; ++j) {
                        double entry = 0.0;
                        for (int i = 0; i < n; ++i) {
                            entry += jac[std::size_t(i) * n + j] * u[std::size_t(i)];
                        }
                        norm1 += std::abs(entry);
                    }
                    lambda2 = std::min(lambda2, norm1);
                }
            }
            int j = 0;
            while (j < n && ++idx[std::size_t(j)] == ball_nodes_per_dim) idx[std::size_t(j++)] = 0;
            if (j == n) break;
        }
        // Include the witness itself.
        lambda1 = std::min(lambda1, rp.coeff_magnitude);

        if (!(lambda1 > 0.0)) {
            throw not_a_witness_error("estimate_lower_constants: |f_k| vanishes on the ball at " +
                                      rp.k.str());
        }

        lc.delta = radius;
        lc.lambda1 = lambda1;
        lc.lambda2 = lambda2;
        if (grad_total > 0.0) {
            const double cap = lambda1 * lambda2 / (2.0 * gm.lambda * grad_total);
            if (radius > cap) {
                radius = cap;
                continue;  // shrink and re-certify on the smaller ball
            }
        }
        break;
    }

    // Inscribed-ball radius of the image g(B_delta): for a homeomorphism the
    // image covers the ball of radius min over boundary points of
    // |g(boundary) - g(center)|; the largest axis box inside has half-width
    // r / sqrt(n).
    const Vec g_center = gm.g(lc.I_bar);
    double r_img = std::numeric_limits<double>::infinity();
    for (const Vec& u : dirs) {
        Vec I = lc.I_bar;
        for (int j = 0; j < n; ++j) I[std::size_t(j)] += lc.delta * u[std::size_t(j)];
        const Vec gI = gm.g(I);
        double dist = 0.0;
        for (int j = 0; j < n; ++j) {
            dist += (gI[std::size_t(j)] - g_center[std::size_t(j)]) *
                    (gI[std::size_t(j)] - g_center[std::size_t(j)]);
        }
        r_img = std::min(r_img, std::sqrt(dist));
    }
    lc.delta_tilde = r_img / std::sqrt(double(n));
    return lc;
}

double lower_bound_w1_finite_time(const LowerBoundConstants& lc, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("lower_bound_w1_finite_time: requires T > 0");
    const int n = lc.k.dim();
    return lc.lambda1 * lc.lambda2 / lc.M * std::pow(lc.delta_tilde, n - 1) *
           std::asinh(lc.k.norm2() * T * lc.delta_tilde);
}

double lower_bound_w1_damped(const LowerBoundConstants& lc, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("lower_bound_w1_damped: requires mu > 0");
    const int n = lc.k.dim();
    return lc.lambda1 * lc.lambda2 / lc.M * std::pow(lc.delta_tilde, n - 1) *
           std::atan(lc.k.norm2() * lc.delta_tilde / mu);
}

namespace {

double abs_sinc_integral(double a, double b, long intervals) {
    // Composite Simpson; |sin y / y| is smooth strictly inside [a, b] when
    // the split points are multiples of pi.
    if (intervals % 2) ++intervals;
    const double h = (b - a) / double(intervals);
    auto fn = [](double y) { return std::abs(sinc(y)); };
    double acc = fn(a) + fn(b);
    for (long i = 1; i < intervals; ++i) {
        acc += (i % 2 ? 4.0 : 2.0) * fn(a + h * double(i));
    }
    return acc * h / 3.0;
}

}  // namespace

InequalityReport inequality_suite(long grid_points, bool throw_on_failure) {
    InequalityReport rep;

    // (a) 2 + y^2 - 2 y sin y - 2 cos y >= y^4 / (4 (1 + y^2)); the left side
    // is evaluated as y^2 - 2 y sin y + 4 sin^2(y/2), which is the same
    // expression with the 2 - 2 cos y pair rewritten stably.
    {
        const long N = std::max<long>(grid_points, 3) | 1;  // odd: includes y = 0
        rep.quartic_ok = true;
        rep.quartic_min_margin = std::numeric_limits<double>::infinity();
        for (long i = 0; i < N; ++i) {
            const double y = -1000.0 + 2000.0 * double(i) / double(N - 1);
            const double sh = std::sin(0.5 * y);
            const double lhs = y * y - 2.0 * y * std::sin(y) + 4.0 * sh * sh;
            const double rhs = y * y * y * y / (4.0 * (1.0 + y * y));
            const double margin = lhs - rhs;
            if (margin < rep.quartic_min_margin) {
                rep.quartic_min_margin = margin;
                rep.quartic_worst_y = y;
            }
            if (margin < -1e-12 * std::max(1.0, rhs)) rep.quartic_ok = false;
        }
    }

    // (b) |e^{i t} - 1| = sqrt(2 (1 - cos t)). The grid skips the band
    // |t| < 1e-3 where 1 - cos t loses half its digits to rounding and the
    // comparison would measure the formula, not the identity; t = 0 is
    // checked exactly.
    {
        const long half = std::max<long>(grid_points / 2, 2);
        rep.unit_circle_max_err = 0.0;
        for (long i = 0; i <= half; ++i) {
            const double t = 1e-3 + (2.0 * kPi - 1e-3) * double(i) / double(half);
            for (double theta : {t, -t}) {
                const double lhs = std::hypot(std::cos(theta) - 1.0, std::sin(theta));
                const double rhs = std::sqrt(2.0 * (1.0 - std::cos(theta)));
                rep.unit_circle_max_err =
                    std::max(rep.unit_circle_max_err, std::abs(lhs - rhs));
            }
        }
        const double at_zero = std::hypot(std::cos(0.0) - 1.0, std::sin(0.0));
        rep.unit_circle_max_err = std::max(rep.unit_circle_max_err, std::abs(at_zero));
        rep.unit_circle_ok = rep.unit_circle_max_err <= 1e-12;
    }

    // (c) l0 = int_0^{2 pi} |sin y / y| dy <= 3, two quadrature levels.
    {
        const double fine =
            abs_sinc_integral(0.0, kPi, 20000) + abs_sinc_integral(kPi, 2.0 * kPi, 20000);
        const double coarse =
            abs_sinc_integral(0.0, kPi, 10000) + abs_sinc_integral(kPi, 2.0 * kPi, 10000);
        rep.l0 = fine;
        rep.l0_estimate = std::abs(fine - coarse) + 1e-12;
        rep.l0_ok = rep.l0_estimate <= 1e-6 && rep.l0 + rep.l0_estimate <= 3.0;
    }

    // (d) l1 = arcsinh 1 <= 1.
    rep.l1 = std::asinh(1.0);
    rep.l1_ok = rep.l1 <= 1.0;

    rep.all_ok = rep.quartic_ok && rep.unit_circle_ok && rep.l0_ok && rep.l1_ok;
    if (!rep.all_ok && throw_on_failure) {
        std::ostringstream os;
        os << "inequality_suite: failure:";
        if (!rep.quartic_ok) os << " quartic bound violated at y=" << rep.quartic_worst_y;
        if (!rep.unit_circle_ok) os << " unit-circle identity err=" << rep.unit_circle_max_err;
        if (!rep.l0_ok) os << " l0=" << rep.l0;
        if (!rep.l1_ok) os << " l1=" << rep.l1;
        throw inequality_failure(os.str());
    }
    return rep;
}

}  // namespace ergoreg
