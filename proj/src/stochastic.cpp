#include "ergoreg/stochastic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ergoreg/parallel.hpp"
#include "ergoreg/rng.hpp"

namespace ergoreg {

namespace {

#if defined(__GNUC__) || defined(__clang__)
#define ERGOREG_HAVE_V4D 1
typedef double v4d __attribute__((vector_size(32)));
#endif

template <class Real>
inline Real splat(double x);
template <>
inline double splat<double>(double x) {
    return x;
}
#ifdef ERGOREG_HAVE_V4D
template <>
inline v4d splat<v4d>(double x) {
    return v4d{x, x, x, x};
}
#endif

// sin/cos of the per-step rotation angle by a Horner polynomial on theta^2;
// remainders < 1e-21 at |theta| = 0.5. Callers pre-check the angle range and
// fall back to libm lane-wise for rare large draws.
template <class Real>
inline void small_angle_sincos(const Real theta, Real& s, Real& c) {
    const Real t2 = theta * theta;
    c = splat<Real>(1.0) +
        t2 * (splat<Real>(-1.0 / 2) +
              t2 * (splat<Real>(1.0 / 24) +
                    t2 * (splat<Real>(-1.0 / 720) +
                          t2 * (splat<Real>(1.0 / 40320) +
                                t2 * (splat<Real>(-1.0 / 3628800) +
                                      t2 * (splat<Real>(1.0 / 479001600) -
                                            t2 * splat<Real>(1.0 / 87178291200)))))));
    s = theta *
        (splat<Real>(1.0) +
         t2 * (splat<Real>(-1.0 / 6) +
               t2 * (splat<Real>(1.0 / 120) +
                     t2 * (splat<Real>(-1.0 / 5040) +
                           t2 * (splat<Real>(1.0 / 362880) +
                                 t2 * (splat<Real>(-1.0 / 39916800) +
                                       t2 * splat<Real>(1.0 / 6227020800)))))));
}

// Mode data flattened to raw doubles; std::complex stays out of the path
// loop (its multiply routes through __muldc3, which dominates the step cost).
// Real-symmetric spectra keep one representative per +-k pair with doubled
// coefficients: Re sum = base + sum_reps (2a Re(wave) - 2b Im(wave)).
struct FlatModes {
    std::vector<int> exponents;  // mode-major, n entries per mode
    Vec coeff_re, coeff_im;      // doubled for paired representatives
    double base_re = 0.0;        // zero-mode contribution when paired
    bool paired = false;
    int n = 0;
    int max_abs = 0;  // max |k_j| across modes and dimensions
};

FlatModes flatten_modes(const FourierField& f, std::span<const double> I) {
    FlatModes fm;
    fm.n = f.domain().dim();

    const auto modes = f.modes();
    std::vector<Complex> coeffs(modes.size());
    double scale = 0.0;
    for (std::size_t s = 0; s < modes.size(); ++s) {
        coeffs[s] = f.coeff(modes[s], I);
        scale = std::max(scale, std::abs(coeffs[s]));
        for (int j = 0; j < fm.n; ++j) {
            fm.max_abs = std::max(fm.max_abs, std::abs(modes[s][j]));
        }
    }

    if (f.real_symmetric()) {
        bool ok = true;
        for (std::size_t s = 0; s < modes.size() && ok; ++s) {
            const ModeIndex neg = modes[s].negated();
            const auto it = std::lower_bound(modes.begin(), modes.end(), neg);
            if (it == modes.end() || !(*it == neg)) {
                ok = false;
                break;
            }
            const Complex cneg = coeffs[std::size_t(it - modes.begin())];
            ok = std::abs(cneg - std::conj(coeffs[s])) <= 1e-12 * (1.0 + scale);
        }
        if (ok) {
            fm.paired = true;
            for (std::size_t s = 0; s < modes.size(); ++s) {
                const ModeIndex neg = modes[s].negated();
                if (modes[s] == neg) {
                    fm.base_re += coeffs[s].real();
                } else if (neg < modes[s]) {
                    for (int j = 0; j < fm.n; ++j) fm.exponents.push_back(modes[s][j]);
                    fm.coeff_re.push_back(2.0 * coeffs[s].real());
                    fm.coeff_im.push_back(2.0 * coeffs[s].imag());
                }
            }
            return fm;
        }
    }

    for (std::size_t s = 0; s < modes.size(); ++s) {
        for (int j = 0; j < fm.n; ++j) fm.exponents.push_back(modes[s][j]);
        fm.coeff_re.push_back(coeffs[s].real());
        fm.coeff_im.push_back(coeffs[s].imag());
    }
    return fm;
}

// Re f(phi) = Re sum_k c_k prod_j z_j^{k_j} from per-dimension rotation
// states (rr, ri) and a scratch power table (pr, pi), all width-strided.
template <class Real>
inline Real field_value(const FlatModes& fm, const Real* rr, const Real* ri, Real* pr,
                        Real* pi) {
    if (fm.max_abs <= 1) {
        // Exponents are -1/0/1: read the rotations directly.
        Real acc = splat<Real>(fm.base_re);
        const std::size_t nmodes = fm.coeff_re.size();
        for (std::size_t s = 0; s < nmodes; ++s) {
            Real wr = splat<Real>(1.0), wi = splat<Real>(0.0);
            for (int j = 0; j < fm.n; ++j) {
                const int e = fm.exponents[s * std::size_t(fm.n) + std::size_t(j)];
                if (e == 0) continue;
                const Real ar = rr[j];
                const Real ai = e > 0 ? ri[j] : splat<Real>(0.0) - ri[j];
                const Real nr = wr * ar - wi * ai;
                wi = wr * ai + wi * ar;
                wr = nr;
            }
            acc = acc + splat<Real>(fm.coeff_re[s]) * wr - splat<Real>(fm.coeff_im[s]) * wi;
        }
        return acc;
    }
    const int width = fm.max_abs + 1;
    for (int j = 0; j < fm.n; ++j) {
        Real* prow = pr + std::size_t(j) * std::size_t(width);
        Real* irow = pi + std::size_t(j) * std::size_t(width);
        prow[0] = splat<Real>(1.0);
        irow[0] = splat<Real>(0.0);
        for (int m = 1; m < width; ++m) {
            prow[m] = prow[m - 1] * rr[j] - irow[m - 1] * ri[j];
            irow[m] = prow[m - 1] * ri[j] + irow[m - 1] * rr[j];
        }
    }
    Real acc = splat<Real>(fm.base_re);
    const std::size_t nmodes = fm.coeff_re.size();
    for (std::size_t s = 0; s < nmodes; ++s) {
        Real wr = splat<Real>(1.0), wi = splat<Real>(0.0);
        for (int j = 0; j < fm.n; ++j) {
            const int e = fm.exponents[s * std::size_t(fm.n) + std::size_t(j)];
            const std::size_t base = std::size_t(j) * std::size_t(width);
            const Real ar = pr[base + std::size_t(std::abs(e))];
            const Real ai = e >= 0 ? pi[base + std::size_t(e)]
                                   : splat<Real>(0.0) - pi[base + std::size_t(-e)];
            const Real nr = wr * ar - wi * ai;
            wi = wr * ai + wi * ar;
            wr = nr;
        }
        acc = acc + splat<Real>(fm.coeff_re[s]) * wr - splat<Real>(fm.coeff_im[s]) * wi;
    }
    return acc;
}

struct McJob {
    const FlatModes* fm = nullptr;
    Vec drift;        // g(I) dt per dimension
    Vec phi;          // initial angles
    double sigma_dt = 0.0;
    double step_decay = 0.0;
    double mu_dt = 0.0;
    long steps = 0;
};

// Runs L consecutive paths in lock-step lanes; the tail instantiation with
// L = 1 uses identical per-lane arithmetic.
template <class Real, int L>
void run_paths(const McJob& job, std::uint64_t seed, std::size_t first_path,
               double* out) {
    const FlatModes& fm = *job.fm;
    const int n = fm.n;
    const int width = fm.max_abs + 1;

    std::array<Xoshiro256, std::size_t(L)> rngs = [&]<std::size_t... Is>(
        std::index_sequence<Is...>) {
        return std::array<Xoshiro256, std::size_t(L)>{
            Xoshiro256(mix_seed(seed, first_path + Is))...};
    }(std::make_index_sequence<std::size_t(L)>{});

    std::vector<Real> rot_re(static_cast<std::size_t>(n));
    std::vector<Real> rot_im(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        rot_re[std::size_t(j)] = splat<Real>(std::cos(job.phi[std::size_t(j)]));
        rot_im[std::size_t(j)] = splat<Real>(std::sin(job.phi[std::size_t(j)]));
    }
    std::vector<Real> pow_re(std::size_t(n) * std::size_t(width));
    std::vector<Real> pow_im(pow_re.size());

    double decay = 1.0;
    Real acc = splat<Real>(0.5) *
               field_value(fm, rot_re.data(), rot_im.data(), pow_re.data(), pow_im.data());
    double theta_sc[L];
    for (long step = 1; step <= job.steps; ++step) {
        for (int j = 0; j < n; ++j) {
            bool big = false;
            for (int l = 0; l < L; ++l) {
                theta_sc[l] = job.drift[std::size_t(j)] + job.sigma_dt * rngs[std::size_t(l)].next_normal();
                big = big || std::abs(theta_sc[l]) > 0.5;
            }
            Real theta;
            if constexpr (L == 1) {
                theta = theta_sc[0];
            } else {
                for (int l = 0; l < L; ++l) theta[l] = theta_sc[l];
            }
            Real s, c;
            if (!big) {
                small_angle_sincos(theta, s, c);
            } else {
                if constexpr (L == 1) {
                    s = std::sin(theta_sc[0]);
                    c = std::cos(theta_sc[0]);
                } else {
                    for (int l = 0; l < L; ++l) {
                        s[l] = std::sin(theta_sc[l]);
                        c[l] = std::cos(theta_sc[l]);
                    }
                }
            }
            const Real nr = rot_re[std::size_t(j)] * c - rot_im[std::size_t(j)] * s;
            rot_im[std::size_t(j)] = rot_re[std::size_t(j)] * s + rot_im[std::size_t(j)] * c;
            rot_re[std::size_t(j)] = nr;
        }
        if ((step & 0xffff) == 0) {
            // Renormalize the unit rotations against multiplicative drift.
            for (int j = 0; j < n; ++j) {
                const Real m2 = rot_re[std::size_t(j)] * rot_re[std::size_t(j)] +
                                rot_im[std::size_t(j)] * rot_im[std::size_t(j)];
                if constexpr (L == 1) {
                    const double inv = 1.0 / std::sqrt(m2);
                    rot_re[std::size_t(j)] *= inv;
                    rot_im[std::size_t(j)] *= inv;
                } else {
                    Real inv;
                    for (int l = 0; l < L; ++l) inv[l] = 1.0 / std::sqrt(m2[l]);
                    rot_re[std::size_t(j)] *= inv;
                    rot_im[std::size_t(j)] *= inv;
                }
            }
        }
        decay *= job.step_decay;
        acc = acc + splat<Real>(decay) *
                        field_value(fm, rot_re.data(), rot_im.data(), pow_re.data(),
                                    pow_im.data());
    }
    // Trapezoid endpoint: the loop added the final sample at full weight.
    acc = acc - splat<Real>(0.5 * decay) *
                    field_value(fm, rot_re.data(), rot_im.data(), pow_re.data(),
                                pow_im.data());
    for (int l = 0; l < L; ++l) {
        if constexpr (L == 1) {
            out[l] = job.mu_dt * acc;
        } else {
            out[l] = job.mu_dt * acc[l];
        }
    }
}

}  // namespace

NoisePath NoisePath::make(std::uint64_t seed, Vec times, int n) {
    if (times.empty() || times.front() != 0.0) {
        throw std::invalid_argument("NoisePath: times must start at 0");
    }
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        if (!(times[i] < times[i + 1])) {
            throw std::invalid_argument("NoisePath: times must be strictly increasing");
        }
    }
    NoisePath path;
    path.seed = seed;
    path.times = std::move(times);
    path.w.assign(path.times.size(), Vec(static_cast<std::size_t>(n), 0.0));
    if (seed != 0) {  // seed 0 keeps the path identically zero
        Xoshiro256 rng(seed);
        for (std::size_t i = 1; i < path.times.size(); ++i) {
            const double sd = std::sqrt(path.times[i] - path.times[i - 1]);
            for (int j = 0; j < n; ++j) {
                path.w[i][std::size_t(j)] =
                    path.w[i - 1][std::size_t(j)] + sd * rng.next_normal();
            }
        }
    }
    return path;
}

Vec sample_flow(const FrequencyModel& gm, std::span<const double> I,
                std::span<const double> phi, double nu, const NoisePath& path, double t) {
    if (nu < 0.0) throw std::invalid_argument("sample_flow: requires nu >= 0");
    const auto it = std::lower_bound(path.times.begin(), path.times.end(), t);
    if (it == path.times.end() || *it != t) {
        throw interpolation_error("sample_flow: t is not a sampled path time");
    }
    const std::size_t idx = std::size_t(it - path.times.begin());
    const Vec gI = gm.g(I);
    const double sigma = std::sqrt(2.0 * nu);
    Vec angle(phi.begin(), phi.end());
    for (std::size_t j = 0; j < angle.size(); ++j) {
        angle[j] += gI[j] * t + sigma * path.w[idx][j];
    }
    return angle;
}

McEstimate mc_estimate(const FourierField& f, const FrequencyModel& gm,
                       std::span<const double> I, std::span<const double> phi, double mu,
                       double nu, int paths, double dt, std::uint64_t seed,
                       unsigned threads) {
    if (!(mu > 0.0)) throw std::invalid_argument("mc_estimate: requires mu > 0");
    if (!(nu > 0.0)) throw std::invalid_argument("mc_estimate: requires nu > 0");
    if (paths < 100) throw std::invalid_argument("mc_estimate: requires paths >= 100");
    if (!(dt > 0.0)) throw std::invalid_argument("mc_estimate: requires dt > 0");

    const int n = f.domain().dim();
    const FlatModes fm = flatten_modes(f, I);
    const double damping_scale = mu + nu * double(fm.max_abs) * double(fm.max_abs) * n;
    if (dt >= 1.0 / damping_scale) {
        throw step_size_error(
            "mc_estimate: dt under-resolves the damping scale 1/(mu + nu K^2 n)");
    }

    const double horizon = 20.0 / mu;
    const long steps = long(std::ceil(horizon / dt - 1e-9));
    const double end_time = double(steps) * dt;
    const Vec gI = gm.g(I);

    McJob job;
    job.fm = &fm;
    job.drift.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) job.drift[std::size_t(j)] = gI[std::size_t(j)] * dt;
    job.phi.assign(phi.begin(), phi.end());
    job.sigma_dt = std::sqrt(2.0 * nu) * std::sqrt(dt);
    job.step_decay = std::exp(-mu * dt);
    job.mu_dt = mu * dt;
    job.steps = steps;

    Vec values(std::size_t(paths), 0.0);
#ifdef ERGOREG_HAVE_V4D
    const std::size_t blocks = std::size_t(paths) / 4;
    const std::size_t tail_start = blocks * 4;
#else
    const std::size_t blocks = 0;
    const std::size_t tail_start = 0;
#endif
    const unsigned workers = resolve_threads(threads);
#ifdef ERGOREG_HAVE_V4D
    parallel_for(blocks, workers, [&](std::size_t b) {
        run_paths<v4d, 4>(job, seed, b * 4, values.data() + b * 4);
    });
#endif
    parallel_for(std::size_t(paths) - tail_start, workers, [&](std::size_t i) {
        run_paths<double, 1>(job, seed, tail_start + i, values.data() + tail_start + i);
    });

    McEstimate est;
    est.paths = paths;
    est.dt = dt;
    est.horizon = end_time;
    est.mean = pairwise_sum(values) / paths;
    Vec sq(static_cast<std::size_t>(paths));
    for (std::size_t p = 0; p < sq.size(); ++p) {
        const double d = values[p] - est.mean;
        sq[p] = d * d;
    }
    const double sample_var = paths > 1 ? pairwise_sum(sq) / (paths - 1) : 0.0;
    est.std_error = std::sqrt(sample_var / paths);
    est.tail_bound = std::exp(-mu * end_time) * f.sup_hint_total();
    return est;
}

CharacteristicCheck characteristic_check(double nu, const ModeIndex& k, double t,
                                         int paths, std::uint64_t seed,
                                         unsigned threads) {
    if (!(nu > 0.0)) throw std::invalid_argument("characteristic_check: requires nu > 0");
    if (t < 0.0) throw std::invalid_argument("characteristic_check: requires t >= 0");
    if (paths < 1000) {
        throw std::invalid_argument("characteristic_check: requires paths >= 1000");
    }

    const int n = k.dim();
    const double sigma = std::sqrt(2.0 * nu);
    const double sqrt_t = std::sqrt(t);
    Vec re(static_cast<std::size_t>(paths)), im(static_cast<std::size_t>(paths));
    parallel_for(std::size_t(paths), resolve_threads(threads), [&](std::size_t p) {
        Xoshiro256 rng(mix_seed(seed, p));
        double kw = 0.0;
        for (int j = 0; j < n; ++j) {
            kw += double(k[j]) * (sqrt_t * rng.next_normal());
        }
        re[p] = std::cos(sigma * kw);
        im[p] = std::sin(sigma * kw);
    });

    CharacteristicCheck chk;
    const double mean_re = pairwise_sum(re) / paths;
    const double mean_im = pairwise_sum(im) / paths;
    chk.empirical = Complex(mean_re, mean_im);
    chk.analytic = std::exp(-nu * k.norm2_squared() * t);

    Vec sq(static_cast<std::size_t>(paths));
    for (std::size_t p = 0; p < sq.size(); ++p) {
        const double dr = re[p] - mean_re;
        const double di = im[p] - mean_im;
        sq[p] = dr * dr + di * di;
    }
    const double var = paths > 1 ? pairwise_sum(sq) / (paths - 1) : 0.0;
    chk.std_error = std::sqrt(var / paths);
    const double err = std::abs(chk.empirical - chk.analytic);
    chk.z_score = chk.std_error > 0.0 ? err / chk.std_error : (err == 0.0 ? 0.0 : 1e300);
    return chk;
}

}  // namespace ergoreg
