#include "ergoreg/fourier_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ergoreg/rng.hpp"

namespace ergoreg {

namespace {

double dot(std::span<const int> k, std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) acc += double(k[j]) * x[j];
    return acc;
}

// Determinant by Gaussian elimination with partial pivoting; n is small.
double det_rowmajor(std::vector<double> a, int n) {
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a[std::size_t(r) * n + col]) >
                std::abs(a[std::size_t(pivot) * n + col])) {
                pivot = r;
            }
        }
        if (a[std::size_t(pivot) * n + col] == 0.0) return 0.0;
        if (pivot != col) {
            for (int c = 0; c < n; ++c)
                std::swap(a[std::size_t(pivot) * n + c], a[std::size_t(col) * n + c]);
            det = -det;
        }
        const double d = a[std::size_t(col) * n + col];
        det *= d;
        for (int r = col + 1; r < n; ++r) {
            const double factor = a[std::size_t(r) * n + col] / d;
            for (int c = col; c < n; ++c)
                a[std::size_t(r) * n + c] -= factor * a[std::size_t(col) * n + c];
        }
    }
    return det;
}

void enumerate_lattice(int n, int K, std::vector<int>& current,
                       std::vector<ModeIndex>& out) {
    if (int(current.size()) == n) {
        out.emplace_back(current);
        return;
    }
    for (int v = -K; v <= K; ++v) {
        current.push_back(v);
        enumerate_lattice(n, K, current, out);
        current.pop_back();
    }
}

}  // namespace

// ---- ModeIndex -----------------------------------------------------------

ModeIndex::ModeIndex(std::vector<int> k) : k_(std::move(k)) {
    for (int v : k_) {
        norm1_ += std::abs(v);
        norm2sq_ += v * v;
    }
    norm2_ = std::sqrt(double(norm2sq_));
}

ModeIndex ModeIndex::zero(int n) { return ModeIndex(std::vector<int>(std::size_t(n), 0)); }

ModeIndex ModeIndex::negated() const {
    std::vector<int> neg(k_.size());
    for (std::size_t j = 0; j < k_.size(); ++j) neg[j] = -k_[j];
    return ModeIndex(std::move(neg));
}

std::string ModeIndex::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < k_.size(); ++j) {
        if (j) os << ',';
        os << k_[j];
    }
    os << ')';
    return os.str();
}

std::vector<ModeIndex> lattice_modes(int n, int K) {
    std::vector<ModeIndex> out;
    std::vector<int> current;
    enumerate_lattice(n, K, current, out);
    std::sort(out.begin(), out.end());
    return out;
}

// ---- ActionDomain ----------------------------------------------------------

ActionDomain::ActionDomain(Vec lo, Vec up, int nodes_per_dim)
    : lower(std::move(lo)), upper(std::move(up)), quadrature_nodes_per_dim(nodes_per_dim) {
    if (lower.empty() || lower.size() != upper.size()) {
        throw std::invalid_argument("ActionDomain: lower/upper must be nonempty and equal-sized");
    }
    for (std::size_t j = 0; j < lower.size(); ++j) {
        if (!(lower[j] < upper[j])) {
            throw std::invalid_argument("ActionDomain: requires lower_j < upper_j");
        }
    }
    if (nodes_per_dim <= 0) {
        throw std::invalid_argument("ActionDomain: nodes_per_dim must be positive");
    }
}

double ActionDomain::volume() const {
    double v = 1.0;
    for (std::size_t j = 0; j < lower.size(); ++j) v *= upper[j] - lower[j];
    return v;
}

double ActionDomain::diameter() const {
    double s = 0.0;
    for (std::size_t j = 0; j < lower.size(); ++j) {
        const double e = upper[j] - lower[j];
        s += e * e;
    }
    return std::sqrt(s);
}

double ActionDomain::max_extent() const {
    double e = 0.0;
    for (std::size_t j = 0; j < lower.size(); ++j) e = std::max(e, upper[j] - lower[j]);
    return e;
}

bool ActionDomain::contains(std::span<const double> I) const {
    if (I.size() != lower.size()) return false;
    for (std::size_t j = 0; j < lower.size(); ++j) {
        if (!(lower[j] < I[j] && I[j] < upper[j])) return false;
    }
    return true;
}

Vec ActionDomain::clamp_interior(Vec I, double margin_rel) const {
    for (std::size_t j = 0; j < lower.size(); ++j) {
        const double margin = margin_rel * (upper[j] - lower[j]);
        I[j] = std::clamp(I[j], lower[j] + margin, upper[j] - margin);
    }
    return I;
}

// ---- FrequencyModel --------------------------------------------------------

Vec FrequencyModel::divisor_gradient(std::span<const double> I, const ModeIndex& k) const {
    const std::vector<double> jac = jacobian(I);
    Vec out(std::size_t(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out[std::size_t(j)] += jac[std::size_t(i) * n + j] * double(k[i]);
        }
    }
    return out;
}

FrequencyModelCheck verify_frequency_model(const FrequencyModel& gm,
                                           const ActionDomain& domain,
                                           int nodes_per_dim, double tol) {
    FrequencyModelCheck rep;
    rep.min_det = std::numeric_limits<double>::infinity();

    const int n = domain.dim();
    std::vector<int> idx(std::size_t(n), 0);
    std::vector<Vec> nodes;
    for (;;) {
        Vec I(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            I[std::size_t(j)] = domain.lower[std::size_t(j)] +
                                (idx[std::size_t(j)] + 0.5) *
                                    (domain.upper[std::size_t(j)] - domain.lower[std::size_t(j)]) /
                                    nodes_per_dim;
        }
        nodes.push_back(std::move(I));
        int j = 0;
        while (j < n && ++idx[std::size_t(j)] == nodes_per_dim) idx[std::size_t(j++)] = 0;
        if (j == n) break;
    }

    for (const Vec& I : nodes) {
        const Vec gI = gm.g(I);
        double norm = 0.0;
        for (double v : gI) norm += v * v;
        rep.worst_g_norm = std::max(rep.worst_g_norm, std::sqrt(norm));

        const std::vector<double> jac = gm.jacobian(I);
        for (double v : jac) rep.worst_partial = std::max(rep.worst_partial, std::abs(v));
        const double d = std::abs(det_rowmajor(jac, n));
        rep.min_det = std::min(rep.min_det, d);
        rep.max_det = std::max(rep.max_det, d);
    }
    // Lipschitz ratio on consecutive node pairs.
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const Vec ga = gm.g(nodes[i]);
        const Vec gb = gm.g(nodes[i + 1]);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < n; ++j) {
            const double dg = ga[std::size_t(j)] - gb[std::size_t(j)];
            const double dI = nodes[i][std::size_t(j)] - nodes[i + 1][std::size_t(j)];
            num += dg * dg;
            den += dI * dI;
        }
        if (den > 0.0) {
            rep.worst_lipschitz_ratio =
                std::max(rep.worst_lipschitz_ratio, std::sqrt(num / den));
        }
    }

    const double slack = 1.0 + tol;
    rep.ok = rep.worst_g_norm <= gm.C * slack && rep.worst_partial <= gm.D * slack &&
             rep.min_det >= gm.m / slack && rep.max_det <= gm.M * slack &&
             rep.worst_lipschitz_ratio <= gm.lambda * slack;
    return rep;
}

double classification_tol(const FrequencyModel& gm, const ModeIndex& k) {
    return 1e-9 * k.norm2() * gm.C;
}

// ---- FourierField -----------------------------------------------------------

Complex FourierField::evaluate_raw(std::span<const double> I,
                                   std::span<const double> phi) const {
    Complex acc{0.0, 0.0};
    for (const ModeIndex& k : modes()) {
        const double angle = dot(k.components(), phi);
        acc += coeff(k, I) * std::polar(1.0, angle);
    }
    return acc;
}

Complex FourierField::evaluate(std::span<const double> I,
                               std::span<const double> phi) const {
    if (!domain().contains(I)) {
        throw std::domain_error("evaluate: action point outside the open domain A");
    }
    const Complex raw = evaluate_raw(I, phi);
    if (real_symmetric()) return Complex(raw.real(), 0.0);
    return raw;
}

double FourierField::sup_hint_total() const {
    double acc = 0.0;
    for (const ModeIndex& k : modes()) acc += coeff_sup_hint(k);
    return acc;
}

bool FourierField::has_mode(const ModeIndex& k) const {
    const auto ms = modes();
    return std::binary_search(ms.begin(), ms.end(), k);
}

// ---- PhaseSpaceFunction -------------------------------------------------------

PhaseSpaceFunction::PhaseSpaceFunction(ActionDomain domain, int truncation_radius,
                                       bool real_flag, bool allow_finite_differences)
    : domain_(std::move(domain)),
      truncation_radius_(truncation_radius),
      real_flag_(real_flag),
      allow_fd_(allow_finite_differences) {
    if (truncation_radius <= 0) {
        throw std::invalid_argument("PhaseSpaceFunction: truncation radius must be positive");
    }
}

void PhaseSpaceFunction::set_mode(const ModeIndex& k, CoefficientFn fn) {
    if (k.dim() != domain_.dim()) {
        throw std::invalid_argument("set_mode: mode dimension mismatch");
    }
    for (int j = 0; j < k.dim(); ++j) {
        if (std::abs(k[j]) > truncation_radius_) {
            throw std::invalid_argument("set_mode: mode exceeds truncation radius");
        }
    }
    if (!fn.value) throw std::invalid_argument("set_mode: coefficient has no value function");
    const auto [it, inserted] = modes_.insert_or_assign(k, std::move(fn));
    (void)it;
    if (inserted) {
        mode_list_.insert(std::upper_bound(mode_list_.begin(), mode_list_.end(), k), k);
    }
}

const CoefficientFn& PhaseSpaceFunction::mode_fn(const ModeIndex& k) const {
    const auto it = modes_.find(k);
    if (it == modes_.end()) {
        throw std::invalid_argument("mode_fn: mode " + k.str() + " not stored");
    }
    return it->second;
}

Complex PhaseSpaceFunction::coeff(const ModeIndex& k, std::span<const double> I) const {
    return mode_fn(k).value(I);
}

double PhaseSpaceFunction::fd_step() const { return 1e-5 * domain_.diameter(); }

CVec PhaseSpaceFunction::coeff_gradient(const ModeIndex& k,
                                        std::span<const double> I) const {
    const CoefficientFn& fn = mode_fn(k);
    if (fn.gradient) return fn.gradient(I);
    if (!allow_fd_) {
        throw config_error("coeff_gradient: no analytic gradient for mode " + k.str() +
                           " and finite differences are disabled");
    }
    const int n = domain_.dim();
    const double h = fd_step();
    CVec grad(static_cast<std::size_t>(n));
    Vec probe(I.begin(), I.end());
    for (int j = 0; j < n; ++j) {
        const double margin = 1e-12 * (domain_.upper[std::size_t(j)] - domain_.lower[std::size_t(j)]);
        const double hi = std::min(I[std::size_t(j)] + h, domain_.upper[std::size_t(j)] - margin);
        const double lo = std::max(I[std::size_t(j)] - h, domain_.lower[std::size_t(j)] + margin);
        probe[std::size_t(j)] = hi;
        const Complex fhi = fn.value(probe);
        probe[std::size_t(j)] = lo;
        const Complex flo = fn.value(probe);
        probe[std::size_t(j)] = I[std::size_t(j)];
        grad[std::size_t(j)] = (fhi - flo) / (hi - lo);
    }
    return grad;
}

double PhaseSpaceFunction::coeff_sup_hint(const ModeIndex& k) const {
    return mode_fn(k).sup_norm;
}

// ---- Resonances -----------------------------------------------------------

double small_divisor(const FrequencyModel& gm, const ModeIndex& k,
                     std::span<const double> I) {
    if (k.is_zero()) {
        throw std::invalid_argument("small_divisor: zero mode has no divisor");
    }
    const Vec gI = gm.g(I);
    return dot(k.components(), gI);
}

namespace {

// Bisects k.g on the segment between a and b (differing in coordinate axis)
// down to |k.g| <= tol_res.
ResonancePoint bisect_resonance(const FrequencyModel& gm, const FourierField& f,
                                const ModeIndex& k, Vec a, double da, Vec b,
                                int axis, double tol_res) {
    Vec mid = a;
    double dmid = da;
    for (int iter = 0; iter < 200; ++iter) {
        mid[std::size_t(axis)] = 0.5 * (a[std::size_t(axis)] + b[std::size_t(axis)]);
        dmid = small_divisor(gm, k, mid);
        if (std::abs(dmid) <= tol_res) break;
        if (mid[std::size_t(axis)] == a[std::size_t(axis)] ||
            mid[std::size_t(axis)] == b[std::size_t(axis)]) {
            break;  // interval collapsed to adjacent doubles
        }
        if ((dmid < 0.0) == (da < 0.0)) {
            a[std::size_t(axis)] = mid[std::size_t(axis)];
            da = dmid;
        } else {
            b[std::size_t(axis)] = mid[std::size_t(axis)];
        }
    }
    ResonancePoint rp;
    rp.k = k;
    rp.I_bar = mid;
    rp.divisor_residual = std::abs(dmid);
    rp.coeff_magnitude = std::abs(f.coeff(k, mid));
    return rp;
}

}  // namespace

std::optional<ResonancePoint> find_resonance(const FrequencyModel& gm,
                                             const FourierField& f,
                                             const ModeIndex& k,
                                             const ActionDomain& search_box,
                                             double tol_res) {
    if (k.is_zero()) throw std::invalid_argument("find_resonance: zero mode");
    if (!f.has_mode(k)) {
        throw std::invalid_argument("find_resonance: mode " + k.str() + " not stored in f");
    }
    const int n = search_box.dim();
    const int N = search_box.quadrature_nodes_per_dim;

    auto node_coord = [&](int j, int i) {
        return search_box.lower[std::size_t(j)] +
               (i + 0.5) * (search_box.upper[std::size_t(j)] - search_box.lower[std::size_t(j)]) / N;
    };

    for (int axis = 0; axis < n; ++axis) {
        // Enumerate lines by the node multi-index over the other dimensions.
        std::vector<int> other(std::size_t(n), 0);
        for (;;) {
            Vec I(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                if (j != axis) I[std::size_t(j)] = node_coord(j, other[std::size_t(j)]);
            }
            I[std::size_t(axis)] = node_coord(axis, 0);
            double prev = small_divisor(gm, k, I);
            if (std::abs(prev) <= tol_res) {
                ResonancePoint rp;
                rp.k = k;
                rp.I_bar = I;
                rp.divisor_residual = std::abs(prev);
                rp.coeff_magnitude = std::abs(f.coeff(k, I));
                return rp;
            }
            Vec prev_I = I;
            for (int i = 1; i < N; ++i) {
                I[std::size_t(axis)] = node_coord(axis, i);
                const double cur = small_divisor(gm, k, I);
                if (std::abs(cur) <= tol_res) {
                    ResonancePoint rp;
                    rp.k = k;
                    rp.I_bar = I;
                    rp.divisor_residual = std::abs(cur);
                    rp.coeff_magnitude = std::abs(f.coeff(k, I));
                    return rp;
                }
                if ((cur < 0.0) != (prev < 0.0)) {
                    return bisect_resonance(gm, f, k, prev_I, prev, I, axis, tol_res);
                }
                prev = cur;
                prev_I[std::size_t(axis)] = I[std::size_t(axis)];
            }
            // Advance the multi-index, skipping the scan axis.
            int j = 0;
            while (j < n) {
                if (j == axis) {
                    ++j;
                    continue;
                }
                if (++other[std::size_t(j)] < N) break;
                other[std::size_t(j)] = 0;
                ++j;
            }
            if (j >= n) break;
        }
    }
    return std::nullopt;
}

// ---- Models and spectra ------------------------------------------------------

ActionDomain default_domain(int n) {
    return ActionDomain(Vec(std::size_t(n), -1.0), Vec(std::size_t(n), 1.0));
}

int default_truncation(int n) { return n <= 2 ? 8 : 4; }

FrequencyModel linear_model(int n) {
    FrequencyModel gm;
    gm.n = n;
    gm.g = [](std::span<const double> I) { return Vec(I.begin(), I.end()); };
    gm.jacobian = [n](std::span<const double>) {
        std::vector<double> jac(std::size_t(n) * std::size_t(n), 0.0);
        for (int i = 0; i < n; ++i) jac[std::size_t(i) * n + i] = 1.0;
        return jac;
    };
    gm.C = std::sqrt(double(n));
    gm.D = 1.0;
    gm.m = 1.0;
    gm.M = 1.0;
    gm.lambda = 1.0;
    return gm;
}

FrequencyModel affine_model(const Vec& scale, const Vec& offset,
                            const ActionDomain& domain) {
    const int n = domain.dim();
    if (int(scale.size()) != n || int(offset.size()) != n) {
        throw std::invalid_argument("affine_model: scale/offset dimension mismatch");
    }
    for (double s : scale) {
        if (s == 0.0) throw std::invalid_argument("affine_model: zero scale is not a diffeomorphism");
    }
    FrequencyModel gm;
    gm.n = n;
    gm.g = [scale, offset](std::span<const double> I) {
        Vec out(I.size());
        for (std::size_t j = 0; j < I.size(); ++j) out[j] = scale[j] * I[j] + offset[j];
        return out;
    };
    gm.jacobian = [scale, n](std::span<const double>) {
        std::vector<double> jac(std::size_t(n) * std::size_t(n), 0.0);
        for (int i = 0; i < n; ++i) jac[std::size_t(i) * n + i] = scale[std::size_t(i)];
        return jac;
    };
    // ||g|| is convex, so its sup over the box is attained at a corner.
    double c = 0.0;
    for (unsigned corner = 0; corner < (1u << n); ++corner) {
        double norm = 0.0;
        for (int j = 0; j < n; ++j) {
            const double Ij = (corner >> j) & 1 ? domain.upper[std::size_t(j)]
                                                : domain.lower[std::size_t(j)];
            const double v = scale[std::size_t(j)] * Ij + offset[std::size_t(j)];
            norm += v * v;
        }
        c = std::max(c, std::sqrt(norm));
    }
    gm.C = c;
    double dmax = 0.0, detprod = 1.0;
    for (double s : scale) {
        dmax = std::max(dmax, std::abs(s));
        detprod *= std::abs(s);
    }
    gm.D = dmax;
    gm.m = detprod;
    gm.M = detprod;
    gm.lambda = dmax;
    return gm;
}

PhaseSpaceFunction exp_decay_spectrum(int n, int K, const ActionDomain& domain,
                                      double amplitude, double decay, double tilt) {
    PhaseSpaceFunction f(domain, K, /*real_flag=*/true);
    const double lo1 = domain.lower[0], up1 = domain.upper[0];
    for (const ModeIndex& k : lattice_modes(n, K)) {
        const double base = amplitude * std::exp(-decay * k.norm1());
        CoefficientFn fn;
        fn.value = [base, tilt](std::span<const double> I) {
            return Complex(base * (1.0 + tilt * I[0]), 0.0);
        };
        fn.gradient = [base, tilt, n](std::span<const double>) {
            CVec g(std::size_t(n), Complex(0.0, 0.0));
            g[0] = Complex(base * tilt, 0.0);
            return g;
        };
        fn.sup_norm = base * std::max(std::abs(1.0 + tilt * lo1), std::abs(1.0 + tilt * up1));
        Vec gs(std::size_t(n), 0.0);
        gs[0] = base * std::abs(tilt);
        fn.grad_sup_norms = gs;
        f.set_mode(k, std::move(fn));
    }
    return f;
}

PhaseSpaceFunction default_spectrum(int n, int K) {
    if (K <= 0) K = default_truncation(n);
    return exp_decay_spectrum(n, K, default_domain(n));
}

PhaseSpaceFunction cos_phi_function() {
    PhaseSpaceFunction f(default_domain(1), 1, /*real_flag=*/true);
    for (int k : {-1, 1}) {
        CoefficientFn fn;
        fn.value = [](std::span<const double>) { return Complex(0.5, 0.0); };
        fn.gradient = [](std::span<const double>) { return CVec{Complex(0.0, 0.0)}; };
        fn.sup_norm = 0.5;
        fn.grad_sup_norms = Vec{0.0};
        f.set_mode(ModeIndex({k}), std::move(fn));
    }
    return f;
}

PhaseSpaceFunction random_spectrum(int n, int K, std::uint64_t seed,
                                   const ActionDomain& domain) {
    PhaseSpaceFunction f(domain, K, /*real_flag=*/true);
    Xoshiro256 rng(mix_seed(seed, 0x5eedULL));
    auto uniform_pm1 = [&rng]() { return 2.0 * rng.next_double() - 1.0; };

    for (const ModeIndex& k : lattice_modes(n, K)) {
        // Draw on the representative of each +-k pair; conjugate for the other.
        const ModeIndex neg = k.negated();
        if (neg < k) continue;
        const bool self_paired = (k == neg);  // zero mode only

        const double base = std::exp(-0.6 * k.norm1());
        const Complex a = self_paired ? Complex(uniform_pm1(), 0.0)
                                      : Complex(uniform_pm1(), uniform_pm1());
        Vec slope(static_cast<std::size_t>(n));
        for (double& s : slope) s = uniform_pm1();

        auto corner_sup = [&](double mag) {
            double sup = 0.0;
            for (unsigned corner = 0; corner < (1u << n); ++corner) {
                double lin = 1.0;
                for (int j = 0; j < n; ++j) {
                    const double Ij = (corner >> j) & 1 ? domain.upper[std::size_t(j)]
                                                        : domain.lower[std::size_t(j)];
                    lin += 0.3 * slope[std::size_t(j)] * Ij;
                }
                sup = std::max(sup, mag * std::abs(lin));
            }
            return sup;
        };

        auto make_fn = [&](Complex amp) {
            CoefficientFn fn;
            fn.value = [amp, base, slope](std::span<const double> I) {
                double lin = 1.0;
                for (std::size_t j = 0; j < I.size(); ++j) lin += 0.3 * slope[j] * I[j];
                return amp * base * lin;
            };
            fn.gradient = [amp, base, slope, n](std::span<const double>) {
                CVec g(static_cast<std::size_t>(n));
                for (int j = 0; j < n; ++j) g[std::size_t(j)] = amp * base * 0.3 * slope[std::size_t(j)];
                return g;
            };
            fn.sup_norm = corner_sup(std::abs(amp) * base);
            Vec gs(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                gs[std::size_t(j)] = std::abs(amp) * base * 0.3 * std::abs(slope[std::size_t(j)]);
            }
            fn.grad_sup_norms = gs;
            return fn;
        };

        f.set_mode(k, make_fn(a));
        if (!self_paired) f.set_mode(neg, make_fn(std::conj(a)));
    }
    return f;
}

}  // namespace ergoreg
