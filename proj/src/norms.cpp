#include "ergoreg/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ergoreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes/weights on (-1,1) by Newton iteration on P_n.
void gauss_legendre_reference(int n, Vec& x, Vec& w) {
    x.assign(std::size_t(n), 0.0);
    w.assign(std::size_t(n), 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double z1, pp;
        do {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            z1 = z;
            z = z1 - p1 / pp;
        } while (std::abs(z - z1) > 1e-15);
        x[std::size_t(i)] = -z;
        x[std::size_t(n - 1 - i)] = z;
        w[std::size_t(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[std::size_t(n - 1 - i)] = w[std::size_t(i)];
    }
}

// Two-level agreement cannot certify below accumulated rounding.
double rounding_floor(double value) {
    return 64.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
}

std::string node_string(std::span<const double> I) {
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < I.size(); ++j) {
        if (j) os << ',';
        os << I[j];
    }
    os << ')';
    return os.str();
}

// Golden-section maximization of fn over [a,b]; returns the best point seen.
std::pair<double, double> golden_max(const std::function<double(double)>& fn, double a,
                                     double b, int iters = 70) {
    const double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = fn(c), fd = fn(d);
    double best_x = fc > fd ? c : d;
    double best_f = std::max(fc, fd);
    for (int it = 0; it < iters && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fn(d);
        }
        if (fc > best_f) {
            best_f = fc;
            best_x = c;
        }
        if (fd > best_f) {
            best_f = fd;
            best_x = d;
        }
    }
    return {best_x, best_f};
}

struct SupResult {
    double value = 0.0;
    bool near_boundary = false;
};

// Sup of |u_k| per mode: grid max, then coordinate-wise golden-section
// around the argmax, then log-spaced probes around a witnessed resonance
// (where difference fields peak just off the resonant manifold).
SupResult mode_sup(const FourierField& u, const ModeIndex& k, const QuadratureGrid& grid) {
    const ActionDomain& box = grid.domain();
    const int n = box.dim();
    auto eval = [&](std::span<const double> I) { return std::abs(u.coeff(k, I)); };

    double best = 0.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = eval(grid.node(i));
        if (v > best) {
            best = v;
            best_idx = i;
        }
    }
    Vec best_point(grid.node(best_idx).begin(), grid.node(best_idx).end());

    const double h = grid.spacing();
    Vec point = best_point;
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (int j = 0; j < n; ++j) {
            const double margin = 1e-12 * (box.upper[std::size_t(j)] - box.lower[std::size_t(j)]);
            const double a = std::max(box.lower[std::size_t(j)] + margin, point[std::size_t(j)] - h);
            const double b = std::min(box.upper[std::size_t(j)] - margin, point[std::size_t(j)] + h);
            auto line = [&](double x) {
                Vec probe = point;
                probe[std::size_t(j)] = x;
                return eval(probe);
            };
            const auto [x, fx] = golden_max(line, a, b);
            if (fx > best) {
                best = fx;
                point[std::size_t(j)] = x;
                best_point = point;
            }
        }
    }

    // Resonance-adjacent probes: values approach the witness coefficient
    // magnitude from the nonresonant side.
    const FrequencyModel* gm = u.frequency_model();
    if (gm != nullptr && !k.is_zero()) {
        ActionDomain search = box;
        search.quadrature_nodes_per_dim = 33;
        if (const auto rp = find_resonance(*gm, u, k, search)) {
            std::vector<Vec> dirs;
            for (int j = 0; j < n; ++j) {
                Vec e(static_cast<std::size_t>(n), 0.0);
                e[std::size_t(j)] = 1.0;
                dirs.push_back(e);
            }
            Vec dvec = gm->divisor_gradient(rp->I_bar, k);
            double dnorm = 0.0;
            for (double v : dvec) dnorm += v * v;
            if (dnorm > 0.0) {
                for (double& v : dvec) v /= std::sqrt(dnorm);
                dirs.push_back(dvec);
            }

            const double at_witness = eval(box.clamp_interior(rp->I_bar));
            if (at_witness > best) {
                best = at_witness;
                best_point = box.clamp_interior(rp->I_bar);
            }
            for (const Vec& dir : dirs) {
                for (double sign : {-1.0, 1.0}) {
                    double t = h;
                    for (int level = 0; level < 64 && t > 1e-16; ++level, t *= 0.5) {
                        Vec probe = rp->I_bar;
                        for (int j = 0; j < n; ++j) {
                            probe[std::size_t(j)] += sign * t * dir[std::size_t(j)];
                        }
                        probe = box.clamp_interior(probe);
                        const double v = eval(probe);
                        if (v > best) {
                            best = v;
                            best_point = probe;
                        }
                    }
                }
            }
        }
    }

    SupResult res;
    res.value = best;
    for (int j = 0; j < n; ++j) {
        const double extent = box.upper[std::size_t(j)] - box.lower[std::size_t(j)];
        const double dist = std::min(best_point[std::size_t(j)] - box.lower[std::size_t(j)],
                                     box.upper[std::size_t(j)] - best_point[std::size_t(j)]);
        if (dist < 1e-5 * extent) res.near_boundary = true;
    }
    return res;
}

// Integral norms use the almost-everywhere coefficient representatives:
// quadrature over A then equals the integral over the nonresonant set, and
// nodes landing exactly on a resonant manifold carry no branch artifacts.
double per_mode_zero(const FourierField& u, const ModeIndex& k, const QuadratureGrid& grid) {
    return integrate([&](std::span<const double> I) { return std::abs(u.coeff_ae(k, I)); },
                     grid);
}

// Gradient terms of |.|^1 for one mode: int (sum_j |du_k/dI_j| + |k|_1 |u_k|).
double per_mode_one_extra(const FourierField& u, const ModeIndex& k,
                          const QuadratureGrid& grid) {
    const double k1 = double(k.norm1());
    return integrate(
        [&](std::span<const double> I) {
            const CVec grad = u.coeff_gradient_ae(k, I);
            double acc = k1 * std::abs(u.coeff_ae(k, I));
            for (const Complex& g : grad) acc += std::abs(g);
            return acc;
        },
        grid);
}

}  // namespace

// ---- QuadratureGrid ---------------------------------------------------------

QuadratureGrid::QuadratureGrid(ActionDomain domain, QuadratureScheme scheme,
                               int nodes_per_dim)
    : domain_(std::move(domain)), scheme_(scheme), nodes_per_dim_(nodes_per_dim) {}

QuadratureGrid QuadratureGrid::build(const ActionDomain& domain, QuadratureScheme scheme,
                                     int nodes_per_dim) {
    if (nodes_per_dim <= 0) {
        throw std::invalid_argument("QuadratureGrid: nodes_per_dim must be positive");
    }
    if (scheme == QuadratureScheme::gauss_legendre && nodes_per_dim > 8192) {
        throw std::invalid_argument(
            "QuadratureGrid: gauss_legendre is limited to 8192 nodes per dim; "
            "use midpoint for finer grids");
    }
    const int n = domain.dim();
    double total_d = std::pow(double(nodes_per_dim), n);
    if (total_d > double(1 << 26)) {
        throw std::invalid_argument("QuadratureGrid: grid exceeds 2^26 total nodes");
    }

    Vec ref_x, ref_w;
    if (scheme == QuadratureScheme::gauss_legendre) {
        gauss_legendre_reference(nodes_per_dim, ref_x, ref_w);
    } else {
        ref_x.resize(std::size_t(nodes_per_dim));
        ref_w.assign(std::size_t(nodes_per_dim), 2.0 / nodes_per_dim);
        for (int i = 0; i < nodes_per_dim; ++i) {
            ref_x[std::size_t(i)] = -1.0 + (2.0 * i + 1.0) / nodes_per_dim;
        }
    }

    QuadratureGrid grid(domain, scheme, nodes_per_dim);
    const std::size_t total = std::size_t(total_d);
    grid.nodes_.resize(total * std::size_t(n));
    grid.weights_.resize(total);

    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t node = 0; node < total; ++node) {
        double w = 1.0;
        for (int j = 0; j < n; ++j) {
            const double lo = domain.lower[std::size_t(j)];
            const double up = domain.upper[std::size_t(j)];
            const double t = ref_x[std::size_t(idx[std::size_t(j)])];
            grid.nodes_[node * std::size_t(n) + std::size_t(j)] =
                0.5 * (lo + up) + 0.5 * (up - lo) * t;
            w *= 0.5 * (up - lo) * ref_w[std::size_t(idx[std::size_t(j)])];
        }
        grid.weights_[node] = w;
        int j = 0;
        while (j < n && ++idx[std::size_t(j)] == nodes_per_dim) idx[std::size_t(j++)] = 0;
    }
    return grid;
}

double QuadratureGrid::spacing() const {
    double h = 0.0;
    for (int j = 0; j < dim(); ++j) {
        h = std::max(h, (domain_.upper[std::size_t(j)] - domain_.lower[std::size_t(j)]) /
                            nodes_per_dim_);
    }
    return h;
}

QuadratureGrid QuadratureGrid::coarsened() const {
    return build(domain_, scheme_, std::max(2, nodes_per_dim_ / 2));
}

// ---- Integration ------------------------------------------------------------

double integrate(const std::function<double(std::span<const double>)>& fn,
                 const QuadratureGrid& grid) {
    Vec terms(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = fn(grid.node(i));
        if (!std::isfinite(v)) {
            throw quadrature_error("integrate: non-finite integrand at node " +
                                   node_string(grid.node(i)));
        }
        terms[i] = grid.weight(i) * v;
    }
    return pairwise_sum(terms);
}

IntegralResult integrate_refined(const std::function<double(std::span<const double>)>& fn,
                                 const QuadratureGrid& grid) {
    IntegralResult res;
    res.value = integrate(fn, grid);
    const double coarse = integrate(fn, grid.coarsened());
    res.refinement_estimate = std::abs(res.value - coarse) + rounding_floor(res.value);
    return res;
}

GridSpec auto_grid_spec(const FourierField& u, int per_wavelength) {
    GridSpec spec;
    const double rate = u.divisor_variation_rate();
    const double diam = u.domain().diameter();
    const double wanted = per_wavelength * rate * diam / (2.0 * kPi);
    spec.nodes_per_dim = std::max(64, int(std::ceil(wanted)));
    const int n = u.domain().dim();
    const int cap = int(std::floor(std::pow(double(1 << 20), 1.0 / n)));
    if (spec.nodes_per_dim > cap) {
        spec.nodes_per_dim = cap;
        spec.capped = true;
    }
    return spec;
}

QuadratureGrid auto_grid(const FourierField& u, QuadratureScheme scheme,
                         int per_wavelength) {
    return QuadratureGrid::build(u.domain(), scheme,
                                 auto_grid_spec(u, per_wavelength).nodes_per_dim);
}

// ---- Norms ------------------------------------------------------------------

double norm_uniform(const FourierField& u, const QuadratureGrid& grid) {
    Vec per_mode;
    per_mode.reserve(u.modes().size());
    for (const ModeIndex& k : u.modes()) per_mode.push_back(mode_sup(u, k, grid).value);
    return pairwise_sum(per_mode);
}

double norm_zero(const FourierField& u, const QuadratureGrid& grid) {
    Vec per_mode;
    per_mode.reserve(u.modes().size());
    for (const ModeIndex& k : u.modes()) per_mode.push_back(per_mode_zero(u, k, grid));
    return pairwise_sum(per_mode);
}

IntegralResult norm_zero_refined(const FourierField& u, const QuadratureGrid& grid) {
    IntegralResult res;
    res.value = norm_zero(u, grid);
    res.refinement_estimate =
        std::abs(res.value - norm_zero(u, grid.coarsened())) + rounding_floor(res.value);
    return res;
}

double norm_one(const FourierField& u, const QuadratureGrid& grid) {
    Vec per_mode;
    per_mode.reserve(2 * u.modes().size());
    for (const ModeIndex& k : u.modes()) {
        per_mode.push_back(per_mode_zero(u, k, grid));
        per_mode.push_back(per_mode_one_extra(u, k, grid));
    }
    return pairwise_sum(per_mode);
}

IntegralResult norm_one_refined(const FourierField& u, const QuadratureGrid& grid) {
    IntegralResult res;
    res.value = norm_one(u, grid);
    res.refinement_estimate =
        std::abs(res.value - norm_one(u, grid.coarsened())) + rounding_floor(res.value);
    return res;
}

NormReport norm_report(const FourierField& u, const QuadratureGrid& grid) {
    NormReport rep;
    const QuadratureGrid coarse = grid.coarsened();
    Vec inf_terms, zero_terms, one_terms, zero_coarse, one_coarse;
    for (const ModeIndex& k : u.modes()) {
        const SupResult sup = mode_sup(u, k, grid);
        const double z = per_mode_zero(u, k, grid);
        const double extra = per_mode_one_extra(u, k, grid);
        rep.per_mode[k] = PerModeNorms{sup.value, z, z + extra};
        rep.sup_at_boundary = rep.sup_at_boundary || sup.near_boundary;
        inf_terms.push_back(sup.value);
        zero_terms.push_back(z);
        one_terms.push_back(z);
        one_terms.push_back(extra);
        zero_coarse.push_back(per_mode_zero(u, k, coarse));
        one_coarse.push_back(zero_coarse.back());
        one_coarse.push_back(per_mode_one_extra(u, k, coarse));
    }
    rep.norm_inf = pairwise_sum(inf_terms);
    rep.norm_0 = pairwise_sum(zero_terms);
    rep.norm_1 = pairwise_sum(one_terms);
    rep.refinement_estimate =
        std::max(std::abs(rep.norm_0 - pairwise_sum(zero_coarse)),
                 std::abs(rep.norm_1 - pairwise_sum(one_coarse))) +
        rounding_floor(rep.norm_1);
    return rep;
}

// ---- Sobolev sandwich ---------------------------------------------------------

namespace {

// (2 pi)^{-n} ||u||_{W^{1,1}} on A x T^n by tensor quadrature: the action
// grid is the caller's, the angle grid is uniform with M nodes per dim.
double w11_norm(const FourierField& u, const QuadratureGrid& grid, int M) {
    const int n = grid.dim();
    const auto& modes = u.modes();
    const std::size_t nm = modes.size();

    // Per-dimension tables of e^{i m phi_t}, m in [-K, K], per angle node.
    int K = 0;
    for (const ModeIndex& k : modes) {
        for (int j = 0; j < n; ++j) K = std::max(K, std::abs(k[j]));
    }
    const int width = 2 * K + 1;
    std::vector<CVec> tables(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        tables[std::size_t(j)].resize(std::size_t(M) * std::size_t(width));
        for (int t = 0; t < M; ++t) {
            const double phi = 2.0 * kPi * t / M;
            for (int m = -K; m <= K; ++m) {
                tables[std::size_t(j)][std::size_t(t) * std::size_t(width) +
                                       std::size_t(m + K)] = std::polar(1.0, m * phi);
            }
        }
    }

    std::size_t angle_total = 1;
    for (int j = 0; j < n; ++j) angle_total *= std::size_t(M);

    Vec action_terms(grid.size());
    CVec coeffs(nm);
    std::vector<CVec> grads(nm);
    std::vector<int> aidx(static_cast<std::size_t>(n), 0);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto I = grid.node(i);
        for (std::size_t s = 0; s < nm; ++s) {
            coeffs[s] = u.coeff_ae(modes[s], I);
            grads[s] = u.coeff_gradient_ae(modes[s], I);
        }

        std::fill(aidx.begin(), aidx.end(), 0);
        double angle_acc = 0.0;
        for (std::size_t a = 0; a < angle_total; ++a) {
            Complex value(0.0, 0.0);
            CVec dI(static_cast<std::size_t>(n), Complex(0.0, 0.0));
            CVec dphi(static_cast<std::size_t>(n), Complex(0.0, 0.0));
            for (std::size_t s = 0; s < nm; ++s) {
                Complex wave(1.0, 0.0);
                for (int j = 0; j < n; ++j) {
                    wave *= tables[std::size_t(j)][std::size_t(aidx[std::size_t(j)]) *
                                                       std::size_t(width) +
                                                   std::size_t(modes[s][j] + K)];
                }
                value += coeffs[s] * wave;
                for (int j = 0; j < n; ++j) {
                    dI[std::size_t(j)] += grads[s][std::size_t(j)] * wave;
                    dphi[std::size_t(j)] +=
                        Complex(0.0, double(modes[s][j])) * coeffs[s] * wave;
                }
            }
            double point = std::abs(value);
            for (int j = 0; j < n; ++j) {
                point += std::abs(dI[std::size_t(j)]) + std::abs(dphi[std::size_t(j)]);
            }
            angle_acc += point;

            int j = 0;
            while (j < n && ++aidx[std::size_t(j)] == M) aidx[std::size_t(j++)] = 0;
        }
        // Mean over the torus grid absorbs the (2 pi)^{-n} factor.
        action_terms[i] = grid.weight(i) * (angle_acc / double(angle_total));
    }
    return pairwise_sum(action_terms);
}

}  // namespace

SandwichResult sobolev_sandwich_check(const FourierField& u, const QuadratureGrid& grid,
                                      int angle_nodes_per_dim) {
    SandwichResult res;
    res.mid = norm_one(u, grid);

    // Per-mode route: the angle factor of each |u_k e^{ik.phi}| term is
    // constant on the torus, so the mean over the angle grid is evaluated
    // exactly; what remains is the same action integral as |.|^1.
    Vec rhs_terms;
    for (const ModeIndex& k : u.modes()) {
        rhs_terms.push_back(per_mode_zero(u, k, grid));
        rhs_terms.push_back(per_mode_one_extra(u, k, grid));
    }
    res.rhs = pairwise_sum(rhs_terms);

    res.lhs = w11_norm(u, grid, angle_nodes_per_dim);
    const double lhs_coarse = w11_norm(u, grid, std::max(8, angle_nodes_per_dim / 2));
    const double angle_estimate = std::abs(res.lhs - lhs_coarse);

    res.tolerance = 1e-8 * (1.0 + std::abs(res.mid)) + angle_estimate;
    res.ok = res.lhs <= res.mid + res.tolerance && res.mid <= res.rhs + res.tolerance;
    return res;
}

}  // namespace ergoreg
