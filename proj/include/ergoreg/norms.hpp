#pragma once

#include <functional>
#include <map>

#include "ergoreg/averaging.hpp"
#include "ergoreg/fourier_core.hpp"

namespace ergoreg {

enum class QuadratureScheme { midpoint, gauss_legendre };

// Tensor-product quadrature over the open action box; all nodes interior.
class QuadratureGrid {
public:
    static QuadratureGrid build(const ActionDomain& domain, QuadratureScheme scheme,
                                int nodes_per_dim);

    int dim() const { return domain_.dim(); }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> node(std::size_t i) const {
        return {nodes_.data() + i * std::size_t(dim()), std::size_t(dim())};
    }
    double weight(std::size_t i) const { return weights_[i]; }
    QuadratureScheme scheme() const { return scheme_; }
    int nodes_per_dim() const { return nodes_per_dim_; }
    const ActionDomain& domain() const { return domain_; }
    double spacing() const;  // typical inter-node distance per dimension

    // Grid of the same scheme at half resolution, for refinement estimates.
    QuadratureGrid coarsened() const;

private:
    QuadratureGrid(ActionDomain domain, QuadratureScheme scheme, int nodes_per_dim);

    ActionDomain domain_;
    QuadratureScheme scheme_;
    int nodes_per_dim_;
    Vec nodes_;    // flat, node-major
    Vec weights_;
};

struct IntegralResult {
    double value = 0.0;
    double refinement_estimate = 0.0;
};

// Weighted sum over nodes; throws quadrature_error (naming the node) on a
// non-finite integrand value.
double integrate(const std::function<double(std::span<const double>)>& fn,
                 const QuadratureGrid& grid);
// Same plus a two-level refinement estimate |value(grid) - value(coarse)|.
IntegralResult integrate_refined(const std::function<double(std::span<const double>)>& fn,
                                 const QuadratureGrid& grid);

// Grid sizing for oscillatory difference fields: nodes_per_dim grows with
// the field's divisor-variation rate (per_wavelength nodes per 2*pi of
// divisor phase), floored at 64 and capped at 2^20 total nodes.
struct GridSpec {
    int nodes_per_dim = 64;
    bool capped = false;
};
GridSpec auto_grid_spec(const FourierField& u, int per_wavelength = 8);
QuadratureGrid auto_grid(const FourierField& u,
                         QuadratureScheme scheme = QuadratureScheme::midpoint,
                         int per_wavelength = 8);

struct PerModeNorms {
    double inf = 0.0;
    double zero = 0.0;
    double one = 0.0;
};

struct NormReport {
    double norm_inf = 0.0;
    double norm_0 = 0.0;
    double norm_1 = 0.0;
    std::map<ModeIndex, PerModeNorms> per_mode;
    double refinement_estimate = 0.0;
    bool sup_at_boundary = false;
};

// |u|^inf = sum_k sup_A |u_k|: grid maximum per mode, tightened by local
// golden-section refinement around the argmax and around witnessed
// resonance points. A certified lower estimate of the true sup.
double norm_uniform(const FourierField& u, const QuadratureGrid& grid);

// |u|^0 = sum_k int_A |u_k|.
double norm_zero(const FourierField& u, const QuadratureGrid& grid);
IntegralResult norm_zero_refined(const FourierField& u, const QuadratureGrid& grid);

// |u|^1 = |u|^0 + sum_k sum_j int_A (|du_k/dI_j| + |k_j u_k|).
double norm_one(const FourierField& u, const QuadratureGrid& grid);
IntegralResult norm_one_refined(const FourierField& u, const QuadratureGrid& grid);

// All three norms with per-mode breakdown and the integral refinement
// estimate (max over the |.|^0 and |.|^1 two-level differences).
NormReport norm_report(const FourierField& u, const QuadratureGrid& grid);

struct SandwichResult {
    double lhs = 0.0;  // (2 pi)^{-n} ||u||_{W^{1,1}} by tensor quadrature
    double mid = 0.0;  // |u|^1
    double rhs = 0.0;  // (2 pi)^{-n} sum_k ||u_k e^{ik.phi}||_{W^{1,1}}
    bool ok = false;
    double tolerance = 0.0;
};

// Checks lhs <= mid <= rhs within 1e-8 plus the angle-grid refinement
// estimate; angle_nodes_per_dim sets the uniform torus grid.
SandwichResult sobolev_sandwich_check(const FourierField& u, const QuadratureGrid& grid,
                                      int angle_nodes_per_dim = 64);

}  // namespace ergoreg
