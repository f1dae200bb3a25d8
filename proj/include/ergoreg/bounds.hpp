#pragma once

#include <map>
#include <optional>

#include "ergoreg/fourier_core.hpp"

namespace ergoreg {

// Inputs to the closed-form convergence bounds: the frequency-model
// constants plus per-mode coefficient sups.
struct ModeData {
    double sup = 0.0;        // |f_k|^inf
    Vec grad_sups;           // |df_k/dI_j|^inf, may be empty when unknown
};

struct BoundInputs {
    FrequencyModel gm;
    std::map<ModeIndex, ModeData> mode_data;
    int n = 0;

    // Collects sups from a truncated function over its own domain.
    static BoundInputs from_field(const PhaseSpaceFunction& f, const FrequencyModel& gm);
};

struct BoundValue {
    double value = 0.0;
    bool log_floored = false;  // some mode's log argument fell to/below 1
};

// Sum over nonzero modes of 4 |f_k|^inf C^{n-1} (3 + log(|k| T C)) / (m |k| T);
// `statement_form` drops the 1/|k| factor. Log arguments at or below 1 are
// floored (the bracket never drops below its constant term) and flagged.
BoundValue bound_finite_time(const BoundInputs& bi, double T,
                             bool statement_form = false);

// Sum over nonzero modes of
//   2 C^{n-1}/m |f_k|^inf (mu/|k|) (1 + log(|k| C / (mu + nu |k|^2))).
BoundValue bound_stochastic(const BoundInputs& bi, double mu, double nu);
BoundValue bound_damped(const BoundInputs& bi, double mu);  // nu = 0

// Sum over nonzero modes of (2 C^{n-1}/m) times
//   mu (1 + log(|k| C/(mu
//       + nu |k|^2))) ((1+n)|f_k|^inf + sum_j |df_k/dI_j|^inf)
//   + (1/2) n^2 pi D mu/(mu + nu |k|^2) |f_k|^inf.
BoundValue bound_w1(const BoundInputs& bi, double mu, double nu);

// Constants entering the non-convergence lower bounds, certified on a ball
// around a resonance witness.
struct LowerBoundConstants {
    ModeIndex k;
    Vec I_bar;
    double delta = 0.0;        // ball radius actually used (after the cap)
    double lambda1 = 0.0;      // min |f_k| over the ball
    double lambda2 = 0.0;      // min over unit directions of |J^T u|_1 on the ball
    double delta_tilde = 0.0;  // half-width of the axis box inside the image ball
    double M = 0.0;            // sup |det J|
};

// Grid/sphere-sampled estimates of lambda1, lambda2, delta_tilde around the
// witness; honors the cap delta <= lambda1 lambda2 / (2 lambda sum_j
// |df_k/dI_j|^inf) when the gradient sup is positive.
LowerBoundConstants estimate_lower_constants(const FrequencyModel& gm,
                                             const PhaseSpaceFunction& f,
                                             const ResonancePoint& rp, double delta,
                                             int ball_nodes_per_dim = 33,
                                             int sphere_samples_per_dim = 1000);

// (lambda1 lambda2 / M) delta_tilde^{n-1} arcsinh(|k| T delta_tilde).
double lower_bound_w1_finite_time(const LowerBoundConstants& lc, double T);
// (lambda1 lambda2 / M) delta_tilde^{n-1} arctan(|k| delta_tilde / mu).
double lower_bound_w1_damped(const LowerBoundConstants& lc, double mu);

// Deterministic unit directions: low-discrepancy set plus the coordinate
// axes (the minimizers of |J^T u|_1 for diagonal Jacobians).
std::vector<Vec> unit_sphere_directions(int n, int count);

struct InequalityReport {
    bool quartic_ok = false;       // 2 + y^2 - 2y sin y - 2cos y >= y^4/(4(1+y^2))
    double quartic_min_margin = 0.0;
    double quartic_worst_y = 0.0;
    bool unit_circle_ok = false;   // |e^{i t} - 1| == sqrt(2(1 - cos t)) to 1e-12
    double unit_circle_max_err = 0.0;
    double l0 = 0.0;               // int_0^{2pi} |sin y / y| dy
    double l0_estimate = 0.0;
    bool l0_ok = false;            // l0 <= 3
    double l1 = 0.0;               // arcsinh 1
    bool l1_ok = false;            // l1 <= 1
    bool all_ok = false;
};

// Verifies the elementary inequalities used by the proofs on dense grids of
// at least `grid_points` points; throws inequality_failure (with a witness)
// when any check fails and `throw_on_failure` is set.
InequalityReport inequality_suite(long grid_points = 200001,
                                  bool throw_on_failure = false);

}  // namespace ergoreg
