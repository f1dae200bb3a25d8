#pragma once

#include <cstdint>

#include "ergoreg/fourier_core.hpp"

namespace ergoreg {

// One realization of an n-dimensional Wiener process sampled on a fixed
// time grid. Increments are exact Gaussian draws (constant actions mean the
// state needs no SDE stepping). Seed 0 is the documented zero-path override.
struct NoisePath {
    std::uint64_t seed = 0;
    Vec times;               // increasing, times[0] == 0
    std::vector<Vec> w;      // per time, n components; w[0] == 0

    static NoisePath make(std::uint64_t seed, Vec times, int n);
};

// phi + g(I) t + sqrt(2 nu) w(t); actions are unchanged by the noisy flow.
// t must be one of the path's sample times (no silent interpolation).
Vec sample_flow(const FrequencyModel& gm, std::span<const double> I,
                std::span<const double> phi, double nu, const NoisePath& path, double t);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int paths = 0;
    double dt = 0.0;
    double horizon = 0.0;
    double tail_bound = 0.0;
};

// Monte Carlo value of mu E[ int_0^inf f(Phi^t_nu) e^{-mu t} dt ] at fixed
// (I, phi): per-path composite trapezoid on step dt up to horizon 20/mu,
// averaged over `paths` seeded Wiener realizations. Deterministic in `seed`
// and independent of the thread schedule.
McEstimate mc_estimate(const FourierField& f, const FrequencyModel& gm,
                       std::span<const double> I, std::span<const double> phi, double mu,
                       double nu, int paths, double dt,
                       std::uint64_t seed = 0x6572676fU, unsigned threads = 0);

struct CharacteristicCheck {
    Complex empirical{0.0, 0.0};
    double analytic = 0.0;
    double std_error = 0.0;
    double z_score = 0.0;
};

// Mean over paths of e^{i sqrt(2 nu) k.w(t)} against the mode-damping
// factor e^{-nu |k|^2 t}.
CharacteristicCheck characteristic_check(double nu, const ModeIndex& k, double t,
                                         int paths, std::uint64_t seed = 0x6572676fU,
                                         unsigned threads = 0);

}  // namespace ergoreg
