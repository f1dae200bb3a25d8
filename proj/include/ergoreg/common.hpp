#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergoreg {

using Complex = std::complex<double>;
using Vec = std::vector<double>;
using CVec = std::vector<Complex>;

// Error hierarchy. Library throws; the CLI maps these onto exit codes.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct quadrature_error : std::runtime_error {
    explicit quadrature_error(const std::string& what) : std::runtime_error(what) {}
};

struct small_divisor_error : std::runtime_error {
    explicit small_divisor_error(const std::string& what) : std::runtime_error(what) {}
};

struct step_size_error : std::runtime_error {
    explicit step_size_error(const std::string& what) : std::runtime_error(what) {}
};

struct interpolation_error : std::runtime_error {
    explicit interpolation_error(const std::string& what) : std::runtime_error(what) {}
};

struct not_a_witness_error : std::runtime_error {
    explicit not_a_witness_error(const std::string& what) : std::runtime_error(what) {}
};

struct inequality_failure : std::runtime_error {
    explicit inequality_failure(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic sum of a sequence, independent of chunking by callers.
// Pairwise recursion keeps rounding error O(log n) without requiring a
// particular reduction schedule.
double pairwise_sum(std::span<const double> values);

// sinc(x) = sin(x)/x with sinc(0) = 1; series near zero.
double sinc(double x);
// d/dx sinc(x); series near zero.
double dsinc(double x);

}  // namespace ergoreg
