#include "ergoreg/common.hpp"

#include <cmath>

namespace ergoreg {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 32) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double sinc(double x) {
    if (std::abs(x) < 0.5) {
        // sum_m (-1)^m x^{2m} / (2m+1)!
        const double x2 = x * x;
        double term = 1.0, acc = 1.0;
        for (int m = 1; m <= 8; ++m) {
            term *= -x2 / double((2 * m) * (2 * m + 1));
            acc += term;
        }
        return acc;
    }
    return std::sin(x) / x;
}

double dsinc(double x) {
    if (std::abs(x) < 0.5) {
        // sum_m (-1)^m (2m) x^{2m-1} / (2m+1)!
        const double x2 = x * x;
        double pow_term = 1.0;  // x^{2m-2} * (-1)^{m-1} / (2m-1)! pieces folded below
        double acc = 0.0;
        double fact_term = 1.0;
        for (int m = 1; m <= 8; ++m) {
            fact_term *= -1.0 / double((2 * m) * (2 * m + 1));
            acc += fact_term * (2 * m) * pow_term;
            pow_term *= x2;
        }
        return x * acc;
    }
    return std::cos(x) / x - std::sin(x) / (x * x);
}

}  // namespace ergoreg
