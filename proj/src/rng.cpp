#include "ergoreg/rng.hpp"

#include <cmath>
#include <cstdint>

namespace ergoreg {
namespace detail {

namespace {

constexpr double kZigV = 0.00492867323399;

double normal_pdf_unscaled(double x) { return std::exp(-0.5 * x * x); }

NormalTables build_tables() {
    NormalTables t{};
    t.x[0] = kZigV / normal_pdf_unscaled(kZigR);
    t.x[1] = kZigR;
    t.x[256] = 0.0;
    for (int i = 2; i < 256; ++i) {
        const double prev = t.x[i - 1];
        t.x[i] = std::sqrt(-2.0 * std::log(kZigV / prev + normal_pdf_unscaled(prev)));
    }
    for (int i = 0; i <= 256; ++i) {
        t.y[i] = normal_pdf_unscaled(t.x[i]);
    }
    for (int i = 0; i < 256; ++i) {
        t.xr[i].x = t.x[i];
        t.xr[i].ratio = t.x[i + 1] / t.x[i];
    }
    return t;
}

}  // namespace

const NormalTables& normal_tables() {
    static const NormalTables t = build_tables();
    return t;
}

}  // namespace detail

double Xoshiro256::normal_slow(std::uint64_t bits) {
    const detail::NormalTables& t = *nt_;
    for (;;) {
        const int idx = int(bits & 0xff);
        const bool negative = (bits >> 8) & 1;
        const double u = double(bits >> 11) * 0x1.0p-53;
        const double x = u * t.x[idx];
        if (u < t.xr[idx].ratio) {
            return negative ? -x : x;
        }
        if (idx == 0) {
            // Marsaglia's exact tail method beyond r.
            double xt, yt;
            do {
                xt = -std::log(next_double_pos()) / detail::kZigR;
                yt = -std::log(next_double_pos());
            } while (yt + yt < xt * xt);
            const double v = detail::kZigR + xt;
            return negative ? -v : v;
        }
        const double y_lo = t.y[idx];
        const double y_hi = t.y[idx + 1];
        if (y_lo + next_double() * (y_hi - y_lo) < std::exp(-0.5 * x * x)) {
            return negative ? -x : x;
        }
        bits = next_u64();
    }
}

}  // namespace ergoreg
