#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

namespace ergoreg {

// splitmix64 finalizer; also the documented mixer for per-path seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Per-path seed derivation: independent of execution order, so path sets are
// reproducible under any parallel schedule.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
    return mix64(seed ^ mix64(counter + 0x632be59bd9b4e019ULL));
}

namespace detail {

// Ziggurat tables for the standard normal (Marsaglia & Tsang, 256 layers):
// x[1] = r decreasing to x[256] = 0, x[0] the virtual base-strip width;
// layer i >= 1 is [0, x[i]] x [f(x[i]), f(x[i+1])], each of area v.
// The hot pair (x, ratio) is interleaved so one draw touches one line.
struct NormalTables {
    struct XR {
        double x;
        double ratio;  // x[i+1]/x[i], the no-reject accept threshold
    };
    XR xr[256];
    double x[257];
    double y[257];
};

const NormalTables& normal_tables();

inline constexpr double kZigR = 3.6541528853610088;

}  // namespace detail

// xoshiro256++ (Blackman & Vigna), seeded through splitmix64.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) : nt_(&detail::normal_tables()) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = sm;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0,1]; safe as a log() argument.
    double next_double_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // Standard normal via the ziggurat method; the common case is one u64,
    // two table loads, and a compare. Wedge and tail cases go out of line.
    double next_normal() {
        const std::uint64_t bits = next_u64();
        const auto& xr = nt_->xr[bits & 0xff];
        const double u = double(bits >> 11) * 0x1.0p-53;
        const double x = u * xr.x;
        if (u < xr.ratio) [[likely]] {
            const std::uint64_t sign = (bits & 0x100) << 55;
            return std::bit_cast<double>(std::bit_cast<std::uint64_t>(x) ^ sign);
        }
        return normal_slow(bits);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    double normal_slow(std::uint64_t bits);  // wedge test, tail, retries

    std::uint64_t state_[4];
    const detail::NormalTables* nt_;
};

}  // namespace ergoreg
