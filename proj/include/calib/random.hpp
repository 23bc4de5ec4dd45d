#pragma once

#include <cstdint>
#include <random>

namespace calib {

/// Seeded uniform source shared by every randomized operation.
///
/// Doubles are derived from the raw 64-bit output (top 53 bits) instead of
/// std::uniform_real_distribution, whose output sequence is
/// implementation-defined. A fixed seed therefore yields the same stream on
/// every standard library.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next(); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace calib
