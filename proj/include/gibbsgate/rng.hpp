#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gibbsgate {

// Counter-based generator, stream "gibbsgate-rng-v1": draw n (1-based) hashes
// seed + n * golden-gamma through the splitmix64 finalizer. Pure function of
// (seed, n), so trajectories replay bit-for-bit on any platform and replicates
// can run in any order or thread.
inline constexpr const char* rng_name = "gibbsgate-rng-v1";

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// Replicate i runs its own stream derived by XOR; replicate 0 is the base.
inline std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate) {
    return seed ^ replicate;
}

// Inverse-CDF draw over a probability row, cumulating in index (label) order.
// Rounding can leave the total a hair under 1; u beyond it falls back to the
// last positive entry.
inline std::size_t sample_index(const double* row, std::size_t n, double u) {
    double acc = 0.0;
    std::size_t last_positive = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (row[i] > 0.0) last_positive = i;
        acc += row[i];
        if (u < acc) return i;
    }
    return last_positive;
}

inline std::size_t sample_index(const std::vector<double>& row, double u) {
    return sample_index(row.data(), row.size(), u);
}

} // namespace gibbsgate
