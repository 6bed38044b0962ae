#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace warm {

// SplitMix64 finalizer. Used as the mixing primitive for all counter-based
// randomness in the project.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Absorb one word into a running key.
inline std::uint64_t absorb(std::uint64_t state, std::uint64_t word) {
    return mix64((state + kGolden) ^ word);
}

// Derive an independent 64-bit seed from a master seed and up to three
// context words (experiment name hash, N, replication index, ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t w0,
                                 std::uint64_t w1 = 0, std::uint64_t w2 = 0) {
    std::uint64_t s = absorb(master, 0xD1B54A32D192ED03ULL);
    s = absorb(s, w0);
    s = absorb(s, w1);
    s = absorb(s, w2);
    return s;
}

// Neumaier compensated summation. Fitness sums mix magnitudes across many
// orders (gamma < 1 means infinite mean), so plain accumulation loses the
// small terms.
class NeumaierSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace warm
