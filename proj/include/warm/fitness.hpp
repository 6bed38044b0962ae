#pragma once

#include "warm/common.hpp"
#include "warm/lattice.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace warm {

// Purpose tag separating the independent randomness streams attached to one
// node.
enum class StreamTag : std::uint8_t {
    Fitness = 1,   // the node's Pareto fitness draw
    Urn = 2,       // exponential race clocks of the node's out-edges
    Dynamics = 3,  // neighbor selections when the node is activated
};

namespace detail {

// Canonical split of a signed coordinate into two 64-bit words
// (two's-complement 128-bit). One encoding for both the int64 fast path and
// the BigInt path, so hashing is a pure function of the coordinate value.
struct XWords {
    std::uint64_t lo;
    std::uint64_t hi;
};

inline XWords split_x(std::int64_t x) {
    return {static_cast<std::uint64_t>(x), x < 0 ? ~0ULL : 0ULL};
}

inline XWords split_x(const BigInt& x) {
    if (boost::multiprecision::msb(x < 0 ? BigInt(-x) : (x == 0 ? BigInt(1) : x)) >= 126) {
        throw std::overflow_error("coordinate outside 127-bit stream-key range");
    }
    __int128 v = x.convert_to<__int128>();
    return {static_cast<std::uint64_t>(static_cast<unsigned __int128>(v)),
            static_cast<std::uint64_t>(static_cast<unsigned __int128>(v) >> 64)};
}

inline std::uint64_t node_key(std::uint64_t seed, XWords x, std::uint32_t h, StreamTag tag) {
    std::uint64_t s = absorb(seed, 0xA0761D6478BD642FULL);
    s = absorb(s, x.lo);
    s = absorb(s, x.hi);
    s = absorb(s, (static_cast<std::uint64_t>(h) << 8) | static_cast<std::uint64_t>(tag));
    return s;
}

}  // namespace detail

// Counter-based random stream: a pure function of (key, counter). Random
// access by counter is what makes adaptive algorithms reproducible under any
// evaluation order.
class NodeStream {
  public:
    explicit NodeStream(std::uint64_t key) : key_(key) {}

    NodeStream(std::uint64_t seed, const NodeId& v, StreamTag tag)
        : key_(detail::node_key(seed, detail::split_x(v.x), v.h, tag)) {}

    NodeStream(std::uint64_t seed, std::int64_t x, std::uint32_t h, StreamTag tag)
        : key_(detail::node_key(seed, detail::split_x(x), h, tag)) {}

    std::uint64_t key() const { return key_; }

    std::uint64_t u64_at(std::uint64_t counter) const {
        return mix64(key_ + (counter + 1) * kGolden);
    }

    // Uniform on (0, 1]; never returns 0, so Pareto inversion is total.
    double unit_at(std::uint64_t counter) const {
        return (static_cast<double>(u64_at(counter) >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard exponential, in [0, inf).
    double exp_at(std::uint64_t counter) const { return -std::log(unit_at(counter)); }

  private:
    std::uint64_t key_;
};

// Pareto(gamma) on [1, inf): P(F > s) = s^{-gamma}. u must be in (0, 1].
inline double pareto_inverse(double u, double gamma) {
    if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("pareto_inverse: u must be in (0,1]");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("pareto_inverse: gamma in (0,1)");
    return std::pow(u, -1.0 / gamma);
}

// Lazily evaluated iid Pareto field over the whole lattice. fitness(v) is a
// pure function of (seed, v), so any subset of nodes can be evaluated in any
// order, on any thread, with identical results.
class FitnessField {
  public:
    FitnessField(const ModelParams& params, std::uint64_t seed)
        : seed_(seed), neg_inv_gamma_(-1.0 / params.gamma) {}

    explicit FitnessField(const ModelParams& params)
        : FitnessField(params, params.seed) {}

    std::uint64_t seed() const { return seed_; }

    double fitness(const NodeId& v) const {
        NodeStream s(seed_, v, StreamTag::Fitness);
        return std::pow(s.unit_at(0), neg_inv_gamma_);
    }

    double fitness(std::int64_t x, std::uint32_t h) const {
        NodeStream s(seed_, x, h, StreamTag::Fitness);
        return std::pow(s.unit_at(0), neg_inv_gamma_);
    }

  private:
    std::uint64_t seed_;
    double neg_inv_gamma_;
};

}  // namespace warm
