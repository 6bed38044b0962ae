#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace warm {

using BigInt = boost::multiprecision::cpp_int;

// Exact rational reach base. The edge rule |l - k| <= a^h has to be decided
// exactly at integer boundaries, so `a` is carried as p/q rather than as a
// double. Accepts "3", "2.5" and "5/2" style input.
class Rational {
  public:
    Rational() : num_(1), den_(1) {}
    Rational(BigInt num, BigInt den);

    static Rational parse(const std::string& text);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    double to_double() const;
    bool is_integer() const { return den_ == 1; }
    std::string to_string() const;

    bool operator==(const Rational& o) const = default;

  private:
    BigInt num_;  // > 0
    BigInt den_;  // >= 1, gcd(num, den) == 1
};

struct ModelParams {
    Rational a;      // reach base, > 1
    double beta;     // reinforcement exponent, > 1
    double gamma;    // fitness tail index, in (0, 1)
    std::uint64_t seed = 0;

    ModelParams(Rational a_, double beta_, double gamma_, std::uint64_t seed_);
    double a_double() const { return a.to_double(); }
};

// Lattice vertex (x, h). Coordinates are arbitrary precision so reach
// arithmetic up to h_max never wraps.
struct NodeId {
    BigInt x;
    std::uint32_t h = 0;

    NodeId() = default;
    NodeId(BigInt x_, std::uint32_t h_) : x(std::move(x_)), h(h_) {}
    NodeId(long long x_, std::uint32_t h_) : x(x_), h(h_) {}

    bool operator==(const NodeId& o) const { return h == o.h && x == o.x; }
    bool operator<(const NodeId& o) const {
        if (h != o.h) return h < o.h;
        return x < o.x;
    }
};

// r_h = floor(a^h), computed exactly from the rational representation.
BigInt reach(std::uint32_t h, const Rational& a);

// Same, narrowed to int64 for simulation hot paths. Throws std::overflow_error
// if the exact value does not fit.
std::int64_t reach_i64(std::uint32_t h, const Rational& a);

// The 2*reach(h)+1 out-neighbors of v, sorted ascending by x. The position in
// this list is the urn color index of the corresponding edge.
std::vector<NodeId> out_neighbors(const NodeId& v, const Rational& a);

// (#union, #intersection) of the out-neighborhoods of two same-layer nodes.
std::pair<BigInt, BigInt> neighborhood_overlap(const NodeId& l, const NodeId& r,
                                               const Rational& a);

}  // namespace warm
