#pragma once

#include "warm/fitness.hpp"
#include "warm/lattice.hpp"

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace warm {

namespace detail {

struct NodeKey64 {
    std::int64_t x;
    std::uint32_t h;
    bool operator==(const NodeKey64& o) const { return x == o.x && h == o.h; }
};

struct NodeKey64Hash {
    std::size_t operator()(const NodeKey64& k) const {
        return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(k.x) ^
                                              mix64(static_cast<std::uint64_t>(k.h))));
    }
};

}  // namespace detail

// The two directed walks from (0,0) and (N,0) that follow the unique
// reinforced out-edge of every node. Winner decisions are memoized per node,
// so if both walks visit the same node they take the identical edge.
struct WalkPair {
    std::vector<BigInt> left;   // L_0 .. L_h
    std::vector<BigInt> right;  // R_0 .. R_h
    std::optional<std::uint32_t> coalesced_at;
    std::unordered_map<detail::NodeKey64, std::int64_t, detail::NodeKey64Hash> memo;

    std::uint32_t layer() const { return static_cast<std::uint32_t>(left.size()) - 1; }
};

enum class SampleStatus : std::uint8_t {
    Ok = 0,
    Censored = 1,     // no coalescence by h_max; reported, never imputed
    Uncertified = 2,  // a winner could not be certified within tolerance
};

struct DistanceSample {
    std::int64_t n = 0;
    SampleStatus status = SampleStatus::Ok;
    std::uint32_t distance = 0;  // H_N = 2 * coalescence layer, valid when Ok
    std::uint32_t layers_explored = 0;
    std::uint64_t seed = 0;
};

WalkPair make_walk_pair(std::int64_t left0, std::int64_t right0);

// The certified winner out-neighbor of node v = (x, h); pure in (field, v).
std::int64_t winner_for_node(std::int64_t x, std::uint32_t h, const ModelParams& params,
                             const FitnessField& field, double tol);

// Advance both walks one layer. Throws UncertifiedWinner when a winner cannot
// be certified; the caller turns that into an Uncertified sample.
void step_walk(WalkPair& pair, const ModelParams& params, const FitnessField& field, double tol);

// D_h = R_h - L_h for every recorded layer.
std::vector<BigInt> d_sequence(const WalkPair& pair);

inline constexpr double kDefaultWinnerTol = 1e-9;

std::uint32_t default_h_max(std::int64_t n, const Rational& a);

DistanceSample distance(std::int64_t n, const ModelParams& params, std::uint64_t seed,
                        std::uint32_t h_max, double tol);

// Same law shifted horizontally: walks start at (origin, 0) and (origin+n, 0).
DistanceSample distance_from(std::int64_t origin, std::int64_t n, const ModelParams& params,
                             std::uint64_t seed, std::uint32_t h_max, double tol,
                             WalkPair* out_pair = nullptr);

}  // namespace warm
