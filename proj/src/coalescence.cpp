#include "warm/coalescence.hpp"

#include "warm/urn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace warm {

namespace {

constexpr std::int64_t kCoordGuard = std::int64_t(1) << 62;

std::int64_t to_i64_checked(const BigInt& x) {
    if (x > kCoordGuard || x < -kCoordGuard) {
        throw std::overflow_error("walk coordinate outside simulable range");
    }
    return x.convert_to<std::int64_t>();
}

}  // namespace

WalkPair make_walk_pair(std::int64_t left0, std::int64_t right0) {
    WalkPair pair;
    pair.left.emplace_back(left0);
    pair.right.emplace_back(right0);
    if (left0 == right0) pair.coalesced_at = 0;
    return pair;
}

std::int64_t winner_for_node(std::int64_t x, std::uint32_t h, const ModelParams& params,
                             const FitnessField& field, double tol) {
    std::int64_t r = reach_i64(h, params.a);
    if (r > (kCoordGuard - std::abs(x)) || 2 * r + 1 <= 0) {
        throw std::overflow_error("urn color range outside simulable range");
    }
    std::uint64_t m = static_cast<std::uint64_t>(2 * r + 1);
    NodeStream stream(field.seed(), x, h, StreamTag::Urn);
    std::int64_t base = x - r;
    WinnerResult res = sample_winner_rubin_stream(
        m,
        [&](std::uint64_t i) { return field.fitness(base + static_cast<std::int64_t>(i), h + 1); },
        stream, params.beta, tol);
    return base + static_cast<std::int64_t>(res.index);
}

void step_walk(WalkPair& pair, const ModelParams& params, const FitnessField& field, double tol) {
    if (pair.coalesced_at) throw std::logic_error("step_walk: walks already coalesced");
    std::uint32_t h = pair.layer();
    std::int64_t r = reach_i64(h, params.a);

    auto advance = [&](const BigInt& cur) -> std::int64_t {
        std::int64_t x = to_i64_checked(cur);
        detail::NodeKey64 key{x, h};
        auto it = pair.memo.find(key);
        if (it != pair.memo.end()) return it->second;
        std::int64_t next = winner_for_node(x, h, params, field, tol);
        if (next < x - r || next > x + r) {
            throw std::logic_error("step_walk: winner violates reach bound");
        }
        pair.memo.emplace(key, next);
        return next;
    };

    std::int64_t next_l = advance(pair.left.back());
    std::int64_t next_r = advance(pair.right.back());
    pair.left.emplace_back(next_l);
    pair.right.emplace_back(next_r);
    if (next_l == next_r) pair.coalesced_at = h + 1;
}

std::vector<BigInt> d_sequence(const WalkPair& pair) {
    std::vector<BigInt> d;
    d.reserve(pair.left.size());
    for (std::size_t i = 0; i < pair.left.size(); ++i) {
        d.emplace_back(pair.right[i] - pair.left[i]);
    }
    return d;
}

std::uint32_t default_h_max(std::int64_t n, const Rational& a) {
    double log_a_n = n > 1 ? std::log(double(n)) / std::log(a.to_double()) : 0.0;
    return static_cast<std::uint32_t>(std::ceil(log_a_n)) + 128;
}

DistanceSample distance(std::int64_t n, const ModelParams& params, std::uint64_t seed,
                        std::uint32_t h_max, double tol) {
    if (n < 1) throw std::invalid_argument("distance: requires N >= 1");
    return distance_from(0, n, params, seed, h_max, tol);
}

DistanceSample distance_from(std::int64_t origin, std::int64_t n, const ModelParams& params,
                             std::uint64_t seed, std::uint32_t h_max, double tol,
                             WalkPair* out_pair) {
    if (n < 0) throw std::invalid_argument("distance: requires N >= 0");
    FitnessField field(params, seed);
    WalkPair pair = make_walk_pair(origin, origin + n);
    DistanceSample sample;
    sample.n = n;
    sample.seed = seed;
    try {
        while (!pair.coalesced_at && pair.layer() < h_max) {
            step_walk(pair, params, field, tol);
        }
        if (pair.coalesced_at) {
            sample.status = SampleStatus::Ok;
            sample.distance = 2 * *pair.coalesced_at;
        } else {
            sample.status = SampleStatus::Censored;
        }
    } catch (const UncertifiedWinner&) {
        sample.status = SampleStatus::Uncertified;
    }
    sample.layers_explored = pair.layer();
    if (out_pair) *out_pair = std::move(pair);
    return sample;
}

}  // namespace warm
