#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "warm/coalescence.hpp"
#include "warm/common.hpp"
#include "warm/experiments.hpp"

#include <cmath>

using namespace warm;

namespace {
const ModelParams kParams{Rational::parse("3"), 1.5, 0.2, 7};

void check_step_bounds(const WalkPair& pair, const Rational& a) {
    for (std::size_t i = 0; i + 1 < pair.left.size(); ++i) {
        BigInt r = reach(static_cast<std::uint32_t>(i), a);
        BigInt dl = pair.left[i + 1] - pair.left[i];
        BigInt dr = pair.right[i + 1] - pair.right[i];
        CHECK(abs(dl) <= r);
        CHECK(abs(dr) <= r);
    }
}
}  // namespace

TEST_CASE("walk pairs start where asked") {
    WalkPair pair = make_walk_pair(0, 10);
    CHECK(pair.left[0] == 0);
    CHECK(pair.right[0] == 10);
    CHECK_FALSE(pair.coalesced_at.has_value());
    CHECK(make_walk_pair(4, 4).coalesced_at == 0U);
}

TEST_CASE("winners respect the reach bound, integer and fractional a") {
    for (const char* a_text : {"3", "5/2"}) {
        ModelParams params(Rational::parse(a_text), 1.5, 0.2, 13);
        FitnessField field(params);
        for (std::uint32_t h = 0; h <= 5; ++h) {
            std::int64_t r = reach_i64(h, params.a);
            for (std::int64_t x : {-20, -1, 0, 3, 17}) {
                std::int64_t w = winner_for_node(x, h, params, field, 1e-9);
                CHECK(w >= x - r);
                CHECK(w <= x + r);
            }
        }
    }
}

TEST_CASE("winners are memo-stable: repeated queries agree") {
    FitnessField field(kParams);
    for (std::int64_t x = -10; x <= 10; ++x) {
        for (std::uint32_t h = 0; h <= 4; ++h) {
            CHECK(winner_for_node(x, h, kParams, field, 1e-9) ==
                  winner_for_node(x, h, kParams, field, 1e-9));
        }
    }
}

TEST_CASE("full walks: step bounds, even distance, lower-bound law") {
    for (const char* a_text : {"3", "5/2"}) {
        ModelParams base(Rational::parse(a_text), 1.5, 0.2, 7);
        for (std::uint64_t rep = 0; rep < 40; ++rep) {
            std::int64_t n = 1 + std::int64_t(rep % 5) * 37;
            std::uint64_t seed = derive_seed(base.seed, 1001, rep);
            WalkPair pair;
            DistanceSample s = distance_from(0, n, base, seed, default_h_max(n, base.a),
                                             kDefaultWinnerTol, &pair);
            check_step_bounds(pair, base.a);
            if (s.status == SampleStatus::Ok) {
                CHECK(s.distance % 2 == 0);
                CHECK(s.distance == 2 * *pair.coalesced_at);
                CHECK(distance_lower_bound_ok(n, s.distance / 2, base.a));
                CHECK(pair.left.back() == pair.right.back());
            }
        }
    }
}

TEST_CASE("d-sequence is the walk gap, layer by layer") {
    WalkPair pair;
    std::uint64_t seed = derive_seed(kParams.seed, 1002, 0);
    distance_from(0, 100, kParams, seed, default_h_max(100, kParams.a), kDefaultWinnerTol, &pair);
    auto d = d_sequence(pair);
    REQUIRE(d.size() == pair.left.size());
    CHECK(d[0] == 100);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d[i] == pair.right[i] - pair.left[i]);
    }
    if (pair.coalesced_at) CHECK(d.back() == 0);
}

TEST_CASE("distance sampling is deterministic in its seed") {
    auto a = distance(729, kParams, 555, default_h_max(729, kParams.a), kDefaultWinnerTol);
    auto b = distance(729, kParams, 555, default_h_max(729, kParams.a), kDefaultWinnerTol);
    CHECK(a.status == b.status);
    CHECK(a.distance == b.distance);
    CHECK(a.layers_explored == b.layers_explored);
}

TEST_CASE("h_max censoring is reported, never imputed") {
    // h_max = 1 cannot absorb N = 729 (reach(0) = 1), so the sample must be
    // censored with the explored depth recorded.
    auto s = distance(729, kParams, 9, 1, kDefaultWinnerTol);
    CHECK(s.status == SampleStatus::Censored);
    CHECK(s.layers_explored == 1);
}

TEST_CASE("default censoring depth follows ceil(log_a N)") {
    CHECK(default_h_max(1, Rational::parse("3")) == 128);
    CHECK(default_h_max(729, Rational::parse("3")) == 134);
    CHECK(default_h_max(730, Rational::parse("3")) == 135);
}

TEST_CASE("distance requires N >= 1") {
    CHECK_THROWS_AS(distance(0, kParams, 1, 10, 1e-9), std::invalid_argument);
}
