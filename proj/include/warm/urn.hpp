#pragma once

#include "warm/common.hpp"
#include "warm/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace warm {

// One node's out-edge competition: color i is selected with probability
// proportional to fitness[i] * W[i]^beta.
struct UrnInstance {
    std::vector<double> fitnesses;
    double beta;

    UrnInstance(std::vector<double> fitnesses_, double beta_);
};

struct WinnerResult {
    std::uint64_t index;         // argmin of the exponential race times
    double certified_error;      // upper bound on P(reported argmin is wrong)
    std::uint64_t terms_used;    // exponential draws consumed
};

// Raised when the winner cannot be certified within tolerance at the term cap.
class UncertifiedWinner : public std::runtime_error {
  public:
    UncertifiedWinner(double achieved, double tol)
        : std::runtime_error("rubin winner uncertified: achieved error " +
                             std::to_string(achieved) + " > tol " + std::to_string(tol)),
          achieved_error(achieved) {}
    double achieved_error;
};

// Direct finite-step simulation of the urn chain; the independent oracle for
// the Rubin sampler. Starting from all-ones weights, performs n_steps draws.
std::vector<std::uint64_t> simulate_urn_steps(const UrnInstance& urn, std::uint64_t n_steps,
                                              const NodeStream& stream);

// q_eps = prod_{n>=1} (1 - (1 + eps n^beta)^{-1}), to absolute error <= tol.
double q_epsilon(double eps, double beta, double tol);

namespace detail {

// Mean of the unrealized tail sum_{k>K} E_k / (F k^beta).
inline double rubin_tail_mean(double F, double K, double beta) {
    return std::pow(K, 1.0 - beta) / (F * (beta - 1.0));
}

// P(sum_{k>K} E_k/(F k^beta) > gap). Best of the Markov bound and an exact
// Chernoff bound exp(-(sqrt(c) - sqrt(keff))^2) with c = F (K+1)^beta gap and
// keff = (K+1)^beta K^{1-beta}/(beta-1). The Markov bound alone cannot reach
// small tolerances at realistic term counts when beta is close to 1.
inline double rubin_tail_exceed(double F, double K, double beta, double gap) {
    if (!(gap > 0.0)) return 1.0;
    double bound = rubin_tail_mean(F, K, beta) / gap;
    double kb = std::pow(K + 1.0, beta);
    double c = F * kb * gap;
    double keff = kb * std::pow(K, 1.0 - beta) / (beta - 1.0);
    if (c > keff) {
        double d = std::sqrt(c) - std::sqrt(keff);
        bound = std::min(bound, std::exp(-d * d));
    }
    return std::min(bound, 1.0);
}

struct Racer {
    std::uint64_t idx;
    double fitness;
    double partial;    // sum_{k<=terms} E_k / (F k^beta)
    std::uint64_t terms;
};

inline constexpr double kContenderFactor = 256.0;
inline constexpr double kTieRelGap = 0x1.0p-40;

// Draws for color i use counters i, m+i, 2m+i, ... (color-major round-robin),
// so the value of E_{i,k} does not depend on the adaptive deepening path.
inline void extend_partial(Racer& r, std::uint64_t m, double beta, const NodeStream& stream,
                           std::uint64_t terms_to, std::uint64_t& terms_used) {
    for (std::uint64_t k = r.terms + 1; k <= terms_to; ++k) {
        r.partial += stream.exp_at((k - 1) * m + r.idx) / (r.fitness * std::pow(double(k), beta));
    }
    terms_used += terms_to - r.terms;
    r.terms = terms_to;
}

}  // namespace detail

// Exact-in-law winner sampling via Rubin's exponential embedding, streaming
// over colors: fit(i) must return the fitness of color i and be a pure
// function of i. The winner is argmin_i sum_{k>=1} E_{i,k}/(F_i k^beta);
// partial sums are deepened adaptively until the probability that any other
// color overtakes the leader is certified <= tol.
template <class FitFn>
WinnerResult sample_winner_rubin_stream(std::uint64_t m, FitFn&& fit, const NodeStream& stream,
                                        double beta, double tol,
                                        std::uint64_t term_cap = 1ULL << 20) {
    using detail::Racer;
    if (m == 0) throw std::invalid_argument("rubin: urn needs at least one color");
    if (!(beta > 1.0)) throw std::invalid_argument("rubin: requires beta > 1");
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("rubin: tol must be in (0,1)");
    if (m >= (1ULL << 43)) throw std::overflow_error("rubin: color count exceeds counter range");
    if (m == 1) return {0, 0.0, 0};

    // Pass over all colors: first race terms. Only colors whose first term is
    // within kContenderFactor of the running minimum are kept; everything else
    // is eliminated with the guarantee first_term >= factor * final minimum.
    std::vector<Racer> racers;
    racers.reserve(64);
    std::size_t prune_cap = 8192;
    double t1_min = std::numeric_limits<double>::infinity();
    std::uint64_t eliminated = 0;

    auto prune = [&]() {
        std::size_t kept = 0;
        for (std::size_t j = 0; j < racers.size(); ++j) {
            if (racers[j].partial < detail::kContenderFactor * t1_min) {
                racers[kept++] = racers[j];
            } else {
                ++eliminated;
            }
        }
        racers.resize(kept);
    };

    for (std::uint64_t i = 0; i < m; ++i) {
        double F = fit(i);
        if (!(F > 0.0) || !std::isfinite(F)) {
            throw std::invalid_argument("rubin: fitness must be positive and finite");
        }
        double t1 = stream.exp_at(i) / F;
        if (t1 < t1_min) t1_min = t1;
        if (t1 < detail::kContenderFactor * t1_min) {
            racers.push_back({i, F, t1, 1});
            if (racers.size() >= prune_cap) {
                prune();
                if (racers.size() >= prune_cap) prune_cap *= 2;
            }
        } else {
            ++eliminated;
        }
    }
    prune();

    std::uint64_t terms_used = m;

    // Exact-elimination state. When the bulk bound over eliminated colors is
    // not sharp enough, one extra pass recomputes per-color bounds against a
    // frozen leader prefix; the frozen leader is then never deepened again so
    // the per-color bounds stay valid.
    int exact_passes = 0;
    bool have_exact = false;
    std::uint64_t exact_lead_idx = 0;
    double exact_elim_err = 0.0;
    double last_err = 1.0;

    for (int round = 0; round < 512; ++round) {
        std::size_t lead = 0;
        for (std::size_t j = 1; j < racers.size(); ++j) {
            if (racers[j].partial < racers[lead].partial) lead = j;
        }
        Racer& l = racers[lead];
        if (have_exact && l.idx != exact_lead_idx) have_exact = false;

        double contender_err = 0.0;
        bool tie = false;
        for (std::size_t j = 0; j < racers.size(); ++j) {
            if (j == lead) continue;
            double gap = racers[j].partial - l.partial;
            if (gap <= detail::kTieRelGap * racers[j].partial) {
                tie = true;
                contender_err += 1.0;
                continue;
            }
            contender_err += detail::rubin_tail_exceed(l.fitness, double(l.terms), beta, gap);
        }
        double elim_err = 0.0;
        if (eliminated > 0) {
            if (have_exact) {
                elim_err = exact_elim_err;
            } else {
                double g = detail::kContenderFactor * t1_min - l.partial;
                elim_err = double(eliminated) *
                           detail::rubin_tail_exceed(l.fitness, double(l.terms), beta, g);
            }
        }
        double err = contender_err + elim_err;
        last_err = err;
        if (err <= tol && !tie) {
            return {l.idx, err, terms_used};
        }

        // Deepen. A longer leader prefix sharpens every bound; lagging
        // contenders grow their gaps. The frozen leader is left alone.
        bool progress = false;
        bool leader_frozen = have_exact && l.idx == exact_lead_idx;
        if (!leader_frozen && l.terms < term_cap) {
            detail::extend_partial(l, m, beta, stream, std::min<std::uint64_t>(term_cap, l.terms * 8),
                                   terms_used);
            progress = true;
        }
        double budget = 0.25 * tol / double(racers.size());
        for (std::size_t j = 0; j < racers.size(); ++j) {
            if (j == lead || racers[j].terms >= term_cap) continue;
            double gap = racers[j].partial - racers[lead].partial;
            bool close = gap <= detail::kTieRelGap * racers[j].partial;
            double e = close ? 1.0
                             : detail::rubin_tail_exceed(racers[lead].fitness,
                                                         double(racers[lead].terms), beta, gap);
            if (close || e > budget) {
                detail::extend_partial(racers[j], m, beta, stream,
                                       std::min<std::uint64_t>(term_cap, racers[j].terms * 8),
                                       terms_used);
                progress = true;
            }
        }
        if (progress) continue;

        // Every useful prefix is maxed out; the remaining slack must come from
        // replacing the bulk elimination bound with exact per-color bounds.
        if (eliminated == 0 || have_exact || exact_passes >= 3) {
            throw UncertifiedWinner(err, tol);
        }
        ++exact_passes;
        const Racer frozen = racers[lead];
        std::vector<std::uint64_t> in_race;
        in_race.reserve(racers.size());
        for (const auto& r : racers) in_race.push_back(r.idx);
        std::sort(in_race.begin(), in_race.end());
        exact_elim_err = 0.0;
        eliminated = 0;
        // A color whose per-color bound is not comfortably below tol is still a
        // live contender (its first term may even undercut the leader's full
        // prefix) and must race rather than be bounded away.
        double reentry = 0.25 * tol / double(m);
        for (std::uint64_t i = 0; i < m; ++i) {
            if (std::binary_search(in_race.begin(), in_race.end(), i)) continue;
            double t1 = stream.exp_at(i) / fit(i);
            double gap = t1 - frozen.partial;
            double bound = detail::rubin_tail_exceed(frozen.fitness, double(frozen.terms), beta,
                                                     gap);
            if (gap <= detail::kTieRelGap * t1 || bound > reentry) {
                racers.push_back({i, fit(i), t1, 1});
            } else {
                exact_elim_err += bound;
                ++eliminated;
            }
        }
        have_exact = true;
        exact_lead_idx = frozen.idx;
    }
    throw UncertifiedWinner(last_err, tol);
}

// Vector-fitness wrapper over the streaming sampler.
WinnerResult sample_winner_rubin(const UrnInstance& urn, const NodeStream& stream, double tol,
                                 std::uint64_t term_cap = 1ULL << 20);

}  // namespace warm
