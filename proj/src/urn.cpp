#include "warm/urn.hpp"

#include <cmath>

namespace warm {

UrnInstance::UrnInstance(std::vector<double> fitnesses_, double beta_)
    : fitnesses(std::move(fitnesses_)), beta(beta_) {
    if (fitnesses.empty()) throw std::invalid_argument("urn: needs at least one color");
    if (!(beta > 1.0)) throw std::invalid_argument("urn: requires beta > 1");
    for (double f : fitnesses) {
        if (!std::isfinite(f) || f < 1.0) {
            throw std::invalid_argument("urn: fitnesses must be finite and >= 1");
        }
    }
}

std::vector<std::uint64_t> simulate_urn_steps(const UrnInstance& urn, std::uint64_t n_steps,
                                              const NodeStream& stream) {
    const std::size_t m = urn.fitnesses.size();
    std::vector<std::uint64_t> weights(m, 1);
    std::vector<double> score(m);  // F_i * W_i^beta
    for (std::size_t i = 0; i < m; ++i) score[i] = urn.fitnesses[i];

    for (std::uint64_t t = 0; t < n_steps; ++t) {
        NeumaierSum total;
        for (std::size_t i = 0; i < m; ++i) total.add(score[i]);
        double target = stream.unit_at(t) * total.value();
        NeumaierSum cum;
        std::size_t chosen = m - 1;
        for (std::size_t i = 0; i < m; ++i) {
            cum.add(score[i]);
            if (cum.value() >= target) {
                chosen = i;
                break;
            }
        }
        weights[chosen] += 1;
        score[chosen] = urn.fitnesses[chosen] * std::pow(double(weights[chosen]), urn.beta);
    }
    return weights;
}

double q_epsilon(double eps, double beta, double tol) {
    if (!(eps > 0.0)) throw std::invalid_argument("q_epsilon: requires eps > 0");
    if (!(beta > 1.0)) throw std::invalid_argument("q_epsilon: requires beta > 1");
    if (!(tol > 0.0)) throw std::invalid_argument("q_epsilon: requires tol > 0");

    // -log q = sum g(n) with g(n) = log1p(1/(eps n^beta)), g decreasing, so the
    // tail sum over n > K is bracketed by integrals of g; the integrals in turn
    // by u - u^2/2 <= log1p(u) <= u with u = 1/(eps t^beta).
    std::uint64_t terms = 64;
    for (;;) {
        double log_partial = 0.0;
        for (std::uint64_t n = 1; n <= terms; ++n) {
            log_partial += std::log1p(-1.0 / (1.0 + eps * std::pow(double(n), beta)));
        }
        double k = double(terms);
        double tail_hi = std::pow(k, 1.0 - beta) / (eps * (beta - 1.0));
        double tail_lo = std::pow(k + 1.0, 1.0 - beta) / (eps * (beta - 1.0)) -
                         std::pow(k + 1.0, 1.0 - 2.0 * beta) /
                             (2.0 * eps * eps * (2.0 * beta - 1.0));
        tail_lo = std::max(tail_lo, 0.0);
        double upper = std::exp(log_partial - tail_lo);
        double lower = std::exp(log_partial - tail_hi);
        if (upper - lower <= tol) return 0.5 * (upper + lower);
        if (terms >= (1ULL << 28)) {
            throw std::runtime_error("q_epsilon: tolerance not reachable");
        }
        terms *= 2;
    }
}

WinnerResult sample_winner_rubin(const UrnInstance& urn, const NodeStream& stream, double tol,
                                 std::uint64_t term_cap) {
    return sample_winner_rubin_stream(
        urn.fitnesses.size(), [&](std::uint64_t i) { return urn.fitnesses[i]; }, stream, urn.beta,
        tol, term_cap);
}

}  // namespace warm
