#pragma once

#include "warm/coalescence.hpp"
#include "warm/lattice.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace warm {

struct ExperimentConfig {
    ModelParams params;
    std::vector<std::int64_t> n_list;
    std::uint32_t replications = 1;
    std::optional<std::uint32_t> h_max;  // default: ceil(log_a N) + 128 per N
    double tol = kDefaultWinnerTol;
    std::uint32_t workers = 1;
};

struct SummaryRow {
    std::int64_t n = 0;
    double mean_h = 0.0;
    double std_h = 0.0;
    double mean_ratio = 0.0;  // mean H / log_a N
    std::uint32_t censored = 0;
    std::uint32_t uncertified = 0;
    std::uint32_t replications = 0;
    double ci_half_width = 0.0;  // 95%, normal approximation
};

// Exact integer form of the distance lower bound: a coalescence at layer h
// starting from horizontal distance N requires N <= 2 sum_{i<h} a^i.
bool distance_lower_bound_ok(std::int64_t n, std::uint32_t coalescence_layer, const Rational& a);

// Monte Carlo of H_N over independent replication streams. Deterministic in
// (seed, config) regardless of worker count: every replication has its own
// derived seed and results are merged by replication index.
std::vector<SummaryRow> monte_carlo_distance(const ExperimentConfig& config);

std::string summary_csv(const std::vector<SummaryRow>& rows);

struct TailRow {
    double x = 0.0;
    double survival = 0.0;      // P(H_N >= 2 log_a N + x)
    double log_survival = 0.0;  // NaN when survival is 0
};

struct TailEstimate {
    std::vector<TailRow> rows;
    std::optional<double> slope;         // least-squares on log-survival
    std::optional<double> slope_stderr;
    std::uint32_t points_used = 0;
    std::uint32_t censored = 0;
    std::uint32_t uncertified = 0;
    std::uint32_t replications = 0;
};

TailEstimate tail_estimate(const ExperimentConfig& config, std::int64_t n,
                           const std::vector<double>& x_grid);

std::string tail_csv(const TailEstimate& est);

struct TightnessRow {
    std::uint64_t m = 0;
    double median = 0.0;
    double p95 = 0.0;
};

// Quantiles of S_m / M_m^{(2)} (sum over second-largest) of m iid Pareto(gamma).
std::vector<TightnessRow> pareto_tightness(double gamma, const std::vector<std::uint64_t>& m_list,
                                           std::uint32_t replications, std::uint64_t seed);

std::string tightness_csv(const std::vector<TightnessRow>& rows);

struct FittestRate {
    double empirical_rate = 0.0;  // winner == max-fitness neighbor
    double bound = 0.0;           // q_eps * P_hat(M >= eps S), same draws
    double q_eps = 0.0;
    double p_hat = 0.0;
    std::uint32_t replications = 0;
    std::uint32_t uncertified = 0;
};

// Winner-is-fittest frequency on real layer-h neighborhoods (2 reach(h)+1
// colors with iid Pareto fitnesses).
FittestRate fittest_choice_rate(const ModelParams& params, std::uint32_t layer_h,
                                std::uint32_t replications, double eps, double tol);

// JSON run manifest: config + seed + build version + wall time.
std::string run_manifest_json(const ExperimentConfig& config, double wall_seconds);

const char* build_version();

}  // namespace warm
