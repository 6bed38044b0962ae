#include "warm/experiments.hpp"

#include "warm/common.hpp"
#include "warm/fitness.hpp"
#include "warm/urn.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#ifndef WARM_VERSION
#define WARM_VERSION "unknown"
#endif

namespace warm {

namespace {

// Experiment-scoped salts for seed derivation.
constexpr std::uint64_t kSaltDistance = 0x44495354ULL;
constexpr std::uint64_t kSaltTightness = 0x54494748ULL;
constexpr std::uint64_t kSaltFittest = 0x46495454ULL;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Runs fn(i) for i in [0, n) on `workers` threads. Work items land in
// caller-owned slots indexed by i, so the merge is order-independent.
template <class Fn>
void parallel_for(std::uint64_t n, std::uint32_t workers, Fn&& fn) {
    workers = std::max<std::uint32_t>(workers, 1);
    if (workers == 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (std::uint32_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            try {
                for (;;) {
                    std::uint64_t i = next.fetch_add(1);
                    if (i >= n) return;
                    fn(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<DistanceSample> distance_samples(const ExperimentConfig& config, std::int64_t n) {
    std::uint32_t h_max = config.h_max ? *config.h_max : default_h_max(n, config.params.a);
    std::vector<DistanceSample> samples(config.replications);
    parallel_for(config.replications, config.workers, [&](std::uint64_t rep) {
        std::uint64_t seed =
            derive_seed(config.params.seed, kSaltDistance, static_cast<std::uint64_t>(n), rep);
        samples[rep] = distance(n, config.params, seed, h_max, config.tol);
    });
    return samples;
}

}  // namespace

bool distance_lower_bound_ok(std::int64_t n, std::uint32_t coalescence_layer, const Rational& a) {
    // N <= 2 sum_{i<h} a^i, cleared of denominators: N q^{h-1} <= 2 sum p^i q^{h-1-i}
    if (coalescence_layer == 0) return n == 0;
    std::uint32_t h = coalescence_layer;
    BigInt lhs = BigInt(n) * boost::multiprecision::pow(a.den(), h - 1);
    BigInt rhs = 0;
    for (std::uint32_t i = 0; i < h; ++i) {
        rhs += boost::multiprecision::pow(a.num(), i) *
               boost::multiprecision::pow(a.den(), h - 1 - i);
    }
    return lhs <= 2 * rhs;
}

std::vector<SummaryRow> monte_carlo_distance(const ExperimentConfig& config) {
    if (config.replications < 1) throw std::invalid_argument("config: replications >= 1");
    if (config.n_list.empty()) throw std::invalid_argument("config: N list must be nonempty");
    for (auto n : config.n_list) {
        if (n < 1) throw std::invalid_argument("config: every N must be >= 1");
    }

    std::vector<SummaryRow> rows;
    for (std::int64_t n : config.n_list) {
        auto samples = distance_samples(config, n);
        SummaryRow row;
        row.n = n;
        row.replications = config.replications;
        NeumaierSum sum, sum_sq;
        std::uint64_t ok = 0;
        for (const auto& s : samples) {
            switch (s.status) {
                case SampleStatus::Censored: row.censored += 1; continue;
                case SampleStatus::Uncertified: row.uncertified += 1; continue;
                case SampleStatus::Ok: break;
            }
            if (!distance_lower_bound_ok(n, s.distance / 2, config.params.a)) {
                throw std::logic_error("monte_carlo_distance: lower-bound law violated");
            }
            ++ok;
            sum.add(double(s.distance));
            sum_sq.add(double(s.distance) * double(s.distance));
        }
        if (ok > 0) {
            row.mean_h = sum.value() / double(ok);
            double var = ok > 1 ? (sum_sq.value() - double(ok) * row.mean_h * row.mean_h) /
                                      double(ok - 1)
                                : 0.0;
            row.std_h = std::sqrt(std::max(var, 0.0));
            double log_a_n = std::log(double(n)) / std::log(config.params.a_double());
            row.mean_ratio = n > 1 ? row.mean_h / log_a_n : 0.0;
            row.ci_half_width = 1.96 * row.std_h / std::sqrt(double(ok));
        }
        rows.push_back(row);
    }
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out =
        "N,mean_H,std_H,mean_ratio,censored_count,uncertified_count,replications,ci_half_width\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + fmt(r.mean_h) + "," + fmt(r.std_h) + "," +
               fmt(r.mean_ratio) + "," + std::to_string(r.censored) + "," +
               std::to_string(r.uncertified) + "," + std::to_string(r.replications) + "," +
               fmt(r.ci_half_width) + "\n";
    }
    return out;
}

TailEstimate tail_estimate(const ExperimentConfig& config, std::int64_t n,
                           const std::vector<double>& x_grid) {
    if (n < 1) throw std::invalid_argument("tail_estimate: requires N >= 1");
    auto samples = distance_samples(config, n);

    TailEstimate est;
    est.replications = config.replications;
    double log_a_n = std::log(double(n)) / std::log(config.params.a_double());
    std::vector<double> h_values;
    h_values.reserve(samples.size());
    std::uint64_t censored_tail = 0;
    for (const auto& s : samples) {
        switch (s.status) {
            case SampleStatus::Ok: h_values.push_back(double(s.distance)); break;
            // A censored sample certifies H >= 2 h_max, above any grid point.
            case SampleStatus::Censored:
                est.censored += 1;
                ++censored_tail;
                break;
            case SampleStatus::Uncertified: est.uncertified += 1; break;
        }
    }
    double denom = double(h_values.size() + censored_tail);
    if (denom == 0) throw std::runtime_error("tail_estimate: no usable samples");

    for (double x : x_grid) {
        double threshold = 2.0 * log_a_n + x;
        std::uint64_t count = censored_tail;
        for (double h : h_values) {
            if (h >= threshold) ++count;
        }
        TailRow row;
        row.x = x;
        row.survival = double(count) / denom;
        row.log_survival = count > 0 ? std::log(row.survival)
                                     : std::numeric_limits<double>::quiet_NaN();
        est.rows.push_back(row);
    }

    // Least-squares slope of log-survival where the estimate is supported by
    // at least 10 observations.
    double floor = 10.0 / denom;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : est.rows) {
        if (r.survival > floor) pts.emplace_back(r.x, r.log_survival);
    }
    est.points_used = static_cast<std::uint32_t>(pts.size());
    if (pts.size() >= 3) {
        double n_pts = double(pts.size());
        double sx = 0, sy = 0;
        for (auto& [x, y] : pts) {
            sx += x;
            sy += y;
        }
        double mx = sx / n_pts, my = sy / n_pts;
        double sxx = 0, sxy = 0;
        for (auto& [x, y] : pts) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        if (sxx > 0) {
            double slope = sxy / sxx;
            double ss_res = 0;
            for (auto& [x, y] : pts) {
                double r = y - my - slope * (x - mx);
                ss_res += r * r;
            }
            est.slope = slope;
            est.slope_stderr = std::sqrt(ss_res / (n_pts - 2.0) / sxx);
        }
    }
    return est;
}

std::string tail_csv(const TailEstimate& est) {
    std::string out = "x,survival,log_survival\n";
    for (const auto& r : est.rows) {
        out += fmt(r.x) + "," + fmt(r.survival) + "," +
               (std::isnan(r.log_survival) ? std::string("") : fmt(r.log_survival)) + "\n";
    }
    if (est.slope) {
        out += "# slope=" + fmt(*est.slope) + " stderr=" + fmt(*est.slope_stderr) +
               " points=" + std::to_string(est.points_used) + "\n";
    } else {
        out += "# slope=unavailable points=" + std::to_string(est.points_used) + "\n";
    }
    out += "# censored=" + std::to_string(est.censored) +
           " uncertified=" + std::to_string(est.uncertified) +
           " replications=" + std::to_string(est.replications) + "\n";
    return out;
}

std::vector<TightnessRow> pareto_tightness(double gamma, const std::vector<std::uint64_t>& m_list,
                                           std::uint32_t replications, std::uint64_t seed) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("tightness: gamma in (0,1)");
    if (replications < 1) throw std::invalid_argument("tightness: replications >= 1");
    std::vector<TightnessRow> rows;
    for (std::uint64_t m : m_list) {
        if (m < 2) throw std::invalid_argument("tightness: every m must be >= 2");
        std::vector<double> ratios(replications);
        for (std::uint32_t rep = 0; rep < replications; ++rep) {
            NodeStream stream(derive_seed(seed, kSaltTightness, m, rep));
            NeumaierSum sum;
            double max1 = 0.0, max2 = 0.0;
            for (std::uint64_t i = 0; i < m; ++i) {
                double f = pareto_inverse(stream.unit_at(i), gamma);
                sum.add(f);
                if (f > max1) {
                    max2 = max1;
                    max1 = f;
                } else if (f > max2) {
                    max2 = f;
                }
            }
            ratios[rep] = sum.value() / max2;
        }
        std::sort(ratios.begin(), ratios.end());
        TightnessRow row;
        row.m = m;
        row.median = ratios[ratios.size() / 2];
        row.p95 = ratios[static_cast<std::size_t>(0.95 * double(ratios.size() - 1))];
        rows.push_back(row);
    }
    return rows;
}

std::string tightness_csv(const std::vector<TightnessRow>& rows) {
    std::string out = "m,median,p95\n";
    for (const auto& r : rows) {
        out += std::to_string(r.m) + "," + fmt(r.median) + "," + fmt(r.p95) + "\n";
    }
    return out;
}

FittestRate fittest_choice_rate(const ModelParams& params, std::uint32_t layer_h,
                                std::uint32_t replications, double eps, double tol) {
    if (!(eps > 0.0)) throw std::invalid_argument("fittest_choice_rate: requires eps > 0");
    if (replications < 1) throw std::invalid_argument("fittest_choice_rate: replications >= 1");
    std::int64_t r = reach_i64(layer_h, params.a);

    FittestRate out;
    out.replications = replications;
    std::uint64_t fittest_won = 0, indicator = 0;
    for (std::uint32_t rep = 0; rep < replications; ++rep) {
        std::uint64_t seed = derive_seed(params.seed, kSaltFittest, layer_h, rep);
        FitnessField field(params, seed);
        NeumaierSum sum;
        double max_f = 0.0;
        std::int64_t argmax = -r;
        for (std::int64_t d = -r; d <= r; ++d) {
            double f = field.fitness(d, layer_h + 1);
            sum.add(f);
            if (f > max_f) {
                max_f = f;
                argmax = d;
            }
        }
        if (max_f >= eps * sum.value()) ++indicator;
        try {
            std::int64_t winner = winner_for_node(0, layer_h, params, field, tol);
            if (winner == argmax) ++fittest_won;
        } catch (const UncertifiedWinner&) {
            out.uncertified += 1;
        }
    }
    std::uint32_t usable = replications - out.uncertified;
    out.empirical_rate = usable > 0 ? double(fittest_won) / double(usable) : 0.0;
    out.p_hat = double(indicator) / double(replications);
    out.q_eps = q_epsilon(eps, params.beta, 1e-10);
    out.bound = out.q_eps * out.p_hat;
    return out;
}

std::string run_manifest_json(const ExperimentConfig& config, double wall_seconds) {
    nlohmann::ordered_json doc;
    doc["config"] = {{"a", config.params.a.to_string()},
                     {"beta", config.params.beta},
                     {"gamma", config.params.gamma},
                     {"n_list", config.n_list},
                     {"replications", config.replications},
                     {"tol", config.tol},
                     {"workers", config.workers}};
    if (config.h_max) doc["config"]["h_max"] = *config.h_max;
    doc["seed"] = config.params.seed;
    doc["version"] = WARM_VERSION;
    doc["wall_time_seconds"] = wall_seconds;
    return doc.dump(2) + "\n";
}

const char* build_version() { return WARM_VERSION; }

}  // namespace warm
