#include "warm/cli.hpp"

#include "warm/common.hpp"
#include "warm/coalescence.hpp"
#include "warm/dynamics.hpp"
#include "warm/experiments.hpp"
#include "warm/urn.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace warm {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

struct ModelFlags {
    std::string a = "3";
    double beta = 1.5;
    double gamma = 0.2;
    std::uint64_t seed = 0;
};

// Documentation-only: --config is expanded by merge_config before parsing.
void add_config_flag(CLI::App* cmd) {
    static std::string sink;
    cmd->add_option("--config", sink,
                    "Config file (key = value, same names as flags; flags take precedence)");
}

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
    add_config_flag(cmd);
    cmd->add_option("--a", f.a, "Reach base a > 1, decimal or fraction p/q")
        ->capture_default_str();
    cmd->add_option("--beta", f.beta, "Reinforcement exponent, > 1")->capture_default_str();
    cmd->add_option("--gamma", f.gamma, "Fitness tail index, in (0,1)")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Master seed")->envname("WARM_SEED")->capture_default_str();
}

ModelParams to_params(const ModelFlags& f) {
    return ModelParams(Rational::parse(f.a), f.beta, f.gamma, f.seed);
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Expand `--config FILE` into flags. File lines are `key = value` with the
// same names as the flags; flags given on the command line take precedence,
// so config-derived flags are only appended when the key is absent from argv.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string path;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (path.empty()) return out;

    std::ifstream file(path);
    if (!file) throw std::invalid_argument("cannot open config file: " + path);
    std::string line;
    while (std::getline(file, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config") continue;
        std::string flag = "--" + key;
        bool on_cli = false;
        for (const auto& a : out) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) on_cli = true;
        }
        if (!on_cli) {
            out.push_back(flag);
            out.push_back(value);
        }
    }
    return out;
}

void write_output(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file: " + out_path);
    file << text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Activity-reinforced layered random graph: simulation and distance experiments"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run finite-window weight dynamics and export");
    ModelFlags sim_f;
    std::uint64_t sim_steps = 20;
    std::uint32_t sim_layers = 4;
    std::int64_t sim_width = 5;
    std::string sim_format = "dot", sim_out;
    std::optional<double> sim_threshold;
    add_model_flags(simulate, sim_f);
    simulate->add_option("--steps", sim_steps, "Reinforcement steps")->capture_default_str();
    simulate->add_option("--layers", sim_layers, "Window layer count")->capture_default_str();
    simulate->add_option("--width", sim_width, "Layer-0 root width")->capture_default_str();
    simulate->add_option("--format", sim_format, "Output format: dot, json, csv")
        ->capture_default_str();
    simulate->add_option("--threshold", sim_threshold,
                         "Report only edges whose activation share exceeds this value, as CSV");
    simulate->add_option("--out", sim_out, "Output file (default: stdout)");

    // distance
    auto* dist = app.add_subcommand("distance", "Monte Carlo distance summary for one N");
    ModelFlags dist_f;
    std::int64_t dist_n = 729;
    std::uint32_t dist_reps = 200, dist_workers = 1;
    std::optional<std::uint32_t> dist_hmax;
    double dist_tol = kDefaultWinnerTol;
    std::string dist_out;
    add_model_flags(dist, dist_f);
    dist->add_option("--n", dist_n, "Horizontal distance N >= 1")->capture_default_str();
    dist->add_option("--reps", dist_reps, "Replications")->capture_default_str();
    dist->add_option("--h-max", dist_hmax, "Censoring layer (default ceil(log_a N) + 128)");
    dist->add_option("--tol", dist_tol, "Per-node winner certification tolerance")
        ->capture_default_str();
    dist->add_option("--workers", dist_workers, "Worker threads")->capture_default_str();
    dist->add_option("--out", dist_out, "Output file (default: stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo distance summary over an N list");
    ModelFlags sweep_f;
    std::vector<std::int64_t> sweep_n_list{81, 729, 6561};
    std::uint32_t sweep_reps = 200, sweep_workers = 1;
    std::optional<std::uint32_t> sweep_hmax;
    double sweep_tol = kDefaultWinnerTol;
    std::string sweep_out;
    add_model_flags(sweep, sweep_f);
    sweep->add_option("--n-list", sweep_n_list, "N values")->delimiter(',')->capture_default_str();
    sweep->add_option("--reps", sweep_reps, "Replications per N")->capture_default_str();
    sweep->add_option("--h-max", sweep_hmax, "Censoring layer");
    sweep->add_option("--tol", sweep_tol, "Winner certification tolerance")->capture_default_str();
    sweep->add_option("--workers", sweep_workers, "Worker threads")->capture_default_str();
    sweep->add_option("--out", sweep_out,
                      "Output CSV file; a JSON run manifest is written next to it");

    // tail
    auto* tail = app.add_subcommand("tail", "Empirical tail of H_N - 2 log_a N");
    ModelFlags tail_f;
    std::int64_t tail_n = 729;
    std::uint32_t tail_reps = 10000, tail_workers = 1;
    double tail_tol = kDefaultWinnerTol, tail_xmax = 24.0, tail_xstep = 2.0;
    std::optional<std::uint32_t> tail_hmax;
    std::string tail_out;
    add_model_flags(tail, tail_f);
    tail->add_option("--n", tail_n, "Horizontal distance N")->capture_default_str();
    tail->add_option("--reps", tail_reps, "Replications")->capture_default_str();
    tail->add_option("--x-max", tail_xmax, "Largest grid offset x")->capture_default_str();
    tail->add_option("--x-step", tail_xstep, "Grid step")->capture_default_str();
    tail->add_option("--h-max", tail_hmax, "Censoring layer");
    tail->add_option("--tol", tail_tol, "Winner certification tolerance")->capture_default_str();
    tail->add_option("--workers", tail_workers, "Worker threads")->capture_default_str();
    tail->add_option("--out", tail_out, "Output file (default: stdout)");

    // urn
    auto* urn_cmd = app.add_subcommand("urn", "Winner sampling and q_eps for a single urn");
    ModelFlags urn_f;
    std::vector<double> urn_fitnesses{8, 1, 1};
    std::uint32_t urn_reps = 1000;
    std::uint64_t urn_steps = 0;
    double urn_tol = 1e-6;
    std::optional<double> urn_eps;
    std::string urn_out;
    add_model_flags(urn_cmd, urn_f);
    urn_cmd->add_option("--fitnesses", urn_fitnesses, "Color fitnesses")
        ->delimiter(',')
        ->capture_default_str();
    urn_cmd->add_option("--reps", urn_reps, "Winner draws")->capture_default_str();
    urn_cmd->add_option("--steps", urn_steps,
                        "Also run the direct-simulation oracle with this many steps");
    urn_cmd->add_option("--tol", urn_tol, "Winner certification tolerance")->capture_default_str();
    urn_cmd->add_option("--eps", urn_eps, "Print q_eps = prod(1 - (1+eps n^beta)^-1) and exit");
    urn_cmd->add_option("--out", urn_out, "Output file (default: stdout)");

    // pareto
    auto* pareto = app.add_subcommand("pareto", "Tightness quantiles of S_m / M_m^(2)");
    ModelFlags pareto_f;
    std::vector<std::uint64_t> pareto_m_list{10, 100, 1000, 10000};
    std::uint32_t pareto_reps = 2000;
    std::string pareto_out;
    add_model_flags(pareto, pareto_f);
    pareto->add_option("--m-list", pareto_m_list, "Sample sizes m")
        ->delimiter(',')
        ->capture_default_str();
    pareto->add_option("--reps", pareto_reps, "Replications per m")->capture_default_str();
    pareto->add_option("--out", pareto_out, "Output file (default: stdout)");

    // export
    auto* exp_cmd = app.add_subcommand("export", "Re-export a JSON graph dump as dot/json/csv");
    std::string exp_in, exp_format = "dot", exp_out;
    add_config_flag(exp_cmd);
    exp_cmd->add_option("--in", exp_in, "Input JSON graph file")->required();
    exp_cmd->add_option("--format", exp_format, "Output format: dot, json, csv")
        ->capture_default_str();
    exp_cmd->add_option("--out", exp_out, "Output file (default: stdout)");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        std::vector<std::string> merged = merge_config(args);
        std::reverse(merged.begin(), merged.end());
        app.parse(std::move(merged));
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 1;
    }

    try {
        if (*simulate) {
            auto fmt_opt = parse_export_format(sim_format);
            if (!fmt_opt) throw CLI::ValidationError("--format", "unknown format: " + sim_format);
            Window window = Window::cone(to_params(sim_f), 0, sim_width - 1, sim_layers);
            auto snapshots = run(window, sim_steps);
            if (sim_threshold) {
                const WeightState& state = snapshots.back();
                std::string csv = "from_x,from_h,to_x,to_h,weight,share\n";
                for (const EdgeRef& e : relevant_edges(state, *sim_threshold)) {
                    auto acts = state.activations.at({e.from_h, e.from_x});
                    csv += std::to_string(e.from_x) + "," + std::to_string(e.from_h) + "," +
                           std::to_string(e.to_x) + "," + std::to_string(e.from_h + 1) + "," +
                           std::to_string(state.weight(e)) + "," +
                           fmt(double(state.weight(e) - 1) / double(acts)) + "\n";
                }
                write_output(csv, sim_out, out);
            } else {
                write_output(export_graph(window, snapshots.back(), *fmt_opt), sim_out, out);
            }
        } else if (*dist) {
            ExperimentConfig config{to_params(dist_f), {dist_n}, dist_reps,
                                    dist_hmax,         dist_tol, dist_workers};
            write_output(summary_csv(monte_carlo_distance(config)), dist_out, out);
        } else if (*sweep) {
            ExperimentConfig config{to_params(sweep_f), sweep_n_list, sweep_reps,
                                    sweep_hmax,         sweep_tol,    sweep_workers};
            auto t0 = std::chrono::steady_clock::now();
            std::string csv = summary_csv(monte_carlo_distance(config));
            double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                              .count();
            write_output(csv, sweep_out, out);
            if (!sweep_out.empty()) {
                write_output(run_manifest_json(config, wall), sweep_out + ".manifest.json", out);
            }
        } else if (*tail) {
            ExperimentConfig config{to_params(tail_f), {tail_n}, tail_reps,
                                    tail_hmax,         tail_tol, tail_workers};
            std::vector<double> grid;
            for (double x = 0.0; x <= tail_xmax; x += tail_xstep) grid.push_back(x);
            write_output(tail_csv(tail_estimate(config, tail_n, grid)), tail_out, out);
        } else if (*urn_cmd) {
            ModelParams params = to_params(urn_f);
            if (urn_eps) {
                write_output("q_epsilon," + fmt(q_epsilon(*urn_eps, params.beta, 1e-10)) + "\n",
                             urn_out, out);
            } else {
                UrnInstance urn(urn_fitnesses, params.beta);
                std::vector<std::uint64_t> rubin_wins(urn.fitnesses.size(), 0);
                std::vector<std::uint64_t> direct_wins(urn.fitnesses.size(), 0);
                for (std::uint32_t rep = 0; rep < urn_reps; ++rep) {
                    NodeStream stream(derive_seed(params.seed, 0x55524EULL, rep));
                    rubin_wins[sample_winner_rubin(urn, stream, urn_tol).index] += 1;
                    if (urn_steps > 0) {
                        NodeStream oracle(derive_seed(params.seed, 0x4F524143ULL, rep));
                        auto w = simulate_urn_steps(urn, urn_steps, oracle);
                        direct_wins[std::max_element(w.begin(), w.end()) - w.begin()] += 1;
                    }
                }
                std::string csv = urn_steps > 0 ? "index,rubin_freq,direct_freq\n"
                                                : "index,rubin_freq\n";
                for (std::size_t i = 0; i < urn.fitnesses.size(); ++i) {
                    csv += std::to_string(i) + "," + fmt(double(rubin_wins[i]) / urn_reps);
                    if (urn_steps > 0) csv += "," + fmt(double(direct_wins[i]) / urn_reps);
                    csv += "\n";
                }
                write_output(csv, urn_out, out);
            }
        } else if (*pareto) {
            ModelParams params = to_params(pareto_f);
            write_output(tightness_csv(pareto_tightness(params.gamma, pareto_m_list, pareto_reps,
                                                        params.seed)),
                         pareto_out, out);
        } else if (*exp_cmd) {
            auto fmt_opt = parse_export_format(exp_format);
            if (!fmt_opt) throw CLI::ValidationError("--format", "unknown format: " + exp_format);
            std::ifstream file(exp_in, std::ios::binary);
            if (!file) throw std::runtime_error("cannot open input file: " + exp_in);
            std::string text((std::istreambuf_iterator<char>(file)),
                             std::istreambuf_iterator<char>());
            auto [window, state] = import_graph_json(text);
            write_output(export_graph(window, state, *fmt_opt), exp_out, out);
        }
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace warm
