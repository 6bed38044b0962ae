#include "warm/dynamics.hpp"

#include "warm/common.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace warm {

namespace {

constexpr std::uint64_t kMaxWindowNodes = 1ULL << 22;

std::string fmt_double(double v, const char* fmt = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace

Window::Window(const ModelParams& params, std::vector<std::pair<std::int64_t, std::int64_t>> spans)
    : params_(params), spans_(std::move(spans)) {
    if (spans_.empty()) throw std::invalid_argument("window: needs at least one layer");
    std::uint64_t total = 0;
    for (auto& [lo, hi] : spans_) {
        if (lo > hi) throw std::invalid_argument("window: empty layer span");
        total += static_cast<std::uint64_t>(hi - lo + 1);
        if (total > kMaxWindowNodes) throw std::length_error("window: too many nodes");
    }
    for (std::uint32_t h = 0; h + 1 < spans_.size(); ++h) {
        std::int64_t r = reach_i64(h, params_.a);
        for (std::int64_t x = spans_[h].first; x <= spans_[h].second; ++x) {
            if (x - r >= spans_[h + 1].first && x + r <= spans_[h + 1].second) {
                activatable_.emplace_back(h, x);
            }
        }
    }
    FitnessField field(params_);
    fitness_ = [field](std::int64_t x, std::uint32_t h) { return field.fitness(x, h); };
}

Window Window::cone(const ModelParams& params, std::int64_t root_lo, std::int64_t root_hi,
                    std::uint32_t layers) {
    if (layers == 0) throw std::invalid_argument("window: needs at least one layer");
    if (root_lo > root_hi) throw std::invalid_argument("window: empty root span");
    std::vector<std::pair<std::int64_t, std::int64_t>> spans;
    spans.emplace_back(root_lo, root_hi);
    for (std::uint32_t h = 0; h < layers; ++h) {
        std::int64_t r = reach_i64(h, params.a);
        spans.emplace_back(spans.back().first - r, spans.back().second + r);
    }
    return Window(params, std::move(spans));
}

Window Window::from_spans(const ModelParams& params,
                          std::vector<std::pair<std::int64_t, std::int64_t>> spans) {
    return Window(params, std::move(spans));
}

bool Window::contains(std::int64_t x, std::uint32_t h) const {
    if (h >= spans_.size()) return false;
    return x >= spans_[h].first && x <= spans_[h].second;
}

std::uint64_t WeightState::total_excess() const {
    std::uint64_t sum = 0;
    for (auto& [e, w] : weights) sum += w - 1;
    return sum;
}

void step(WeightState& state, const Window& window, const NodeStream& run_stream) {
    const auto& act = window.activatable();
    if (act.empty()) throw std::logic_error("step: window has no activatable node");

    auto [h, x] = act[run_stream.u64_at(state.t) % act.size()];
    std::uint64_t k = state.activations[{h, x}]++;

    std::int64_t r = reach_i64(h, window.params().a);
    NodeStream node_stream(window.params().seed, x, h, StreamTag::Dynamics);
    double u = node_stream.unit_at(k);

    // selection weight F_w * W^beta over the out-neighbors, ascending in x
    NeumaierSum total;
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(2 * r + 1));
    for (std::int64_t d = -r; d <= r; ++d) {
        EdgeRef e{x, h, x + d};
        double s = window.fitness(x + d, h + 1) *
                   std::pow(double(state.weight(e)), window.params().beta);
        scores.push_back(s);
        total.add(s);
    }
    double target = u * total.value();
    NeumaierSum cum;
    std::int64_t chosen = r;  // fallback: last color, guards float round-off
    for (std::int64_t d = -r; d <= r; ++d) {
        cum.add(scores[static_cast<std::size_t>(d + r)]);
        if (cum.value() >= target) {
            chosen = d;
            break;
        }
    }
    EdgeRef e{x, h, x + chosen};
    auto [it, inserted] = state.weights.try_emplace(e, 2);
    if (!inserted) it->second += 1;
    state.t += 1;
}

std::vector<WeightState> run(const Window& window, std::uint64_t n_steps,
                             std::uint64_t snapshot_every) {
    NodeStream run_stream(derive_seed(window.params().seed, 0x52554E53ULL));  // activation order
    std::vector<WeightState> snapshots;
    WeightState state;
    if (n_steps == 0) {
        snapshots.push_back(state);
        return snapshots;
    }
    for (std::uint64_t i = 0; i < n_steps; ++i) {
        step(state, window, run_stream);
        if (snapshot_every > 0 && state.t % snapshot_every == 0 && state.t != n_steps) {
            snapshots.push_back(state);
        }
    }
    snapshots.push_back(state);
    return snapshots;
}

std::vector<EdgeRef> relevant_edges(const WeightState& state, double share_threshold) {
    if (!(share_threshold > 0.0 && share_threshold < 1.0)) {
        throw std::invalid_argument("relevant_edges: threshold must be in (0,1)");
    }
    std::vector<EdgeRef> out;
    for (auto& [e, w] : state.weights) {
        auto it = state.activations.find({e.from_h, e.from_x});
        if (it == state.activations.end() || it->second == 0) continue;
        if (double(w - 1) / double(it->second) > share_threshold) out.push_back(e);
    }
    return out;
}

std::optional<ExportFormat> parse_export_format(const std::string& name) {
    if (name == "dot") return ExportFormat::Dot;
    if (name == "json") return ExportFormat::Json;
    if (name == "csv") return ExportFormat::Csv;
    return std::nullopt;
}

namespace {

// Window edges in (from_h, from_x, to_x) order.
template <class Fn>
void for_each_edge(const Window& window, Fn&& fn) {
    for (std::uint32_t h = 0; h + 1 <= window.top_layer(); ++h) {
        std::int64_t r = reach_i64(h, window.params().a);
        auto [lo, hi] = window.spans()[h];
        for (std::int64_t x = lo; x <= hi; ++x) {
            for (std::int64_t d = -r; d <= r; ++d) {
                if (window.contains(x + d, h + 1)) fn(EdgeRef{x, h, x + d});
            }
        }
    }
}

std::string export_dot(const Window& window, const WeightState& state) {
    std::string out = "digraph warm {\n";
    for (std::uint32_t h = 0; h <= window.top_layer(); ++h) {
        auto [lo, hi] = window.spans()[h];
        for (std::int64_t x = lo; x <= hi; ++x) {
            out += "  \"(" + std::to_string(x) + "," + std::to_string(h) + ")\" [logfitness=" +
                   fmt_double(std::log(window.fitness(x, h)), "%.6g") + "];\n";
        }
    }
    for_each_edge(window, [&](const EdgeRef& e) {
        out += "  \"(" + std::to_string(e.from_x) + "," + std::to_string(e.from_h) + ")\" -> \"(" +
               std::to_string(e.to_x) + "," + std::to_string(e.from_h + 1) + ")\" [weight=" +
               std::to_string(state.weight(e)) + "];\n";
    });
    out += "}\n";
    return out;
}

std::string export_json(const Window& window, const WeightState& state) {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (std::uint32_t h = 0; h <= window.top_layer(); ++h) {
        auto [lo, hi] = window.spans()[h];
        for (std::int64_t x = lo; x <= hi; ++x) {
            doc["nodes"].push_back({{"x", x}, {"h", h}, {"fitness", window.fitness(x, h)}});
        }
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for_each_edge(window, [&](const EdgeRef& e) {
        doc["edges"].push_back({{"from", {e.from_x, e.from_h}},
                                {"to", {e.to_x, e.from_h + 1}},
                                {"weight", state.weight(e)}});
    });
    doc["params"] = {{"a", window.params().a.to_string()},
                     {"beta", window.params().beta},
                     {"gamma", window.params().gamma},
                     {"seed", window.params().seed}};
    doc["t"] = state.t;
    return doc.dump(2) + "\n";
}

std::string export_csv(const Window& window, const WeightState& state) {
    std::string out = "from_x,from_h,to_x,to_h,weight\n";
    for_each_edge(window, [&](const EdgeRef& e) {
        out += std::to_string(e.from_x) + "," + std::to_string(e.from_h) + "," +
               std::to_string(e.to_x) + "," + std::to_string(e.from_h + 1) + "," +
               std::to_string(state.weight(e)) + "\n";
    });
    return out;
}

}  // namespace

std::string export_graph(const Window& window, const WeightState& state, ExportFormat format) {
    switch (format) {
        case ExportFormat::Dot: return export_dot(window, state);
        case ExportFormat::Json: return export_json(window, state);
        case ExportFormat::Csv: return export_csv(window, state);
    }
    throw std::invalid_argument("export_graph: unknown format");
}

std::pair<Window, WeightState> import_graph_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    ModelParams params(Rational::parse(doc.at("params").at("a").get<std::string>()),
                       doc.at("params").at("beta").get<double>(),
                       doc.at("params").at("gamma").get<double>(),
                       doc.at("params").at("seed").get<std::uint64_t>());

    std::map<std::uint32_t, std::pair<std::int64_t, std::int64_t>> by_layer;
    auto table = std::make_shared<std::map<std::pair<std::uint32_t, std::int64_t>, double>>();
    for (const auto& n : doc.at("nodes")) {
        std::int64_t x = n.at("x").get<std::int64_t>();
        std::uint32_t h = n.at("h").get<std::uint32_t>();
        (*table)[{h, x}] = n.at("fitness").get<double>();
        auto it = by_layer.find(h);
        if (it == by_layer.end()) {
            by_layer[h] = {x, x};
        } else {
            it->second.first = std::min(it->second.first, x);
            it->second.second = std::max(it->second.second, x);
        }
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> spans;
    for (std::uint32_t h = 0; h < by_layer.size(); ++h) {
        auto it = by_layer.find(h);
        if (it == by_layer.end()) throw std::invalid_argument("import: missing layer");
        spans.push_back(it->second);
    }
    Window window = Window::from_spans(params, std::move(spans));
    window.set_fitness([table](std::int64_t x, std::uint32_t h) {
        auto it = table->find({h, x});
        if (it == table->end()) throw std::out_of_range("import: fitness not in document");
        return it->second;
    });

    WeightState state;
    state.t = doc.at("t").get<std::uint64_t>();
    for (const auto& e : doc.at("edges")) {
        std::uint64_t w = e.at("weight").get<std::uint64_t>();
        if (w > 1) {
            state.weights[EdgeRef{e.at("from")[0].get<std::int64_t>(),
                                  e.at("from")[1].get<std::uint32_t>(),
                                  e.at("to")[0].get<std::int64_t>()}] = w;
        }
    }
    return {std::move(window), std::move(state)};
}

}  // namespace warm
