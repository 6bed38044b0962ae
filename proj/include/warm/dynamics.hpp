#pragma once

#include "warm/fitness.hpp"
#include "warm/lattice.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace warm {

using FitnessFn = std::function<double(std::int64_t x, std::uint32_t h)>;

// Finite truncation of the infinite lattice. Nodes whose out-neighborhood
// leaves the window are boundary nodes and are never activated, so no
// selection probability is distorted by the truncation.
class Window {
  public:
    // Cone over layer-0 roots [root_lo, root_hi]: each layer widens by the
    // reach, so every node below the top layer is activatable.
    static Window cone(const ModelParams& params, std::int64_t root_lo, std::int64_t root_hi,
                       std::uint32_t layers);

    // Explicit inclusive x-interval per layer (index = layer).
    static Window from_spans(const ModelParams& params,
                             std::vector<std::pair<std::int64_t, std::int64_t>> spans);

    const ModelParams& params() const { return params_; }
    std::uint32_t top_layer() const { return static_cast<std::uint32_t>(spans_.size()) - 1; }
    const std::vector<std::pair<std::int64_t, std::int64_t>>& spans() const { return spans_; }

    // Activatable (non-boundary) nodes in (h, x) order.
    const std::vector<std::pair<std::uint32_t, std::int64_t>>& activatable() const {
        return activatable_;
    }
    bool contains(std::int64_t x, std::uint32_t h) const;

    double fitness(std::int64_t x, std::uint32_t h) const { return fitness_(x, h); }
    void set_fitness(FitnessFn fn) { fitness_ = std::move(fn); }

  private:
    Window(const ModelParams& params,
           std::vector<std::pair<std::int64_t, std::int64_t>> spans);

    ModelParams params_;
    std::vector<std::pair<std::int64_t, std::int64_t>> spans_;
    std::vector<std::pair<std::uint32_t, std::int64_t>> activatable_;
    FitnessFn fitness_;
};

struct EdgeRef {
    std::int64_t from_x;
    std::uint32_t from_h;
    std::int64_t to_x;  // to layer is from_h + 1

    auto operator<=>(const EdgeRef&) const = default;
};

// Sparse weight state: only edges with weight > 1 are stored.
struct WeightState {
    std::map<EdgeRef, std::uint64_t> weights;
    std::map<std::pair<std::uint32_t, std::int64_t>, std::uint64_t> activations;
    std::uint64_t t = 0;

    std::uint64_t weight(const EdgeRef& e) const {
        auto it = weights.find(e);
        return it == weights.end() ? 1 : it->second;
    }
    // sum of (W(e) - 1); equals t by conservation
    std::uint64_t total_excess() const;
};

// Activate one uniformly chosen non-boundary node and reinforce one of its
// out-edges with probability proportional to F_w * W^beta. The node's k-th
// activation consumes counter k of its Dynamics stream, so a node's marginal
// weight law does not depend on the global interleaving.
void step(WeightState& state, const Window& window, const NodeStream& run_stream);

// n_steps of the uniform activation chain; snapshots every snapshot_every
// steps (0 = none) plus the final state. Deterministic in window.params.seed.
std::vector<WeightState> run(const Window& window, std::uint64_t n_steps,
                             std::uint64_t snapshot_every = 0);

// Finite-time proxy for the relevant-edge set: edges whose share of their
// node's activations exceeds the threshold.
std::vector<EdgeRef> relevant_edges(const WeightState& state, double share_threshold);

enum class ExportFormat { Dot, Json, Csv };
std::optional<ExportFormat> parse_export_format(const std::string& name);

std::string export_graph(const Window& window, const WeightState& state, ExportFormat format);

// Inverse of the JSON export; fitness values are taken from the document.
std::pair<Window, WeightState> import_graph_json(const std::string& text);

}  // namespace warm
