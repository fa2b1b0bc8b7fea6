#include "actgraph/tubelet_gcn.hpp"

#include <cmath>
#include <stdexcept>

#include "actgraph/rng.hpp"

namespace actgraph::model {

using num::Tape;
using num::Tensor;
using num::Var;

TubeletGraph build_affinity(const std::vector<Tubelet>& tubelets, int t_frames, int feature_dim) {
  const int n = static_cast<int>(tubelets.size());
  TubeletGraph graph;
  if (n == 0) return graph;  // no actors: empty affinity, empty features
  graph.affinity = Tensor({n, t_frames});
  graph.features.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Tubelet& tubelet = tubelets[static_cast<std::size_t>(i)];
    if (tubelet.entries.empty()) {
      throw std::invalid_argument("build_affinity requires nonempty tubelets");
    }
    Tensor frame_features({t_frames, feature_dim});
    const double weight = 1.0 / static_cast<double>(tubelet.length());
    for (const TubeletEntry& entry : tubelet.entries) {
      if (entry.frame < 0 || entry.frame >= t_frames) {
        throw std::invalid_argument("tubelet frame index outside the clip");
      }
      if (static_cast<int>(entry.feature.size()) != feature_dim) {
        throw std::invalid_argument("tubelet feature dimension mismatch");
      }
      graph.affinity.at(i, entry.frame) = weight;
      for (int d = 0; d < feature_dim; ++d) {
        frame_features.at(entry.frame, d) = entry.feature[static_cast<std::size_t>(d)];
      }
    }
    graph.features.push_back(std::move(frame_features));
  }
  return graph;
}

GcnStack GcnStack::init(int dim, int layers, std::uint64_t seed) {
  if (layers < 1) throw std::invalid_argument("GcnStack needs at least one layer");
  Rng rng(mix_seed(seed, 0x67636eULL));
  GcnStack stack;
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int l = 0; l < layers; ++l) {
    Tensor w({dim, dim});
    for (int i = 0; i < dim * dim; ++i) w.at(i) = rng.uniform(-bound, bound);
    stack.weights.push_back(std::move(w));
  }
  return stack;
}

GcnStack GcnStack::identity(int dim, int layers) {
  GcnStack stack;
  for (int l = 0; l < layers; ++l) stack.weights.push_back(Tensor::identity(dim));
  return stack;
}

Var gcn_forward(Tape& tape, const TubeletGraph& graph, const std::vector<Var>& layer_weights) {
  if (layer_weights.empty()) throw std::invalid_argument("gcn_forward needs at least one layer");
  const int n = static_cast<int>(graph.features.size());
  if (n == 0) throw std::invalid_argument("gcn_forward needs at least one actor");
  const int d = graph.features.front().cols();
  // The affinity rows and frame features carry no gradient, so each actor's
  // temporal mix collapses to one constant row.
  Tensor premixed({n, d});
  for (int i = 0; i < n; ++i) {
    const Tensor& frames = graph.features[static_cast<std::size_t>(i)];
    for (int t = 0; t < frames.rows(); ++t) {
      const double g = graph.affinity.at(i, t);
      if (g == 0.0) continue;
      for (int j = 0; j < d; ++j) {
        premixed.at(i, j) += g * frames.at(t, j);
      }
    }
  }
  Var h = tape.matmul(tape.constant(std::move(premixed)), layer_weights.front());
  for (std::size_t l = 1; l < layer_weights.size(); ++l) {
    h = tape.matmul(tape.relu(h), layer_weights[l]);
  }
  return h;
}

Tensor gcn_forward(const TubeletGraph& graph, const GcnStack& stack) {
  Tape tape;
  std::vector<Var> weights;
  weights.reserve(stack.weights.size());
  for (const Tensor& w : stack.weights) weights.push_back(tape.constant(w));
  return tape.value(gcn_forward(tape, graph, weights));
}

}  // namespace actgraph::model
