#pragma once

#include <cstdint>
#include <vector>

#include "actgraph/tape.hpp"
#include "actgraph/types.hpp"

namespace actgraph::model {

/// Row-normalized temporal weights linking each actor to its tracked frames,
/// together with the per-actor frame feature matrices. Row i of `affinity`
/// holds 1/len(tubelet_i) on tracked frames and 0 elsewhere, so the product
/// affinity_row * features is the masked temporal mean of the tubelet.
struct TubeletGraph {
  num::Tensor affinity;                // N x T
  std::vector<num::Tensor> features;   // N entries of T x D (zero rows where untracked)
};

TubeletGraph build_affinity(const std::vector<Tubelet>& tubelets, int t_frames, int feature_dim);

/// Stacked square weight matrices; a rectifier sits between layers, the last
/// layer stays linear so the single-layer identity case reduces to the
/// masked temporal mean.
struct GcnStack {
  std::vector<num::Tensor> weights;  // each D x D

  static GcnStack init(int dim, int layers, std::uint64_t seed);
  static GcnStack identity(int dim, int layers = 1);
  int layer_count() const { return static_cast<int>(weights.size()); }
};

/// Recorded forward pass: per actor, the affinity row premixes that actor's
/// frame features, then the stack applies its layers. Output is N x D.
num::Var gcn_forward(num::Tape& tape, const TubeletGraph& graph,
                     const std::vector<num::Var>& layer_weights);

/// Convenience wrapper running a private tape.
num::Tensor gcn_forward(const TubeletGraph& graph, const GcnStack& stack);

}  // namespace actgraph::model
