#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "actgraph/checkpoint.hpp"
#include "actgraph/tape.hpp"
#include "actgraph/types.hpp"

namespace actgraph::assoc {

/// Two-layer encoder mapping the appearance surrogate to the matching
/// embedding space used by the tracker.
struct EmbedderModel {
  num::Tensor w1, b1, w2, b2;

  static EmbedderModel init(int input_dim, int output_dim, std::uint64_t seed);

  int input_dim() const { return w1.rows(); }
  int output_dim() const { return w2.cols(); }

  std::vector<double> embed(std::span<const double> input) const;
};

/// Hinge on the positive/negative embedding distance gap:
/// max(0, ||a-p|| - ||a-n|| + margin).
double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin);

struct EmbedderTrainConfig {
  double margin = 0.2;
  double learning_rate = 0.05;
  int iterations = 1200;
  int batch = 32;
  std::uint64_t seed = 1;
};

struct EmbedderTrainResult {
  EmbedderModel model;
  std::vector<double> loss_log;  // mean batch loss per iteration
};

/// Trains on triplets sampled via ground-truth identity tags: anchor and
/// positive share an identity at different frames, the negative is a
/// different identity from the same clip. Throws when fewer than two
/// identities exist anywhere in the dataset.
EmbedderTrainResult train_embedder(const std::vector<ClipSample>& dataset,
                                   const EmbedderTrainConfig& config);

/// Adds the embedder tensors to a checkpoint under the "embedder." prefix; a
/// head checkpoint can carry its frozen tracker this way.
void embedder_to_checkpoint(const EmbedderModel& model, num::Checkpoint& ckpt);
EmbedderModel embedder_from_checkpoint(const num::Checkpoint& ckpt);
bool checkpoint_has_embedder(const num::Checkpoint& ckpt);

}  // namespace actgraph::assoc
