#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "actgraph/variants.hpp"

namespace actgraph::train {

/// Two-phase SGD schedule (the second phase runs at a decayed rate).
struct TrainConfig {
  model::Variant variant = model::Variant::tubelet_soft;
  int iters_phase1 = 900;
  double lr1 = 0.0125;
  int iters_phase2 = 100;
  double lr2 = 0.00125;
  int batch = 8;
  std::uint64_t seed = 7;
  bool dropout = true;
  double dropout_rate = 0.3;
  int gcn_layers = 2;
  int eval_every = 0;  // 0 disables periodic eval logging
};

struct TrainLogRow {
  int iteration = 0;
  double loss = 0.0;
  double wall_ms = 0.0;
  bool has_eval = false;
  double eval_map = 0.0;
};

struct TrainResult {
  model::HeadParams params;
  std::vector<TrainLogRow> log;
};

using EvalHook = std::function<double(model::HeadParams&)>;

/// Mini-batch SGD over precomputed clip contexts. Deterministic given the
/// seed: batch sampling, dropout masks, and the in-batch gradient summation
/// order are all fixed.
TrainResult train_head(const std::vector<model::ClipContext>& contexts, const model::ModelDims& dims,
                       const TrainConfig& config, const EvalHook& eval_hook = {});

void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& log);

}  // namespace actgraph::train
