#include "actgraph/train.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "actgraph/rng.hpp"

namespace actgraph::train {

using model::ClipContext;
using model::ForwardOptions;
using model::ForwardResult;
using model::HeadParams;
using model::ModelDims;
using model::VariantVars;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

Tensor slice_cols(const Tensor& m, int begin, int count) {
  Tensor out({m.rows(), count});
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < count; ++j) out.at(i, j) = m.at(i, begin + j);
  }
  return out;
}

/// Mean BCE over the defined groups of one clip. Hard-path groups with no
/// partners are left out entirely (their prediction is the constant 0).
Var clip_loss(Tape& tape, const ClipContext& context, const ForwardResult& fwd,
              const ModelDims& dims) {
  const Tensor& targets = context.targets;
  Var loss = tape.bce_with_logits(fwd.pose_logits, slice_cols(targets, 0, dims.n_pose));
  const Tensor manip_targets = slice_cols(targets, dims.n_pose, dims.n_manip);
  const Tensor inter_targets = slice_cols(targets, dims.n_pose + dims.n_manip, dims.n_inter);
  if (fwd.hard_path) {
    const int n = context.actor_count();
    Var manip_sum{}, inter_sum{};
    int manip_count = 0, inter_count = 0;
    for (int i = 0; i < n; ++i) {
      if (fwd.manip_hard[static_cast<std::size_t>(i)].valid()) {
        Tensor row({1, dims.n_manip});
        for (int c = 0; c < dims.n_manip; ++c) row.at(0, c) = manip_targets.at(i, c);
        Var term = tape.bce_with_logits(fwd.manip_hard[static_cast<std::size_t>(i)], std::move(row));
        manip_sum = manip_sum.valid() ? tape.add(manip_sum, term) : term;
        ++manip_count;
      }
      if (fwd.inter_hard[static_cast<std::size_t>(i)].valid()) {
        Tensor row({1, dims.n_inter});
        for (int c = 0; c < dims.n_inter; ++c) row.at(0, c) = inter_targets.at(i, c);
        Var term = tape.bce_with_logits(fwd.inter_hard[static_cast<std::size_t>(i)], std::move(row));
        inter_sum = inter_sum.valid() ? tape.add(inter_sum, term) : term;
        ++inter_count;
      }
    }
    if (manip_count > 0) loss = tape.add(loss, tape.scale(manip_sum, 1.0 / manip_count));
    if (inter_count > 0) loss = tape.add(loss, tape.scale(inter_sum, 1.0 / inter_count));
  } else {
    loss = tape.add(loss, tape.bce_with_logits(fwd.manip_logits, manip_targets));
    loss = tape.add(loss, tape.bce_with_logits(fwd.inter_logits, inter_targets));
  }
  return loss;
}

}  // namespace

TrainResult train_head(const std::vector<ClipContext>& contexts, const ModelDims& dims,
                       const TrainConfig& config, const EvalHook& eval_hook) {
  std::vector<int> usable;
  for (int i = 0; i < static_cast<int>(contexts.size()); ++i) {
    if (contexts[static_cast<std::size_t>(i)].actor_count() > 0) usable.push_back(i);
  }
  if (usable.empty()) throw std::invalid_argument("training dataset has no usable clips");
  for (int i : usable) {
    const ClipContext& ctx = contexts[static_cast<std::size_t>(i)];
    if (ctx.targets.cols() != dims.total_classes()) {
      throw std::invalid_argument("dataset / vocabulary mismatch: clip targets have " +
                                  std::to_string(ctx.targets.cols()) + " classes, model expects " +
                                  std::to_string(dims.total_classes()));
    }
  }

  ModelDims model_dims = dims;
  model_dims.gcn_layers = config.gcn_layers;
  TrainResult result;
  result.params = HeadParams::init(config.variant, model_dims, config.seed);
  Rng batch_rng(mix_seed(config.seed, 0x626174ULL));

  const int total_iters = config.iters_phase1 + config.iters_phase2;
  const auto started = std::chrono::steady_clock::now();
  for (int iter = 0; iter < total_iters; ++iter) {
    const double lr = iter < config.iters_phase1 ? config.lr1 : config.lr2;

    Tape tape;
    VariantVars vars = bind_params(tape, result.params);
    Var total{};
    for (int b = 0; b < config.batch; ++b) {
      const int pick = usable[static_cast<std::size_t>(
          batch_rng.uniform_int(static_cast<int>(usable.size())))];
      const ClipContext& context = contexts[static_cast<std::size_t>(pick)];
      ForwardOptions options;
      options.train = true;
      options.dropout = config.dropout;
      options.dropout_rate = config.dropout_rate;
      options.dropout_seed = mix_seed(config.seed, static_cast<std::uint64_t>(iter) * 1000 + b);
      ForwardResult fwd = variant_forward(tape, context, vars, result.params, options);
      Var loss = clip_loss(tape, context, fwd, model_dims);
      total = total.valid() ? tape.add(total, loss) : loss;
    }
    Var batch_loss = tape.scale(total, 1.0 / config.batch);
    const double loss_value = tape.value(batch_loss).scalar_value();
    tape.backward(batch_loss);
    if (lr != 0.0) {
      for (auto& [tensor, var] : vars.bound) {
        const Tensor& g = tape.grad(var);
        for (std::int64_t i = 0; i < tensor->size(); ++i) {
          tensor->at(static_cast<int>(i)) -= lr * g.at(static_cast<int>(i));
        }
      }
    }

    TrainLogRow row;
    row.iteration = iter;
    row.loss = loss_value;
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    if (eval_hook && config.eval_every > 0 &&
        ((iter + 1) % config.eval_every == 0 || iter + 1 == total_iters)) {
      row.has_eval = true;
      row.eval_map = eval_hook(result.params);
    }
    result.log.push_back(row);
  }
  return result;
}

void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& log) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open train log for writing: " + path.string());
  os << "iteration,loss,wall_ms,eval_map\n";
  for (const TrainLogRow& row : log) {
    os << row.iteration << ',' << row.loss << ',' << row.wall_ms << ',';
    if (row.has_eval) os << row.eval_map;
    os << '\n';
  }
}

}  // namespace actgraph::train
