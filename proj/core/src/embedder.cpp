#include "actgraph/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "actgraph/rng.hpp"

namespace actgraph::assoc {

using num::Tape;
using num::Tensor;
using num::Var;

namespace {

Tensor uniform_fan_in(int rows, int cols, Rng& rng) {
  Tensor t({rows, cols});
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  for (int i = 0; i < rows * cols; ++i) t.at(i) = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

EmbedderModel EmbedderModel::init(int input_dim, int output_dim, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x656d6264ULL));
  EmbedderModel model;
  model.w1 = uniform_fan_in(input_dim, output_dim, rng);
  model.b1 = Tensor({output_dim});
  model.w2 = uniform_fan_in(output_dim, output_dim, rng);
  model.b2 = Tensor({output_dim});
  return model;
}

std::vector<double> EmbedderModel::embed(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != input_dim()) {
    throw std::invalid_argument("embedder input dimension mismatch");
  }
  const int hidden = w1.cols();
  const int out_dim = w2.cols();
  std::vector<double> h(static_cast<std::size_t>(hidden));
  for (int j = 0; j < hidden; ++j) {
    double acc = b1.at(j);
    for (int i = 0; i < input_dim(); ++i) acc += input[static_cast<std::size_t>(i)] * w1.at(i, j);
    h[static_cast<std::size_t>(j)] = acc > 0.0 ? acc : 0.0;
  }
  std::vector<double> out(static_cast<std::size_t>(out_dim));
  for (int j = 0; j < out_dim; ++j) {
    double acc = b2.at(j);
    for (int i = 0; i < hidden; ++i) acc += h[static_cast<std::size_t>(i)] * w2.at(i, j);
    out[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size()) {
    throw std::invalid_argument("triplet embeddings must share a dimension");
  }
  if (margin <= 0.0) throw std::invalid_argument("triplet margin must be positive");
  double pos_sq = 0.0, neg_sq = 0.0;
  for (std::size_t i = 0; i < anchor.size(); ++i) {
    const double dp = anchor[i] - positive[i];
    const double dn = anchor[i] - negative[i];
    pos_sq += dp * dp;
    neg_sq += dn * dn;
  }
  return std::max(0.0, std::sqrt(pos_sq) - std::sqrt(neg_sq) + margin);
}

namespace {

struct IdentityEntries {
  // per identity: (frame, pointer to surrogate)
  std::map<int, std::vector<std::pair<int, const EmbeddingVec*>>> by_id;
};

struct TripletSource {
  std::vector<IdentityEntries> clips;   // only eligible clips
};

TripletSource collect_triplet_source(const std::vector<ClipSample>& dataset) {
  TripletSource source;
  for (const ClipSample& clip : dataset) {
    IdentityEntries entries;
    for (int t = 0; t < clip.t_frames(); ++t) {
      for (const Detection& det : clip.frames[static_cast<std::size_t>(t)]) {
        if (det.kind != DetectionKind::person || !det.id_hint || !det.embedding) continue;
        entries.by_id[*det.id_hint].emplace_back(t, &*det.embedding);
      }
    }
    if (entries.by_id.size() < 2) continue;
    bool has_pair = false;
    for (const auto& [id, list] : entries.by_id) {
      for (std::size_t i = 1; i < list.size(); ++i) {
        if (list[i].first != list[0].first) {
          has_pair = true;
          break;
        }
      }
      if (has_pair) break;
    }
    if (has_pair) source.clips.push_back(std::move(entries));
  }
  return source;
}

Var embed_on_tape(Tape& tape, Var w1, Var b1, Var w2, Var b2, const EmbeddingVec& input) {
  Var x = tape.constant(Tensor::row(input));
  Var h = tape.relu(tape.affine(x, w1, b1));
  return tape.affine(h, w2, b2);
}

}  // namespace

EmbedderTrainResult train_embedder(const std::vector<ClipSample>& dataset,
                                   const EmbedderTrainConfig& config) {
  const TripletSource source = collect_triplet_source(dataset);
  if (source.clips.empty()) {
    throw std::invalid_argument(
        "embedder training needs at least one clip with two identities");
  }
  int input_dim = -1;
  for (const auto& [id, list] : source.clips.front().by_id) {
    input_dim = static_cast<int>(list.front().second->size());
    break;
  }

  EmbedderTrainResult result;
  result.model = EmbedderModel::init(input_dim, input_dim, config.seed);
  Rng rng(mix_seed(config.seed, 0x747269706cULL));

  for (int iter = 0; iter < config.iterations; ++iter) {
    Tape tape;
    Var w1 = tape.leaf(result.model.w1);
    Var b1 = tape.leaf(result.model.b1);
    Var w2 = tape.leaf(result.model.w2);
    Var b2 = tape.leaf(result.model.b2);
    Var total{};
    for (int b = 0; b < config.batch; ++b) {
      const IdentityEntries& clip =
          source.clips[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(source.clips.size())))];
      // anchor identity must offer two distinct frames
      std::vector<const std::vector<std::pair<int, const EmbeddingVec*>>*> anchor_ids;
      std::vector<int> ids;
      for (const auto& [id, list] : clip.by_id) {
        ids.push_back(id);
        bool multi_frame = false;
        for (std::size_t i = 1; i < list.size(); ++i) {
          if (list[i].first != list[0].first) {
            multi_frame = true;
            break;
          }
        }
        if (multi_frame) anchor_ids.push_back(&list);
      }
      const auto& anchor_list =
          *anchor_ids[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(anchor_ids.size())))];
      const int anchor_id = [&] {
        for (const auto& [id, list] : clip.by_id) {
          if (&list == &anchor_list) return id;
        }
        return -1;
      }();
      const auto& anchor_entry =
          anchor_list[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(anchor_list.size())))];
      std::vector<const std::pair<int, const EmbeddingVec*>*> positives;
      for (const auto& entry : anchor_list) {
        if (entry.first != anchor_entry.first) positives.push_back(&entry);
      }
      const auto& positive_entry =
          *positives[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(positives.size())))];
      std::vector<int> negative_ids;
      for (int id : ids) {
        if (id != anchor_id) negative_ids.push_back(id);
      }
      const int negative_id =
          negative_ids[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(negative_ids.size())))];
      const auto& negative_list = clip.by_id.at(negative_id);
      const auto& negative_entry =
          negative_list[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(negative_list.size())))];

      Var a = embed_on_tape(tape, w1, b1, w2, b2, *anchor_entry.second);
      Var p = embed_on_tape(tape, w1, b1, w2, b2, *positive_entry.second);
      Var n = embed_on_tape(tape, w1, b1, w2, b2, *negative_entry.second);
      Var loss = tape.triplet_loss(a, p, n, config.margin);
      total = total.valid() ? tape.add(total, loss) : loss;
    }
    Var mean_loss = tape.scale(total, 1.0 / config.batch);
    result.loss_log.push_back(tape.value(mean_loss).scalar_value());
    tape.backward(mean_loss);
    auto step = [&](Tensor& param, Var v) {
      const Tensor& g = tape.grad(v);
      for (std::int64_t i = 0; i < param.size(); ++i) {
        param.at(static_cast<int>(i)) -= config.learning_rate * g.at(static_cast<int>(i));
      }
    };
    step(result.model.w1, w1);
    step(result.model.b1, b1);
    step(result.model.w2, w2);
    step(result.model.b2, b2);
  }
  return result;
}

void embedder_to_checkpoint(const EmbedderModel& model, num::Checkpoint& ckpt) {
  ckpt.add("embedder.w1", model.w1);
  ckpt.add("embedder.b1", model.b1);
  ckpt.add("embedder.w2", model.w2);
  ckpt.add("embedder.b2", model.b2);
}

EmbedderModel embedder_from_checkpoint(const num::Checkpoint& ckpt) {
  EmbedderModel model;
  model.w1 = ckpt.get("embedder.w1");
  model.b1 = ckpt.get("embedder.b1");
  model.w2 = ckpt.get("embedder.w2");
  model.b2 = ckpt.get("embedder.b2");
  return model;
}

bool checkpoint_has_embedder(const num::Checkpoint& ckpt) {
  return ckpt.contains("embedder.w1");
}

}  // namespace actgraph::assoc
