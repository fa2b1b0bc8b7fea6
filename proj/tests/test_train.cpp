#include <doctest.h>

#include <cmath>

#include "actgraph/pipeline.hpp"
#include "actgraph/train.hpp"

using namespace actgraph;
using namespace actgraph::model;
using namespace actgraph::train;

namespace {

synth::ScenarioSpec small_spec() {
  synth::ScenarioSpec spec;
  spec.t_frames = 12;
  spec.box_jitter = 0.0;
  spec.feature_noise = 0.0;
  spec.embedding_noise = 0.0;
  spec.distractor_rate = 0.0;
  return spec;
}

assoc::EmbedderModel identity_embedder(int dims) {
  assoc::EmbedderModel model;
  model.w1 = num::Tensor::identity(dims);
  model.b1 = num::Tensor::filled({dims}, 100.0);
  model.w2 = num::Tensor::identity(dims);
  model.b2 = num::Tensor::filled({dims}, -100.0);
  return model;
}

std::vector<ClipContext> contexts_for(const synth::ScenarioSpec& spec, int n_clips,
                                      std::uint64_t seed, const assoc::EmbedderModel* embedder) {
  ContextConfig config;
  config.person_score_threshold = spec.person_score_threshold;
  config.object_score_threshold = spec.object_score_threshold;
  config.total_classes = spec.vocabulary.total();
  assoc::TrackerConfig tracker;
  tracker.person_score_min = spec.person_score_threshold;
  std::vector<ClipContext> contexts;
  for (int i = 0; i < n_clips; ++i) {
    const auto generated = synth::generate_clip(spec, seed, i);
    contexts.push_back(build_clip_context(generated.clip, embedder, tracker, config));
  }
  return contexts;
}

ModelDims dims_for(const synth::ScenarioSpec& spec, int gcn_layers = 2) {
  ModelDims dims;
  dims.feature_dim = spec.feature_dim;
  dims.n_pose = spec.vocabulary.pose_count();
  dims.n_manip = spec.vocabulary.manipulation_count();
  dims.n_inter = spec.vocabulary.interaction_count();
  dims.gcn_layers = gcn_layers;
  return dims;
}

bool params_equal(const HeadParams& a, const HeadParams& b) {
  auto tensors_equal = [](const num::Tensor& x, const num::Tensor& y) { return x == y; };
  if (a.gcn.weights.size() != b.gcn.weights.size()) return false;
  for (std::size_t i = 0; i < a.gcn.weights.size(); ++i) {
    if (!tensors_equal(a.gcn.weights[i], b.gcn.weights[i])) return false;
  }
  return tensors_equal(a.pose_w, b.pose_w) && tensors_equal(a.pose_b, b.pose_b) &&
         tensors_equal(a.manip_w, b.manip_w) && tensors_equal(a.inter_w, b.inter_w);
}

}  // namespace

TEST_CASE("zero learning rate leaves parameters at initialization") {
  const synth::ScenarioSpec spec = small_spec();
  const auto embedder = identity_embedder(spec.embedding_dim);
  auto contexts = contexts_for(spec, 6, 9, &embedder);
  TrainConfig config;
  config.variant = Variant::tubelet_soft;
  config.iters_phase1 = 10;
  config.iters_phase2 = 5;
  config.lr1 = 0.0;
  config.lr2 = 0.0;
  config.batch = 4;
  const TrainResult result = train_head(contexts, dims_for(spec), config);
  const HeadParams fresh = HeadParams::init(config.variant, dims_for(spec), config.seed);
  CHECK(params_equal(result.params, fresh));
  CHECK(static_cast<int>(result.log.size()) == 15);
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
  const synth::ScenarioSpec spec = small_spec();
  const auto embedder = identity_embedder(spec.embedding_dim);
  auto contexts = contexts_for(spec, 8, 11, &embedder);
  TrainConfig config;
  config.variant = Variant::tubelet_soft;
  config.iters_phase1 = 25;
  config.iters_phase2 = 5;
  config.batch = 4;
  const TrainResult a = train_head(contexts, dims_for(spec), config);
  const TrainResult b = train_head(contexts, dims_for(spec), config);
  CHECK(params_equal(a.params, b.params));
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].loss == b.log[i].loss);
    CHECK(std::isfinite(a.log[i].loss));
  }
}

TEST_CASE("every variant emits one probability per vocabulary class") {
  const synth::ScenarioSpec spec = small_spec();
  const auto embedder = identity_embedder(spec.embedding_dim);
  auto contexts = contexts_for(spec, 3, 13, &embedder);
  const ClipContext* ctx = nullptr;
  for (const auto& candidate : contexts) {
    if (candidate.actor_count() > 0) {
      ctx = &candidate;
      break;
    }
  }
  REQUIRE(ctx != nullptr);
  for (Variant variant : all_variants()) {
    HeadParams params = HeadParams::init(variant, dims_for(spec), 3);
    const num::Tensor probs = predict_probabilities(*ctx, params);
    CHECK(probs.rows() == ctx->actor_count());
    CHECK(probs.cols() == spec.vocabulary.total());
    for (std::int64_t i = 0; i < probs.size(); ++i) {
      CHECK(probs.at(static_cast<int>(i)) >= 0.0);
      CHECK(probs.at(static_cast<int>(i)) <= 1.0);
    }
  }
}

TEST_CASE("zero-initialized heads output one half everywhere") {
  const synth::ScenarioSpec spec = small_spec();
  const auto embedder = identity_embedder(spec.embedding_dim);
  auto contexts = contexts_for(spec, 3, 17, &embedder);
  const ClipContext* ctx = nullptr;
  for (const auto& candidate : contexts) {
    if (candidate.actor_count() > 0 && candidate.object_count > 0) {
      ctx = &candidate;
      break;
    }
  }
  REQUIRE(ctx != nullptr);
  HeadParams params = HeadParams::init(Variant::tubelet_soft, dims_for(spec), 3);
  for (num::Tensor* t : {&params.pose_w, &params.pose_b, &params.manip_w, &params.manip_b,
                         &params.inter_w, &params.inter_b}) {
    for (std::int64_t i = 0; i < t->size(); ++i) t->at(static_cast<int>(i)) = 0.0;
  }
  const num::Tensor probs = predict_probabilities(*ctx, params);
  for (std::int64_t i = 0; i < probs.size(); ++i) {
    CHECK(probs.at(static_cast<int>(i)) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("identity single-layer tubelet aggregation equals fixed-box pooling on a static scene") {
  synth::ScenarioSpec spec = small_spec();
  spec.max_speed = 0.0;  // actors never move: fixed-box pooling sees the full track
  const auto embedder = identity_embedder(spec.embedding_dim);
  auto contexts = contexts_for(spec, 4, 19, &embedder);
  for (const ClipContext& ctx : contexts) {
    if (ctx.actor_count() == 0) continue;
    const num::Tensor aggregated =
        gcn_forward(ctx.tubelet_graph, GcnStack::identity(spec.feature_dim, 1));
    CHECK(num::max_abs_diff(aggregated, ctx.baseline_features) < 1e-12);
  }
}

TEST_CASE("soft relation with no objects reduces to the transformed actor path") {
  synth::ScenarioSpec spec = small_spec();
  spec.objects_min = 0;
  spec.objects_max = 1;
  const auto embedder = identity_embedder(spec.embedding_dim);
  auto contexts = contexts_for(spec, 12, 23, &embedder);
  const ClipContext* no_objects = nullptr;
  for (const auto& ctx : contexts) {
    if (ctx.actor_count() > 0 && ctx.object_count == 0) {
      no_objects = &ctx;
      break;
    }
  }
  REQUIRE(no_objects != nullptr);
  HeadParams params = HeadParams::init(Variant::tubelet_soft, dims_for(spec), 5);
  const num::Tensor probs = predict_probabilities(*no_objects, params);

  // independent recomputation: manipulation probabilities must be
  // sigmoid(affine(phi_actor(gcn(H)))) with the object sum absent
  const num::Tensor actors = gcn_forward(no_objects->tubelet_graph, params.gcn);
  num::Tape tape;
  AffineStackVars phi = bind_stack(tape, params.phi_actor);
  num::Var transformed = stack_forward(tape, phi, tape.constant(actors));
  num::Var logits = tape.affine(transformed, tape.constant(params.manip_w),
                                tape.constant(params.manip_b));
  const num::Tensor expected = tape.value(tape.sigmoid(logits));
  const int offset = spec.vocabulary.pose_count();
  for (int i = 0; i < no_objects->actor_count(); ++i) {
    for (int c = 0; c < spec.vocabulary.manipulation_count(); ++c) {
      CHECK(probs.at(i, offset + c) == doctest::Approx(expected.at(i, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("hard variant with no partners scores zero for that group") {
  synth::ScenarioSpec spec = small_spec();
  spec.objects_min = 0;
  spec.objects_max = 1;
  const auto embedder = identity_embedder(spec.embedding_dim);
  auto contexts = contexts_for(spec, 12, 29, &embedder);
  const ClipContext* no_objects = nullptr;
  for (const auto& ctx : contexts) {
    if (ctx.actor_count() > 0 && ctx.object_count == 0) {
      no_objects = &ctx;
      break;
    }
  }
  REQUIRE(no_objects != nullptr);
  HeadParams params = HeadParams::init(Variant::tubelet_hard, dims_for(spec), 5);
  const num::Tensor probs = predict_probabilities(*no_objects, params);
  const int offset = spec.vocabulary.pose_count();
  for (int i = 0; i < no_objects->actor_count(); ++i) {
    for (int c = 0; c < spec.vocabulary.manipulation_count(); ++c) {
      CHECK(probs.at(i, offset + c) == 0.0);
    }
  }
}

TEST_CASE("head checkpoints round-trip through the binary container") {
  const synth::ScenarioSpec spec = small_spec();
  for (Variant variant : all_variants()) {
    HeadParams params = HeadParams::init(variant, dims_for(spec), 7);
    const num::Checkpoint ckpt = params.to_checkpoint(7);
    const HeadParams back = HeadParams::from_checkpoint(ckpt);
    CHECK(back.variant == variant);
    CHECK(back.dims.feature_dim == params.dims.feature_dim);
    CHECK(back.dims.n_pose == params.dims.n_pose);
    CHECK(back.dims.n_manip == params.dims.n_manip);
    CHECK(back.dims.n_inter == params.dims.n_inter);
    CHECK(params_equal(back, params));
  }
}
