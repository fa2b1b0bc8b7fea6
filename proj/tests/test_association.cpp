#include <doctest.h>

#include <cmath>
#include <set>

#include "actgraph/synthgen.hpp"
#include "actgraph/tracker.hpp"

using namespace actgraph;
using namespace actgraph::assoc;

namespace {

synth::ScenarioSpec zero_noise_spec() {
  synth::ScenarioSpec spec;
  spec.box_jitter = 0.0;
  spec.feature_noise = 0.0;
  spec.embedding_noise = 0.0;
  spec.distractor_rate = 0.0;
  return spec;
}

/// Exact pass-through encoder: relu(x + L) - L with identity weights.
EmbedderModel identity_embedder(int dims) {
  EmbedderModel model;
  model.w1 = num::Tensor::identity(dims);
  model.b1 = num::Tensor::filled({dims}, 100.0);
  model.w2 = num::Tensor::identity(dims);
  model.b2 = num::Tensor::filled({dims}, -100.0);
  return model;
}

Detection person_at(double x, double y, double score = 0.95,
                    std::vector<double> embedding = {0, 0}, std::optional<int> id = {}) {
  return Detection{Box(x, y, x + 40, y + 80), score, DetectionKind::person,
                   FeatureVec(4, 0.0), std::move(embedding), id};
}

}  // namespace

TEST_CASE("triplet loss hinge cases") {
  const std::vector<double> a{1.0, 0.0};
  SUBCASE("anchor equals positive, far negative: inactive hinge") {
    const std::vector<double> n{5.0, 0.0};
    CHECK(triplet_loss(a, a, n, 0.2) == 0.0);
  }
  SUBCASE("all equal: loss is the margin") {
    CHECK(triplet_loss(a, a, a, 0.2) == doctest::Approx(0.2).epsilon(1e-15));
  }
  SUBCASE("hand distances 1 and 2 with margin 0.5") {
    const std::vector<double> p{1.0, 1.0};  // distance 1
    const std::vector<double> n{1.0, -2.0};  // distance 2
    CHECK(triplet_loss(a, p, n, 0.5) == 0.0);  // max(0, 1 - 2 + 0.5)
  }
  SUBCASE("active hinge value") {
    const std::vector<double> p{1.0, 2.0};   // distance 2
    const std::vector<double> n{1.0, -1.0};  // distance 1
    CHECK(triplet_loss(a, p, n, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
  }
  CHECK_THROWS(triplet_loss(a, a, std::vector<double>{1.0}, 0.2));
}

TEST_CASE("candidate gate filters kind, score, and strict overlap") {
  TrackerConfig config;
  const Box prev(0, 0, 40, 80);
  std::vector<Detection> dets;
  dets.push_back(person_at(0, 0));                      // identical: in
  dets.push_back(person_at(200, 100));                  // disjoint: out
  dets.push_back(person_at(0, 0, 0.5));                 // low score: out
  dets.push_back(Detection{Box(0, 0, 40, 80), 0.95, DetectionKind::object,
                           FeatureVec(4, 0.0), std::nullopt, std::nullopt});  // object: out
  // overlap exactly 0.5: half-height box nested in prev
  dets.push_back(Detection{Box(0, 0, 40, 40), 0.95, DetectionKind::person,
                           FeatureVec(4, 0.0), EmbeddingVec{0, 0}, std::nullopt});
  REQUIRE(iou(prev, dets.back().box) == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<int> gated = candidate_gate(prev, dets, config);
  CHECK(gated == std::vector<int>{0});
}

TEST_CASE("match_step picks the embedding nearest neighbor") {
  EmbedderModel model = identity_embedder(2);
  Track track;
  track.tail_embedding = {1.0, 1.0};
  track.head_embedding = track.tail_embedding;

  std::vector<Detection> dets;
  dets.push_back(person_at(0, 0, 0.95, {4.0, 1.0}));   // distance 3
  dets.push_back(person_at(50, 0, 0.95, {1.0, 1.0}));  // distance 0
  dets.push_back(person_at(100, 0, 0.95, {1.0, 3.0})); // distance 2

  SUBCASE("single candidate") {
    CHECK(match_step(track, dets, {0}, model) == 0);
  }
  SUBCASE("identical embedding beats distant ones") {
    CHECK(match_step(track, dets, {0, 1}, model) == 1);
  }
  SUBCASE("three candidates with hand distances") {
    CHECK(match_step(track, dets, {0, 1, 2}, model) == 1);
    CHECK(match_step(track, dets, {0, 2}, model) == 2);
  }
  SUBCASE("no candidates") {
    CHECK_FALSE(match_step(track, dets, {}, model).has_value());
  }
}

TEST_CASE("embedder trains to near-zero loss on separable identities") {
  synth::ScenarioSpec spec = zero_noise_spec();
  spec.t_frames = 12;
  std::vector<ClipSample> dataset;
  for (int i = 0; i < 12; ++i) dataset.push_back(synth::generate_clip(spec, 321, i).clip);

  EmbedderTrainConfig config;
  config.iterations = 300;
  config.batch = 16;
  config.seed = 5;
  const EmbedderTrainResult result = train_embedder(dataset, config);
  double tail_mean = 0.0;
  const int tail = 20;
  for (int i = 0; i < tail; ++i) {
    tail_mean += result.loss_log[result.loss_log.size() - 1 - i];
  }
  tail_mean /= tail;
  CHECK(tail_mean < 0.01 * config.margin);

  SUBCASE("fixed seed reproduces parameters bitwise") {
    const EmbedderTrainResult again = train_embedder(dataset, config);
    CHECK(again.model.w1 == result.model.w1);
    CHECK(again.model.b1 == result.model.b1);
    CHECK(again.model.w2 == result.model.w2);
    CHECK(again.model.b2 == result.model.b2);
  }
  SUBCASE("zero learning rate leaves parameters at initialization") {
    EmbedderTrainConfig frozen = config;
    frozen.learning_rate = 0.0;
    frozen.iterations = 40;
    const EmbedderTrainResult untouched = train_embedder(dataset, frozen);
    const EmbedderModel fresh = EmbedderModel::init(spec.embedding_dim, spec.embedding_dim, frozen.seed);
    CHECK(untouched.model.w1 == fresh.w1);
    CHECK(untouched.model.w2 == fresh.w2);
  }
}

TEST_CASE("embedder training rejects single-identity datasets") {
  synth::ScenarioSpec spec = zero_noise_spec();
  spec.actors_min = 1;
  spec.actors_max = 1;
  spec.vocabulary = ActionVocabulary({"p"}, {"m"}, {"i"});
  // single-actor clips cannot carry interactions; relax the vocabulary is not
  // possible, so build the degenerate dataset by hand instead
  std::vector<ClipSample> dataset;
  ClipSample clip;
  clip.frames.resize(6);
  for (int t = 0; t < 6; ++t) {
    clip.frames[t].push_back(person_at(10, 10, 0.95, {1.0, 0.0}, 0));
  }
  dataset.push_back(clip);
  CHECK_THROWS_AS(train_embedder(dataset, EmbedderTrainConfig{}), std::invalid_argument);
}

TEST_CASE("perfect single-actor scene yields one full-length tubelet") {
  synth::ScenarioSpec spec = zero_noise_spec();
  spec.actors_min = 2;  // need two identities somewhere for generation sanity
  spec.actors_max = 2;
  const auto generated = synth::generate_clip(spec, 555, 0);
  EmbedderModel model = identity_embedder(spec.embedding_dim);
  TrackerConfig config;

  const auto tubelets = build_tubelets(generated.clip, model, config);
  REQUIRE(tubelets.size() == generated.actors.size());
  for (const Tubelet& tubelet : tubelets) {
    CHECK(tubelet.length() == spec.t_frames);
    CHECK(tubelet.covers_frame(generated.clip.middle_frame()));
  }
  // zero-noise boxes must equal the scripted trajectory exactly; identify the
  // actor by its middle-frame ground-truth box
  for (const Tubelet& tubelet : tubelets) {
    const Box middle_box = [&] {
      for (const TubeletEntry& e : tubelet.entries) {
        if (e.frame == generated.clip.middle_frame()) return e.box;
      }
      throw std::logic_error("tubelet misses the middle frame");
    }();
    const synth::ActorScript* script = nullptr;
    for (const auto& actor : generated.actors) {
      if (actor.trajectory[generated.clip.middle_frame()] == middle_box) script = &actor;
    }
    REQUIRE(script != nullptr);
    for (const TubeletEntry& entry : tubelet.entries) {
      CHECK(entry.box == script->trajectory[entry.frame]);
    }
  }
}

TEST_CASE("no middle-frame persons produce no tubelets") {
  ClipSample clip;
  clip.frames.resize(5);
  clip.frames[0].push_back(person_at(0, 0, 0.95, {1.0, 0.0}, 0));
  // middle frame (index 2) holds only an object
  clip.frames[2].push_back(Detection{Box(5, 5, 20, 20), 0.9, DetectionKind::object,
                                     FeatureVec(4, 0.0), std::nullopt, std::nullopt});
  EmbedderModel model = identity_embedder(2);
  CHECK(build_tubelets(clip, model, TrackerConfig{}).empty());
}

TEST_CASE("zero-noise multi-actor scenes track without identity switches") {
  synth::ScenarioSpec spec = zero_noise_spec();
  EmbedderModel model = identity_embedder(spec.embedding_dim);
  TrackerConfig config;
  for (int seed = 0; seed < 8; ++seed) {
    const auto generated = synth::generate_clip(spec, 4242 + seed, seed);
    const TrackingResult result = track_clip(generated.clip, model, config);
    CHECK(association_accuracy(result, generated.clip) == 1.0);

    // tubelet invariants: unique detections per frame, middle coverage
    std::set<std::pair<int, int>> used;
    for (std::size_t ti = 0; ti < result.links.size(); ++ti) {
      int middle_hits = 0;
      for (const LinkRecord& link : result.links[ti]) {
        CHECK(used.emplace(link.frame, link.detection_index).second);
        if (link.frame == generated.clip.middle_frame()) ++middle_hits;
      }
      CHECK(middle_hits == 1);
      const Tubelet& tubelet = result.tubelets[ti];
      for (int e = 1; e < tubelet.length(); ++e) {
        CHECK(tubelet.entries[e].frame > tubelet.entries[e - 1].frame);
      }
    }
  }
}
