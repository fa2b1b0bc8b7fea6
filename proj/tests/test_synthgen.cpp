#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "actgraph/clip_io.hpp"
#include "actgraph/synthgen.hpp"

using namespace actgraph;
using namespace actgraph::synth;

namespace {

ScenarioSpec zero_noise_spec() {
  ScenarioSpec spec;
  spec.box_jitter = 0.0;
  spec.feature_noise = 0.0;
  spec.embedding_noise = 0.0;
  spec.distractor_rate = 0.0;
  return spec;
}

}  // namespace

TEST_CASE("identical (spec, seed) produce byte-identical clips") {
  ScenarioSpec spec;
  spec.t_frames = 12;
  const auto a = generate_clip(spec, 1234, 7);
  const auto b = generate_clip(spec, 1234, 7);
  CHECK(clip_to_jsonl(a.clip) == clip_to_jsonl(b.clip));
  const auto c = generate_clip(spec, 1235, 7);
  CHECK(clip_to_jsonl(a.clip) != clip_to_jsonl(c.clip));
}

TEST_CASE("infeasible specs are rejected") {
  SUBCASE("manipulation labels without objects") {
    ScenarioSpec spec;
    spec.objects_min = 0;
    spec.objects_max = 0;
    CHECK_THROWS_AS(generate_clip(spec, 1, 0), std::invalid_argument);
  }
  SUBCASE("interaction labels with a single actor") {
    ScenarioSpec spec;
    spec.actors_min = 1;
    spec.actors_max = 1;
    CHECK_THROWS_AS(generate_clip(spec, 1, 0), std::invalid_argument);
  }
  SUBCASE("feature dim too small for the banks") {
    ScenarioSpec spec;
    spec.feature_dim = 12;
    CHECK_THROWS_AS(generate_clip(spec, 1, 0), std::invalid_argument);
  }
}

TEST_CASE("pose waveform projection identifies the active class") {
  ScenarioSpec spec = zero_noise_spec();
  const FeatureLayout layout = FeatureLayout::from(spec);
  const auto waves = pose_waveforms(spec.t_frames, spec.vocabulary.pose_count());
  for (int seed = 0; seed < 5; ++seed) {
    const auto generated = generate_clip(spec, 50 + seed, 0);
    for (std::size_t a = 0; a < generated.actors.size(); ++a) {
      const ActorScript& actor = generated.actors[a];
      // projection of the actor's per-frame pose-bank values on each waveform
      std::vector<double> projections(spec.vocabulary.pose_count(), 0.0);
      for (int t = 0; t < spec.t_frames; ++t) {
        const Detection* det = nullptr;
        for (const Detection& d : generated.clip.frames[t]) {
          if (d.id_hint == static_cast<int>(a)) det = &d;
        }
        REQUIRE(det != nullptr);
        for (int c = 0; c < spec.vocabulary.pose_count(); ++c) {
          projections[c] += det->feature[layout.pose_begin + c] * waves[c][t];
        }
      }
      const double active = actor.waveform_sign * projections[actor.pose_class];
      for (int c = 0; c < spec.vocabulary.pose_count(); ++c) {
        if (c == actor.pose_class) continue;
        CHECK(active > std::abs(projections[c]) + 1.0);
      }
      // the waveform family is zero-mean, so the temporal mean recovers the
      // constant component alone
      double mean = 0.0;
      for (int t = 0; t < spec.t_frames; ++t) {
        for (const Detection& d : generated.clip.frames[t]) {
          if (d.id_hint == static_cast<int>(a)) mean += d.feature[layout.pose_begin + actor.pose_class];
        }
      }
      mean /= spec.t_frames;
      CHECK(mean == doctest::Approx(spec.pose_dc).epsilon(1e-9));
    }
  }
}

TEST_CASE("middle-frame person detections overlap ground truth at IoU >= 0.75") {
  ScenarioSpec spec;  // default jitter of 1px
  for (int seed = 0; seed < 10; ++seed) {
    const auto generated = generate_clip(spec, 900 + seed, seed);
    const auto& middle = generated.clip.frames[generated.clip.middle_frame()];
    for (const GtActor& gt : generated.clip.gt_actors) {
      double best = 0.0;
      for (const Detection& det : middle) {
        if (det.kind == DetectionKind::person) best = std::max(best, iou(det.box, gt.box));
      }
      CHECK(best >= 0.75);
    }
  }
}

TEST_CASE("actor features carry no manipulation-target component") {
  ScenarioSpec spec = zero_noise_spec();
  const FeatureLayout layout = FeatureLayout::from(spec);
  const auto generated = generate_clip(spec, 77, 0);
  const int n_manip = spec.vocabulary.manipulation_count();
  for (std::size_t a = 0; a < generated.actors.size(); ++a) {
    const Detection* det = nullptr;
    for (const Detection& d : generated.clip.frames[0]) {
      if (d.id_hint == static_cast<int>(a)) det = &d;
    }
    REQUIRE(det != nullptr);
    for (int c = 0; c < n_manip; ++c) {
      CHECK(det->feature[layout.manip_target_begin + c] == 0.0);
    }
  }
  // pair sums land on +pair_sum exactly for the active class, -pair_sum else
  for (std::size_t a = 0; a < generated.actors.size(); ++a) {
    const ActorScript& actor = generated.actors[a];
    if (!actor.manip_target_object) continue;
    const ObjectScript& object = generated.objects[*actor.manip_target_object];
    for (int c = 0; c < n_manip; ++c) {
      const double sum = actor.manip_source_coeff[c] + object.manip_target_coeff[c];
      const double expected =
          (actor.manip_class && *actor.manip_class == c) ? spec.pair_sum : -spec.pair_sum;
      CHECK(sum == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero-noise embeddings equal the orthonormal identities") {
  ScenarioSpec spec = zero_noise_spec();
  const auto generated = generate_clip(spec, 13, 2);
  for (std::size_t a = 0; a < generated.actors.size(); ++a) {
    for (std::size_t b = 0; b < generated.actors.size(); ++b) {
      double dot = 0.0;
      for (int e = 0; e < spec.embedding_dim; ++e) {
        dot += generated.actors[a].identity[e] * generated.actors[b].identity[e];
      }
      CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
    }
  }
  const auto& frame0 = generated.clip.frames[0];
  for (const Detection& det : frame0) {
    if (det.kind != DetectionKind::person) continue;
    REQUIRE(det.embedding.has_value());
    REQUIRE(det.id_hint.has_value());
    CHECK(*det.embedding == generated.actors[*det.id_hint].identity);
  }
}

TEST_CASE("generate_dataset writes clips, manifest, and matching histogram") {
  const auto dir = std::filesystem::temp_directory_path() / "actgraph_synth_test";
  std::filesystem::create_directories(dir);
  ScenarioSpec spec;
  spec.t_frames = 10;

  SUBCASE("zero clips still yields a valid manifest") {
    const auto path = dir / "empty.jsonl";
    const DatasetManifest manifest = generate_dataset(spec, 0, 5, path);
    CHECK(manifest.n_clips == 0);
    CHECK(read_dataset(path).empty());
    const DatasetManifest loaded = load_manifest(manifest_path_for(path));
    CHECK(loaded.seed == 5);
  }

  SUBCASE("histogram matches a brute-force recount") {
    const auto path = dir / "d.jsonl";
    const DatasetManifest manifest = generate_dataset(spec, 40, 5, path);
    const auto clips = read_dataset(path);
    REQUIRE(static_cast<int>(clips.size()) == 40);

    ClipCheckConfig check_config{spec.t_frames, spec.feature_dim, spec.embedding_dim,
                                 spec.vocabulary.total()};
    std::map<std::string, int> recount;
    for (const ClipSample& clip : clips) {
      CHECK(validate_clip(clip, check_config).empty());
      for (const GtActor& gt : clip.gt_actors) {
        for (int c = 0; c < spec.vocabulary.total(); ++c) {
          if (gt.labels[c] != 0.0) ++recount[spec.vocabulary.name_of(c)];
        }
      }
    }
    for (const auto& [name, count] : manifest.class_counts) {
      CHECK(recount[name] == count);
    }
  }
  std::filesystem::remove_all(dir);
}
