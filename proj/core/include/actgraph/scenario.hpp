#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "actgraph/types.hpp"

namespace actgraph::synth {

/// Controls for the clip generator that stands in for the video backbone and
/// detector. All noise is explicit; with every sigma at zero a clip is an
/// exact deterministic function of (spec, seed, clip_index).
struct ScenarioSpec {
  int t_frames = 36;
  int feature_dim = 32;
  int embedding_dim = 16;
  double frame_width = 400.0;
  double frame_height = 300.0;

  int actors_min = 2;
  int actors_max = 4;
  int objects_min = 1;
  int objects_max = 3;

  ActionVocabulary vocabulary{
      {"stand", "sit", "walk", "bend"}, {"carry", "push", "lift"}, {"talk_to", "watch", "hug"}};

  double box_jitter = 1.0;       // detection box noise, px
  double feature_noise = 0.05;   // per-dim feature noise
  double embedding_noise = 0.1;  // per-dim appearance-surrogate noise
  double distractor_rate = 0.3;  // expected false detections per frame

  double person_score_threshold = 0.9;
  double object_score_threshold = 0.5;

  double manip_rate = 0.7;        // P(pair carries a manipulation label)
  double interaction_rate = 0.75; // P(pair carries an interaction label)
  double max_speed = 9.0;         // px per frame

  // Signal magnitudes of the feature model (documented in the manifest).
  double pose_dc = 1.0;        // constant carried by an active pose class
  double waveform_amp = 4.0;   // temporal modulation amplitude
  double pair_sum = 3.0;       // |source + target| coefficient of a relation pair
  double beacon_scale = 2.0;   // per-dim scale of shared pair beacons
  double appearance_scale = 1.0;
  double source_coeff_range = 0.5;  // cover coefficients are U(-range, range)

  std::vector<std::string> validate() const;  // empty when feasible
};

/// Offsets of the signal banks inside the D-dimensional feature vector.
struct FeatureLayout {
  int pose_begin = 0;
  int manip_source_begin = 0;
  int manip_target_begin = 0;
  int interaction_begin = 0;  // shared bank holding both members' shares
  int object_link_begin = 0;
  int object_link_dims = 0;
  int actor_link_begin = 0;
  int actor_link_dims = 0;
  int appearance_begin = 0;
  int appearance_dims = 0;

  static FeatureLayout from(const ScenarioSpec& spec);  // throws when D is too small
};

/// Ground-truth script for one actor; exposes enough generator internals for
/// oracle computations in tests. Never consumed by inference code.
struct ActorScript {
  std::vector<double> identity;      // E dims, orthonormal across actors
  std::vector<Box> trajectory;       // length T
  std::vector<int> label_indices;    // global vocabulary indices
  int pose_class = 0;                // local pose index
  double waveform_sign = 1.0;

  std::vector<double> manip_source_coeff;  // per manipulation class
  std::vector<double> inter_share_coeff;   // per interaction class; empty when unpaired
  std::optional<int> manip_target_object;
  std::optional<int> manip_class;          // local index, requires target object
  std::optional<int> interaction_target_actor;  // the pair partner
  std::optional<int> interaction_class;    // mutual: both pair members carry it
  std::vector<double> object_link_beacon;  // empty unless paired with an object
  std::vector<double> actor_link_beacon;   // empty unless in an actor pair
  std::vector<double> appearance;
};

struct ObjectScript {
  std::vector<Box> trajectory;
  std::optional<int> targeted_by;           // actor index
  std::vector<double> manip_target_coeff;   // per manipulation class, when targeted
  std::vector<double> object_link_beacon;   // shared with the targeting actor
  std::vector<double> appearance;
};

/// Fixed per-class temporal patterns (orthogonal cosine family, zero mean
/// over a full clip). Rows: pose classes; columns: frames.
std::vector<std::vector<double>> pose_waveforms(int t_frames, int n_pose_classes);

}  // namespace actgraph::synth
