#include "actgraph/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace actgraph::synth {

std::vector<std::string> ScenarioSpec::validate() const {
  std::vector<std::string> errors;
  if (t_frames < 1) errors.push_back("t_frames must be >= 1");
  if (embedding_dim < actors_max) {
    errors.push_back("embedding_dim must be >= actors_max for orthonormal identities");
  }
  if (frame_width < 80.0 || frame_height < 80.0) errors.push_back("frame too small");
  if (actors_min < 1 || actors_min > actors_max) errors.push_back("empty actor count range");
  if (objects_min < 0 || objects_min > objects_max) errors.push_back("empty object count range");
  for (double sigma : {box_jitter, feature_noise, embedding_noise, distractor_rate}) {
    if (sigma < 0.0) errors.push_back("noise levels must be >= 0");
  }
  for (double th : {person_score_threshold, object_score_threshold}) {
    if (th <= 0.0 || th >= 1.0) errors.push_back("score thresholds must lie in (0, 1)");
  }
  if (!vocabulary.interaction().empty() && actors_max < 2) {
    errors.push_back("interaction classes require actors_max >= 2");
  }
  if (!vocabulary.manipulation().empty() && objects_max < 1) {
    errors.push_back("manipulation classes require objects_max >= 1");
  }
  try {
    FeatureLayout::from(*this);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  return errors;
}

FeatureLayout FeatureLayout::from(const ScenarioSpec& spec) {
  const int n_pose = spec.vocabulary.pose_count();
  const int n_manip = spec.vocabulary.manipulation_count();
  const int n_inter = spec.vocabulary.interaction_count();

  FeatureLayout layout;
  int cursor = 0;
  layout.pose_begin = cursor;
  cursor += n_pose;
  layout.manip_source_begin = cursor;
  cursor += n_manip;
  layout.manip_target_begin = cursor;
  cursor += n_manip;
  layout.interaction_begin = cursor;
  cursor += n_inter;

  const int remaining = spec.feature_dim - cursor;
  // Two link banks plus at least two appearance dims.
  if (remaining < 8) {
    throw std::invalid_argument("feature_dim too small for the signal banks");
  }
  const int link_dims = std::min(6, (remaining - 2) / 2);
  layout.object_link_begin = cursor;
  layout.object_link_dims = link_dims;
  cursor += link_dims;
  layout.actor_link_begin = cursor;
  layout.actor_link_dims = link_dims;
  cursor += link_dims;
  layout.appearance_begin = cursor;
  layout.appearance_dims = spec.feature_dim - cursor;
  return layout;
}

std::vector<std::vector<double>> pose_waveforms(int t_frames, int n_pose_classes) {
  std::vector<std::vector<double>> waves(static_cast<std::size_t>(n_pose_classes));
  for (int c = 0; c < n_pose_classes; ++c) {
    auto& wave = waves[static_cast<std::size_t>(c)];
    wave.resize(static_cast<std::size_t>(t_frames));
    for (int t = 0; t < t_frames; ++t) {
      wave[static_cast<std::size_t>(t)] =
          std::cos(std::numbers::pi * (c + 1) * (2.0 * t + 1.0) / (2.0 * t_frames));
    }
  }
  return waves;
}

}  // namespace actgraph::synth
