#pragma once

#include <optional>
#include <string>
#include <vector>

#include "actgraph/geometry.hpp"

namespace actgraph {

using FeatureVec = std::vector<double>;
using EmbeddingVec = std::vector<double>;

enum class DetectionKind { person, object };

const char* to_string(DetectionKind kind);
DetectionKind detection_kind_from_string(const std::string& name);

/// One detected box with its pooled feature. `embedding` is the appearance
/// surrogate used by the association module (persons only). `id_hint` is a
/// ground-truth identity tag carried for audits; inference must not read it.
struct Detection {
  Box box;
  double score = 0.0;
  DetectionKind kind = DetectionKind::person;
  FeatureVec feature;
  std::optional<EmbeddingVec> embedding;
  std::optional<int> id_hint;
};

struct TubeletEntry {
  int frame = 0;
  Box box;
  FeatureVec feature;
};

/// Per-actor sequence of linked boxes, frame indices strictly increasing.
struct Tubelet {
  int actor_index = 0;
  std::vector<TubeletEntry> entries;

  int length() const { return static_cast<int>(entries.size()); }
  int first_frame() const { return entries.front().frame; }
  int last_frame() const { return entries.back().frame; }
  bool covers_frame(int frame) const;
};

/// Three disjoint groups of action class names. Class indices run over
/// pose classes first, then manipulation, then interaction.
class ActionVocabulary {
 public:
  enum class Group { pose, manipulation, interaction };

  ActionVocabulary() = default;
  ActionVocabulary(std::vector<std::string> pose,
                   std::vector<std::string> manipulation,
                   std::vector<std::string> interaction);

  const std::vector<std::string>& pose() const { return pose_; }
  const std::vector<std::string>& manipulation() const { return manipulation_; }
  const std::vector<std::string>& interaction() const { return interaction_; }

  int total() const;
  int pose_count() const { return static_cast<int>(pose_.size()); }
  int manipulation_count() const { return static_cast<int>(manipulation_.size()); }
  int interaction_count() const { return static_cast<int>(interaction_.size()); }

  Group group_of(int class_index) const;
  /// Half-open [begin, end) range of class indices for a group.
  std::pair<int, int> group_range(Group group) const;
  const std::string& name_of(int class_index) const;
  int index_of(const std::string& name) const;  // -1 when unknown

  bool operator==(const ActionVocabulary&) const = default;

 private:
  std::vector<std::string> pose_, manipulation_, interaction_;
};

const char* to_string(ActionVocabulary::Group group);

struct GtActor {
  Box box;
  std::vector<double> labels;  // multi-hot over the full vocabulary
};

/// One clip: T frames of detections plus middle-frame ground truth.
struct ClipSample {
  int clip_id = 0;
  std::vector<std::vector<Detection>> frames;
  std::vector<GtActor> gt_actors;

  int t_frames() const { return static_cast<int>(frames.size()); }
  int middle_frame() const { return t_frames() / 2; }
};

struct ClipCheckConfig {
  int t_frames = 36;
  int feature_dim = 32;
  int embedding_dim = 16;
  int total_classes = 10;
};

/// Collects every invariant violation; an empty result means the clip is valid.
std::vector<std::string> validate_clip(const ClipSample& clip, const ClipCheckConfig& config);

}  // namespace actgraph
