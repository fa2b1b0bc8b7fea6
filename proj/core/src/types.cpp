#include "actgraph/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace actgraph {

const char* to_string(DetectionKind kind) {
  return kind == DetectionKind::person ? "person" : "object";
}

DetectionKind detection_kind_from_string(const std::string& name) {
  if (name == "person") return DetectionKind::person;
  if (name == "object") return DetectionKind::object;
  throw std::invalid_argument("unknown detection kind: " + name);
}

bool Tubelet::covers_frame(int frame) const {
  return std::any_of(entries.begin(), entries.end(),
                     [frame](const TubeletEntry& e) { return e.frame == frame; });
}

ActionVocabulary::ActionVocabulary(std::vector<std::string> pose,
                                   std::vector<std::string> manipulation,
                                   std::vector<std::string> interaction)
    : pose_(std::move(pose)),
      manipulation_(std::move(manipulation)),
      interaction_(std::move(interaction)) {
  if (pose_.empty() || manipulation_.empty() || interaction_.empty()) {
    throw std::invalid_argument("every vocabulary group must be nonempty");
  }
  std::set<std::string> seen;
  for (const auto* group : {&pose_, &manipulation_, &interaction_}) {
    for (const auto& name : *group) {
      if (!seen.insert(name).second) {
        throw std::invalid_argument("duplicate class name in vocabulary: " + name);
      }
    }
  }
}

int ActionVocabulary::total() const {
  return pose_count() + manipulation_count() + interaction_count();
}

ActionVocabulary::Group ActionVocabulary::group_of(int class_index) const {
  if (class_index < 0 || class_index >= total()) {
    throw std::out_of_range("class index out of range");
  }
  if (class_index < pose_count()) return Group::pose;
  if (class_index < pose_count() + manipulation_count()) return Group::manipulation;
  return Group::interaction;
}

std::pair<int, int> ActionVocabulary::group_range(Group group) const {
  switch (group) {
    case Group::pose:
      return {0, pose_count()};
    case Group::manipulation:
      return {pose_count(), pose_count() + manipulation_count()};
    case Group::interaction:
      return {pose_count() + manipulation_count(), total()};
  }
  throw std::logic_error("unreachable");
}

const std::string& ActionVocabulary::name_of(int class_index) const {
  const Group group = group_of(class_index);
  const auto [begin, end] = group_range(group);
  (void)end;
  switch (group) {
    case Group::pose:
      return pose_[class_index - begin];
    case Group::manipulation:
      return manipulation_[class_index - begin];
    case Group::interaction:
      return interaction_[class_index - begin];
  }
  throw std::logic_error("unreachable");
}

int ActionVocabulary::index_of(const std::string& name) const {
  for (int i = 0; i < total(); ++i) {
    if (name_of(i) == name) return i;
  }
  return -1;
}

const char* to_string(ActionVocabulary::Group group) {
  switch (group) {
    case ActionVocabulary::Group::pose:
      return "pose";
    case ActionVocabulary::Group::manipulation:
      return "manipulation";
    case ActionVocabulary::Group::interaction:
      return "interaction";
  }
  return "?";
}

namespace {

bool all_finite(const std::vector<double>& values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace

std::vector<std::string> validate_clip(const ClipSample& clip, const ClipCheckConfig& config) {
  std::vector<std::string> errors;
  auto report = [&errors](const std::string& msg) { errors.push_back(msg); };

  if (clip.frames.empty()) {
    report("clip has zero frames");
    return errors;
  }
  if (config.t_frames > 0 && clip.t_frames() != config.t_frames) {
    std::ostringstream os;
    os << "clip has " << clip.t_frames() << " frames, expected " << config.t_frames;
    report(os.str());
  }
  for (int t = 0; t < clip.t_frames(); ++t) {
    for (std::size_t d = 0; d < clip.frames[t].size(); ++d) {
      const Detection& det = clip.frames[t][d];
      std::ostringstream where;
      where << "frame " << t << " detection " << d << ": ";
      if (static_cast<int>(det.feature.size()) != config.feature_dim) {
        report(where.str() + "feature length " + std::to_string(det.feature.size()) +
               " != " + std::to_string(config.feature_dim));
      } else if (!all_finite(det.feature)) {
        report(where.str() + "feature contains non-finite values");
      }
      if (det.embedding) {
        if (static_cast<int>(det.embedding->size()) != config.embedding_dim) {
          report(where.str() + "embedding length " + std::to_string(det.embedding->size()) +
                 " != " + std::to_string(config.embedding_dim));
        } else if (!all_finite(*det.embedding)) {
          report(where.str() + "embedding contains non-finite values");
        }
      }
      if (det.score < 0.0 || det.score > 1.0 || !std::isfinite(det.score)) {
        report(where.str() + "score outside [0, 1]");
      }
    }
  }
  for (std::size_t g = 0; g < clip.gt_actors.size(); ++g) {
    const GtActor& gt = clip.gt_actors[g];
    if (static_cast<int>(gt.labels.size()) != config.total_classes) {
      report("gt actor " + std::to_string(g) + ": label vector length " +
             std::to_string(gt.labels.size()) + " != " + std::to_string(config.total_classes));
    }
    for (double v : gt.labels) {
      if (v != 0.0 && v != 1.0) {
        report("gt actor " + std::to_string(g) + ": labels must be multi-hot 0/1");
        break;
      }
    }
  }
  return errors;
}

}  // namespace actgraph
