#pragma once

#include <optional>
#include <vector>

#include "actgraph/embedder.hpp"
#include "actgraph/types.hpp"

namespace actgraph::assoc {

struct TrackerConfig {
  double iou_min = 0.5;            // gate: overlap must exceed this strictly
  double person_score_min = 0.9;   // detection-score threshold for persons
};

/// Person detections whose overlap with `prev` strictly exceeds the gate and
/// whose score passes the person threshold. Returns indices into `dets`.
std::vector<int> candidate_gate(const Box& prev, const std::vector<Detection>& dets,
                                const TrackerConfig& config);

/// A growing link chain for one actor. Entries stay sorted by frame; the
/// embeddings of the first and last matched detections drive matching in the
/// backward and forward directions respectively.
struct Track {
  int anchor_index = 0;
  std::vector<std::pair<int, Detection>> entries;  // (frame, detection)
  std::vector<double> head_embedding;  // embedding of lowest-frame detection
  std::vector<double> tail_embedding;  // embedding of highest-frame detection
};

/// Nearest candidate in embedding space; `forward` picks which end of the
/// track supplies the query embedding. Returns an index into `frame_dets`.
std::optional<int> match_step(const Track& track, const std::vector<Detection>& frame_dets,
                              const std::vector<int>& candidates, const EmbedderModel& model,
                              bool forward = true);

struct LinkRecord {
  int frame = 0;
  int detection_index = 0;
  double match_distance = 0.0;  // 0 for the anchor detection
};

struct TrackingResult {
  std::vector<Tubelet> tubelets;
  std::vector<std::vector<LinkRecord>> links;  // parallel to tubelets, by frame
};

/// Anchors one track per middle-frame person detection above the score
/// threshold and grows each bidirectionally, resolving conflicts greedily by
/// ascending embedding distance within every frame.
TrackingResult track_clip(const ClipSample& clip, const EmbedderModel& model,
                          const TrackerConfig& config);

std::vector<Tubelet> build_tubelets(const ClipSample& clip, const EmbedderModel& model,
                                    const TrackerConfig& config);

/// Fraction of consecutive links whose ground-truth identity tags agree
/// (links touching a tag-less detection count as wrong). 1.0 when no links.
double association_accuracy(const TrackingResult& result, const ClipSample& clip);

}  // namespace actgraph::assoc
