#include "actgraph/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace actgraph::assoc {

namespace {

double embedding_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

std::vector<int> candidate_gate(const Box& prev, const std::vector<Detection>& dets,
                                const TrackerConfig& config) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
    const Detection& det = dets[static_cast<std::size_t>(i)];
    if (det.kind != DetectionKind::person) continue;
    if (det.score < config.person_score_min) continue;
    if (iou(prev, det.box) <= config.iou_min) continue;
    out.push_back(i);
  }
  return out;
}

std::optional<int> match_step(const Track& track, const std::vector<Detection>& frame_dets,
                              const std::vector<int>& candidates, const EmbedderModel& model,
                              bool forward) {
  const std::vector<double>& query = forward ? track.tail_embedding : track.head_embedding;
  std::optional<int> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int idx : candidates) {
    const Detection& det = frame_dets[static_cast<std::size_t>(idx)];
    if (!det.embedding) continue;
    const double dist = embedding_distance(query, model.embed(*det.embedding));
    if (dist < best_dist) {
      best_dist = dist;
      best = idx;
    }
  }
  return best;
}

TrackingResult track_clip(const ClipSample& clip, const EmbedderModel& model,
                          const TrackerConfig& config) {
  TrackingResult result;
  if (clip.frames.empty()) return result;
  const int middle = clip.middle_frame();
  const auto& middle_dets = clip.frames[static_cast<std::size_t>(middle)];

  std::vector<Track> tracks;
  std::vector<std::vector<LinkRecord>> links;
  for (int i = 0; i < static_cast<int>(middle_dets.size()); ++i) {
    const Detection& det = middle_dets[static_cast<std::size_t>(i)];
    if (det.kind != DetectionKind::person) continue;
    if (det.score < config.person_score_min) continue;
    Track track;
    track.anchor_index = static_cast<int>(tracks.size());
    track.entries.emplace_back(middle, det);
    if (det.embedding) {
      track.head_embedding = model.embed(*det.embedding);
      track.tail_embedding = track.head_embedding;
    }
    tracks.push_back(std::move(track));
    links.push_back({LinkRecord{middle, i, 0.0}});
  }

  // Extends every live track one frame at a time; within a frame, candidate
  // pairs are taken in ascending embedding distance and a matched detection
  // is removed from play. Unmatched tracks terminate for that direction.
  auto sweep = [&](bool forward) {
    std::vector<bool> live(tracks.size(), true);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      live[i] = !(forward ? tracks[i].tail_embedding.empty() : tracks[i].head_embedding.empty());
    }
    const int step = forward ? 1 : -1;
    for (int frame = middle + step; frame >= 0 && frame < clip.t_frames(); frame += step) {
      const auto& dets = clip.frames[static_cast<std::size_t>(frame)];
      std::map<int, std::vector<double>> embedding_cache;
      auto embedding_of = [&](int det_index) -> const std::vector<double>& {
        auto it = embedding_cache.find(det_index);
        if (it == embedding_cache.end()) {
          it = embedding_cache
                   .emplace(det_index,
                            model.embed(*dets[static_cast<std::size_t>(det_index)].embedding))
                   .first;
        }
        return it->second;
      };

      struct Pair {
        double distance;
        int track;
        int det;
      };
      std::vector<Pair> pairs;
      for (int ti = 0; ti < static_cast<int>(tracks.size()); ++ti) {
        if (!live[static_cast<std::size_t>(ti)]) continue;
        const Track& track = tracks[static_cast<std::size_t>(ti)];
        const Box& prev_box =
            forward ? track.entries.back().second.box : track.entries.front().second.box;
        const std::vector<double>& query =
            forward ? track.tail_embedding : track.head_embedding;
        for (int idx : candidate_gate(prev_box, dets, config)) {
          if (!dets[static_cast<std::size_t>(idx)].embedding) continue;
          pairs.push_back(Pair{embedding_distance(query, embedding_of(idx)), ti, idx});
        }
      }
      std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.track != b.track) return a.track < b.track;
        return a.det < b.det;
      });

      std::vector<bool> det_used(dets.size(), false);
      std::vector<bool> matched(tracks.size(), false);
      for (const Pair& pair : pairs) {
        if (matched[static_cast<std::size_t>(pair.track)]) continue;
        if (det_used[static_cast<std::size_t>(pair.det)]) continue;
        matched[static_cast<std::size_t>(pair.track)] = true;
        det_used[static_cast<std::size_t>(pair.det)] = true;
        Track& track = tracks[static_cast<std::size_t>(pair.track)];
        const Detection& det = dets[static_cast<std::size_t>(pair.det)];
        if (forward) {
          track.entries.emplace_back(frame, det);
          track.tail_embedding = embedding_of(pair.det);
          links[static_cast<std::size_t>(pair.track)].push_back(
              LinkRecord{frame, pair.det, pair.distance});
        } else {
          track.entries.insert(track.entries.begin(), {frame, det});
          track.head_embedding = embedding_of(pair.det);
          links[static_cast<std::size_t>(pair.track)].insert(
              links[static_cast<std::size_t>(pair.track)].begin(),
              LinkRecord{frame, pair.det, pair.distance});
        }
      }
      for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
        if (live[ti] && !matched[ti]) live[ti] = false;
      }
      if (std::none_of(live.begin(), live.end(), [](bool b) { return b; })) break;
    }
  };
  sweep(true);
  sweep(false);

  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    Tubelet tubelet;
    tubelet.actor_index = tracks[ti].anchor_index;
    for (const auto& [frame, det] : tracks[ti].entries) {
      tubelet.entries.push_back(TubeletEntry{frame, det.box, det.feature});
    }
    result.tubelets.push_back(std::move(tubelet));
    result.links.push_back(links[ti]);
  }
  return result;
}

std::vector<Tubelet> build_tubelets(const ClipSample& clip, const EmbedderModel& model,
                                    const TrackerConfig& config) {
  return track_clip(clip, model, config).tubelets;
}

double association_accuracy(const TrackingResult& result, const ClipSample& clip) {
  int total = 0;
  int correct = 0;
  for (const auto& chain : result.links) {
    for (std::size_t i = 1; i < chain.size(); ++i) {
      const LinkRecord& prev = chain[i - 1];
      const LinkRecord& curr = chain[i];
      const Detection& a =
          clip.frames[static_cast<std::size_t>(prev.frame)][static_cast<std::size_t>(prev.detection_index)];
      const Detection& b =
          clip.frames[static_cast<std::size_t>(curr.frame)][static_cast<std::size_t>(curr.detection_index)];
      ++total;
      if (a.id_hint && b.id_hint && *a.id_hint == *b.id_hint) ++correct;
    }
  }
  if (total == 0) return 1.0;
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace actgraph::assoc
