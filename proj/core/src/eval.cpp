#include "actgraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace actgraph::eval {

using nlohmann::json;

std::vector<bool> match_detections(const std::vector<ScoredBox>& preds,
                                   const std::vector<Box>& gts, double iou_thresh) {
  for (std::size_t i = 1; i < preds.size(); ++i) {
    if (preds[i].score > preds[i - 1].score) {
      throw std::invalid_argument("match_detections requires descending scores");
    }
  }
  std::vector<bool> consumed(gts.size(), false);
  std::vector<bool> flags(preds.size(), false);
  for (std::size_t p = 0; p < preds.size(); ++p) {
    int best_gt = -1;
    double best_iou = iou_thresh;  // must be exceeded strictly
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (consumed[g]) continue;
      const double overlap = iou(preds[p].box, gts[g]);
      if (overlap > best_iou) {
        best_iou = overlap;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      consumed[static_cast<std::size_t>(best_gt)] = true;
      flags[p] = true;
    }
  }
  return flags;
}

double average_precision(const std::vector<bool>& flags, int n_gt) {
  if (n_gt < 1) throw std::invalid_argument("average_precision requires n_gt >= 1");
  if (flags.empty()) return 0.0;
  const std::size_t k = flags.size();
  std::vector<double> precision(k), recall(k);
  int tp = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (flags[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  // precision envelope from the right (all-points interpolation)
  for (std::size_t i = k - 1; i-- > 0;) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

EvalReport evaluate_predictions(const std::vector<ScoredPrediction>& preds,
                                const std::vector<ClipSample>& dataset,
                                const ActionVocabulary& vocab, int min_gt, double iou_thresh) {
  const int total = vocab.total();
  for (const ScoredPrediction& pred : preds) {
    if (static_cast<int>(pred.scores.size()) != total) {
      throw std::invalid_argument("prediction score vector does not match the vocabulary");
    }
  }

  std::map<int, std::vector<const ScoredPrediction*>> by_clip;
  for (const ScoredPrediction& pred : preds) by_clip[pred.clip_id].push_back(&pred);

  EvalReport report;
  report.min_gt = min_gt;
  report.iou_thresh = iou_thresh;
  report.per_class.resize(static_cast<std::size_t>(total));

  for (int c = 0; c < total; ++c) {
    PerClassResult& cls = report.per_class[static_cast<std::size_t>(c)];
    cls.name = vocab.name_of(c);
    cls.group = to_string(vocab.group_of(c));

    // Pool (score, tp) pairs across clips; matching stays per clip.
    std::vector<std::pair<double, bool>> pooled;
    int n_gt = 0;
    for (const ClipSample& clip : dataset) {
      std::vector<Box> gts;
      for (const GtActor& gt : clip.gt_actors) {
        if (gt.labels[static_cast<std::size_t>(c)] != 0.0) gts.push_back(gt.box);
      }
      n_gt += static_cast<int>(gts.size());
      auto it = by_clip.find(clip.clip_id);
      if (it == by_clip.end()) continue;
      std::vector<ScoredBox> clip_preds;
      clip_preds.reserve(it->second.size());
      for (const ScoredPrediction* pred : it->second) {
        clip_preds.push_back(ScoredBox{pred->scores[static_cast<std::size_t>(c)], pred->box});
      }
      std::stable_sort(clip_preds.begin(), clip_preds.end(),
                       [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
      const std::vector<bool> flags = match_detections(clip_preds, gts, iou_thresh);
      for (std::size_t i = 0; i < clip_preds.size(); ++i) {
        pooled.emplace_back(clip_preds[i].score, flags[i]);
      }
    }
    cls.n_gt = n_gt;
    if (n_gt < std::max(min_gt, 1)) continue;
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<bool> flags;
    flags.reserve(pooled.size());
    for (const auto& [score, tp] : pooled) flags.push_back(tp);
    cls.ap = average_precision(flags, n_gt);
    cls.evaluated = true;
  }

  auto mean_over = [&](auto&& keep) {
    double sum = 0.0;
    int count = 0;
    for (int c = 0; c < total; ++c) {
      const PerClassResult& cls = report.per_class[static_cast<std::size_t>(c)];
      if (cls.evaluated && keep(c)) {
        sum += cls.ap;
        ++count;
      }
    }
    return std::pair<double, bool>{count > 0 ? sum / count : 0.0, count > 0};
  };
  std::tie(report.mean_ap, std::ignore) = mean_over([](int) { return true; });
  auto in_group = [&](ActionVocabulary::Group g) {
    return [&vocab, g](int c) { return vocab.group_of(c) == g; };
  };
  std::tie(report.pose_map, report.has_pose) = mean_over(in_group(ActionVocabulary::Group::pose));
  std::tie(report.manipulation_map, report.has_manipulation) =
      mean_over(in_group(ActionVocabulary::Group::manipulation));
  std::tie(report.interaction_map, report.has_interaction) =
      mean_over(in_group(ActionVocabulary::Group::interaction));
  return report;
}

double group_mean(const EvalReport& report, ActionVocabulary::Group group) {
  switch (group) {
    case ActionVocabulary::Group::pose:
      return report.pose_map;
    case ActionVocabulary::Group::manipulation:
      return report.manipulation_map;
    case ActionVocabulary::Group::interaction:
      return report.interaction_map;
  }
  return 0.0;
}

std::string report_to_json(const EvalReport& report) {
  json j;
  j["format_version"] = 1;
  j["mean_ap"] = report.mean_ap;
  j["group_means"] = {
      {"pose", report.has_pose ? json(report.pose_map) : json(nullptr)},
      {"manipulation", report.has_manipulation ? json(report.manipulation_map) : json(nullptr)},
      {"interaction", report.has_interaction ? json(report.interaction_map) : json(nullptr)}};
  j["min_gt"] = report.min_gt;
  j["iou_thresh"] = report.iou_thresh;
  json classes = json::array();
  for (const PerClassResult& cls : report.per_class) {
    classes.push_back(json{{"name", cls.name},
                           {"group", cls.group},
                           {"ap", cls.evaluated ? json(cls.ap) : json(nullptr)},
                           {"n_gt", cls.n_gt}});
  }
  j["per_class"] = std::move(classes);
  return j.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "class" << std::setw(14) << "group" << std::right
     << std::setw(10) << "AP" << std::setw(8) << "n_gt" << '\n';
  os << std::string(50, '-') << '\n';
  for (const PerClassResult& cls : report.per_class) {
    os << std::left << std::setw(18) << cls.name << std::setw(14) << cls.group << std::right
       << std::setw(10);
    if (cls.evaluated) {
      os << std::fixed << std::setprecision(4) << cls.ap;
    } else {
      os << "n/a";
    }
    os << std::setw(8) << cls.n_gt << '\n';
  }
  os << std::string(50, '-') << '\n';
  auto line = [&os](const char* label, double value, bool defined) {
    os << std::left << std::setw(32) << label << std::right << std::setw(10);
    if (defined) {
      os << std::fixed << std::setprecision(4) << value;
    } else {
      os << "n/a";
    }
    os << '\n';
  };
  line("mean AP", report.mean_ap, true);
  line("pose mAP", report.pose_map, report.has_pose);
  line("manipulation mAP", report.manipulation_map, report.has_manipulation);
  line("interaction mAP", report.interaction_map, report.has_interaction);
  return os.str();
}

std::string report_per_class_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "class,group,ap,n_gt,evaluated\n";
  for (const PerClassResult& cls : report.per_class) {
    os << cls.name << ',' << cls.group << ',';
    if (cls.evaluated) os << cls.ap;
    os << ',' << cls.n_gt << ',' << (cls.evaluated ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace actgraph::eval
