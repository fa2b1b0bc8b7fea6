#pragma once

#include <string>
#include <vector>

#include "actgraph/types.hpp"

namespace actgraph::eval {

struct ScoredPrediction {
  int clip_id = 0;
  Box box;
  std::vector<double> scores;  // per class, unit interval
};

struct ScoredBox {
  double score = 0.0;
  Box box;
};

/// Greedy matching for one clip and one class. Predictions must arrive in
/// descending score order (ties broken by position). Each prediction takes
/// the unconsumed ground-truth box of highest overlap, provided the overlap
/// strictly exceeds the threshold; true means TP.
std::vector<bool> match_detections(const std::vector<ScoredBox>& preds,
                                   const std::vector<Box>& gts, double iou_thresh = 0.5);

/// Area under the precision-recall curve with all-points interpolation.
/// `flags` are TP markers in global descending-score order. n_gt must be >= 1.
double average_precision(const std::vector<bool>& flags, int n_gt);

struct PerClassResult {
  std::string name;
  std::string group;
  double ap = 0.0;
  int n_gt = 0;
  bool evaluated = false;  // n_gt >= min_gt
};

struct EvalReport {
  double mean_ap = 0.0;
  double pose_map = 0.0;
  double manipulation_map = 0.0;
  double interaction_map = 0.0;
  bool has_pose = false, has_manipulation = false, has_interaction = false;
  std::vector<PerClassResult> per_class;
  int min_gt = 5;
  double iou_thresh = 0.5;
};

/// Frame-level mean average precision on middle-frame ground truth, reported
/// per class and per group. Classes with fewer than min_gt ground-truth
/// samples are excluded from every mean.
EvalReport evaluate_predictions(const std::vector<ScoredPrediction>& preds,
                                const std::vector<ClipSample>& dataset,
                                const ActionVocabulary& vocab, int min_gt = 5,
                                double iou_thresh = 0.5);

std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);
std::string report_per_class_csv(const EvalReport& report);

double group_mean(const EvalReport& report, ActionVocabulary::Group group);

}  // namespace actgraph::eval
