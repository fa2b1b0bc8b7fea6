#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "actgraph/eval.hpp"
#include "actgraph/rng.hpp"

using namespace actgraph;
using namespace actgraph::eval;

namespace {

Box unit_box(double x, double y) { return Box(x, y, x + 10, y + 10); }

/// Independent re-implementation of the matching protocol by exhaustive
/// search: for each prediction in order, enumerate every unconsumed
/// ground-truth box and pick the best-overlap feasible one.
std::vector<bool> exhaustive_match(const std::vector<ScoredBox>& preds,
                                   const std::vector<Box>& gts, double thresh) {
  std::vector<bool> taken(gts.size(), false);
  std::vector<bool> flags(preds.size(), false);
  for (std::size_t p = 0; p < preds.size(); ++p) {
    double best = -1.0;
    int pick = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double overlap = iou(preds[p].box, gts[g]);
      if (overlap <= thresh) continue;
      if (overlap > best) {
        best = overlap;
        pick = static_cast<int>(g);
      }
    }
    if (pick >= 0) {
      taken[pick] = true;
      flags[p] = true;
    }
  }
  return flags;
}

ActionVocabulary tiny_vocab() { return ActionVocabulary({"p0", "p1"}, {"m0"}, {"i0"}); }

}  // namespace

TEST_CASE("match_detections basics") {
  SUBCASE("exact prediction on one ground truth") {
    const std::vector<ScoredBox> preds{{0.9, unit_box(0, 0)}};
    const std::vector<Box> gts{unit_box(0, 0)};
    CHECK(match_detections(preds, gts) == std::vector<bool>{true});
  }
  SUBCASE("two predictions on one ground truth: single consumption") {
    const std::vector<ScoredBox> preds{{0.9, unit_box(0, 0)}, {0.8, unit_box(1, 0)}};
    const std::vector<Box> gts{unit_box(0, 0)};
    CHECK(match_detections(preds, gts) == std::vector<bool>{true, false});
  }
  SUBCASE("overlap exactly at the threshold does not match") {
    const std::vector<ScoredBox> preds{{0.9, Box(0, 0, 10, 5)}};
    const std::vector<Box> gts{Box(0, 0, 10, 10)};
    REQUIRE(iou(preds[0].box, gts[0]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(match_detections(preds, gts, 0.5) == std::vector<bool>{false});
  }
  SUBCASE("unsorted input is rejected") {
    const std::vector<ScoredBox> preds{{0.5, unit_box(0, 0)}, {0.9, unit_box(1, 1)}};
    CHECK_THROWS(match_detections(preds, {unit_box(0, 0)}));
  }
}

TEST_CASE("match_detections agrees with the exhaustive oracle on 1000 instances") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_pred = rng.uniform_int(6);
    const int n_gt = rng.uniform_int(4);
    std::vector<ScoredBox> preds;
    for (int p = 0; p < n_pred; ++p) {
      preds.push_back(ScoredBox{rng.uniform(),
                                Box(rng.uniform(0, 20), rng.uniform(0, 20),
                                    rng.uniform(21, 40), rng.uniform(21, 40))});
    }
    std::stable_sort(preds.begin(), preds.end(),
                     [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
    std::vector<Box> gts;
    for (int g = 0; g < n_gt; ++g) {
      gts.push_back(Box(rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(21, 40),
                        rng.uniform(21, 40)));
    }
    CHECK(match_detections(preds, gts, 0.5) == exhaustive_match(preds, gts, 0.5));
  }
}

TEST_CASE("average precision") {
  SUBCASE("all true positives covering all ground truth") {
    CHECK(average_precision({true, true, true}, 3) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("no predictions") {
    CHECK(average_precision({}, 4) == 0.0);
  }
  SUBCASE("hand-derived PR curve for [TP, FP, TP] with two ground truths") {
    // points: (0.5, 1), (0.5, 1/2), (1, 2/3); envelope AP = 0.5*1 + 0.5*(2/3)
    CHECK(average_precision({true, false, true}, 2) ==
          doctest::Approx(0.5 + 0.5 * (2.0 / 3.0)).epsilon(1e-9));
  }
  SUBCASE("n_gt of zero is rejected") {
    CHECK_THROWS(average_precision({true}, 0));
  }
  SUBCASE("a trailing false positive never raises AP") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<bool> flags;
      int n_tp = 0;
      const int k = 1 + rng.uniform_int(8);
      for (int i = 0; i < k; ++i) {
        const bool tp = rng.uniform() < 0.5;
        flags.push_back(tp);
        n_tp += tp ? 1 : 0;
      }
      const int n_gt = std::max(1, n_tp + rng.uniform_int(3));
      const double before = average_precision(flags, n_gt);
      flags.push_back(false);  // below every existing score
      CHECK(average_precision(flags, n_gt) <= before + 1e-12);
    }
  }
}

TEST_CASE("AP is invariant to strictly monotone score rescaling") {
  Rng rng(41);
  ActionVocabulary vocab = tiny_vocab();
  std::vector<ClipSample> dataset;
  std::vector<ScoredPrediction> preds, rescaled;
  for (int clip_id = 0; clip_id < 30; ++clip_id) {
    ClipSample clip;
    clip.clip_id = clip_id;
    clip.frames.resize(1);
    const Box gt_box = unit_box(rng.uniform(0, 5), rng.uniform(0, 5));
    std::vector<double> labels(vocab.total(), 0.0);
    labels[rng.uniform_int(vocab.total())] = 1.0;
    clip.gt_actors.push_back(GtActor{gt_box, labels});
    dataset.push_back(clip);

    ScoredPrediction pred{clip_id, gt_box, {}};
    for (int c = 0; c < vocab.total(); ++c) pred.scores.push_back(rng.uniform(0.05, 0.95));
    ScoredPrediction scaled = pred;
    for (double& s : scaled.scores) s = s * s * 0.9;  // strictly monotone on (0,1)
    preds.push_back(pred);
    rescaled.push_back(scaled);
  }
  const EvalReport a = evaluate_predictions(preds, dataset, vocab, 1);
  const EvalReport b = evaluate_predictions(rescaled, dataset, vocab, 1);
  for (std::size_t c = 0; c < a.per_class.size(); ++c) {
    CHECK(a.per_class[c].ap == doctest::Approx(b.per_class[c].ap).epsilon(1e-12));
  }
}

TEST_CASE("oracle predictions score a mean AP of one") {
  ActionVocabulary vocab = tiny_vocab();
  std::vector<ClipSample> dataset;
  std::vector<ScoredPrediction> preds;
  Rng rng(43);
  for (int clip_id = 0; clip_id < 20; ++clip_id) {
    ClipSample clip;
    clip.clip_id = clip_id;
    clip.frames.resize(1);
    for (int a = 0; a < 2; ++a) {
      const Box box = unit_box(15.0 * a, rng.uniform(0, 4));
      std::vector<double> labels(vocab.total(), 0.0);
      labels[rng.uniform_int(vocab.total())] = 1.0;
      clip.gt_actors.push_back(GtActor{box, labels});
      preds.push_back(ScoredPrediction{clip_id, box, labels});
    }
    dataset.push_back(clip);
  }
  const EvalReport report = evaluate_predictions(preds, dataset, vocab, 1);
  CHECK(report.mean_ap == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.pose_map == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform scores land near the class-prevalence baseline") {
  ActionVocabulary vocab = tiny_vocab();
  std::vector<ClipSample> dataset;
  std::vector<ScoredPrediction> preds;
  Rng rng(47);
  const int n_clips = 400;
  std::vector<int> positives(vocab.total(), 0);
  for (int clip_id = 0; clip_id < n_clips; ++clip_id) {
    ClipSample clip;
    clip.clip_id = clip_id;
    clip.frames.resize(1);
    const Box box = unit_box(0, 0);
    std::vector<double> labels(vocab.total(), 0.0);
    const int cls = rng.uniform_int(vocab.total());
    labels[cls] = 1.0;
    ++positives[cls];
    clip.gt_actors.push_back(GtActor{box, labels});
    preds.push_back(ScoredPrediction{clip_id, box, std::vector<double>(vocab.total(), 0.5)});
    dataset.push_back(clip);
  }
  const EvalReport report = evaluate_predictions(preds, dataset, vocab, 1);
  for (int c = 0; c < vocab.total(); ++c) {
    const double prevalence = static_cast<double>(positives[c]) / n_clips;
    // ties broken by insertion order approximate the prevalence baseline up
    // to O(1/n_gt) discretization
    CHECK(std::abs(report.per_class[c].ap - prevalence) < 0.05);
  }
}

TEST_CASE("group means average only their own classes and honor min_gt") {
  ActionVocabulary vocab = tiny_vocab();
  std::vector<ClipSample> dataset;
  std::vector<ScoredPrediction> preds;
  // p0: 6 perfect hits; m0: 6 misses; p1 and i0: only 2 samples each (below min_gt 5)
  int clip_id = 0;
  auto add_clip = [&](int cls, bool hit) {
    ClipSample clip;
    clip.clip_id = clip_id;
    clip.frames.resize(1);
    std::vector<double> labels(vocab.total(), 0.0);
    labels[cls] = 1.0;
    clip.gt_actors.push_back(GtActor{unit_box(0, 0), labels});
    std::vector<double> scores(vocab.total(), 0.0);
    scores[cls] = 0.9;
    preds.push_back(ScoredPrediction{clip_id, hit ? unit_box(0, 0) : unit_box(30, 30), scores});
    dataset.push_back(clip);
    ++clip_id;
  };
  for (int i = 0; i < 6; ++i) add_clip(0, true);   // p0 perfect
  for (int i = 0; i < 6; ++i) add_clip(2, false);  // m0 always missed
  for (int i = 0; i < 2; ++i) add_clip(1, true);   // p1 under min_gt
  for (int i = 0; i < 2; ++i) add_clip(3, true);   // i0 under min_gt

  const EvalReport report = evaluate_predictions(preds, dataset, vocab, 5);
  CHECK(report.per_class[0].evaluated);
  CHECK_FALSE(report.per_class[1].evaluated);
  CHECK(report.per_class[2].evaluated);
  CHECK_FALSE(report.per_class[3].evaluated);
  CHECK(report.pose_map == doctest::Approx(1.0).epsilon(1e-12));          // p0 only
  CHECK(report.manipulation_map == doctest::Approx(0.0).epsilon(1e-12));  // m0 only
  CHECK_FALSE(report.has_interaction);                                    // nothing evaluated
  CHECK(report.mean_ap == doctest::Approx(0.5).epsilon(1e-12));
}
