#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actgraph/checkpoint.hpp"
#include "actgraph/embedder.hpp"
#include "actgraph/relation.hpp"
#include "actgraph/tracker.hpp"
#include "actgraph/tubelet_gcn.hpp"
#include "actgraph/types.hpp"

namespace actgraph::model {

/// The ablation-table model family. Similarity-graph rows aggregate raw
/// region proposals; tubelet rows run the tracked-actor pipeline.
enum class Variant {
  baseline_mean,
  person_graph,
  object_graph,
  tubelet,
  tubelet_hard,
  tubelet_soft,
};

const char* to_string(Variant variant);
Variant variant_from_string(const std::string& name);  // throws on unknown name
std::vector<Variant> all_variants();

struct ModelDims {
  int feature_dim = 32;
  int n_pose = 4;
  int n_manip = 3;
  int n_inter = 3;
  int gcn_layers = 2;

  int total_classes() const { return n_pose + n_manip + n_inter; }
};

/// Every parameter tensor of one model variant. Fields a variant does not use
/// stay empty and are neither trained nor serialized.
struct HeadParams {
  Variant variant = Variant::baseline_mean;
  ModelDims dims;

  GcnStack gcn;                       // tubelet variants
  AffineStack phi_actor, phi_object;  // soft relation; phi_actor doubles as the
                                      // node transform of the similarity baselines
  AffineStack edge_object, edge_actor;  // hard relation scorers

  num::Tensor pose_w, pose_b;
  num::Tensor manip_w, manip_b;  // absent for the hard variant
  num::Tensor inter_w, inter_b;

  static HeadParams init(Variant variant, const ModelDims& dims, std::uint64_t seed);

  num::Checkpoint to_checkpoint(std::uint64_t seed) const;
  static HeadParams from_checkpoint(const num::Checkpoint& ckpt);
};

struct ContextConfig {
  double person_score_threshold = 0.9;
  double object_score_threshold = 0.5;
  double gate_iou = 0.5;
  double target_match_iou = 0.5;
  int total_classes = 10;
  bool zero_object_features = false;  // eval-time relational-signal ablation
  // The similarity-graph baselines aggregate proposals from every stride-th
  // frame around the middle one; 1 keeps every frame.
  int proposal_frame_stride = 3;
};

/// Precomputed, parameter-independent view of one clip: anchors, tubelet
/// graph, pooled object nodes, fixed-box baseline features, proposal node
/// sets, and training targets. Built once and reused across iterations and
/// variants.
struct ClipContext {
  int clip_id = 0;
  int t_frames = 0;
  int feature_dim = 0;

  std::vector<Box> actor_boxes;  // middle-frame anchors, tubelet order
  TubeletGraph tubelet_graph;    // empty when built without an embedder

  num::Tensor object_features;   // M x D, middle-frame objects
  std::vector<Box> object_boxes;
  int object_count = 0;

  num::Tensor baseline_features;  // N x D fixed-box temporal pooling

  num::Tensor person_nodes;       // P x D person proposals over all frames
  num::Tensor all_nodes;          // Q x D person+object proposals
  std::vector<int> query_person_node;  // per actor, own node among person_nodes
  std::vector<int> query_all_node;

  num::Tensor targets;  // N x total_classes (zero rows for unmatched anchors)

  int actor_count() const { return static_cast<int>(actor_boxes.size()); }
};

ClipContext build_clip_context(const ClipSample& clip, const assoc::EmbedderModel* embedder,
                               const assoc::TrackerConfig& tracker_config,
                               const ContextConfig& config);

struct ForwardOptions {
  bool train = false;
  bool dropout = false;
  double dropout_rate = 0.3;
  std::uint64_t dropout_seed = 0;
};

/// Tape leaves for the parameters a variant uses, plus a flat (tensor, leaf)
/// list for gradient updates in deterministic declaration order.
struct VariantVars {
  std::vector<num::Var> gcn;
  AffineStackVars phi_actor, phi_object, edge_object, edge_actor;
  num::Var pose_w, pose_b, manip_w, manip_b, inter_w, inter_b;
  std::vector<std::pair<num::Tensor*, num::Var>> bound;
};

VariantVars bind_params(num::Tape& tape, HeadParams& params);

/// Group logits produced by one forward pass. The hard variant yields one
/// logit row per actor and leaves a row invalid when that actor has no
/// partners (the degenerate probability-zero case).
struct ForwardResult {
  num::Var pose_logits;                 // N x n_pose
  num::Var manip_logits;                // N x n_manip (affine path)
  num::Var inter_logits;                // N x n_inter (affine path)
  std::vector<num::Var> manip_hard;     // per actor, 1 x n_manip
  std::vector<num::Var> inter_hard;     // per actor, 1 x n_inter
  SoftEdges edges;                      // soft variant only
  bool hard_path = false;
};

ForwardResult variant_forward(num::Tape& tape, const ClipContext& context,
                              const VariantVars& vars, const HeadParams& params,
                              const ForwardOptions& options);

/// Per-actor probabilities over the full vocabulary, assembled from a forward
/// pass on a private tape. Degenerate hard-path groups score 0.
num::Tensor predict_probabilities(const ClipContext& context, HeadParams& params,
                                  const ForwardOptions& options = {});

}  // namespace actgraph::model
