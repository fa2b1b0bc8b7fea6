#include "actgraph/variants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "actgraph/rng.hpp"
#include "actgraph/tracker.hpp"

namespace actgraph::model {

using num::Checkpoint;
using num::Tape;
using num::Tensor;
using num::Var;

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::baseline_mean:
      return "baseline_mean";
    case Variant::person_graph:
      return "person_graph";
    case Variant::object_graph:
      return "object_graph";
    case Variant::tubelet:
      return "tubelet";
    case Variant::tubelet_hard:
      return "tubelet_hard";
    case Variant::tubelet_soft:
      return "tubelet_soft";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  for (Variant v : all_variants()) {
    if (name == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown model variant: " + name);
}

std::vector<Variant> all_variants() {
  return {Variant::baseline_mean, Variant::person_graph, Variant::object_graph,
          Variant::tubelet,       Variant::tubelet_hard, Variant::tubelet_soft};
}

namespace {

Tensor affine_init(int in, int out, Rng& rng) {
  Tensor w({in, out});
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (int i = 0; i < in * out; ++i) w.at(i) = rng.uniform(-bound, bound);
  return w;
}

bool uses_tubelets(Variant v) {
  return v == Variant::tubelet || v == Variant::tubelet_hard || v == Variant::tubelet_soft;
}

}  // namespace

HeadParams HeadParams::init(Variant variant, const ModelDims& dims, std::uint64_t seed) {
  HeadParams p;
  p.variant = variant;
  p.dims = dims;
  const int d = dims.feature_dim;
  Rng rng(mix_seed(seed, 0x68656164ULL));

  if (uses_tubelets(variant)) {
    p.gcn = GcnStack::init(d, dims.gcn_layers, mix_seed(seed, 1));
  }
  // transform stacks start small so the inverse-distance attention opens in
  // its high-contrast regime
  constexpr double kPhiGain = 0.35;
  if (variant == Variant::person_graph || variant == Variant::object_graph ||
      variant == Variant::tubelet_soft) {
    p.phi_actor = AffineStack::init({d, d, d}, mix_seed(seed, 2), kPhiGain);
  }
  if (variant == Variant::tubelet_soft) {
    p.phi_object = AffineStack::init({d, d, d}, mix_seed(seed, 3), kPhiGain);
  }
  if (variant == Variant::tubelet_hard) {
    p.edge_object = AffineStack::init({2 * d, d, dims.n_manip}, mix_seed(seed, 4));
    p.edge_actor = AffineStack::init({2 * d, d, dims.n_inter}, mix_seed(seed, 5));
  }
  p.pose_w = affine_init(d, dims.n_pose, rng);
  p.pose_b = Tensor({dims.n_pose});
  if (variant != Variant::tubelet_hard) {
    p.manip_w = affine_init(d, dims.n_manip, rng);
    p.manip_b = Tensor({dims.n_manip});
    p.inter_w = affine_init(d, dims.n_inter, rng);
    p.inter_b = Tensor({dims.n_inter});
  }
  return p;
}

namespace {

void add_stack(Checkpoint& ckpt, const std::string& prefix, const AffineStack& stack) {
  for (std::size_t l = 0; l < stack.weights.size(); ++l) {
    ckpt.add(prefix + ".w" + std::to_string(l), stack.weights[l]);
    ckpt.add(prefix + ".b" + std::to_string(l), stack.biases[l]);
  }
}

AffineStack read_stack(const Checkpoint& ckpt, const std::string& prefix) {
  AffineStack stack;
  for (int l = 0;; ++l) {
    const std::string wn = prefix + ".w" + std::to_string(l);
    if (!ckpt.contains(wn)) break;
    stack.weights.push_back(ckpt.get(wn));
    stack.biases.push_back(ckpt.get(prefix + ".b" + std::to_string(l)));
  }
  return stack;
}

}  // namespace

Checkpoint HeadParams::to_checkpoint(std::uint64_t seed) const {
  Checkpoint ckpt;
  ckpt.seed = seed;
  ckpt.tag = to_string(variant);
  for (std::size_t l = 0; l < gcn.weights.size(); ++l) {
    ckpt.add("gcn.w" + std::to_string(l), gcn.weights[l]);
  }
  add_stack(ckpt, "phi_actor", phi_actor);
  add_stack(ckpt, "phi_object", phi_object);
  add_stack(ckpt, "edge_object", edge_object);
  add_stack(ckpt, "edge_actor", edge_actor);
  ckpt.add("pose.w", pose_w);
  ckpt.add("pose.b", pose_b);
  if (pose_w.size() > 0 && manip_w.size() > 0) {
    ckpt.add("manip.w", manip_w);
    ckpt.add("manip.b", manip_b);
    ckpt.add("inter.w", inter_w);
    ckpt.add("inter.b", inter_b);
  }
  return ckpt;
}

HeadParams HeadParams::from_checkpoint(const Checkpoint& ckpt) {
  HeadParams p;
  p.variant = variant_from_string(ckpt.tag);
  for (int l = 0;; ++l) {
    const std::string name = "gcn.w" + std::to_string(l);
    if (!ckpt.contains(name)) break;
    p.gcn.weights.push_back(ckpt.get(name));
  }
  p.phi_actor = read_stack(ckpt, "phi_actor");
  p.phi_object = read_stack(ckpt, "phi_object");
  p.edge_object = read_stack(ckpt, "edge_object");
  p.edge_actor = read_stack(ckpt, "edge_actor");
  p.pose_w = ckpt.get("pose.w");
  p.pose_b = ckpt.get("pose.b");
  if (ckpt.contains("manip.w")) {
    p.manip_w = ckpt.get("manip.w");
    p.manip_b = ckpt.get("manip.b");
    p.inter_w = ckpt.get("inter.w");
    p.inter_b = ckpt.get("inter.b");
  }
  p.dims.feature_dim = p.pose_w.rows();
  p.dims.n_pose = p.pose_w.cols();
  if (p.variant == Variant::tubelet_hard) {
    p.dims.n_manip = static_cast<int>(p.edge_object.biases.back().size());
    p.dims.n_inter = static_cast<int>(p.edge_actor.biases.back().size());
  } else {
    p.dims.n_manip = p.manip_w.cols();
    p.dims.n_inter = p.inter_w.cols();
  }
  p.dims.gcn_layers = std::max<int>(1, p.gcn.layer_count());
  return p;
}

ClipContext build_clip_context(const ClipSample& clip, const assoc::EmbedderModel* embedder,
                               const assoc::TrackerConfig& tracker_config,
                               const ContextConfig& config) {
  ClipContext ctx;
  ctx.clip_id = clip.clip_id;
  ctx.t_frames = clip.t_frames();
  const int middle = clip.middle_frame();
  const auto& middle_dets = clip.frames[static_cast<std::size_t>(middle)];

  // Anchor selection mirrors the tracker: middle-frame persons over threshold.
  std::vector<int> anchor_det_index;
  for (int i = 0; i < static_cast<int>(middle_dets.size()); ++i) {
    const Detection& det = middle_dets[static_cast<std::size_t>(i)];
    if (det.kind == DetectionKind::person && det.score >= config.person_score_threshold) {
      anchor_det_index.push_back(i);
      ctx.actor_boxes.push_back(det.box);
      if (ctx.feature_dim == 0) ctx.feature_dim = static_cast<int>(det.feature.size());
    }
  }
  if (ctx.feature_dim == 0) {
    for (const auto& frame : clip.frames) {
      for (const Detection& det : frame) {
        ctx.feature_dim = static_cast<int>(det.feature.size());
        break;
      }
      if (ctx.feature_dim != 0) break;
    }
  }
  const int n = ctx.actor_count();
  const int d = ctx.feature_dim;

  if (embedder != nullptr && n > 0) {
    ctx.tubelet_graph =
        build_affinity(assoc::build_tubelets(clip, *embedder, tracker_config), ctx.t_frames, d);
  }

  // Middle-frame object nodes.
  std::vector<const Detection*> objects;
  for (const Detection& det : middle_dets) {
    if (det.kind == DetectionKind::object && det.score >= config.object_score_threshold) {
      objects.push_back(&det);
    }
  }
  ctx.object_count = static_cast<int>(objects.size());
  if (ctx.object_count > 0) {
    ctx.object_features = Tensor({ctx.object_count, d});
    for (int j = 0; j < ctx.object_count; ++j) {
      ctx.object_boxes.push_back(objects[static_cast<std::size_t>(j)]->box);
      if (config.zero_object_features) continue;
      for (int k = 0; k < d; ++k) {
        ctx.object_features.at(j, k) = objects[static_cast<std::size_t>(j)]->feature[static_cast<std::size_t>(k)];
      }
    }
  }

  // Fixed-box temporal pooling: per frame, the person detection overlapping
  // the anchor's middle box the most; frames with no overlap contribute
  // nothing.
  if (n > 0) {
    ctx.baseline_features = Tensor({n, d});
    for (int a = 0; a < n; ++a) {
      const Box& anchor = ctx.actor_boxes[static_cast<std::size_t>(a)];
      int pooled = 0;
      for (int t = 0; t < ctx.t_frames; ++t) {
        const Detection* best = nullptr;
        double best_iou = 0.0;
        for (const Detection& det : clip.frames[static_cast<std::size_t>(t)]) {
          if (det.kind != DetectionKind::person || det.score < config.person_score_threshold) {
            continue;
          }
          const double overlap = iou(anchor, det.box);
          if (overlap > best_iou) {
            best_iou = overlap;
            best = &det;
          }
        }
        if (best == nullptr) continue;
        ++pooled;
        for (int k = 0; k < d; ++k) {
          ctx.baseline_features.at(a, k) += best->feature[static_cast<std::size_t>(k)];
        }
      }
      if (pooled > 0) {
        for (int k = 0; k < d; ++k) ctx.baseline_features.at(a, k) /= pooled;
      }
    }
  }

  // Proposal node sets for the similarity-graph baselines.
  std::vector<std::vector<double>> person_rows, all_rows;
  ctx.query_person_node.assign(static_cast<std::size_t>(n), -1);
  ctx.query_all_node.assign(static_cast<std::size_t>(n), -1);
  const int stride = std::max(1, config.proposal_frame_stride);
  for (int t = 0; t < ctx.t_frames; ++t) {
    if (std::abs(t - middle) % stride != 0) continue;
    const auto& dets = clip.frames[static_cast<std::size_t>(t)];
    for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
      const Detection& det = dets[static_cast<std::size_t>(i)];
      const bool is_person =
          det.kind == DetectionKind::person && det.score >= config.person_score_threshold;
      const bool is_object =
          det.kind == DetectionKind::object && det.score >= config.object_score_threshold;
      if (!is_person && !is_object) continue;
      std::vector<double> feature = det.feature;
      if (is_object && config.zero_object_features) {
        std::fill(feature.begin(), feature.end(), 0.0);
      }
      if (is_person) {
        if (t == middle) {
          for (int a = 0; a < n; ++a) {
            if (anchor_det_index[static_cast<std::size_t>(a)] == i) {
              ctx.query_person_node[static_cast<std::size_t>(a)] =
                  static_cast<int>(person_rows.size());
              ctx.query_all_node[static_cast<std::size_t>(a)] = static_cast<int>(all_rows.size());
            }
          }
        }
        person_rows.push_back(det.feature);
      }
      all_rows.push_back(std::move(feature));
    }
  }
  auto rows_to_tensor = [d](const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Tensor();
    Tensor t({static_cast<int>(rows.size()), d});
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      for (int k = 0; k < d; ++k) t.at(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    return t;
  };
  ctx.person_nodes = rows_to_tensor(person_rows);
  ctx.all_nodes = rows_to_tensor(all_rows);

  // Training targets from middle-frame ground truth.
  if (n > 0) {
    ctx.targets = Tensor({n, config.total_classes});
    for (int a = 0; a < n; ++a) {
      const Box& anchor = ctx.actor_boxes[static_cast<std::size_t>(a)];
      const GtActor* best = nullptr;
      double best_iou = config.target_match_iou;
      for (const GtActor& gt : clip.gt_actors) {
        const double overlap = iou(anchor, gt.box);
        if (overlap > best_iou) {
          best_iou = overlap;
          best = &gt;
        }
      }
      if (best == nullptr) continue;
      for (int c = 0; c < config.total_classes && c < static_cast<int>(best->labels.size()); ++c) {
        ctx.targets.at(a, c) = best->labels[static_cast<std::size_t>(c)];
      }
    }
  }
  return ctx;
}

namespace {

Var bind_one(Tape& tape, Tensor& tensor, std::vector<std::pair<Tensor*, Var>>& bound) {
  Var v = tape.leaf(tensor);
  bound.emplace_back(&tensor, v);
  return v;
}

AffineStackVars bind_stack_tracked(Tape& tape, AffineStack& stack,
                                   std::vector<std::pair<Tensor*, Var>>& bound) {
  AffineStackVars vars;
  for (std::size_t l = 0; l < stack.weights.size(); ++l) {
    vars.weights.push_back(bind_one(tape, stack.weights[l], bound));
    vars.biases.push_back(bind_one(tape, stack.biases[l], bound));
  }
  return vars;
}

}  // namespace

VariantVars bind_params(Tape& tape, HeadParams& params) {
  VariantVars vars;
  for (Tensor& w : params.gcn.weights) vars.gcn.push_back(bind_one(tape, w, vars.bound));
  vars.phi_actor = bind_stack_tracked(tape, params.phi_actor, vars.bound);
  vars.phi_object = bind_stack_tracked(tape, params.phi_object, vars.bound);
  vars.edge_object = bind_stack_tracked(tape, params.edge_object, vars.bound);
  vars.edge_actor = bind_stack_tracked(tape, params.edge_actor, vars.bound);
  vars.pose_w = bind_one(tape, params.pose_w, vars.bound);
  vars.pose_b = bind_one(tape, params.pose_b, vars.bound);
  if (params.manip_w.size() > 0) {
    vars.manip_w = bind_one(tape, params.manip_w, vars.bound);
    vars.manip_b = bind_one(tape, params.manip_b, vars.bound);
    vars.inter_w = bind_one(tape, params.inter_w, vars.bound);
    vars.inter_b = bind_one(tape, params.inter_b, vars.bound);
  }
  return vars;
}

namespace {

Var maybe_dropout(Tape& tape, Var x, const ForwardOptions& options, std::uint64_t salt) {
  if (!options.train || !options.dropout) return x;
  return tape.dropout(x, options.dropout_rate, mix_seed(options.dropout_seed, salt), true);
}

/// Similarity-graph context rows: softmax(inverse distance) aggregation over
/// all transformed proposals except the query's own node.
Var similarity_context(Tape& tape, Var transformed, const std::vector<int>& query_nodes) {
  const int node_count = tape.value(transformed).rows();
  std::vector<Var> rows;
  rows.reserve(query_nodes.size());
  for (int q : query_nodes) {
    Var query_row = tape.gather_rows(transformed, {q});
    if (node_count < 2) {
      rows.push_back(query_row);
      continue;
    }
    std::vector<int> partners;
    partners.reserve(static_cast<std::size_t>(node_count) - 1);
    for (int i = 0; i < node_count; ++i) {
      if (i != q) partners.push_back(i);
    }
    Var partner_rows = tape.gather_rows(transformed, std::move(partners));
    Var weights = tape.softmax_rows(
        tape.pairwise_inverse_distance(query_row, partner_rows, kEdgeEpsilon));
    rows.push_back(tape.add(query_row, tape.matmul(weights, partner_rows)));
  }
  return tape.concat_rows(rows);
}

}  // namespace

ForwardResult variant_forward(Tape& tape, const ClipContext& context, const VariantVars& vars,
                              const HeadParams& params, const ForwardOptions& options) {
  const int n = context.actor_count();
  if (n == 0) throw std::invalid_argument("variant_forward requires at least one actor");
  ForwardResult result;

  auto heads_on = [&](Var pose_in, Var manip_in, Var inter_in) {
    result.pose_logits =
        tape.affine(maybe_dropout(tape, pose_in, options, 1), vars.pose_w, vars.pose_b);
    result.manip_logits =
        tape.affine(maybe_dropout(tape, manip_in, options, 2), vars.manip_w, vars.manip_b);
    result.inter_logits =
        tape.affine(maybe_dropout(tape, inter_in, options, 3), vars.inter_w, vars.inter_b);
  };

  switch (params.variant) {
    case Variant::baseline_mean: {
      Var pooled = tape.constant(context.baseline_features);
      heads_on(pooled, pooled, pooled);
      break;
    }
    case Variant::person_graph:
    case Variant::object_graph: {
      const bool with_objects = params.variant == Variant::object_graph;
      const Tensor& nodes = with_objects ? context.all_nodes : context.person_nodes;
      const std::vector<int>& queries =
          with_objects ? context.query_all_node : context.query_person_node;
      for (int q : queries) {
        if (q < 0) throw std::logic_error("anchor missing from proposal nodes");
      }
      Var transformed = stack_forward(tape, vars.phi_actor, tape.constant(nodes));
      Var contexts = similarity_context(tape, transformed, queries);
      heads_on(contexts, contexts, contexts);
      break;
    }
    case Variant::tubelet: {
      Var actors = gcn_forward(tape, context.tubelet_graph, vars.gcn);
      heads_on(actors, actors, actors);
      break;
    }
    case Variant::tubelet_hard: {
      result.hard_path = true;
      Var actors = gcn_forward(tape, context.tubelet_graph, vars.gcn);
      result.pose_logits =
          tape.affine(maybe_dropout(tape, actors, options, 1), vars.pose_w, vars.pose_b);
      Var objects;
      if (context.object_count > 0) objects = tape.constant(context.object_features);
      result.manip_hard.resize(static_cast<std::size_t>(n));
      result.inter_hard.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        if (objects.valid()) {
          result.manip_hard[static_cast<std::size_t>(i)] =
              hard_partner_max(tape, actors, i, objects, vars.edge_object);
        }
        if (n >= 2) {
          std::vector<int> others;
          for (int k = 0; k < n; ++k) {
            if (k != i) others.push_back(k);
          }
          Var other_rows = tape.gather_rows(actors, std::move(others));
          result.inter_hard[static_cast<std::size_t>(i)] =
              hard_partner_max(tape, actors, i, other_rows, vars.edge_actor);
        }
      }
      break;
    }
    case Variant::tubelet_soft: {
      Var actors = gcn_forward(tape, context.tubelet_graph, vars.gcn);
      Var transformed_actors = stack_forward(tape, vars.phi_actor, actors);
      Var transformed_objects;
      if (context.object_count > 0) {
        transformed_objects =
            stack_forward(tape, vars.phi_object, tape.constant(context.object_features));
      }
      result.edges = soft_edges(tape, transformed_actors, transformed_objects);
      SoftAggregate agg = soft_aggregate(tape, transformed_actors, transformed_objects, result.edges);
      heads_on(actors, agg.object_context, agg.actor_context);
      break;
    }
  }
  return result;
}

Tensor predict_probabilities(const ClipContext& context, HeadParams& params,
                             const ForwardOptions& options) {
  const int n = context.actor_count();
  const int total = params.dims.total_classes();
  Tensor probs({std::max(n, 1), total});
  if (n == 0) return Tensor();

  Tape tape;
  VariantVars vars = bind_params(tape, params);
  ForwardResult fwd = variant_forward(tape, context, vars, params, options);

  auto sigmoid = [](double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  };

  const Tensor& pose = tape.value(fwd.pose_logits);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < params.dims.n_pose; ++c) {
      probs.at(i, c) = sigmoid(pose.at(i, c));
    }
  }
  const int manip_off = params.dims.n_pose;
  const int inter_off = params.dims.n_pose + params.dims.n_manip;
  if (fwd.hard_path) {
    for (int i = 0; i < n; ++i) {
      if (fwd.manip_hard[static_cast<std::size_t>(i)].valid()) {
        const Tensor& row = tape.value(fwd.manip_hard[static_cast<std::size_t>(i)]);
        for (int c = 0; c < params.dims.n_manip; ++c) {
          probs.at(i, manip_off + c) = sigmoid(row.at(0, c));
        }
      }
      if (fwd.inter_hard[static_cast<std::size_t>(i)].valid()) {
        const Tensor& row = tape.value(fwd.inter_hard[static_cast<std::size_t>(i)]);
        for (int c = 0; c < params.dims.n_inter; ++c) {
          probs.at(i, inter_off + c) = sigmoid(row.at(0, c));
        }
      }
    }
  } else {
    const Tensor& manip = tape.value(fwd.manip_logits);
    const Tensor& inter = tape.value(fwd.inter_logits);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < params.dims.n_manip; ++c) {
        probs.at(i, manip_off + c) = sigmoid(manip.at(i, c));
      }
      for (int c = 0; c < params.dims.n_inter; ++c) {
        probs.at(i, inter_off + c) = sigmoid(inter.at(i, c));
      }
    }
  }
  return probs;
}

}  // namespace actgraph::model
