#pragma once

#include <cstdint>
#include <vector>

#include "actgraph/tape.hpp"

namespace actgraph::model {

/// Affine layers with a rectifier between them; the final layer is linear.
struct AffineStack {
  std::vector<num::Tensor> weights;
  std::vector<num::Tensor> biases;

  /// dims = {in, hidden..., out}; gain rescales the fan-in bound, letting
  /// transform stacks start with small outputs (sharper inverse-distance
  /// attention) without touching the init scheme elsewhere.
  static AffineStack init(const std::vector<int>& dims, std::uint64_t seed, double gain = 1.0);
  int layer_count() const { return static_cast<int>(weights.size()); }
};

/// Leaves for an AffineStack on a tape, in declaration order.
struct AffineStackVars {
  std::vector<num::Var> weights;
  std::vector<num::Var> biases;
};

AffineStackVars bind_stack(num::Tape& tape, const AffineStack& stack);
num::Var stack_forward(num::Tape& tape, const AffineStackVars& vars, num::Var input);

/// Regularizer added to the inverse-distance edge weights; the raw formula is
/// singular when two transformed nodes coincide.
inline constexpr double kEdgeEpsilon = 1e-6;

/// Per-class edge logits for actor row `actor_row` of `actors` against every
/// row of `partners`: scorer([h_i, partner_j]) for all j, one row per partner.
num::Var hard_edge_logits(num::Tape& tape, num::Var actors, int actor_row, num::Var partners,
                          const AffineStackVars& scorer);

/// Multiple-instance selection: per class, the max over partner edge logits.
/// Output is [1, n_classes]; gradient reaches only the argmax partner.
num::Var hard_partner_max(num::Tape& tape, num::Var actors, int actor_row, num::Var partners,
                          const AffineStackVars& scorer);

struct SoftEdges {
  num::Var object_weights;  // N x M, rows softmax-normalized (invalid when M = 0)
  num::Var actor_weights;   // N x (N-1), self-edges excluded (invalid when N < 2)
};

/// Softmax-normalized inverse-distance edges between transformed actor rows
/// and transformed object rows, plus actor-actor edges with the diagonal
/// removed. Pass an invalid `transformed_objects` when the clip has no
/// objects.
SoftEdges soft_edges(num::Tape& tape, num::Var transformed_actors, num::Var transformed_objects,
                     double eps = kEdgeEpsilon);

struct SoftAggregate {
  num::Var object_context;  // N x D': phi_h(h_i) + sum_j G^o_ij phi_o(o_j)
  num::Var actor_context;   // N x D': phi_h(h_i) + sum_k G^h_ik phi_h(h_k)
};

SoftAggregate soft_aggregate(num::Tape& tape, num::Var transformed_actors,
                             num::Var transformed_objects, const SoftEdges& edges);

}  // namespace actgraph::model
