#include "actgraph/relation.hpp"

#include <cmath>
#include <stdexcept>

#include "actgraph/rng.hpp"

namespace actgraph::model {

using num::Tape;
using num::Tensor;
using num::Var;

AffineStack AffineStack::init(const std::vector<int>& dims, std::uint64_t seed, double gain) {
  if (dims.size() < 2) throw std::invalid_argument("AffineStack needs in and out dims");
  Rng rng(mix_seed(seed, 0x616666ULL));
  AffineStack stack;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    Tensor w({in, out});
    const double bound = gain / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < in * out; ++i) w.at(i) = rng.uniform(-bound, bound);
    stack.weights.push_back(std::move(w));
    stack.biases.push_back(Tensor({out}));
  }
  return stack;
}

AffineStackVars bind_stack(Tape& tape, const AffineStack& stack) {
  AffineStackVars vars;
  for (std::size_t l = 0; l < stack.weights.size(); ++l) {
    vars.weights.push_back(tape.leaf(stack.weights[l]));
    vars.biases.push_back(tape.leaf(stack.biases[l]));
  }
  return vars;
}

Var stack_forward(Tape& tape, const AffineStackVars& vars, Var input) {
  Var h = input;
  for (std::size_t l = 0; l < vars.weights.size(); ++l) {
    if (l > 0) h = tape.relu(h);
    h = tape.affine(h, vars.weights[l], vars.biases[l]);
  }
  return h;
}

Var hard_edge_logits(Tape& tape, Var actors, int actor_row, Var partners,
                     const AffineStackVars& scorer) {
  const int m = tape.value(partners).rows();
  std::vector<int> repeat(static_cast<std::size_t>(m), actor_row);
  Var actor_rows = tape.gather_rows(actors, std::move(repeat));
  Var pairs = tape.concat_last(actor_rows, partners);
  return stack_forward(tape, scorer, pairs);
}

Var hard_partner_max(Tape& tape, Var actors, int actor_row, Var partners,
                     const AffineStackVars& scorer) {
  return tape.colwise_max(hard_edge_logits(tape, actors, actor_row, partners, scorer));
}

SoftEdges soft_edges(Tape& tape, Var transformed_actors, Var transformed_objects, double eps) {
  SoftEdges edges;
  const int n = tape.value(transformed_actors).rows();
  if (transformed_objects.valid() && tape.value(transformed_objects).rows() > 0) {
    Var raw = tape.pairwise_inverse_distance(transformed_actors, transformed_objects, eps);
    edges.object_weights = tape.softmax_rows(raw);
  }
  if (n >= 2) {
    Var raw = tape.pairwise_inverse_distance(transformed_actors, transformed_actors, eps);
    edges.actor_weights = tape.softmax_rows(tape.drop_diagonal(raw));
  }
  return edges;
}

SoftAggregate soft_aggregate(Tape& tape, Var transformed_actors, Var transformed_objects,
                             const SoftEdges& edges) {
  SoftAggregate out;
  if (edges.object_weights.valid()) {
    out.object_context =
        tape.add(transformed_actors, tape.matmul(edges.object_weights, transformed_objects));
  } else {
    out.object_context = transformed_actors;  // empty partner sum
  }
  if (edges.actor_weights.valid()) {
    Var full = tape.embed_off_diagonal(edges.actor_weights);
    out.actor_context = tape.add(transformed_actors, tape.matmul(full, transformed_actors));
  } else {
    out.actor_context = transformed_actors;
  }
  return out;
}

}  // namespace actgraph::model
