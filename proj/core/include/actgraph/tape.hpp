#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "actgraph/tensor.hpp"

namespace actgraph::num {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid for the tape that
/// produced it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode differentiation over a fixed op vocabulary. Each op records
/// its inputs and a backward closure; backward() replays the trace in reverse
/// creation order, which is already topological. A tape is confined to one
/// forward/backward pass and one thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable input (parameter).
  Var leaf(Tensor value);
  /// Non-differentiable input.
  Var constant(Tensor value);

  // ---- op vocabulary -------------------------------------------------
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double factor);
  Var add_scalar(Var a, double constant);
  /// x: [n, d] plus a bias row broadcast over rows.
  Var add_row(Var x, Var bias);
  Var relu(Var a);
  Var sigmoid(Var a);
  /// Numerically stable row softmax (shifts by the row max).
  Var softmax_rows(Var a);
  /// Concatenate along the last dimension; row counts must agree.
  Var concat_last(Var a, Var b);
  /// Stack rank-2 tensors vertically; column counts must agree.
  Var concat_rows(const std::vector<Var>& parts);
  /// Select rows of a rank-2 tensor; rows may repeat.
  Var gather_rows(Var a, std::vector<int> rows);
  /// Euclidean distance between two same-shape tensors; scalar output.
  Var l2_distance(Var u, Var v);
  /// f[i][j] = 1 / (||a_i - b_j||_2 + eps) for rows of a [n,d] and b [m,d].
  Var pairwise_inverse_distance(Var a, Var b, double eps);
  /// [n,n] -> [n,n-1], removing the diagonal from each row.
  Var drop_diagonal(Var a);
  /// [n,n-1] -> [n,n] with a zero diagonal; inverse layout of drop_diagonal.
  Var embed_off_diagonal(Var a);
  /// Column-wise max of an [n,m] tensor -> [1,m]. Gradient flows only to the
  /// argmax row per column; ties resolve to the lowest row index.
  Var colwise_max(Var a);
  Var sum(Var a);  // scalar
  /// Mean multi-label binary cross entropy against constant targets, computed
  /// in log-sum-exp form on logits.
  Var bce_with_logits(Var logits, Tensor targets);
  /// Inverted dropout: identity when train is false; scales kept entries by
  /// 1/(1-rate) when training. rate must lie in [0, 1).
  Var dropout(Var x, double rate, std::uint64_t seed, bool train);

  // ---- composites ----------------------------------------------------
  Var affine(Var x, Var weight, Var bias) { return add_row(matmul(x, weight), bias); }
  Var triplet_loss(Var anchor, Var positive, Var negative, double margin);

  // ---- execution -----------------------------------------------------
  /// Accumulates d(loss)/d(node) for every node that wants gradients.
  /// loss must be scalar.
  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_[check(v)].value; }
  /// Gradient accumulated by backward(); zero tensor when no flow reached v.
  const Tensor& grad(Var v);
  int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool wants_grad = false;
    bool grad_alloc = false;
    std::function<void()> backprop;  // empty for leaves/constants
  };

  int check(Var v) const;
  Var push(Tensor value, bool wants_grad, std::function<void()> backprop);
  Tensor& grad_buffer(int id);
  bool wants(Var v) const { return nodes_[check(v)].wants_grad; }

  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

}  // namespace actgraph::num
