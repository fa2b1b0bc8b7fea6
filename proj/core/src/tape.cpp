#include "actgraph/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "actgraph/rng.hpp"

namespace actgraph::num {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace

int Tape::check(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::logic_error("Var does not belong to this tape");
  }
  return v.id;
}

Var Tape::push(Tensor value, bool wants_grad, std::function<void()> backprop) {
  if (!value.all_finite()) {
    throw std::runtime_error("non-finite value produced in forward pass");
  }
  Node node;
  node.value = std::move(value);
  node.wants_grad = wants_grad;
  node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_buffer(int id) {
  Node& node = nodes_[id];
  if (!node.grad_alloc) {
    node.grad = Tensor(node.value.shape());
    node.grad_alloc = true;
  }
  return node.grad;
}

const Tensor& Tape::grad(Var v) {
  const int id = check(v);
  return grad_buffer(id);
}

Var Tape::leaf(Tensor value) { return push(std::move(value), true, {}); }

Var Tape::constant(Tensor value) { return push(std::move(value), false, {}); }

Var Tape::matmul(Var a, Var b) {
  const int ia = check(a), ib = check(b);
  const Tensor& va = nodes_[ia].value;
  const Tensor& vb = nodes_[ib].value;
  require(va.ndim() == 2 && vb.ndim() == 2, "matmul requires rank-2 tensors");
  require(va.cols() == vb.rows(), "matmul inner dimensions disagree");
  const int p = va.rows(), q = va.cols(), r = vb.cols();
  Tensor out({p, r});
  for (int i = 0; i < p; ++i) {
    for (int k = 0; k < q; ++k) {
      const double aik = va.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < r; ++j) {
        out.at(i, j) += aik * vb.at(k, j);
      }
    }
  }
  const bool wg = wants(a) || wants(b);
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wg, [this, ia, ib, result, p, q, r] {
    const Tensor& g = nodes_[result.id].grad;
    const Tensor& va2 = nodes_[ia].value;
    const Tensor& vb2 = nodes_[ib].value;
    if (nodes_[ia].wants_grad) {
      Tensor& ga = grad_buffer(ia);
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < r; ++j) {
          const double gij = g.at(i, j);
          if (gij == 0.0) continue;
          for (int k = 0; k < q; ++k) {
            ga.at(i, k) += gij * vb2.at(k, j);
          }
        }
      }
    }
    if (nodes_[ib].wants_grad) {
      Tensor& gb = grad_buffer(ib);
      for (int i = 0; i < p; ++i) {
        for (int k = 0; k < q; ++k) {
          const double aik = va2.at(i, k);
          if (aik == 0.0) continue;
          for (int j = 0; j < r; ++j) {
            gb.at(k, j) += aik * g.at(i, j);
          }
        }
      }
    }
  });
}

Var Tape::add(Var a, Var b) {
  const int ia = check(a), ib = check(b);
  require(nodes_[ia].value.same_shape(nodes_[ib].value), "add requires equal shapes");
  Tensor out = nodes_[ia].value;
  const Tensor& vb = nodes_[ib].value;
  for (std::int64_t i = 0; i < out.size(); ++i) out.at(static_cast<int>(i)) += vb.at(static_cast<int>(i));
  const bool wg = wants(a) || wants(b);
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wg, [this, ia, ib, result] {
    const Tensor& g = nodes_[result.id].grad;
    for (int target : {ia, ib}) {
      if (!nodes_[target].wants_grad) continue;
      Tensor& gt = grad_buffer(target);
      for (std::int64_t i = 0; i < g.size(); ++i) gt.at(static_cast<int>(i)) += g.at(static_cast<int>(i));
    }
  });
}

Var Tape::sub(Var a, Var b) {
  const int ia = check(a), ib = check(b);
  require(nodes_[ia].value.same_shape(nodes_[ib].value), "sub requires equal shapes");
  Tensor out = nodes_[ia].value;
  const Tensor& vb = nodes_[ib].value;
  for (std::int64_t i = 0; i < out.size(); ++i) out.at(static_cast<int>(i)) -= vb.at(static_cast<int>(i));
  const bool wg = wants(a) || wants(b);
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wg, [this, ia, ib, result] {
    const Tensor& g = nodes_[result.id].grad;
    if (nodes_[ia].wants_grad) {
      Tensor& ga = grad_buffer(ia);
      for (std::int64_t i = 0; i < g.size(); ++i) ga.at(static_cast<int>(i)) += g.at(static_cast<int>(i));
    }
    if (nodes_[ib].wants_grad) {
      Tensor& gb = grad_buffer(ib);
      for (std::int64_t i = 0; i < g.size(); ++i) gb.at(static_cast<int>(i)) -= g.at(static_cast<int>(i));
    }
  });
}

Var Tape::scale(Var a, double factor) {
  const int ia = check(a);
  Tensor out = nodes_[ia].value;
  for (std::int64_t i = 0; i < out.size(); ++i) out.at(static_cast<int>(i)) *= factor;
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(a), [this, ia, result, factor] {
    if (!nodes_[ia].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    Tensor& ga = grad_buffer(ia);
    for (std::int64_t i = 0; i < g.size(); ++i) ga.at(static_cast<int>(i)) += factor * g.at(static_cast<int>(i));
  });
}

Var Tape::add_scalar(Var a, double constant) {
  const int ia = check(a);
  Tensor out = nodes_[ia].value;
  for (std::int64_t i = 0; i < out.size(); ++i) out.at(static_cast<int>(i)) += constant;
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(a), [this, ia, result] {
    if (!nodes_[ia].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    Tensor& ga = grad_buffer(ia);
    for (std::int64_t i = 0; i < g.size(); ++i) ga.at(static_cast<int>(i)) += g.at(static_cast<int>(i));
  });
}

Var Tape::add_row(Var x, Var bias) {
  const int ix = check(x), ib = check(bias);
  const Tensor& vx = nodes_[ix].value;
  const Tensor& vb = nodes_[ib].value;
  require(vx.ndim() == 2, "add_row requires a rank-2 left operand");
  require(vb.size() == vx.cols(), "bias length must match column count");
  Tensor out = vx;
  const int n = vx.rows(), d = vx.cols();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) out.at(i, j) += vb.at(j);
  }
  const bool wg = wants(x) || wants(bias);
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wg, [this, ix, ib, result, n, d] {
    const Tensor& g = nodes_[result.id].grad;
    if (nodes_[ix].wants_grad) {
      Tensor& gx = grad_buffer(ix);
      for (std::int64_t i = 0; i < g.size(); ++i) gx.at(static_cast<int>(i)) += g.at(static_cast<int>(i));
    }
    if (nodes_[ib].wants_grad) {
      Tensor& gb = grad_buffer(ib);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) gb.at(j) += g.at(i, j);
      }
    }
  });
}

Var Tape::relu(Var a) {
  const int ia = check(a);
  Tensor out = nodes_[ia].value;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    if (out.at(static_cast<int>(i)) < 0.0) out.at(static_cast<int>(i)) = 0.0;
  }
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(a), [this, ia, result] {
    if (!nodes_[ia].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    const Tensor& vin = nodes_[ia].value;
    Tensor& ga = grad_buffer(ia);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      if (vin.at(static_cast<int>(i)) > 0.0) ga.at(static_cast<int>(i)) += g.at(static_cast<int>(i));
    }
  });
}

Var Tape::sigmoid(Var a) {
  const int ia = check(a);
  Tensor out = nodes_[ia].value;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out.at(static_cast<int>(i)) = stable_sigmoid(out.at(static_cast<int>(i)));
  }
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(a), [this, ia, result] {
    if (!nodes_[ia].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    const Tensor& s = nodes_[result.id].value;
    Tensor& ga = grad_buffer(ia);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const double si = s.at(static_cast<int>(i));
      ga.at(static_cast<int>(i)) += g.at(static_cast<int>(i)) * si * (1.0 - si);
    }
  });
}

Var Tape::softmax_rows(Var a) {
  const int ia = check(a);
  const Tensor& vin = nodes_[ia].value;
  require(vin.ndim() == 2, "softmax_rows requires a rank-2 tensor");
  const int n = vin.rows(), m = vin.cols();
  Tensor out({n, m});
  for (int i = 0; i < n; ++i) {
    double row_max = vin.at(i, 0);
    for (int j = 1; j < m; ++j) row_max = std::max(row_max, vin.at(i, j));
    double denom = 0.0;
    for (int j = 0; j < m; ++j) {
      const double e = std::exp(vin.at(i, j) - row_max);
      out.at(i, j) = e;
      denom += e;
    }
    for (int j = 0; j < m; ++j) out.at(i, j) /= denom;
  }
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(a), [this, ia, result, n, m] {
    if (!nodes_[ia].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    const Tensor& p = nodes_[result.id].value;
    Tensor& ga = grad_buffer(ia);
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = 0; j < m; ++j) dot += p.at(i, j) * g.at(i, j);
      for (int j = 0; j < m; ++j) {
        ga.at(i, j) += p.at(i, j) * (g.at(i, j) - dot);
      }
    }
  });
}

Var Tape::concat_last(Var a, Var b) {
  const int ia = check(a), ib = check(b);
  const Tensor& va = nodes_[ia].value;
  const Tensor& vb = nodes_[ib].value;
  require(va.ndim() == vb.ndim(), "concat_last requires equal ranks");
  Tensor out;
  if (va.ndim() == 1) {
    std::vector<double> joined = va.values();
    joined.insert(joined.end(), vb.values().begin(), vb.values().end());
    out = Tensor({static_cast<int>(joined.size())}, std::move(joined));
  } else {
    require(va.ndim() == 2 && va.rows() == vb.rows(), "concat_last requires matching rows");
    const int n = va.rows(), ca = va.cols(), cb = vb.cols();
    out = Tensor({n, ca + cb});
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < ca; ++j) out.at(i, j) = va.at(i, j);
      for (int j = 0; j < cb; ++j) out.at(i, ca + j) = vb.at(i, j);
    }
  }
  const bool wg = wants(a) || wants(b);
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wg, [this, ia, ib, result] {
    const Tensor& g = nodes_[result.id].grad;
    const Tensor& va2 = nodes_[ia].value;
    const Tensor& vb2 = nodes_[ib].value;
    if (va2.ndim() == 1) {
      const int ca = static_cast<int>(va2.size());
      if (nodes_[ia].wants_grad) {
        Tensor& ga = grad_buffer(ia);
        for (int j = 0; j < ca; ++j) ga.at(j) += g.at(j);
      }
      if (nodes_[ib].wants_grad) {
        Tensor& gb = grad_buffer(ib);
        for (int j = 0; j < static_cast<int>(vb2.size()); ++j) gb.at(j) += g.at(ca + j);
      }
      return;
    }
    const int n = va2.rows(), ca = va2.cols(), cb = vb2.cols();
    if (nodes_[ia].wants_grad) {
      Tensor& ga = grad_buffer(ia);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < ca; ++j) ga.at(i, j) += g.at(i, j);
      }
    }
    if (nodes_[ib].wants_grad) {
      Tensor& gb = grad_buffer(ib);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < cb; ++j) gb.at(i, j) += g.at(i, ca + j);
      }
    }
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows requires at least one part");
  std::vector<int> ids;
  ids.reserve(parts.size());
  int total_rows = 0;
  const int cols = nodes_[check(parts.front())].value.cols();
  bool wg = false;
  for (Var part : parts) {
    const int id = check(part);
    const Tensor& v = nodes_[id].value;
    require(v.ndim() == 2 && v.cols() == cols, "concat_rows requires equal column counts");
    total_rows += v.rows();
    wg = wg || nodes_[id].wants_grad;
    ids.push_back(id);
  }
  Tensor out({total_rows, cols});
  int cursor = 0;
  for (int id : ids) {
    const Tensor& v = nodes_[id].value;
    for (int i = 0; i < v.rows(); ++i) {
      for (int j = 0; j < cols; ++j) out.at(cursor + i, j) = v.at(i, j);
    }
    cursor += v.rows();
  }
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wg, [this, ids = std::move(ids), result, cols] {
    const Tensor& g = nodes_[result.id].grad;
    int cursor = 0;
    for (int id : ids) {
      const int rows = nodes_[id].value.rows();
      if (nodes_[id].wants_grad) {
        Tensor& gp = grad_buffer(id);
        for (int i = 0; i < rows; ++i) {
          for (int j = 0; j < cols; ++j) gp.at(i, j) += g.at(cursor + i, j);
        }
      }
      cursor += rows;
    }
  });
}

Var Tape::gather_rows(Var a, std::vector<int> rows) {
  const int ia = check(a);
  const Tensor& vin = nodes_[ia].value;
  require(vin.ndim() == 2, "gather_rows requires a rank-2 tensor");
  const int d = vin.cols();
  for (int r : rows) {
    require(r >= 0 && r < vin.rows(), "gather_rows index out of range");
  }
  Tensor out({static_cast<int>(rows.size()), d});
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    for (int j = 0; j < d; ++j) out.at(i, j) = vin.at(rows[i], j);
  }
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(a), [this, ia, result, rows = std::move(rows), d] {
    if (!nodes_[ia].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    Tensor& ga = grad_buffer(ia);
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      for (int j = 0; j < d; ++j) ga.at(rows[i], j) += g.at(i, j);
    }
  });
}

Var Tape::l2_distance(Var u, Var v) {
  const int iu = check(u), iv = check(v);
  const Tensor& vu = nodes_[iu].value;
  const Tensor& vv = nodes_[iv].value;
  require(vu.same_shape(vv), "l2_distance requires equal shapes");
  double sq = 0.0;
  for (std::int64_t i = 0; i < vu.size(); ++i) {
    const double diff = vu.at(static_cast<int>(i)) - vv.at(static_cast<int>(i));
    sq += diff * diff;
  }
  const double dist = std::sqrt(sq);
  const bool wg = wants(u) || wants(v);
  Var result{static_cast<int>(nodes_.size())};
  return push(Tensor::scalar(dist), wg, [this, iu, iv, result, dist] {
    if (dist == 0.0) return;  // subgradient 0 at the kink
    const double g = nodes_[result.id].grad.at(0);
    const Tensor& vu2 = nodes_[iu].value;
    const Tensor& vv2 = nodes_[iv].value;
    for (std::int64_t i = 0; i < vu2.size(); ++i) {
      const double diff = (vu2.at(static_cast<int>(i)) - vv2.at(static_cast<int>(i))) / dist;
      if (nodes_[iu].wants_grad) grad_buffer(iu).at(static_cast<int>(i)) += g * diff;
      if (nodes_[iv].wants_grad) grad_buffer(iv).at(static_cast<int>(i)) -= g * diff;
    }
  });
}

Var Tape::pairwise_inverse_distance(Var a, Var b, double eps) {
  const int ia = check(a), ib = check(b);
  require(eps > 0.0, "pairwise_inverse_distance requires eps > 0");
  const Tensor& va = nodes_[ia].value;
  const Tensor& vb = nodes_[ib].value;
  require(va.ndim() == 2 && vb.ndim() == 2 && va.cols() == vb.cols(),
          "pairwise_inverse_distance requires rank-2 tensors with equal width");
  const int n = va.rows(), m = vb.rows(), d = va.cols();
  Tensor dist({n, m});
  Tensor out({n, m});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      double sq = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = va.at(i, k) - vb.at(j, k);
        sq += diff * diff;
      }
      const double dij = std::sqrt(sq);
      dist.at(i, j) = dij;
      out.at(i, j) = 1.0 / (dij + eps);
    }
  }
  const bool wg = wants(a) || wants(b);
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wg,
              [this, ia, ib, result, dist = std::move(dist), eps, n, m, d] {
    const Tensor& g = nodes_[result.id].grad;
    const Tensor& va2 = nodes_[ia].value;
    const Tensor& vb2 = nodes_[ib].value;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const double gij = g.at(i, j);
        const double dij = dist.at(i, j);
        if (gij == 0.0 || dij == 0.0) continue;
        const double denom = dij + eps;
        const double coeff = -gij / (denom * denom * dij);
        for (int k = 0; k < d; ++k) {
          const double diff = va2.at(i, k) - vb2.at(j, k);
          if (nodes_[ia].wants_grad) grad_buffer(ia).at(i, k) += coeff * diff;
          if (nodes_[ib].wants_grad) grad_buffer(ib).at(j, k) -= coeff * diff;
        }
      }
    }
  });
}

Var Tape::drop_diagonal(Var a) {
  const int ia = check(a);
  const Tensor& vin = nodes_[ia].value;
  require(vin.ndim() == 2 && vin.rows() == vin.cols(), "drop_diagonal requires a square tensor");
  const int n = vin.rows();
  require(n >= 2, "drop_diagonal requires n >= 2");
  Tensor out({n, n - 1});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n - 1; ++j) {
      out.at(i, j) = vin.at(i, j < i ? j : j + 1);
    }
  }
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(a), [this, ia, result, n] {
    if (!nodes_[ia].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    Tensor& ga = grad_buffer(ia);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n - 1; ++j) {
        ga.at(i, j < i ? j : j + 1) += g.at(i, j);
      }
    }
  });
}

Var Tape::embed_off_diagonal(Var a) {
  const int ia = check(a);
  const Tensor& vin = nodes_[ia].value;
  require(vin.ndim() == 2 && vin.cols() == vin.rows() - 1,
          "embed_off_diagonal requires an [n, n-1] tensor");
  const int n = vin.rows();
  Tensor out({n, n});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n - 1; ++j) {
      out.at(i, j < i ? j : j + 1) = vin.at(i, j);
    }
  }
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(a), [this, ia, result, n] {
    if (!nodes_[ia].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    Tensor& ga = grad_buffer(ia);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n - 1; ++j) {
        ga.at(i, j) += g.at(i, j < i ? j : j + 1);
      }
    }
  });
}

Var Tape::colwise_max(Var a) {
  const int ia = check(a);
  const Tensor& vin = nodes_[ia].value;
  require(vin.ndim() == 2, "colwise_max requires a rank-2 tensor");
  const int n = vin.rows(), m = vin.cols();
  Tensor out({1, m});
  std::vector<int> argmax(static_cast<std::size_t>(m), 0);
  for (int j = 0; j < m; ++j) {
    double best = vin.at(0, j);
    int best_row = 0;
    for (int i = 1; i < n; ++i) {
      if (vin.at(i, j) > best) {
        best = vin.at(i, j);
        best_row = i;
      }
    }
    out.at(0, j) = best;
    argmax[static_cast<std::size_t>(j)] = best_row;
  }
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(a), [this, ia, result, argmax = std::move(argmax), m] {
    if (!nodes_[ia].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    Tensor& ga = grad_buffer(ia);
    for (int j = 0; j < m; ++j) {
      ga.at(argmax[static_cast<std::size_t>(j)], j) += g.at(0, j);
    }
  });
}

Var Tape::sum(Var a) {
  const int ia = check(a);
  const Tensor& vin = nodes_[ia].value;
  double total = 0.0;
  for (std::int64_t i = 0; i < vin.size(); ++i) total += vin.at(static_cast<int>(i));
  Var result{static_cast<int>(nodes_.size())};
  return push(Tensor::scalar(total), wants(a), [this, ia, result] {
    if (!nodes_[ia].wants_grad) return;
    const double g = nodes_[result.id].grad.at(0);
    Tensor& ga = grad_buffer(ia);
    for (std::int64_t i = 0; i < ga.size(); ++i) ga.at(static_cast<int>(i)) += g;
  });
}

Var Tape::bce_with_logits(Var logits, Tensor targets) {
  const int il = check(logits);
  const Tensor& vl = nodes_[il].value;
  require(vl.same_shape(targets), "bce_with_logits requires logits and targets of one shape");
  const std::int64_t count = vl.size();
  double total = 0.0;
  for (std::int64_t i = 0; i < count; ++i) {
    const double x = vl.at(static_cast<int>(i));
    const double t = targets.at(static_cast<int>(i));
    total += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  const double mean = total / static_cast<double>(count);
  Var result{static_cast<int>(nodes_.size())};
  return push(Tensor::scalar(mean), wants(logits),
              [this, il, result, targets = std::move(targets), count] {
    if (!nodes_[il].wants_grad) return;
    const double g = nodes_[result.id].grad.at(0) / static_cast<double>(count);
    const Tensor& vl2 = nodes_[il].value;
    Tensor& gl = grad_buffer(il);
    for (std::int64_t i = 0; i < count; ++i) {
      const double x = vl2.at(static_cast<int>(i));
      gl.at(static_cast<int>(i)) += g * (stable_sigmoid(x) - targets.at(static_cast<int>(i)));
    }
  });
}

Var Tape::dropout(Var x, double rate, std::uint64_t seed, bool train) {
  const int ix = check(x);
  require(rate >= 0.0 && rate < 1.0, "dropout rate must lie in [0, 1)");
  if (!train || rate == 0.0) {
    Tensor out = nodes_[ix].value;
    Var result{static_cast<int>(nodes_.size())};
    return push(std::move(out), wants(x), [this, ix, result] {
      if (!nodes_[ix].wants_grad) return;
      const Tensor& g = nodes_[result.id].grad;
      Tensor& gx = grad_buffer(ix);
      for (std::int64_t i = 0; i < g.size(); ++i) gx.at(static_cast<int>(i)) += g.at(static_cast<int>(i));
    });
  }
  const Tensor& vin = nodes_[ix].value;
  Rng rng(seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(static_cast<std::size_t>(vin.size()), 0.0);
  Tensor out = vin;
  for (std::int64_t i = 0; i < vin.size(); ++i) {
    if (rng.uniform() >= rate) {
      mask[static_cast<std::size_t>(i)] = keep_scale;
      out.at(static_cast<int>(i)) *= keep_scale;
    } else {
      out.at(static_cast<int>(i)) = 0.0;
    }
  }
  Var result{static_cast<int>(nodes_.size())};
  return push(std::move(out), wants(x), [this, ix, result, mask = std::move(mask)] {
    if (!nodes_[ix].wants_grad) return;
    const Tensor& g = nodes_[result.id].grad;
    Tensor& gx = grad_buffer(ix);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      gx.at(static_cast<int>(i)) += g.at(static_cast<int>(i)) * mask[static_cast<std::size_t>(i)];
    }
  });
}

Var Tape::triplet_loss(Var anchor, Var positive, Var negative, double margin) {
  require(margin > 0.0, "triplet margin must be positive");
  Var pos_dist = l2_distance(anchor, positive);
  Var neg_dist = l2_distance(anchor, negative);
  return relu(add_scalar(sub(pos_dist, neg_dist), margin));
}

void Tape::backward(Var loss) {
  const int il = check(loss);
  if (ran_backward_) throw std::logic_error("backward() may run once per tape");
  if (nodes_[il].value.size() != 1) {
    throw std::invalid_argument("backward requires a scalar loss");
  }
  ran_backward_ = true;
  grad_buffer(il).at(0) = 1.0;
  for (int id = il; id >= 0; --id) {
    Node& node = nodes_[id];
    if (!node.wants_grad || !node.grad_alloc || !node.backprop) continue;
    node.backprop();
  }
}

}  // namespace actgraph::num
