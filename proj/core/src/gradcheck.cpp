#include "actgraph/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace actgraph::num {

namespace {

double evaluate(const RecordedFn& fn, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Tensor& p : params) vars.push_back(tape.constant(p));
  const Var out = fn(tape, vars);
  return tape.value(out).scalar_value();
}

}  // namespace

double finite_difference_check(const RecordedFn& fn,
                               const std::vector<Tensor>& params,
                               double eps) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const Tensor& p : params) vars.push_back(tape.leaf(p));
    const Var loss = fn(tape, vars);
    if (tape.value(loss).size() != 1) {
      throw std::invalid_argument("finite_difference_check requires a scalar computation");
    }
    tape.backward(loss);
    for (const Var v : vars) analytic.push_back(tape.grad(v));
  }

  double worst = 0.0;
  std::vector<Tensor> work = params;
  for (std::size_t p = 0; p < work.size(); ++p) {
    for (std::int64_t i = 0; i < work[p].size(); ++i) {
      const int idx = static_cast<int>(i);
      const double original = work[p].at(idx);
      work[p].at(idx) = original + eps;
      const double up = evaluate(fn, work);
      work[p].at(idx) = original - eps;
      const double down = evaluate(fn, work);
      work[p].at(idx) = original;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = std::abs(analytic[p].at(idx) - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace actgraph::num
