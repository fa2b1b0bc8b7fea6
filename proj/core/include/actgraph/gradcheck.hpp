#pragma once

#include <functional>
#include <vector>

#include "actgraph/tape.hpp"

namespace actgraph::num {

/// A scalar-valued computation recorded on a fresh tape from parameter leaves.
using RecordedFn = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Central-difference gradient check. Runs the recorded computation once with
/// backward() for analytic gradients, then perturbs every parameter element
/// by +-eps and compares elementwise. Returns
///   max |analytic - numeric| / max(1, |numeric|).
double finite_difference_check(const RecordedFn& fn,
                               const std::vector<Tensor>& params,
                               double eps = 1e-5);

}  // namespace actgraph::num
