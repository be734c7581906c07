#pragma once

#include <cstdint>
#include <functional>

#include "pat/diff/tape.hpp"

namespace pat::diff {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t nudged = 0;  // coordinates re-evaluated off a kink
};

using ScalarFn = std::function<double(const Tensor&)>;
using GradientFn = std::function<Tensor(const Tensor&)>;
// Identifies the smooth piece containing a point (see Tape::branch_signature).
using BranchFn = std::function<std::uint64_t(const Tensor&)>;
// Builds a scalar on `tape` from the leaf `x`.
using TapeFn = std::function<Var(Tape& tape, Var x)>;

// Compares `gradient(x)` against central finite differences of `value`.
// Error per coordinate is |analytic - numeric| / (|numeric| + eps).
// With `branch`, a coordinate whose +-step probes straddle a kink is nudged
// along its own axis until all three points share a smooth piece; both
// gradients are then taken at the nudged point.
GradCheckResult grad_check(const ScalarFn& value, const GradientFn& gradient, const Tensor& x, double step,
                           double eps = 1e-6, const BranchFn& branch = {});

// Same, with the analytic gradient taken from the tape.
GradCheckResult grad_check(const TapeFn& f, const Tensor& x, double step, double eps = 1e-6);

}  // namespace pat::diff
