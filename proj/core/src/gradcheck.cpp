#include "pat/diff/gradcheck.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::diff {

namespace {

bool same_piece(const BranchFn& branch, Tensor& probe, std::size_t i, double at, double step) {
  probe[i] = at;
  const std::uint64_t mid = branch(probe);
  probe[i] = at + step;
  const std::uint64_t up = branch(probe);
  probe[i] = at - step;
  const std::uint64_t down = branch(probe);
  return mid == up && mid == down;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& value, const GradientFn& gradient, const Tensor& x, double step,
                           double eps, const BranchFn& branch) {
  if (!(step > 0.0)) throw Error("grad_check: step must be positive");
  const Tensor analytic = gradient(x);
  if (analytic.shape() != x.shape()) {
    throw ShapeError(fmt::format("grad_check: gradient shape {} != input shape {}", shape_str(analytic.shape()),
                                 shape_str(x.shape())));
  }
  if (!analytic.all_finite()) throw Error("grad_check: analytic gradient is not finite");

  GradCheckResult result;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double at = x[i];
    double a = analytic[i];
    if (branch && !same_piece(branch, probe, i, at, step)) {
      for (int k = 1; k <= 8; ++k) {
        const double offset = (k % 2 ? 1.0 : -1.0) * ((k + 1) / 2) * 2.5 * step;
        if (same_piece(branch, probe, i, x[i] + offset, step)) {
          at = x[i] + offset;
          probe[i] = at;
          a = gradient(probe)[i];
          ++result.nudged;
          break;
        }
      }
    }
    probe[i] = at + step;
    const double up = value(probe);
    probe[i] = at - step;
    const double down = value(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(fmt::format("grad_check: non-finite function value at coordinate {}", i));
    }
    const double numeric = (up - down) / (2.0 * step);
    const double err = std::fabs(a - numeric) / (std::fabs(numeric) + eps);
    if (i == 0 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
      result.analytic_at_worst = a;
      result.numeric_at_worst = numeric;
    }
  }
  return result;
}

GradCheckResult grad_check(const TapeFn& f, const Tensor& x, double step, double eps) {
  auto value = [&f](const Tensor& at) {
    Tape tape;
    const Var leaf = tape.leaf(at, false);
    return tape.value(f(tape, leaf)).item();
  };
  auto gradient = [&f](const Tensor& at) {
    Tape tape;
    const Var leaf = tape.leaf(at, true);
    const Var out = f(tape, leaf);
    return tape.backward(out)[leaf];
  };
  auto branch = [&f](const Tensor& at) {
    Tape tape;
    f(tape, tape.leaf(at, false));
    return tape.branch_signature();
  };
  return grad_check(value, gradient, x, step, eps, branch);
}

}  // namespace pat::diff
