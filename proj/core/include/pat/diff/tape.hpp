#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "pat/diff/tensor.hpp"

namespace pat::diff {

// Handle to a value recorded on a Tape. Only meaningful for the tape that
// produced it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class OpKind {
  leaf,
  conv2d,
  linear,
  relu,
  sigmoid,
  abs,
  add,
  sub,
  mul,
  scale,
  concat,
  slice,
  reshape,
  sum,
  mean,
  min_const,
  max_const,
  resize_bilinear,
  crop,
};

std::string_view op_name(OpKind kind);

// Sub-pixel region of an image, in pixel units. (x0, y0) is the top-left
// corner of the region's footprint; pixel (i, j) covers [j, j+1) x [i, i+1).
struct CropWindow {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
  double height = 0.0;
};

class Tape;

// Gradient of a scalar output with respect to every requires_grad leaf.
class Gradients {
 public:
  bool has(Var v) const;
  const Tensor& operator[](Var v) const;

 private:
  friend class Tape;
  std::vector<Tensor> grads_;
  std::vector<bool> present_;
};

// Reverse-mode tape. Nodes are appended in execution order, so the tape is
// always topologically sorted. A tape is single-owner; distinct tapes are
// independent.
class Tape {
 public:
  Var leaf(Tensor value, bool requires_grad = false);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  // Hash of which side of its kink every relu/abs/min_const/max_const
  // element sits on. Two evaluations with equal signatures lie in the same
  // smooth piece.
  std::uint64_t branch_signature() const;

  // input [N,C,H,W], weight [O,C,kh,kw], bias [O] -> [N,O,Ho,Wo]
  Var conv2d(Var input, Var weight, Var bias, int stride, int pad);
  // input [N,F], weight [O,F], bias [O] -> [N,O]
  Var linear(Var input, Var weight, Var bias);

  Var relu(Var x);
  Var sigmoid(Var x);
  Var abs(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double s);
  Var min_const(Var x, double c);
  Var max_const(Var x, double c);

  Var concat(std::span<const Var> parts, int axis);
  Var slice(Var x, int axis, int begin, int end);
  Var reshape(Var x, Shape shape);

  Var sum(Var x);
  Var mean(Var x);

  // image [C,H,W]; half-pixel-centre convention (align_corners = false).
  Var resize_bilinear(Var image, int out_h, int out_w);
  // Bilinear resample of `window` to out_h x out_w. Samples falling outside
  // the image footprint are zero.
  Var crop(Var image, CropWindow window, int out_h, int out_w);

  // Gradient of a single-element `output`. The tape is not modified.
  Gradients backward(Var output) const;

 private:
  using BackwardFn =
      std::function<void(const Tape&, const Tensor& gout, std::span<Tensor* const> gin)>;

  struct Node {
    OpKind kind = OpKind::leaf;
    std::vector<int> inputs;
    Tensor value;
    bool requires_grad = false;  // leaf flag
    bool needs_grad = false;     // some requires_grad leaf is upstream
    BackwardFn backward;
  };

  const Node& node(Var v) const;
  Var push(OpKind kind, std::vector<int> inputs, Tensor value, BackwardFn backward);
  Var sample_bilinear(OpKind kind, Var image, CropWindow window, int out_h, int out_w);

  std::vector<Node> nodes_;
};

}  // namespace pat::diff
