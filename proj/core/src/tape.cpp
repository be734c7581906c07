#include "pat/diff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Core>
#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::diff {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

[[noreturn]] void shape_fail(OpKind kind, const std::string& detail) {
  throw ShapeError(fmt::format("{}: {}", op_name(kind), detail));
}

void require_same_shape(OpKind kind, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    shape_fail(kind, fmt::format("operand shapes differ: {} vs {}", shape_str(a.shape()),
                                 shape_str(b.shape())));
  }
}

struct ConvGeometry {
  int n, c, h, w, o, kh, kw, stride, pad, ho, wo;
  int k() const { return c * kh * kw; }
  int p() const { return ho * wo; }
};

void im2col(const ConvGeometry& g, const double* img, double* cols) {
  const int p = g.p();
  for (int c = 0; c < g.c; ++c) {
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        double* row = cols + static_cast<std::ptrdiff_t>((c * g.kh + ki) * g.kw + kj) * p;
        const double* plane = img + static_cast<std::ptrdiff_t>(c) * g.h * g.w;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          double* out = row + oy * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(out, out + g.wo, 0.0);
            continue;
          }
          const double* src = plane + iy * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            out[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const double* cols, double* img) {
  const int p = g.p();
  for (int c = 0; c < g.c; ++c) {
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        const double* row = cols + static_cast<std::ptrdiff_t>((c * g.kh + ki) * g.kw + kj) * p;
        double* plane = img + static_cast<std::ptrdiff_t>(c) * g.h * g.w;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          if (iy < 0 || iy >= g.h) continue;
          const double* in = row + oy * g.wo;
          double* dst = plane + iy * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            if (ix >= 0 && ix < g.w) dst[ix] += in[ox];
          }
        }
      }
    }
  }
}

// Per-axis bilinear lookup: sample k reads src[i0]*w0 + src[i1]*w1, or is
// zero when outside the footprint.
struct AxisTable {
  std::vector<int> i0, i1;
  std::vector<double> w0, w1;
  std::vector<char> inside;
};

AxisTable make_axis_table(double origin, double extent, int out, int size) {
  AxisTable t;
  t.i0.resize(static_cast<std::size_t>(out));
  t.i1.resize(static_cast<std::size_t>(out));
  t.w0.resize(static_cast<std::size_t>(out));
  t.w1.resize(static_cast<std::size_t>(out));
  t.inside.resize(static_cast<std::size_t>(out));
  const double step = extent / out;
  for (int k = 0; k < out; ++k) {
    const auto u = static_cast<std::size_t>(k);
    const double s = origin + (k + 0.5) * step - 0.5;
    if (s < -0.5 || s > size - 0.5) {
      t.inside[u] = 0;
      t.i0[u] = t.i1[u] = 0;
      t.w0[u] = t.w1[u] = 0.0;
      continue;
    }
    const double x = std::clamp(s, 0.0, static_cast<double>(size - 1));
    const int lo = std::min(static_cast<int>(std::floor(x)), size - 1);
    const int hi = std::min(lo + 1, size - 1);
    const double f = x - lo;
    t.inside[u] = 1;
    t.i0[u] = lo;
    t.i1[u] = hi;
    t.w0[u] = 1.0 - f;
    t.w1[u] = f;
  }
  return t;
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::leaf: return "leaf";
    case OpKind::conv2d: return "conv2d";
    case OpKind::linear: return "linear";
    case OpKind::relu: return "relu";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::abs: return "abs";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::concat: return "concat";
    case OpKind::slice: return "slice";
    case OpKind::reshape: return "reshape";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::min_const: return "min_const";
    case OpKind::max_const: return "max_const";
    case OpKind::resize_bilinear: return "resize_bilinear";
    case OpKind::crop: return "crop";
  }
  return "unknown";
}

bool Gradients::has(Var v) const {
  return v.id >= 0 && static_cast<std::size_t>(v.id) < present_.size() &&
         present_[static_cast<std::size_t>(v.id)];
}

const Tensor& Gradients::operator[](Var v) const {
  if (!has(v)) throw Error(fmt::format("no gradient recorded for node {}", v.id));
  return grads_[static_cast<std::size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw Error(fmt::format("invalid tape handle {}", v.id));
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.kind = OpKind::leaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.needs_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::push(OpKind kind, std::vector<int> inputs, Tensor value, BackwardFn backward) {
  Node n;
  n.kind = kind;
  n.value = std::move(value);
  for (int i : inputs) {
    if (nodes_[static_cast<std::size_t>(i)].needs_grad) n.needs_grad = true;
  }
  n.inputs = std::move(inputs);
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::conv2d(Var input, Var weight, Var bias, int stride, int pad) {
  const Tensor& x = value(input);
  const Tensor& w = value(weight);
  const Tensor& b = value(bias);
  constexpr OpKind kind = OpKind::conv2d;
  if (x.rank() != 4) shape_fail(kind, fmt::format("input must be [N,C,H,W], got {}", shape_str(x.shape())));
  if (w.rank() != 4) shape_fail(kind, fmt::format("weight must be [O,C,kh,kw], got {}", shape_str(w.shape())));
  if (w.dim(1) != x.dim(1)) {
    shape_fail(kind, fmt::format("input channels {} != weight channels {} (input {}, weight {})", x.dim(1),
                                 w.dim(1), shape_str(x.shape()), shape_str(w.shape())));
  }
  if (b.shape() != Shape{w.dim(0)}) {
    shape_fail(kind, fmt::format("bias must be [{}], got {}", w.dim(0), shape_str(b.shape())));
  }
  if (stride < 1 || pad < 0) shape_fail(kind, fmt::format("bad stride {} / pad {}", stride, pad));

  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3), stride, pad, 0, 0};
  g.ho = (g.h + 2 * pad - g.kh) / stride + 1;
  g.wo = (g.w + 2 * pad - g.kw) / stride + 1;
  if (g.ho <= 0 || g.wo <= 0) {
    shape_fail(kind, fmt::format("kernel {}x{} larger than padded input {}x{}", g.kh, g.kw, g.h, g.w));
  }

  // Column buffers are per sample and recomputed in backward so they stay
  // cache resident.
  const std::size_t cols_per = static_cast<std::size_t>(g.k()) * g.p();
  AlignedBuffer cols(cols_per);
  Tensor out({g.n, g.o, g.ho, g.wo});
  ConstMap wm(w.ptr(), g.o, g.k());
  const std::size_t in_per = static_cast<std::size_t>(g.c) * g.h * g.w;
  for (int n = 0; n < g.n; ++n) {
    im2col(g, x.ptr() + in_per * static_cast<std::size_t>(n), cols.data());
    MutMap om(out.ptr() + static_cast<std::ptrdiff_t>(n) * g.o * g.p(), g.o, g.p());
    om.noalias() = wm * ConstMap(cols.data(), g.k(), g.p());
    for (int o = 0; o < g.o; ++o) om.row(o).array() += b[static_cast<std::size_t>(o)];
  }

  return push(kind, {input.id, weight.id, bias.id}, std::move(out),
              [g, cols_per, in_per, input, weight](const Tape& tape, const Tensor& gout,
                                                   std::span<Tensor* const> gin) {
                const Tensor& xv = tape.value(input);
                const Tensor& wv = tape.value(weight);
                ConstMap wm(wv.ptr(), g.o, g.k());
                AlignedBuffer cols(gin[1] ? cols_per : 0);
                AlignedBuffer gcols(gin[0] ? cols_per : 0);
                for (int n = 0; n < g.n; ++n) {
                  ConstMap gm(gout.ptr() + static_cast<std::ptrdiff_t>(n) * g.o * g.p(), g.o, g.p());
                  if (gin[1]) {
                    im2col(g, xv.ptr() + in_per * static_cast<std::size_t>(n), cols.data());
                    MutMap gw(gin[1]->ptr(), g.o, g.k());
                    gw.noalias() += gm * ConstMap(cols.data(), g.k(), g.p()).transpose();
                  }
                  if (gin[2]) {
                    for (int o = 0; o < g.o; ++o) (*gin[2])[static_cast<std::size_t>(o)] += gm.row(o).sum();
                  }
                  if (gin[0]) {
                    MutMap gc(gcols.data(), g.k(), g.p());
                    gc.noalias() = wm.transpose() * gm;
                    col2im_add(g, gcols.data(), gin[0]->ptr() + in_per * static_cast<std::size_t>(n));
                  }
                }
              });
}

Var Tape::linear(Var input, Var weight, Var bias) {
  const Tensor& x = value(input);
  const Tensor& w = value(weight);
  const Tensor& b = value(bias);
  constexpr OpKind kind = OpKind::linear;
  if (x.rank() != 2) shape_fail(kind, fmt::format("input must be [N,F], got {}", shape_str(x.shape())));
  if (w.rank() != 2 || w.dim(1) != x.dim(1)) {
    shape_fail(kind, fmt::format("weight {} incompatible with input {}", shape_str(w.shape()), shape_str(x.shape())));
  }
  if (b.shape() != Shape{w.dim(0)}) {
    shape_fail(kind, fmt::format("bias must be [{}], got {}", w.dim(0), shape_str(b.shape())));
  }
  const int n = x.dim(0), f = x.dim(1), o = w.dim(0);
  Tensor out({n, o});
  MutMap om(out.ptr(), n, o);
  om.noalias() = ConstMap(x.ptr(), n, f) * ConstMap(w.ptr(), o, f).transpose();
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < o; ++c) om(r, c) += b[static_cast<std::size_t>(c)];
  }
  return push(kind, {input.id, weight.id, bias.id}, std::move(out),
              [n, f, o, input, weight](const Tape& tape, const Tensor& gout, std::span<Tensor* const> gin) {
                ConstMap gm(gout.ptr(), n, o);
                if (gin[1]) {
                  MutMap gw(gin[1]->ptr(), o, f);
                  gw.noalias() += gm.transpose() * ConstMap(tape.value(input).ptr(), n, f);
                }
                if (gin[2]) {
                  for (int c = 0; c < o; ++c) (*gin[2])[static_cast<std::size_t>(c)] += gm.col(c).sum();
                }
                if (gin[0]) {
                  MutMap gx(gin[0]->ptr(), n, f);
                  gx.noalias() += gm * ConstMap(tape.value(weight).ptr(), o, f);
                }
              });
}

std::uint64_t Tape::branch_signature() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](bool bit) { h = (h ^ (bit ? 1u : 0u)) * 1099511628211ULL; };
  for (const Node& n : nodes_) {
    if (n.kind != OpKind::relu && n.kind != OpKind::abs && n.kind != OpKind::min_const &&
        n.kind != OpKind::max_const) {
      continue;
    }
    const Tensor& in = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (n.kind == OpKind::relu) {
        mix(in[i] > 0.0);
      } else if (n.kind == OpKind::abs) {
        mix(in[i] >= 0.0);
      } else {
        mix(n.value[i] == in[i]);
      }
    }
  }
  return h;
}

Var Tape::relu(Var x) {
  const Tensor& xv = value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return push(OpKind::relu, {x.id}, std::move(out),
              [x](const Tape& tape, const Tensor& gout, std::span<Tensor* const> gin) {
                const Tensor& xv = tape.value(x);
                Tensor& g = *gin[0];
                for (std::size_t i = 0; i < xv.size(); ++i) {
                  if (xv[i] > 0.0) g[i] += gout[i];
                }
              });
}

Var Tape::sigmoid(Var x) {
  const Tensor& xv = value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  const int self = static_cast<int>(nodes_.size());
  return push(OpKind::sigmoid, {x.id}, std::move(out),
              [self](const Tape& tape, const Tensor& gout, std::span<Tensor* const> gin) {
                const Tensor& y = tape.value(Var{self});
                Tensor& g = *gin[0];
                for (std::size_t i = 0; i < y.size(); ++i) g[i] += gout[i] * y[i] * (1.0 - y[i]);
              });
}

Var Tape::abs(Var x) {
  const Tensor& xv = value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::fabs(xv[i]);
  return push(OpKind::abs, {x.id}, std::move(out),
              [x](const Tape& tape, const Tensor& gout, std::span<Tensor* const> gin) {
                const Tensor& xv = tape.value(x);
                Tensor& g = *gin[0];
                for (std::size_t i = 0; i < xv.size(); ++i) {
                  if (xv[i] > 0.0) {
                    g[i] += gout[i];
                  } else if (xv[i] < 0.0) {
                    g[i] -= gout[i];
                  }
                }
              });
}

Var Tape::add(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require_same_shape(OpKind::add, av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  return push(OpKind::add, {a.id, b.id}, std::move(out),
              [](const Tape&, const Tensor& gout, std::span<Tensor* const> gin) {
                if (gin[0]) *gin[0] += gout;
                if (gin[1]) *gin[1] += gout;
              });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require_same_shape(OpKind::sub, av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
  return push(OpKind::sub, {a.id, b.id}, std::move(out),
              [](const Tape&, const Tensor& gout, std::span<Tensor* const> gin) {
                if (gin[0]) *gin[0] += gout;
                if (gin[1]) {
                  Tensor& g = *gin[1];
                  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gout[i];
                }
              });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require_same_shape(OpKind::mul, av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return push(OpKind::mul, {a.id, b.id}, std::move(out),
              [a, b](const Tape& tape, const Tensor& gout, std::span<Tensor* const> gin) {
                const Tensor& av = tape.value(a);
                const Tensor& bv = tape.value(b);
                if (gin[0]) {
                  Tensor& g = *gin[0];
                  for (std::size_t i = 0; i < g.size(); ++i) g[i] += gout[i] * bv[i];
                }
                if (gin[1]) {
                  Tensor& g = *gin[1];
                  for (std::size_t i = 0; i < g.size(); ++i) g[i] += gout[i] * av[i];
                }
              });
}

Var Tape::scale(Var x, double s) {
  const Tensor& xv = value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = s * xv[i];
  return push(OpKind::scale, {x.id}, std::move(out),
              [s](const Tape&, const Tensor& gout, std::span<Tensor* const> gin) {
                Tensor& g = *gin[0];
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * gout[i];
              });
}

Var Tape::min_const(Var x, double c) {
  const Tensor& xv = value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::min(xv[i], c);
  return push(OpKind::min_const, {x.id}, std::move(out),
              [x, c](const Tape& tape, const Tensor& gout, std::span<Tensor* const> gin) {
                const Tensor& xv = tape.value(x);
                Tensor& g = *gin[0];
                for (std::size_t i = 0; i < g.size(); ++i) {
                  if (xv[i] < c) g[i] += gout[i];
                }
              });
}

Var Tape::max_const(Var x, double c) {
  const Tensor& xv = value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::max(xv[i], c);
  return push(OpKind::max_const, {x.id}, std::move(out),
              [x, c](const Tape& tape, const Tensor& gout, std::span<Tensor* const> gin) {
                const Tensor& xv = tape.value(x);
                Tensor& g = *gin[0];
                for (std::size_t i = 0; i < g.size(); ++i) {
                  if (xv[i] > c) g[i] += gout[i];
                }
              });
}

Var Tape::concat(std::span<const Var> parts, int axis) {
  constexpr OpKind kind = OpKind::concat;
  if (parts.empty()) shape_fail(kind, "no operands");
  const Shape& first = value(parts[0]).shape();
  const int rank = static_cast<int>(first.size());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) shape_fail(kind, fmt::format("axis out of range for {}", shape_str(first)));
  Shape out_shape = first;
  out_shape[static_cast<std::size_t>(axis)] = 0;
  std::vector<int> ids;
  std::vector<int> extents;
  for (Var p : parts) {
    const Shape& s = value(p).shape();
    bool ok = static_cast<int>(s.size()) == rank;
    for (int d = 0; ok && d < rank; ++d) {
      if (d != axis && s[static_cast<std::size_t>(d)] != first[static_cast<std::size_t>(d)]) ok = false;
    }
    if (!ok) shape_fail(kind, fmt::format("operand {} incompatible with {} on axis {}", shape_str(s), shape_str(first), axis));
    out_shape[static_cast<std::size_t>(axis)] += s[static_cast<std::size_t>(axis)];
    ids.push_back(p.id);
    extents.push_back(s[static_cast<std::size_t>(axis)]);
  }
  std::size_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(first[static_cast<std::size_t>(d)]);
  for (int d = axis + 1; d < rank; ++d) inner *= static_cast<std::size_t>(first[static_cast<std::size_t>(d)]);
  const std::size_t total_axis = static_cast<std::size_t>(out_shape[static_cast<std::size_t>(axis)]);

  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = value(parts[k]);
    const std::size_t block = static_cast<std::size_t>(extents[k]) * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(pv.ptr() + o * block, block, out.ptr() + o * total_axis * inner + offset);
    }
    offset += block;
  }
  return push(kind, ids, std::move(out),
              [extents, outer, inner, total_axis](const Tape&, const Tensor& gout, std::span<Tensor* const> gin) {
                std::size_t offset = 0;
                for (std::size_t k = 0; k < gin.size(); ++k) {
                  const std::size_t block = static_cast<std::size_t>(extents[k]) * inner;
                  if (gin[k]) {
                    double* g = gin[k]->ptr();
                    for (std::size_t o = 0; o < outer; ++o) {
                      const double* src = gout.ptr() + o * total_axis * inner + offset;
                      for (std::size_t i = 0; i < block; ++i) g[o * block + i] += src[i];
                    }
                  }
                  offset += block;
                }
              });
}

Var Tape::slice(Var x, int axis, int begin, int end) {
  constexpr OpKind kind = OpKind::slice;
  const Tensor& xv = value(x);
  const int rank = xv.rank();
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) shape_fail(kind, fmt::format("axis out of range for {}", shape_str(xv.shape())));
  const int extent = xv.dim(axis);
  if (begin < 0 || end > extent || begin >= end) {
    shape_fail(kind, fmt::format("range [{},{}) invalid for axis {} of {}", begin, end, axis, shape_str(xv.shape())));
  }
  std::size_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(xv.dim(d));
  for (int d = axis + 1; d < rank; ++d) inner *= static_cast<std::size_t>(xv.dim(d));
  Shape out_shape = xv.shape();
  out_shape[static_cast<std::size_t>(axis)] = end - begin;
  Tensor out(out_shape);
  const std::size_t block = static_cast<std::size_t>(end - begin) * inner;
  const std::size_t src_block = static_cast<std::size_t>(extent) * inner;
  const std::size_t skip = static_cast<std::size_t>(begin) * inner;
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(xv.ptr() + o * src_block + skip, block, out.ptr() + o * block);
  }
  return push(kind, {x.id}, std::move(out),
              [outer, block, src_block, skip](const Tape&, const Tensor& gout, std::span<Tensor* const> gin) {
                double* g = gin[0]->ptr();
                for (std::size_t o = 0; o < outer; ++o) {
                  for (std::size_t i = 0; i < block; ++i) g[o * src_block + skip + i] += gout[o * block + i];
                }
              });
}

Var Tape::reshape(Var x, Shape shape) {
  const Tensor& xv = value(x);
  if (shape_numel(shape) != xv.size()) {
    shape_fail(OpKind::reshape, fmt::format("cannot view {} as {}", shape_str(xv.shape()), shape_str(shape)));
  }
  return push(OpKind::reshape, {x.id}, xv.reshaped(std::move(shape)),
              [](const Tape&, const Tensor& gout, std::span<Tensor* const> gin) {
                Tensor& g = *gin[0];
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += gout[i];
              });
}

Var Tape::sum(Var x) {
  const Tensor& xv = value(x);
  double s = 0.0;
  for (double v : xv.data()) s += v;
  return push(OpKind::sum, {x.id}, Tensor::scalar(s),
              [](const Tape&, const Tensor& gout, std::span<Tensor* const> gin) {
                const double g0 = gout[0];
                for (double& g : gin[0]->data()) g += g0;
              });
}

Var Tape::mean(Var x) {
  const Tensor& xv = value(x);
  if (xv.size() == 0) shape_fail(OpKind::mean, "empty operand");
  double s = 0.0;
  for (double v : xv.data()) s += v;
  const double inv = 1.0 / static_cast<double>(xv.size());
  return push(OpKind::mean, {x.id}, Tensor::scalar(s * inv),
              [inv](const Tape&, const Tensor& gout, std::span<Tensor* const> gin) {
                const double g0 = gout[0] * inv;
                for (double& g : gin[0]->data()) g += g0;
              });
}

Var Tape::sample_bilinear(OpKind kind, Var image, CropWindow window, int out_h, int out_w) {
  const Tensor& img = value(image);
  if (img.rank() != 3) shape_fail(kind, fmt::format("image must be [C,H,W], got {}", shape_str(img.shape())));
  if (out_h <= 0 || out_w <= 0) shape_fail(kind, fmt::format("output size {}x{} must be positive", out_h, out_w));
  const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
  auto rows = std::make_shared<AxisTable>(make_axis_table(window.y0, window.height, out_h, h));
  auto cols = std::make_shared<AxisTable>(make_axis_table(window.x0, window.width, out_w, w));
  Tensor out({c, out_h, out_w});
  for (int ch = 0; ch < c; ++ch) {
    const double* plane = img.ptr() + static_cast<std::ptrdiff_t>(ch) * h * w;
    double* dst = out.ptr() + static_cast<std::ptrdiff_t>(ch) * out_h * out_w;
    for (int i = 0; i < out_h; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!rows->inside[ui]) continue;
      const double* r0 = plane + rows->i0[ui] * w;
      const double* r1 = plane + rows->i1[ui] * w;
      const double wy0 = rows->w0[ui], wy1 = rows->w1[ui];
      for (int j = 0; j < out_w; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (!cols->inside[uj]) continue;
        const int x0 = cols->i0[uj], x1 = cols->i1[uj];
        const double wx0 = cols->w0[uj], wx1 = cols->w1[uj];
        dst[i * out_w + j] = wy0 * (wx0 * r0[x0] + wx1 * r0[x1]) + wy1 * (wx0 * r1[x0] + wx1 * r1[x1]);
      }
    }
  }
  return push(kind, {image.id}, std::move(out),
              [rows, cols, c, h, w, out_h, out_w](const Tape&, const Tensor& gout, std::span<Tensor* const> gin) {
                Tensor& g = *gin[0];
                for (int ch = 0; ch < c; ++ch) {
                  double* plane = g.ptr() + static_cast<std::ptrdiff_t>(ch) * h * w;
                  const double* src = gout.ptr() + static_cast<std::ptrdiff_t>(ch) * out_h * out_w;
                  for (int i = 0; i < out_h; ++i) {
                    const auto ui = static_cast<std::size_t>(i);
                    if (!rows->inside[ui]) continue;
                    double* r0 = plane + rows->i0[ui] * w;
                    double* r1 = plane + rows->i1[ui] * w;
                    const double wy0 = rows->w0[ui], wy1 = rows->w1[ui];
                    for (int j = 0; j < out_w; ++j) {
                      const auto uj = static_cast<std::size_t>(j);
                      if (!cols->inside[uj]) continue;
                      const double gv = src[i * out_w + j];
                      const int x0 = cols->i0[uj], x1 = cols->i1[uj];
                      const double wx0 = cols->w0[uj], wx1 = cols->w1[uj];
                      r0[x0] += gv * wy0 * wx0;
                      r0[x1] += gv * wy0 * wx1;
                      r1[x0] += gv * wy1 * wx0;
                      r1[x1] += gv * wy1 * wx1;
                    }
                  }
                }
              });
}

Var Tape::resize_bilinear(Var image, int out_h, int out_w) {
  const Tensor& img = value(image);
  if (img.rank() != 3) {
    shape_fail(OpKind::resize_bilinear, fmt::format("image must be [C,H,W], got {}", shape_str(img.shape())));
  }
  return sample_bilinear(OpKind::resize_bilinear, image,
                         CropWindow{0.0, 0.0, static_cast<double>(img.dim(2)), static_cast<double>(img.dim(1))},
                         out_h, out_w);
}

Var Tape::crop(Var image, CropWindow window, int out_h, int out_w) {
  if (!(window.width > 0.0) || !(window.height > 0.0)) {
    shape_fail(OpKind::crop, fmt::format("window {}x{} must have positive extent", window.width, window.height));
  }
  return sample_bilinear(OpKind::crop, image, window, out_h, out_w);
}

Gradients Tape::backward(Var output) const {
  const Node& out = node(output);
  if (out.value.size() != 1) {
    throw ShapeError(fmt::format("backward: output must be scalar, got shape {}", shape_str(out.value.shape())));
  }
  const auto n = static_cast<std::size_t>(output.id) + 1;
  std::vector<Tensor> grads(n);
  std::vector<bool> live(n, false);
  grads[n - 1] = Tensor(out.value.shape(), 1.0);
  live[n - 1] = true;

  std::vector<Tensor*> gin;
  for (std::size_t i = n; i-- > 0;) {
    const Node& nd = nodes_[i];
    if (!live[i] || !nd.needs_grad || nd.kind == OpKind::leaf) continue;
    gin.assign(nd.inputs.size(), nullptr);
    for (std::size_t k = 0; k < nd.inputs.size(); ++k) {
      const auto j = static_cast<std::size_t>(nd.inputs[k]);
      if (!nodes_[j].needs_grad) continue;
      if (!live[j]) {
        grads[j] = Tensor(nodes_[j].value.shape(), 0.0);
        live[j] = true;
      }
      gin[k] = &grads[j];
    }
    nd.backward(*this, grads[i], gin);
    grads[i] = Tensor();  // intermediate no longer needed
  }

  Gradients result;
  result.grads_.resize(n);
  result.present_.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const Node& nd = nodes_[i];
    if (nd.kind != OpKind::leaf || !nd.requires_grad) continue;
    result.grads_[i] = live[i] ? std::move(grads[i]) : Tensor(nd.value.shape(), 0.0);
    result.present_[i] = true;
  }
  return result;
}

}  // namespace pat::diff
