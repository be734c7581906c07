#include <doctest.h>

#include <cmath>

#include "pat/diff/gradcheck.hpp"
#include "pat/diff/tape.hpp"
#include "pat/error.hpp"
#include "pat/rng.hpp"

using namespace pat;
using namespace pat::diff;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(rng, lo, hi);
  return t;
}

// Keeps values at least `margin` away from zero so kinks stay out of reach
// of the finite-difference probes.
Tensor off_zero(Tensor t, double margin = 0.05) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::fabs(t[i]) < margin) t[i] = t[i] < 0.0 ? -margin : margin;
  }
  return t;
}

// Random fixed weights turn a tensor-valued op into a scalar.
Var contract(Tape& tape, Var y, Rng& rng) {
  const Var w = tape.leaf(random_tensor(tape.value(y).shape(), rng));
  return tape.sum(tape.mul(y, w));
}

constexpr double kStep = 1e-4;
constexpr double kPrimitiveTol = 1e-4;

}  // namespace

TEST_SUITE("diffcore") {
  TEST_CASE("relu of [-1, 0, 2]") {
    Tape tape;
    const Var y = tape.relu(tape.leaf(Tensor::from({-1.0, 0.0, 2.0})));
    CHECK(tape.value(y) == Tensor::from({0.0, 0.0, 2.0}));
  }

  TEST_CASE("bilinear resize of a constant image stays constant") {
    Tape tape;
    const Var img = tape.leaf(Tensor({3, 7, 5}, 0.37));
    for (auto [h, w] : {std::pair{3, 3}, std::pair{11, 2}, std::pair{20, 13}}) {
      const Tensor& out = tape.value(tape.resize_bilinear(img, h, w));
      CHECK(out.shape() == Shape{3, h, w});
      for (double v : out.data()) CHECK(v == doctest::Approx(0.37).epsilon(1e-15));
    }
  }

  TEST_CASE("3x3 ones kernel over 5x5 ones gives all nines") {
    Tape tape;
    const Var x = tape.leaf(Tensor({1, 1, 5, 5}, 1.0));
    const Var w = tape.leaf(Tensor({1, 1, 3, 3}, 1.0));
    const Var b = tape.leaf(Tensor({1}, 0.0));
    const Tensor& y = tape.value(tape.conv2d(x, w, b, 1, 0));
    CHECK(y.shape() == Shape{1, 1, 3, 3});
    for (double v : y.data()) CHECK(v == 9.0);
  }

  TEST_CASE("conv2d with stride and padding matches a direct loop") {
    Rng rng(3);
    const Tensor x = random_tensor({2, 3, 9, 7}, rng);
    const Tensor w = random_tensor({4, 3, 3, 3}, rng);
    const Tensor b = random_tensor({4}, rng);
    Tape tape;
    const Tensor& y = tape.value(tape.conv2d(tape.leaf(x), tape.leaf(w), tape.leaf(b), 2, 1));
    const int ho = (9 + 2 - 3) / 2 + 1, wo = (7 + 2 - 3) / 2 + 1;
    REQUIRE(y.shape() == Shape{2, 4, ho, wo});
    for (int n = 0; n < 2; ++n)
      for (int o = 0; o < 4; ++o)
        for (int i = 0; i < ho; ++i)
          for (int j = 0; j < wo; ++j) {
            double s = b[o];
            for (int c = 0; c < 3; ++c)
              for (int ki = 0; ki < 3; ++ki)
                for (int kj = 0; kj < 3; ++kj) {
                  const int yi = 2 * i - 1 + ki, xj = 2 * j - 1 + kj;
                  if (yi < 0 || yi >= 9 || xj < 0 || xj >= 7) continue;
                  s += w[((o * 3 + c) * 3 + ki) * 3 + kj] * x[((n * 3 + c) * 9 + yi) * 7 + xj];
                }
            CHECK(y[((n * 4 + o) * ho + i) * wo + j] == doctest::Approx(s).epsilon(1e-12));
          }
  }

  TEST_CASE("shape mismatch names the op and dimensions") {
    Tape tape;
    const Var a = tape.leaf(Tensor({2, 3}));
    const Var b = tape.leaf(Tensor({3, 2}));
    try {
      tape.add(a, b);
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      const std::string what = e.what();
      CHECK(what.find("add") != std::string::npos);
      CHECK(what.find("[2,3]") != std::string::npos);
      CHECK(what.find("[3,2]") != std::string::npos);
    }
    CHECK_THROWS_AS(tape.linear(tape.leaf(Tensor({2, 5})), tape.leaf(Tensor({4, 6})), tape.leaf(Tensor({4}))),
                    ShapeError);
    CHECK_THROWS_AS(tape.conv2d(tape.leaf(Tensor({1, 2, 5, 5})), tape.leaf(Tensor({1, 3, 3, 3})),
                                tape.leaf(Tensor({1})), 1, 0),
                    ShapeError);
  }

  TEST_CASE("d mean(x) / dx for length 4") {
    Tape tape;
    const Var x = tape.leaf(Tensor::from({1.0, -2.0, 3.0, 4.0}), true);
    const Gradients g = tape.backward(tape.mean(x));
    CHECK(g[x] == Tensor::from({0.25, 0.25, 0.25, 0.25}));
  }

  TEST_CASE("relu gradient is zero in the flat region and at the kink") {
    Tape tape;
    const Var x = tape.leaf(Tensor::from({-1.0, 0.0, 2.0}), true);
    const Gradients g = tape.backward(tape.sum(tape.relu(x)));
    CHECK(g[x] == Tensor::from({0.0, 0.0, 1.0}));
  }

  TEST_CASE("backward requires a scalar output and leaves the tape unchanged") {
    Tape tape;
    const Var x = tape.leaf(Tensor::from({1.0, 2.0}), true);
    const Var y = tape.scale(x, 2.0);
    CHECK_THROWS_AS(tape.backward(y), ShapeError);
    const Var s = tape.sum(y);
    const std::size_t n = tape.size();
    const Tensor before = tape.value(y);
    (void)tape.backward(s);
    (void)tape.backward(s);
    CHECK(tape.size() == n);
    CHECK(tape.value(y) == before);
  }

  TEST_CASE("grad_check: sum of squares at [1, 2, 3]") {
    const auto r = grad_check([](Tape& t, Var x) { return t.sum(t.mul(x, x)); }, Tensor::from({1.0, 2.0, 3.0}),
                              kStep);
    CHECK(r.max_rel_error < 1e-6);
  }

  TEST_CASE("grad_check: constant function has zero error") {
    const auto r = grad_check([](Tape& t, Var) { return t.leaf(Tensor::scalar(4.2)); },
                              Tensor::from({1.0, 2.0, 3.0}), kStep);
    CHECK(r.max_rel_error == 0.0);
  }

  TEST_CASE("grad_check rejects non-finite values") {
    CHECK_THROWS_AS(grad_check([](const Tensor&) { return std::nan(""); },
                               [](const Tensor& x) { return Tensor(x.shape()); }, Tensor::from({1.0}), kStep),
                    Error);
  }

  TEST_CASE("every primitive matches central finite differences") {
    Rng rng(11);
    using Builder = std::function<Var(Tape&, Var, Rng&)>;
    struct Case {
      const char* name;
      Shape shape;
      Builder build;
    };
    const Tensor cw = random_tensor({4, 2, 3, 3}, rng);
    const Tensor cb = random_tensor({4}, rng);
    const Tensor lw = random_tensor({3, 6}, rng);
    const Tensor lb = random_tensor({3}, rng);
    const Tensor other = random_tensor({2, 6}, rng);
    const std::vector<Case> cases{
        {"conv2d", {2, 2, 7, 6}, [&](Tape& t, Var x, Rng&) { return t.conv2d(x, t.leaf(cw), t.leaf(cb), 2, 1); }},
        {"conv2d weight", {4, 2, 3, 3},
         [&](Tape& t, Var w, Rng& r) {
           return t.conv2d(t.leaf(random_tensor({1, 2, 6, 6}, r)), w, t.leaf(cb), 1, 0);
         }},
        {"linear", {2, 6}, [&](Tape& t, Var x, Rng&) { return t.linear(x, t.leaf(lw), t.leaf(lb)); }},
        {"linear weight", {3, 6}, [&](Tape& t, Var w, Rng&) { return t.linear(t.leaf(other), w, t.leaf(lb)); }},
        {"relu", {2, 6}, [](Tape& t, Var x, Rng&) { return t.relu(x); }},
        {"sigmoid", {2, 6}, [](Tape& t, Var x, Rng&) { return t.sigmoid(x); }},
        {"abs", {2, 6}, [](Tape& t, Var x, Rng&) { return t.abs(x); }},
        {"add", {2, 6}, [&](Tape& t, Var x, Rng&) { return t.add(x, t.leaf(other)); }},
        {"sub", {2, 6}, [&](Tape& t, Var x, Rng&) { return t.sub(t.leaf(other), x); }},
        {"mul", {2, 6}, [&](Tape& t, Var x, Rng&) { return t.mul(x, t.mul(x, t.leaf(other))); }},
        {"scale", {2, 6}, [](Tape& t, Var x, Rng&) { return t.scale(x, -1.7); }},
        {"mean", {2, 6}, [](Tape& t, Var x, Rng&) { return t.mean(t.mul(x, x)); }},
        {"min_const", {2, 6}, [](Tape& t, Var x, Rng&) { return t.min_const(x, 0.0); }},
        {"max_const", {2, 6}, [](Tape& t, Var x, Rng&) { return t.max_const(x, 0.0); }},
        {"concat", {2, 6},
         [&](Tape& t, Var x, Rng&) {
           const std::array<Var, 3> parts{x, t.leaf(other), x};
           return t.concat(parts, 1);
         }},
        {"slice", {2, 6}, [](Tape& t, Var x, Rng&) { return t.slice(x, 1, 1, 4); }},
        {"reshape", {2, 6}, [](Tape& t, Var x, Rng&) { return t.reshape(x, {3, 4}); }},
        {"resize_bilinear", {2, 5, 4}, [](Tape& t, Var x, Rng&) { return t.resize_bilinear(x, 7, 9); }},
        {"crop", {3, 6, 5},
         [](Tape& t, Var x, Rng&) { return t.crop(x, CropWindow{-1.3, 0.7, 6.2, 4.1}, 5, 5); }},
    };
    for (const Case& c : cases) {
      CAPTURE(c.name);
      const Tensor x = off_zero(random_tensor(c.shape, rng));
      const std::uint64_t wseed = derive_seed(17, std::hash<std::string>{}(c.name));
      auto f = [&](Tape& t, Var v) {
        Rng r(wseed);
        return contract(t, c.build(t, v, r), r);
      };
      CHECK(grad_check(f, x, kStep).max_rel_error < kPrimitiveTol);
    }
  }

  TEST_CASE("backward is linear in the output") {
    Rng rng(5);
    const Tensor x0 = off_zero(random_tensor({2, 6}, rng));
    const Tensor w = random_tensor({3, 6}, rng);
    auto grad_of = [&](double a, double b) {
      Tape t;
      const Var x = t.leaf(x0, true);
      const Var f = t.sum(t.sigmoid(t.linear(x, t.leaf(w), t.leaf(Tensor({3}, 0.1)))));
      const Var g = t.mean(t.abs(t.mul(x, x)));
      return t.backward(t.add(t.scale(f, a), t.scale(g, b)))[x];
    };
    const Tensor gf = grad_of(1.0, 0.0), gg = grad_of(0.0, 1.0), gc = grad_of(2.5, -0.75);
    for (std::size_t i = 0; i < gc.size(); ++i) CHECK(gc[i] == doctest::Approx(2.5 * gf[i] - 0.75 * gg[i]));
  }

  TEST_CASE("forward is bitwise deterministic") {
    Rng rng(9);
    const Tensor x = random_tensor({2, 3, 12, 12}, rng);
    const Tensor w = random_tensor({5, 3, 3, 3}, rng);
    auto run = [&] {
      Tape t;
      const Var y = t.relu(t.conv2d(t.leaf(x), t.leaf(w), t.leaf(Tensor({5}, 0.01)), 2, 1));
      return t.value(t.resize_bilinear(t.reshape(t.slice(y, 0, 0, 1), {5, 6, 6}), 9, 9));
    };
    CHECK(run() == run());
  }

  TEST_CASE("branch signature changes only across a kink") {
    auto sig = [](double v) {
      Tape t;
      t.relu(t.leaf(Tensor::from({v, 1.0})));
      return t.branch_signature();
    };
    CHECK(sig(0.3) == sig(0.7));
    CHECK(sig(0.3) != sig(-0.3));
  }
}
