#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "actgraph/rng.hpp"
#include "actgraph/tape.hpp"

using namespace actgraph::num;
using actgraph::Rng;

TEST_CASE("tensor shape handling") {
  Tensor m{{1, 2}, {3, 4}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m.at(1, 0) == 3);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), std::invalid_argument);
  CHECK(Tensor::scalar(5.0).scalar_value() == 5.0);
  CHECK(Tensor::identity(3).at(2, 2) == 1.0);
}

TEST_CASE("matmul examples") {
  Tape tape;
  SUBCASE("A * I = A") {
    Var a = tape.constant(Tensor{{1, 2}, {3, 4}});
    Var i = tape.constant(Tensor::identity(2));
    CHECK(tape.value(tape.matmul(a, i)) == Tensor{{1, 2}, {3, 4}});
  }
  SUBCASE("hand product") {
    Var a = tape.constant(Tensor{{1, 2}, {3, 4}});
    Var b = tape.constant(Tensor{{1}, {1}});
    CHECK(tape.value(tape.matmul(a, b)) == Tensor{{3}, {7}});
  }
  SUBCASE("zero times anything is zero") {
    Var z = tape.constant(Tensor::zeros(2, 3));
    Var b = tape.constant(Tensor{{1, 2}, {3, 4}, {5, 6}});
    CHECK(tape.value(tape.matmul(z, b)) == Tensor::zeros(2, 2));
  }
  SUBCASE("inner dimension mismatch") {
    Var a = tape.constant(Tensor::zeros(2, 3));
    Var b = tape.constant(Tensor::zeros(2, 2));
    CHECK_THROWS_AS(tape.matmul(a, b), std::invalid_argument);
  }
}

TEST_CASE("sigmoid and softmax basics") {
  Tape tape;
  Var x = tape.constant(Tensor::scalar(0.0));
  CHECK(tape.value(tape.sigmoid(x)).scalar_value() == doctest::Approx(0.5).epsilon(1e-15));

  Var row = tape.constant(Tensor{{2.5, 2.5, 2.5, 2.5}});
  const Tensor sm = tape.value(tape.softmax_rows(row));
  for (int j = 0; j < 4; ++j) CHECK(sm.at(0, j) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("softmax rows sum to one and shift-invariance holds") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + rng.uniform_int(4), m = 1 + rng.uniform_int(6);
    Tensor x({n, m});
    for (int i = 0; i < n * m; ++i) x.at(i) = rng.uniform(-40.0, 40.0);
    Tape tape;
    const Tensor p = tape.value(tape.softmax_rows(tape.constant(x)));
    Tensor shifted = x;
    const double c = rng.uniform(-100.0, 100.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) shifted.at(i, j) += c;
    }
    const Tensor p_shift = tape.value(tape.softmax_rows(tape.constant(shifted)));
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < m; ++j) sum += p.at(i, j);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(max_abs_diff(p, p_shift) < 1e-12);
  }
}

TEST_CASE("l2 distance 3-4-5 triangle") {
  Tape tape;
  Var u = tape.constant(Tensor({2}, {0, 3}));
  Var v = tape.constant(Tensor({2}, {4, 0}));
  CHECK(tape.value(tape.l2_distance(u, v)).scalar_value() == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("backward through sum gives all-ones gradient") {
  Tape tape;
  Var w = tape.leaf(Tensor{{1, -2}, {3, 0.5}});
  Var loss = tape.sum(w);
  tape.backward(loss);
  CHECK(tape.grad(w) == Tensor{{1, 1}, {1, 1}});
}

TEST_CASE("sigmoid gradient at zero is a quarter") {
  Tape tape;
  Var w = tape.leaf(Tensor::scalar(0.0));
  Var loss = tape.sigmoid(w);
  tape.backward(loss);
  CHECK(tape.grad(w).scalar_value() == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("backward requires a scalar loss") {
  Tape tape;
  Var w = tape.leaf(Tensor{{1, 2}});
  CHECK_THROWS_AS(tape.backward(w), std::invalid_argument);
}

TEST_CASE("colwise max takes the lowest row on ties") {
  Tape tape;
  Var x = tape.leaf(Tensor{{5, 1}, {5, 3}, {2, 3}});
  Var m = tape.colwise_max(x);
  CHECK(tape.value(m) == Tensor{{5, 3}});
  tape.backward(tape.sum(m));
  // column 0 ties rows 0/1 -> row 0; column 1 ties rows 1/2 -> row 1
  CHECK(tape.grad(x) == Tensor{{1, 0}, {0, 1}, {0, 0}});
}

TEST_CASE("bce is nonnegative and vanishes only toward saturation") {
  Tape tape;
  Tensor targets{{1, 0}};
  Var mild = tape.constant(Tensor{{2.0, -2.0}});
  Var sharp = tape.constant(Tensor{{30.0, -30.0}});
  const double mild_loss = tape.value(tape.bce_with_logits(mild, targets)).scalar_value();
  const double sharp_loss = tape.value(tape.bce_with_logits(sharp, targets)).scalar_value();
  CHECK(mild_loss > 0.0);
  CHECK(sharp_loss > 0.0);
  CHECK(sharp_loss < mild_loss);
  CHECK(sharp_loss < 1e-12);
  // extreme logits stay finite thanks to the log-sum-exp form
  Var extreme = tape.constant(Tensor{{800.0, -800.0}});
  CHECK(std::isfinite(tape.value(tape.bce_with_logits(extreme, targets)).scalar_value()));
}

TEST_CASE("dropout is the identity when not training") {
  Tape tape;
  Tensor x{{1, 2, 3, 4, 5, 6}};
  Var v = tape.constant(x);
  CHECK(tape.value(tape.dropout(v, 0.3, 99, false)) == x);
  CHECK_THROWS_AS(tape.dropout(v, 1.0, 99, true), std::invalid_argument);
}

TEST_CASE("inverted dropout preserves the expected value") {
  const int n = 4000;
  Tensor x({1, n});
  for (int i = 0; i < n; ++i) x.at(i) = 1.0;
  Tape tape;
  Var v = tape.constant(x);
  const Tensor dropped = tape.value(tape.dropout(v, 0.3, 1234, true));
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += dropped.at(i);
  mean /= n;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
  // deterministic given the seed
  Tape tape2;
  const Tensor again = tape2.value(tape2.dropout(tape2.constant(x), 0.3, 1234, true));
  CHECK(max_abs_diff(dropped, again) == 0.0);
}

TEST_CASE("concat and gather shape behavior") {
  Tape tape;
  Var a = tape.constant(Tensor{{1, 2}, {3, 4}});
  Var b = tape.constant(Tensor{{5}, {6}});
  CHECK(tape.value(tape.concat_last(a, b)) == Tensor{{1, 2, 5}, {3, 4, 6}});
  CHECK(tape.value(tape.gather_rows(a, {1, 0, 1})) == Tensor{{3, 4}, {1, 2}, {3, 4}});
  CHECK(tape.value(tape.concat_rows({a, b.valid() ? a : a})) ==
        Tensor{{1, 2}, {3, 4}, {1, 2}, {3, 4}});
  CHECK_THROWS_AS(tape.gather_rows(a, {2}), std::invalid_argument);
}

TEST_CASE("drop_diagonal and embed_off_diagonal are inverse layouts") {
  Tape tape;
  Var x = tape.constant(Tensor{{0, 1, 2}, {3, 0, 5}, {6, 7, 0}});
  Var dropped = tape.drop_diagonal(x);
  CHECK(tape.value(dropped) == Tensor{{1, 2}, {3, 5}, {6, 7}});
  CHECK(tape.value(tape.embed_off_diagonal(dropped)) ==
        Tensor{{0, 1, 2}, {3, 0, 5}, {6, 7, 0}});
}
