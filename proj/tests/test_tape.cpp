#include <doctest.h>

#include "trajflow/tape.hpp"
#include "trajflow/errors.hpp"

#include <vector>

using namespace trajflow;

TEST_CASE("tape evaluates eagerly and replays bit-exactly") {
  Tape t;
  Var x = t.leaf("x", Array({2}, {3.0, -1.0}));
  Var y = t.leaf("y", Array({2}, {2.0, 5.0}));
  Var z = t.mul(t.add(x, y), y);
  CHECK(t.value(z).vec() == std::vector<double>{10.0, 20.0});
  CHECK(t.replay_matches());
}

TEST_CASE("backward on a simple chain matches hand math") {
  // f = mean((x + y) * y) over 2 elements
  // df/dx_i = y_i / 2, df/dy_i = (x_i + 2 y_i) / 2
  Tape t;
  Var x = t.leaf("x", Array({2}, {3.0, -1.0}));
  Var y = t.leaf("y", Array({2}, {2.0, 5.0}));
  Var f = t.mean(t.mul(t.add(x, y), y));
  GradMap g = t.backward(f);
  CHECK(g.at("x")[0] == doctest::Approx(1.0));
  CHECK(g.at("x")[1] == doctest::Approx(2.5));
  CHECK(g.at("y")[0] == doctest::Approx((3.0 + 4.0) / 2));
  CHECK(g.at("y")[1] == doctest::Approx((-1.0 + 10.0) / 2));
}

TEST_CASE("value feeding several consumers sums adjoints") {
  // f = sum(x * x) + sum(x) => df/dx = 2x + 1
  Tape t;
  Var x = t.leaf("x", Array({3}, {1.0, -2.0, 0.5}));
  Var f = t.add(t.sum(t.mul(x, x)), t.sum(x));
  GradMap g = t.backward(f);
  CHECK(g.at("x")[0] == doctest::Approx(3.0));
  CHECK(g.at("x")[1] == doctest::Approx(-3.0));
  CHECK(g.at("x")[2] == doctest::Approx(2.0));
}

TEST_CASE("every leaf appears in the gradient map, unused ones as zeros") {
  Tape t;
  Var x = t.leaf("x", Array({2}, {1.0, 2.0}));
  Var unused = t.leaf("unused", Array({3}, {1.0, 1.0, 1.0}));
  (void)unused;
  GradMap g = t.backward(t.sum(x));
  REQUIRE(g.count("unused") == 1);
  CHECK(g.at("unused").vec() == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("backward twice is an error") {
  Tape t;
  Var x = t.leaf("x", Array({2}, {1.0, 2.0}));
  Var f = t.sum(x);
  t.backward(f);
  CHECK_THROWS_AS(t.backward(f), UsageError);
}

TEST_CASE("scalar-seeded backward requires a scalar output") {
  Tape t;
  Var x = t.leaf("x", Array({2}, {1.0, 2.0}));
  Var y = t.scale(x, 2.0);
  CHECK_THROWS_AS(t.backward(y), UsageError);
}

TEST_CASE("seeded backward propagates an arbitrary adjoint") {
  Tape t;
  Var x = t.leaf("x", Array({2}, {1.0, 2.0}));
  Var y = t.scale(x, 3.0);
  GradMap g = t.backward(y, Array({2}, {1.0, 10.0}));
  CHECK(g.at("x").vec() == std::vector<double>{3.0, 30.0});
}

TEST_CASE("seed shape must match the output") {
  Tape t;
  Var x = t.leaf("x", Array({2}, {1.0, 2.0}));
  CHECK_THROWS_AS(t.backward(x, Array({3})), ShapeError);
}

TEST_CASE("duplicate leaf names are rejected") {
  Tape t;
  t.leaf("x", Array({1}, {1.0}));
  CHECK_THROWS_AS(t.leaf("x", Array({1}, {2.0})), UsageError);
}

TEST_CASE("constants collect no gradient") {
  Tape t;
  Var x = t.leaf("x", Array({2}, {1.0, 2.0}));
  Var c = t.constant(Array({2}, {5.0, 5.0}));
  GradMap g = t.backward(t.sum(t.mul(x, c)));
  CHECK(g.size() == 1);
  CHECK(g.at("x").vec() == std::vector<double>{5.0, 5.0});
}

TEST_CASE("foreign vars are rejected") {
  Tape t1, t2;
  Var x = t1.leaf("x", Array({1}, {1.0}));
  (void)x;
  Var bogus{42};
  CHECK_THROWS_AS(t2.value(bogus), UsageError);
}
