#include <doctest.h>

#include "trajflow/optim.hpp"
#include "trajflow/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace trajflow;

namespace {

ParamSet one_param(const std::string& name, std::vector<double> v) {
  ParamSet ps;
  const std::size_t n = v.size();
  ps.add(name, Array({n}, std::move(v)));
  return ps;
}

}  // namespace

TEST_CASE("zero betas and zero eps degenerate to sign descent") {
  ParamSet ps = one_param("p", {1.0, -1.0, 0.5, 2.0});
  AdamState st = AdamState::init(ps);
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.eps = 0.0;
  GradMap g;
  g.emplace("p", Array({4}, {2.5, -0.3, 0.0, 1e-9}));
  adam_step(ps, g, st, cfg);
  const Array& p = ps.at("p");
  CHECK(p[0] == doctest::Approx(1.0 - 0.1));
  CHECK(p[1] == doctest::Approx(-1.0 + 0.1));
  CHECK(p[2] == doctest::Approx(0.5));  // zero gradient: no movement
  CHECK(p[3] == doctest::Approx(2.0 - 0.1));
}

TEST_CASE("ten steps on a quadratic match an independent implementation") {
  // Minimize f(x) = x^2 from x = 1 with default hyperparameters.
  ParamSet ps = one_param("x", {1.0});
  AdamState st = AdamState::init(ps);
  AdamConfig cfg;  // defaults

  double x = 1.0, m = 0.0, v = 0.0;
  for (int step = 1; step <= 10; ++step) {
    GradMap g;
    g.emplace("x", Array({1}, {2.0 * ps.at("x")[0]}));
    adam_step(ps, g, st, cfg);

    const double gr = 2.0 * x;
    m = 0.9 * m + 0.1 * gr;
    v = 0.999 * v + 0.001 * gr * gr;
    const double mhat = m / (1.0 - std::pow(0.9, step));
    const double vhat = v / (1.0 - std::pow(0.999, step));
    x -= 1e-3 * mhat / (std::sqrt(vhat) + 1e-8);

    CHECK(ps.at("x")[0] == doctest::Approx(x).epsilon(1e-14));
  }
  CHECK(st.step == 10);
  CHECK(ps.at("x")[0] < 1.0);
}

TEST_CASE("non-finite gradients abort with the parameter named") {
  ParamSet ps = one_param("weights", {1.0});
  AdamState st = AdamState::init(ps);
  GradMap g;
  g.emplace("weights", Array({1}, {std::numeric_limits<double>::quiet_NaN()}));
  try {
    adam_step(ps, g, st, AdamConfig{});
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(std::string(e.what()).find("weights") != std::string::npos);
  }
}

TEST_CASE("gradient shape mismatch is a shape error") {
  ParamSet ps = one_param("p", {1.0, 2.0});
  AdamState st = AdamState::init(ps);
  GradMap g;
  g.emplace("p", Array({3}));
  CHECK_THROWS_AS(adam_step(ps, g, st, AdamConfig{}), ShapeError);
}

TEST_CASE("parameters without gradients keep their values") {
  ParamSet ps;
  ps.add("a", Array({1}, {1.0}));
  ps.add("b", Array({1}, {2.0}));
  AdamState st = AdamState::init(ps);
  GradMap g;
  g.emplace("a", Array({1}, {1.0}));
  adam_step(ps, g, st, AdamConfig{});
  CHECK(ps.at("b")[0] == 2.0);
  CHECK(ps.at("a")[0] < 1.0);
}

TEST_CASE("state init mirrors parameter shapes with zeros") {
  ParamSet ps;
  ps.add("w", Array({2, 3}));
  ps.add("b", Array({3}));
  AdamState st = AdamState::init(ps);
  CHECK(st.m.size() == 2);
  CHECK(st.v.size() == 2);
  CHECK(st.m.at("w").same_shape(ps.at("w")));
  CHECK(st.v.at("b").same_shape(ps.at("b")));
  CHECK(st.step == 0);
}
