#include <cmath>
#include <random>

#include "doctest.h"
#include "han3/errors.hpp"
#include "han3/tensor.hpp"
#include "support.hpp"

using namespace han3;

namespace {

std::vector<double> values(Var v) { return {v.value().begin(), v.value().end()}; }

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = u(rng);
  return out;
}

// Projects an output onto a fixed random direction so any op yields a scalar.
Var project(Tape& tape, Var out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto w = tape.constant(out.shape(), random_values(rng, out.size()));
  return sum(hadamard(out, w));
}

}  // namespace

TEST_CASE("matmul examples and errors") {
  Tape tape;
  auto eye = tape.constant({2, 2}, {1, 0, 0, 1});
  auto m = tape.constant({2, 2}, {1, 2, 3, 4});
  CHECK(values(matmul(eye, m)) == std::vector<double>{1, 2, 3, 4});
  auto a = tape.constant({1, 2}, {1, 2});
  auto b = tape.constant({2, 1}, {3, 4});
  auto c = matmul(a, b);
  CHECK(c.shape() == Shape{1, 1});
  CHECK(c.item() == 11.0);
  try {
    matmul(a, a);
    FAIL("expected a dimension error");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[1x2]") != std::string::npos);
  }
}

TEST_CASE("matmul gradient matches finite differences") {
  std::mt19937_64 rng(11);
  const double err = testing::leaf_grad_check(
      {{3, 4}, {4, 2}}, {random_values(rng, 12), random_values(rng, 8)},
      [](Tape& t, const std::vector<Var>& x) { return project(t, matmul(x[0], x[1]), 5); });
  CHECK(err <= 1e-6);
}

TEST_CASE("elementwise examples") {
  Tape tape;
  auto a = tape.constant({2}, {1, 2});
  CHECK(values(hadamard(a, tape.constant({2}, {3, 4}))) == std::vector<double>{3, 8});
  CHECK(values(add(a, tape.constant({2}, {0, 0}))) == std::vector<double>{1, 2});
  CHECK(values(scale(tape.constant({2}, {1, -1}), 0.5)) == std::vector<double>{0.5, -0.5});
  CHECK(values(sub(a, a)) == std::vector<double>{0, 0});
  CHECK(values(elementwise(ElementwiseOp::Add, a, a)) == std::vector<double>{2, 4});
  CHECK_THROWS_AS(add(a, tape.constant({3}, {1, 2, 3})), DimensionError);
}

TEST_CASE("activation examples") {
  Tape tape;
  auto x = tape.leaf({1}, {0.0});
  auto s = sigmoid(x);
  CHECK(s.item() == 0.5);
  CHECK(tanh(tape.constant({1}, {0.0})).item() == 0.0);
  tape.backward(s);
  CHECK(x.grad()[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(activation(Activation::Tanh, tape.constant({1}, {1.0})).item() == doctest::Approx(std::tanh(1.0)));
}

TEST_CASE("softmax examples") {
  Tape tape;
  CHECK(values(softmax(tape.constant({1}, {0.0}))) == std::vector<double>{1.0});
  for (double v : values(softmax(tape.constant({3}, {1, 1, 1})))) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK_THROWS_AS(softmax(tape.constant({0}, {})), DimensionError);
}

TEST_CASE("softmax is shift invariant and normalised") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    Tape tape;
    const std::size_t n = 1 + trial % 9;
    auto v = random_values(rng, n);
    for (auto& x : v) x *= 10;
    const double shift = c(rng);
    auto shifted = v;
    for (auto& x : shifted) x += shift;
    auto p = values(softmax(tape.constant({n}, v)));
    auto q = values(softmax(tape.constant({n}, shifted)));
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(p[i] - q[i]) <= 1e-12);
      CHECK(p[i] > 0);
      total += p[i];
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("softmax stays finite for large logits") {
  Tape tape;
  auto p = values(softmax(tape.constant({2}, {1000.0, -1000.0})));
  CHECK(p[0] == 1.0);
  CHECK(std::isfinite(p[1]));
}

TEST_CASE("concat examples") {
  Tape tape;
  CHECK(values(concat(tape.constant({1}, {1}), tape.constant({2}, {2, 3}))) ==
        std::vector<double>{1, 2, 3});
  CHECK(values(concat(tape.constant({2}, {4, 5}), tape.constant({0}, {}))) ==
        std::vector<double>{4, 5});
  CHECK_THROWS_AS(concat(tape.constant({2, 1}, {1, 2}), tape.constant({1}, {1})), DimensionError);
}

TEST_CASE("single-op gradients match finite differences") {
  std::mt19937_64 rng(21);
  auto check = [&](std::vector<Shape> shapes, const testing::LeafFn& f) {
    std::vector<std::vector<double>> vals;
    for (auto& s : shapes) vals.push_back(random_values(rng, element_count(s)));
    return testing::leaf_grad_check(shapes, vals, f);
  };
  using V = const std::vector<Var>&;
  CHECK(check({{4}, {3}}, [](Tape& t, V x) { return project(t, concat(x[0], x[1]), 1); }) <= 1e-6);
  CHECK(check({{3, 2}, {2}}, [](Tape& t, V x) { return project(t, matvec(x[0], x[1]), 2); }) <= 1e-6);
  CHECK(check({{3, 2}}, [](Tape& t, V x) { return project(t, transpose(x[0]), 3); }) <= 1e-6);
  CHECK(check({{6}}, [](Tape& t, V x) { return project(t, reshape(x[0], {2, 3}), 4); }) <= 1e-6);
  CHECK(check({{5}, {5}}, [](Tape& t, V x) { return project(t, add(x[0], x[1]), 5); }) <= 1e-6);
  CHECK(check({{5}, {5}}, [](Tape& t, V x) { return project(t, sub(x[0], x[1]), 6); }) <= 1e-6);
  CHECK(check({{5}, {5}}, [](Tape& t, V x) { return project(t, hadamard(x[0], x[1]), 7); }) <= 1e-6);
  CHECK(check({{5}}, [](Tape& t, V x) { return project(t, scale(x[0], -1.7), 8); }) <= 1e-6);
  CHECK(check({{5}}, [](Tape& t, V x) { return project(t, sigmoid(x[0]), 9); }) <= 1e-6);
  CHECK(check({{5}}, [](Tape& t, V x) { return project(t, tanh(x[0]), 10); }) <= 1e-6);
  CHECK(check({{5}}, [](Tape& t, V x) { return project(t, softmax(x[0]), 11); }) <= 1e-6);
  CHECK(check({{4}, {4}}, [](Tape&, V x) { return dot(x[0], x[1]); }) <= 1e-6);
  CHECK(check({{4}}, [](Tape&, V x) { return sum(x[0]); }) <= 1e-6);
  CHECK(check({{3}, {3}}, [](Tape& t, V x) { return project(t, stack({x[0], x[1], x[0]}), 12); }) <= 1e-6);
  CHECK(check({{3, 4}}, [](Tape& t, V x) { return project(t, row(x[0], 1), 13); }) <= 1e-6);
  CHECK(check({{3, 4}}, [](Tape& t, V x) { return project(t, mean_rows(x[0]), 14); }) <= 1e-6);
  CHECK(check({{3, 4}}, [](Tape& t, V x) { return project(t, max_rows(x[0]), 15); }) <= 1e-6);
}

TEST_CASE("backward examples") {
  Tape tape;
  auto a = tape.leaf({2}, {1, 2});
  auto unused = tape.leaf({2}, {5, 5});
  tape.backward(sum(hadamard(a, a)));
  CHECK(values(a) == std::vector<double>{1, 2});
  CHECK(std::vector<double>(a.grad().begin(), a.grad().end()) == std::vector<double>{2, 4});
  for (double g : unused.grad()) CHECK(g == 0.0);
  Tape t2;
  auto v = t2.leaf({2}, {1, 2});
  CHECK_THROWS_AS(t2.backward(v), ContractError);
}

TEST_CASE("gradients accumulate across consumers") {
  Tape tape;
  auto x = tape.leaf({1}, {3.0});
  tape.backward(sum(add(scale(x, 2.0), hadamard(x, x))));
  CHECK(x.grad()[0] == doctest::Approx(2.0 + 6.0));
}

TEST_CASE("parameters collect gradient across tapes") {
  Parameter p("p", {2});
  p.value = {1, 2};
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    tape.backward(sum(tape.param(p)));
  }
  CHECK(p.grad == std::vector<double>{2, 2});
  Tape tape;
  CHECK(tape.param(p).id() == tape.param(p).id());
}

TEST_CASE("identical passes are bit-identical") {
  auto run = [] {
    std::mt19937_64 rng(4);
    Tape tape;
    auto a = tape.leaf({3, 3}, random_values(rng, 9));
    auto x = tape.leaf({3}, random_values(rng, 3));
    auto loss = sum(tanh(matvec(a, softmax(x))));
    tape.backward(loss);
    auto out = values(loss);
    out.insert(out.end(), a.grad().begin(), a.grad().end());
    out.insert(out.end(), x.grad().begin(), x.grad().end());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("gather_row routes gradient to one row and respects frozen rows") {
  Parameter table("table", {3, 2});
  table.value = {0, 0, 1, 2, 3, 4};
  Tape tape;
  const std::size_t frozen[] = {0};
  auto r1 = gather_row(tape, table, 1, frozen);
  auto r0 = gather_row(tape, table, 0, frozen);
  CHECK(values(r1) == std::vector<double>{1, 2});
  tape.backward(sum(add(r1, r0)));
  CHECK(table.grad == std::vector<double>{0, 0, 1, 1, 0, 0});
  CHECK_THROWS_AS(gather_row(tape, table, 3), ContractError);
}

TEST_CASE("no-grad tape computes the same values") {
  std::mt19937_64 rng(9);
  auto a = random_values(rng, 6);
  Tape on, off(false);
  auto y1 = values(softmax(matvec(on.leaf({2, 3}, a), on.constant({3}, {1, 2, 3}))));
  auto y2 = values(softmax(matvec(off.leaf({2, 3}, a), off.constant({3}, {1, 2, 3}))));
  CHECK(y1 == y2);
}

TEST_CASE("sgd examples") {
  Parameter p("p", {1});
  p.value = {1.0};
  SgdMomentum plain({0.01, 0.0}, {&p});
  p.grad = {0.5};
  plain.step();
  CHECK(p.value[0] == doctest::Approx(0.995).epsilon(1e-15));
  CHECK(p.grad[0] == 0.0);

  Parameter q("q", {1});
  q.value = {1.0};
  SgdMomentum momentum({0.01, 0.9}, {&q});
  q.grad = {0.5};
  momentum.step();
  q.grad = {0.5};
  momentum.step();
  CHECK(q.value[0] == doctest::Approx(0.9855).epsilon(1e-14));
  CHECK(momentum.velocity(q)[0] == doctest::Approx(0.95));

  Parameter r("r", {3});
  r.value = {1, -2, 3};
  SgdMomentum still({0.01, 0.9}, {&r});
  for (int i = 0; i < 5; ++i) still.step();
  CHECK(r.value == std::vector<double>{1, -2, 3});
}

TEST_CASE("sgd with zero momentum is plain gradient descent") {
  std::mt19937_64 rng(5);
  Parameter p("p", {4});
  p.value = random_values(rng, 4);
  auto expected = p.value;
  SgdMomentum opt({0.1, 0.0}, {&p});
  for (int step = 0; step < 3; ++step) {
    auto g = random_values(rng, 4);
    p.grad = g;
    for (std::size_t i = 0; i < 4; ++i) expected[i] = expected[i] - 0.1 * g[i];
    opt.step();
    CHECK(p.value == expected);
  }
}

TEST_CASE("sgd rejects invalid hyperparameters") {
  CHECK_THROWS_AS(SgdMomentum({-0.1, 0.9}), ConfigError);
  CHECK_THROWS_AS(SgdMomentum({0.1, 1.0}), ConfigError);
}
