#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "han3/errors.hpp"
#include "han3/layers.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace han3;

namespace {

std::vector<double> values(Var v) { return {v.value().begin(), v.value().end()}; }

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double b = 1.0) {
  std::uniform_real_distribution<double> u(-b, b);
  std::vector<double> out(n);
  for (auto& x : out) x = u(rng);
  return out;
}

void fill(std::vector<Parameter*> params, double v) {
  for (auto* p : params) std::fill(p->value.begin(), p->value.end(), v);
}

std::vector<Var> leaves(Tape& tape, const std::vector<std::vector<double>>& xs) {
  std::vector<Var> out;
  for (const auto& x : xs) out.push_back(tape.leaf({x.size()}, x));
  return out;
}

}  // namespace

TEST_CASE("gru_step examples") {
  GruCell cell("g", 3, 2);
  fill(cell.parameters(), 0.0);
  Tape tape;
  auto x = tape.constant({3}, {0.3, -2, 5});
  CHECK(values(gru_step(tape, cell, x, tape.constant({2}, {1, -1}))) == std::vector<double>{0.5, -0.5});
  CHECK(values(gru_step(tape, cell, x, tape.constant({2}, {0, 0}))) == std::vector<double>{0, 0});
  CHECK_THROWS_AS(gru_step(tape, cell, tape.constant({2}, {1, 1}), tape.constant({2}, {0, 0})),
                  DimensionError);
}

TEST_CASE("gru_step scalar recurrence") {
  GruCell cell("g", 1, 1);
  fill({&cell.W_z, &cell.W_r, &cell.W_h, &cell.U_z, &cell.U_r, &cell.U_h}, 1.0);
  fill({&cell.b_z, &cell.b_r, &cell.b_h}, 0.0);
  Tape tape;
  const double h = gru_step(tape, cell, tape.constant({1}, {1.0}), tape.constant({1}, {0.0})).item();
  // z = sigmoid(1), r = sigmoid(1), candidate = tanh(1 + 1 * (r * 0)), h = z * candidate
  const double z = 1.0 / (1.0 + std::exp(-1.0));
  const double cand = std::tanh(1.0);
  CHECK(std::abs(h - ((1 - z) * 0.0 + z * cand)) <= 1e-12);
}

TEST_CASE("gru_step matches oracle and stays between h_prev and candidate") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    GruCell cell("g", 3, 4);
    cell.init(rng);
    for (auto* p : {&cell.b_z, &cell.b_r, &cell.b_h}) p->value = uniform(rng, 4);
    auto x = uniform(rng, 3, 2.0), h = uniform(rng, 4);
    Tape tape;
    auto got = values(gru_step(tape, cell, tape.constant({3}, x), tape.constant({4}, h)));
    auto want = oracle::gru_step(cell, x, h);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(got[i] - want[i]) <= 1e-12);
      CHECK(got[i] >= std::min(h[i], -1.0) - 1e-12);
      CHECK(got[i] <= std::max(h[i], 1.0) + 1e-12);
    }
  }
}

TEST_CASE("bigru_run examples") {
  std::mt19937_64 rng(2);
  GruCell f("f", 2, 2), b("b", 2, 2);
  f.init(rng);
  b.init(rng);
  Tape tape;
  auto x = tape.constant({2}, {0.4, -0.7});
  auto zero = tape.constant({2}, {0, 0});
  std::vector<Var> seq{x};
  auto ann = bigru_run(tape, f, b, seq);
  REQUIRE(ann.size() == 1);
  auto want = values(gru_step(tape, f, x, zero));
  auto back = values(gru_step(tape, b, x, zero));
  want.insert(want.end(), back.begin(), back.end());
  CHECK(values(ann[0]) == want);
  CHECK_THROWS_AS(bigru_run(tape, f, b, std::span<const Var>{}), ContractError);
}

TEST_CASE("bigru_run palindrome symmetry with shared cell") {
  std::mt19937_64 rng(8);
  GruCell cell("c", 3, 2);
  cell.init(rng);
  Tape tape;
  auto x = uniform(rng, 3), y = uniform(rng, 3);
  auto seq = leaves(tape, {x, y, x});
  auto ann = bigru_run(tape, cell, cell, seq);
  for (std::size_t j = 0; j < 3; ++j) {
    auto a = values(ann[j]), b = values(ann[2 - j]);
    for (std::size_t k = 0; k < 2; ++k) CHECK(a[k] == b[2 + k]);
  }
}

TEST_CASE("bigru_run matches recurrence oracle") {
  std::mt19937_64 rng(31);
  GruCell f("f", 3, 2), b("b", 3, 2);
  f.init(rng);
  b.init(rng);
  std::vector<std::vector<double>> xs{uniform(rng, 3), uniform(rng, 3), uniform(rng, 3)};
  Tape tape;
  auto ann = bigru_run(tape, f, b, leaves(tape, xs));
  auto want = oracle::bigru(f, b, xs);
  REQUIRE(ann.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    auto got = values(ann[t]);
    REQUIRE(got.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(got[k] - want[t][k]) <= 1e-12);
  }
}

TEST_CASE("attention_pool examples") {
  std::mt19937_64 rng(1);
  AttentionLayer layer("a", 3, 3);
  layer.init(rng);
  Tape tape;
  auto h = uniform(rng, 3);
  std::vector<Var> one = leaves(tape, {h});
  auto p1 = attention_pool(tape, layer, one);
  CHECK(p1.weights == std::vector<double>{1.0});
  CHECK(values(p1.context) == h);
  std::vector<Var> two = leaves(tape, {h, h});
  auto p2 = attention_pool(tape, layer, two);
  CHECK(p2.weights == std::vector<double>{0.5, 0.5});
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(values(p2.context)[k] - h[k]) <= 1e-15);
  CHECK_THROWS_AS(attention_pool(tape, layer, std::span<const Var>{}), ContractError);
}

TEST_CASE("attention_pool matches straight-line oracle") {
  std::mt19937_64 rng(12);
  AttentionLayer layer("a", 4, 5);
  layer.init(rng);
  layer.b.value = uniform(rng, 5);
  std::vector<std::vector<double>> hs{uniform(rng, 4), uniform(rng, 4), uniform(rng, 4)};
  Tape tape;
  auto got = attention_pool(tape, layer, leaves(tape, hs));
  auto want = oracle::attention(layer, hs);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(got.weights[j] - want.weights[j]) <= 1e-12);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(values(got.context)[k] - want.context[k]) <= 1e-12);
}

TEST_CASE("attention weights are distributions, context in the hull, permutation equivariant") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    AttentionLayer layer("a", 4, 4);
    layer.init(rng);
    const std::size_t n = 1 + trial % 6;
    std::vector<std::vector<double>> hs;
    for (std::size_t j = 0; j < n; ++j) hs.push_back(uniform(rng, 4, 3.0));
    Tape tape;
    auto pooled = attention_pool(tape, layer, leaves(tape, hs));
    double total = 0;
    for (double w : pooled.weights) {
      CHECK(w > 0);
      CHECK(w <= 1);
      total += w;
    }
    CHECK(std::abs(total - 1) <= 1e-12);
    auto ctx = values(pooled.context);
    for (std::size_t k = 0; k < 4; ++k) {
      double lo = hs[0][k], hi = hs[0][k];
      for (auto& h : hs) lo = std::min(lo, h[k]), hi = std::max(hi, h[k]);
      CHECK(ctx[k] >= lo - 1e-12);
      CHECK(ctx[k] <= hi + 1e-12);
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < n; ++j) perm[j] = j;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> permuted;
    for (auto j : perm) permuted.push_back(hs[j]);
    auto other = attention_pool(tape, layer, leaves(tape, permuted));
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(other.weights[j] - pooled.weights[perm[j]]) <= 1e-12);
    }
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(values(other.context)[k] - ctx[k]) <= 1e-12);
  }
}

TEST_CASE("average and max pooling") {
  Tape tape;
  auto avg = average_pool(leaves(tape, {{1, 3}, {3, 5}}));
  CHECK(values(avg) == std::vector<double>{2, 4});
  auto mx = max_pool(leaves(tape, {{1, 5}, {3, 2}}));
  CHECK(values(mx) == std::vector<double>{3, 5});
  auto one = leaves(tape, {{0.25, -7}});
  CHECK(values(average_pool(one)) == std::vector<double>{0.25, -7});
  CHECK(values(max_pool(one)) == std::vector<double>{0.25, -7});
  CHECK_THROWS_AS(average_pool(std::span<const Var>{}), ContractError);
  CHECK_THROWS_AS(max_pool(std::span<const Var>{}), ContractError);
}

TEST_CASE("embed examples") {
  std::mt19937_64 rng(5);
  EmbeddingTable table("embedding", 6, 3);
  table.init(rng);
  Tape tape;
  const TokenId ids[] = {kPadId, 4};
  auto rows = embed(tape, table, ids);
  CHECK(values(rows[0]) == std::vector<double>{0, 0, 0});
  auto r4 = table.row(4);
  CHECK(values(rows[1]) == std::vector<double>(r4.begin(), r4.end()));
  for (double v : table.W_e.value) CHECK(std::abs(v) < 0.25);
  const TokenId bad[] = {6};
  CHECK_THROWS_AS(embed(tape, table, bad), ContractError);
}

TEST_CASE("an update touching only id 3 changes only row 3") {
  std::mt19937_64 rng(6);
  EmbeddingTable table("embedding", 6, 3);
  table.init(rng);
  const auto before = table.W_e.value;
  SgdMomentum opt({0.1, 0.9}, {&table.W_e});
  {
    Tape tape;
    const TokenId ids[] = {3, kPadId};
    auto rows = embed(tape, table, ids);
    tape.backward(sum(hadamard(add(rows[0], rows[1]), tape.constant({3}, {1, 2, 3}))));
  }
  opt.step();
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t k = 0; k < 3; ++k) {
      const bool changed = table.W_e.value[r * 3 + k] != before[r * 3 + k];
      CHECK(changed == (r == 3));
    }
  }
}

TEST_CASE("classify examples") {
  Classifier c("c", 3);
  Tape tape;
  CHECK(classify(tape, c, tape.constant({3}, {4, -2, 9})).item() == 0.5);
  Classifier one("c", 1);
  one.W_c.value = {1.0};
  CHECK(classify(tape, one, tape.constant({1}, {0})).item() == 0.5);
  one.b_c.value = {20.0};
  CHECK(classify(tape, one, tape.constant({1}, {0})).item() >= 1 - 1e-8);
  CHECK_THROWS_AS(classify(tape, c, tape.constant({2}, {1, 1})), DimensionError);
}

TEST_CASE("bce examples") {
  CHECK(bce_value(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce_value(0.5, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce_value(1.0 - 1e-15, 1) < 1e-11);
  CHECK(std::isfinite(bce_value(0.0, 1)));
  CHECK(std::isfinite(bce_value(1.0, 0)));
  Tape tape;
  CHECK(bce_loss(tape.constant({1}, {0.25}), 0).item() == doctest::Approx(-std::log(0.75)));
}

TEST_CASE("layer gradients match finite differences") {
  std::mt19937_64 rng(41);
  SUBCASE("gru step") {
    GruCell cell("g", 3, 2);
    cell.init(rng);
    for (auto* p : {&cell.b_z, &cell.b_r, &cell.b_h}) p->value = uniform(rng, 2);
    auto x = uniform(rng, 3), h = uniform(rng, 2), w = uniform(rng, 2);
    auto errs = testing::param_grad_check(cell.parameters(), [&](Tape& t) {
      return dot(gru_step(t, cell, t.constant({3}, x), t.constant({2}, h)), t.constant({2}, w));
    });
    for (auto& e : errs) CHECK_MESSAGE(e.error <= 1e-6, e.name);
    CHECK(testing::leaf_grad_check({{3}, {2}}, {x, h}, [&](Tape& t, const std::vector<Var>& v) {
            return dot(gru_step(t, cell, v[0], v[1]), t.constant({2}, w));
          }) <= 1e-6);
  }
  SUBCASE("bigru") {
    GruCell f("f", 2, 2), b("b", 2, 2);
    f.init(rng);
    b.init(rng);
    std::vector<std::vector<double>> xs{uniform(rng, 2), uniform(rng, 2), uniform(rng, 2)};
    auto w = uniform(rng, 4);
    auto params = f.parameters();
    for (auto* p : b.parameters()) params.push_back(p);
    auto errs = testing::param_grad_check(params, [&](Tape& t) {
      auto ann = bigru_run(t, f, b, leaves(t, xs));
      return dot(add(add(ann[0], ann[1]), ann[2]), t.constant({4}, w));
    });
    for (auto& e : errs) CHECK_MESSAGE(e.error <= 1e-6, e.name);
  }
  SUBCASE("attention") {
    AttentionLayer layer("a", 3, 4);
    layer.init(rng);
    layer.b.value = uniform(rng, 4);
    std::vector<std::vector<double>> hs{uniform(rng, 3), uniform(rng, 3), uniform(rng, 3)};
    auto w = uniform(rng, 3);
    auto errs = testing::param_grad_check(layer.parameters(), [&](Tape& t) {
      return dot(attention_pool(t, layer, leaves(t, hs)).context, t.constant({3}, w));
    });
    for (auto& e : errs) CHECK_MESSAGE(e.error <= 1e-6, e.name);
    CHECK(testing::leaf_grad_check({{3}, {3}, {3}}, hs, [&](Tape& t, const std::vector<Var>& v) {
            return dot(attention_pool(t, layer, v).context, t.constant({3}, w));
          }) <= 1e-6);
  }
  SUBCASE("pooling") {
    std::vector<std::vector<double>> hs{uniform(rng, 3), uniform(rng, 3)};
    auto w = uniform(rng, 3);
    CHECK(testing::leaf_grad_check({{3}, {3}}, hs, [&](Tape& t, const std::vector<Var>& v) {
            return dot(average_pool(v), t.constant({3}, w));
          }) <= 1e-6);
    CHECK(testing::leaf_grad_check({{3}, {3}}, hs, [&](Tape& t, const std::vector<Var>& v) {
            return dot(max_pool(v), t.constant({3}, w));
          }) <= 1e-6);
  }
  SUBCASE("embedding, classifier and loss") {
    EmbeddingTable table("embedding", 5, 3);
    table.init(rng);
    Classifier c("c", 3);
    c.W_c.value = uniform(rng, 3);
    c.b_c.value = {0.3};
    auto params = table.parameters();
    for (auto* p : c.parameters()) params.push_back(p);
    const TokenId ids[] = {2, 4, 2, kPadId};
    for (double label : {0.0, 1.0}) {
      auto errs = testing::param_grad_check(
          params,
          [&](Tape& t) {
            auto rows = embed(t, table, ids);
            return bce_loss(classify(t, c, average_pool(rows)), label);
          },
          1e-5, testing::skip_pad_row);
      for (auto& e : errs) CHECK_MESSAGE(e.error <= 1e-6, e.name);
    }
  }
}

TEST_CASE("initialisation ranges") {
  Rng rng(3);
  GruCell cell("g", 16, 4);
  cell.init(rng);
  for (double v : cell.W_z.value) CHECK(std::abs(v) < 1.0 / std::sqrt(16.0));
  for (double v : cell.U_h.value) CHECK(std::abs(v) < 1.0 / std::sqrt(4.0));
  for (double v : cell.b_r.value) CHECK(v == 0.0);
  AttentionLayer a("a", 8, 8);
  a.init(rng);
  for (double v : a.u.value) CHECK(std::abs(v) < 0.25);
  Rng r1(5), r2(5);
  GruCell c1("g", 3, 2), c2("g", 3, 2);
  c1.init(r1);
  c2.init(r2);
  CHECK(c1.W_h.value == c2.W_h.value);
}
