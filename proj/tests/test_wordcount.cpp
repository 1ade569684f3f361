#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "han3/errors.hpp"
#include "han3/wordcount.hpp"

using namespace han3;

namespace {

using Doc = std::vector<std::string>;

Doc words(const std::string& text) { return tokenize_flat(text); }

std::set<std::string> feature_set(const CountFeaturizer& f) {
  return {f.features().begin(), f.features().end()};
}

}  // namespace

TEST_CASE("fit_featurizer examples") {
  std::vector<Doc> aab{words("a a b")};
  CHECK(feature_set(CountFeaturizer::fit(aab, FeatureMode::Bow, {10, 5})) == std::set<std::string>{"a", "b"});
  std::vector<Doc> abc{words("a b c")};
  CHECK(feature_set(CountFeaturizer::fit(abc, FeatureMode::Ngram, {100, 2})) ==
        std::set<std::string>{"a", "b", "c", "a b", "b c"});
  auto one = CountFeaturizer::fit(aab, FeatureMode::Bow, {1, 5});
  CHECK(one.features() == std::vector<std::string>{"a"});
  CHECK_THROWS_AS(CountFeaturizer::fit(std::span<const Doc>{}, FeatureMode::Bow), ContractError);
}

TEST_CASE("features are ordered by frequency then lexicographically") {
  std::vector<Doc> corpus{words("c b b a a"), words("d")};
  auto f = CountFeaturizer::fit(corpus, FeatureMode::Bow);
  CHECK(f.features() == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(f.index_of("b") == 1);
  CHECK(f.index_of("zzz") == -1);
  CHECK(f.serialize() == "a\t0\t1\nb\t1\t1\nc\t2\t1\nd\t3\t1\n");
  auto again = CountFeaturizer::fit(corpus, FeatureMode::Bow);
  CHECK(again.features() == f.features());
}

TEST_CASE("ngram orders go up to n_max") {
  std::vector<Doc> corpus{words("a b c d e f")};
  auto f = CountFeaturizer::fit(corpus, FeatureMode::Ngram);
  CHECK(f.index_of("a b c d e") >= 0);
  CHECK(f.index_of("b c d e f") >= 0);
  CHECK(f.index_of("a b c d e f") == -1);
  CHECK(f.size() == 6 + 5 + 4 + 3 + 2);
}

TEST_CASE("featurize examples") {
  std::vector<Doc> corpus{words("a a b")};
  auto f = CountFeaturizer::fit(corpus, FeatureMode::Bow);
  CHECK(f.featurize(words("a a b")) == SparseVector{{0, 2.0}, {1, 1.0}});
  CHECK(f.featurize(words("x y")).empty());
  auto tf = CountFeaturizer::fit(corpus, FeatureMode::BowTfidf);
  for (auto& [idx, v] : tf.featurize(words("a a b"))) CHECK(v == 0.0);
}

TEST_CASE("tfidf matches a hand computation") {
  std::vector<Doc> corpus{words("a a b"), words("a c"), words("c c c")};
  auto f = CountFeaturizer::fit(corpus, FeatureMode::BowTfidf);
  // N = 3; df(a) = 2, df(c) = 2, df(b) = 1
  auto x = f.featurize(words("a b b c"));
  auto value = [&](const std::string& t) {
    for (auto& [i, v] : x)
      if (static_cast<long>(i) == f.index_of(t)) return v;
    return -1.0;
  };
  CHECK(value("a") == doctest::Approx(1 * std::log(4.0 / 3.0)).epsilon(1e-15));
  CHECK(value("b") == doctest::Approx(2 * std::log(4.0 / 2.0)).epsilon(1e-15));
  CHECK(value("c") == doctest::Approx(1 * std::log(4.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("tfidf is the count vector scaled by a constant when every feature is everywhere") {
  std::vector<Doc> corpus{words("a b"), words("b a a"), words("a b b b")};
  auto counts = CountFeaturizer::fit(corpus, FeatureMode::Bow);
  auto tfidf = CountFeaturizer::fit(corpus, FeatureMode::BowTfidf);
  const double idf = std::log(4.0 / 4.0);
  auto c = counts.featurize(corpus[2]);
  auto t = tfidf.featurize(corpus[2]);
  REQUIRE(c.size() == t.size());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(t[i].second == c[i].second * idf);
}

TEST_CASE("bag modes ignore token order") {
  std::mt19937_64 rng(3);
  std::vector<Doc> corpus{words("the cat sat on the mat while the dog barked")};
  for (auto mode : {FeatureMode::Bow, FeatureMode::BowTfidf}) {
    auto f = CountFeaturizer::fit(corpus, mode);
    auto doc = corpus[0];
    auto base = f.featurize(doc);
    for (int i = 0; i < 10; ++i) {
      std::shuffle(doc.begin(), doc.end(), rng);
      CHECK(f.featurize(doc) == base);
    }
  }
}

TEST_CASE("feature mode names round trip") {
  for (auto m : {FeatureMode::Bow, FeatureMode::BowTfidf, FeatureMode::Ngram, FeatureMode::NgramTfidf}) {
    CHECK(parse_feature_mode(feature_mode_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_feature_mode("svm"), ConfigError);
}

TEST_CASE("logistic regression separates a toy set") {
  std::vector<SparseVector> x{{{0, 1.0}}, {{0, 2.0}}, {{1, 1.0}}, {{1, 3.0}}, {{0, 1.5}}, {{1, 0.5}}};
  std::vector<int> y{1, 1, 0, 0, 1, 0};
  LogisticConfig cfg;
  cfg.lr = 0.5;
  cfg.batch_size = 2;
  cfg.epochs = 50;
  auto model = train_logreg(x, y, 2, cfg);
  CHECK(accuracy(model, x, y) == 1.0);
  for (auto& xi : x) {
    const double q = model.predict(xi);
    CHECK((q > 0 && q < 1));
  }
}

TEST_CASE("logistic regression without features predicts a constant") {
  std::vector<SparseVector> x(6);
  std::vector<int> y{1, 1, 1, 0, 0, 1};
  auto model = train_logreg(x, y, 3, {});
  const double q = model.predict({});
  CHECK(q == 1.0 / (1.0 + std::exp(-model.bias)));
  for (auto& xi : x) CHECK(model.predict(xi) == q);
  CHECK_THROWS_AS(train_logreg(std::span<const SparseVector>{}, std::span<const int>{}, 3, {}), ContractError);
  std::vector<int> short_y{1};
  CHECK_THROWS_AS(train_logreg(x, short_y, 3, {}), DimensionError);
}

TEST_CASE("logistic regression with lr = 0 stays at zero") {
  std::vector<SparseVector> x{{{0, 1.0}}, {{1, 1.0}}};
  std::vector<int> y{1, 0};
  LogisticConfig cfg;
  cfg.lr = 0;
  auto model = train_logreg(x, y, 2, cfg);
  CHECK(model.weights == std::vector<double>{0, 0});
  CHECK(model.bias == 0);
  // every prediction is exactly 0.5, which the tie rule calls fake
  CHECK(accuracy(model, x, y) == 0.5);
}

TEST_CASE("majority baseline") {
  std::vector<int> sixty{1, 1, 1, 0, 0};
  CHECK(MajorityBaseline::fit(sixty).label == kFake);
  std::vector<int> tie{1, 0};
  CHECK(MajorityBaseline::fit(tie).label == kFake);
  std::vector<int> mostly_genuine{0, 0, 1};
  CHECK(MajorityBaseline::fit(mostly_genuine).label == kGenuine);

  // a test split with 49.42% fake, predictor = genuine
  std::vector<int> test(10000, kGenuine);
  std::fill(test.begin(), test.begin() + 4942, kFake);
  MajorityBaseline genuine{kGenuine};
  CHECK(genuine.accuracy(test) == doctest::Approx(0.5058).epsilon(1e-12));
  CHECK_THROWS_AS(MajorityBaseline::fit(std::span<const int>{}), ContractError);
}

TEST_CASE("article_tokens joins headline and body") {
  auto t = tokenize_article({"Big news", "It happened. Really!", kFake, ""});
  CHECK(article_tokens(t) == std::vector<std::string>{"big", "news", "it", "happened", ".", "really", "!"});
}
