#include "han3/wordcount.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include "han3/errors.hpp"
#include "han3/tensor.hpp"

namespace han3 {

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "bow") return FeatureMode::Bow;
  if (name == "bow_tfidf") return FeatureMode::BowTfidf;
  if (name == "ngram") return FeatureMode::Ngram;
  if (name == "ngram_tfidf") return FeatureMode::NgramTfidf;
  throw ConfigError("unknown feature mode '" + std::string(name) + "'");
}

std::string feature_mode_name(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::Bow: return "bow";
    case FeatureMode::BowTfidf: return "bow_tfidf";
    case FeatureMode::Ngram: return "ngram";
    case FeatureMode::NgramTfidf: return "ngram_tfidf";
  }
  return "?";
}

std::vector<std::string> article_tokens(const TokenizedArticle& article) {
  std::vector<std::string> out(article.headline);
  for (const auto& sentence : article.body) out.insert(out.end(), sentence.begin(), sentence.end());
  return out;
}

std::vector<std::string> CountFeaturizer::terms(std::span<const std::string> document) const {
  std::vector<std::string> out;
  const std::size_t n_max =
      (mode_ == FeatureMode::Ngram || mode_ == FeatureMode::NgramTfidf) ? n_max_ : 1;
  for (std::size_t n = 1; n <= n_max; ++n) {
    if (document.size() < n) break;
    for (std::size_t i = 0; i + n <= document.size(); ++i) {
      std::string gram = document[i];
      for (std::size_t k = 1; k < n; ++k) gram += " " + document[i + k];
      out.push_back(std::move(gram));
    }
  }
  return out;
}

CountFeaturizer CountFeaturizer::fit(std::span<const std::vector<std::string>> corpus,
                                     FeatureMode mode, const FeatureLimits& limits) {
  if (corpus.empty()) throw ContractError("fit_featurizer: empty corpus");
  if (limits.max_features == 0 || limits.n_max == 0) {
    throw ConfigError("max_features and n_max must be positive");
  }
  CountFeaturizer f;
  f.mode_ = mode;
  f.n_max_ = limits.n_max;
  f.corpus_size_ = corpus.size();
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;  // count, df
  for (const auto& doc : corpus) {
    std::unordered_set<std::string> seen;
    for (auto& term : f.terms(doc)) {
      auto& s = stats[term];
      ++s.first;
      if (seen.insert(term).second) ++s.second;
    }
  }
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(stats.begin(),
                                                                                   stats.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.first < b.first;
  });
  if (ranked.size() > limits.max_features) ranked.resize(limits.max_features);
  for (auto& [term, s] : ranked) {
    f.index_.emplace(term, f.features_.size());
    f.features_.push_back(term);
    f.df_.push_back(s.second);
  }
  return f;
}

long CountFeaturizer::index_of(const std::string& feature) const {
  auto it = index_.find(feature);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

SparseVector CountFeaturizer::featurize(std::span<const std::string> document) const {
  std::map<std::size_t, double> counts;
  for (const auto& term : terms(document)) {
    if (auto it = index_.find(term); it != index_.end()) counts[it->second] += 1.0;
  }
  SparseVector out(counts.begin(), counts.end());
  if (tfidf()) {
    const double n = static_cast<double>(corpus_size_);
    for (auto& [idx, value] : out) {
      value *= std::log((1.0 + n) / (1.0 + static_cast<double>(df_[idx])));
    }
  }
  return out;
}

std::string CountFeaturizer::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    out += features_[i] + "\t" + std::to_string(i) + "\t" + std::to_string(df_[i]) + "\n";
  }
  return out;
}

// ---- logistic regression --------------------------------------------------

double LogisticModel::predict(const SparseVector& x) const {
  double z = bias;
  for (const auto& [idx, v] : x) z += weights.at(idx) * v;
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

LogisticModel train_logreg(std::span<const SparseVector> features, std::span<const int> labels,
                           std::size_t n_features, const LogisticConfig& config) {
  if (features.empty()) throw ContractError("train_logreg: empty data");
  if (features.size() != labels.size()) {
    throw DimensionError("train_logreg: " + std::to_string(features.size()) +
                         " feature vectors for " + std::to_string(labels.size()) + " labels");
  }
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  for (const auto& x : features)
    for (const auto& [idx, v] : x)
      if (idx >= n_features) throw DimensionError("train_logreg: feature index out of range");

  Parameter w("logreg.w", {n_features});
  Parameter b("logreg.b", {1});
  SgdMomentum optimizer({config.lr, config.momentum}, {&w, &b});
  LogisticModel model;
  std::vector<std::size_t> order(features.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed ^ (0x9E3779B97F4A7C15ULL * epoch));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      model.weights = w.value;
      model.bias = b.value[0];
      for (std::size_t k = start; k < end; ++k) {
        const auto& x = features[order[k]];
        // d(mean BCE)/dz = (q - p) / batch
        const double g = (model.predict(x) - labels[order[k]]) * inv;
        for (const auto& [idx, v] : x) w.grad[idx] += g * v;
        b.grad[0] += g;
      }
      optimizer.step();
    }
  }
  model.weights = w.value;
  model.bias = b.value[0];
  return model;
}

double accuracy(const LogisticModel& model, std::span<const SparseVector> features,
                std::span<const int> labels) {
  if (features.empty()) throw ContractError("accuracy: empty data");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const int predicted = model.predict(features[i]) >= 0.5 ? kFake : kGenuine;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.size());
}

MajorityBaseline MajorityBaseline::fit(std::span<const int> train_labels) {
  if (train_labels.empty()) throw ContractError("majority_baseline: no labels");
  const auto fake = std::count(train_labels.begin(), train_labels.end(), kFake);
  const auto genuine = static_cast<std::ptrdiff_t>(train_labels.size()) - fake;
  return {fake >= genuine ? kFake : kGenuine};
}

double MajorityBaseline::accuracy(std::span<const int> test_labels) const {
  if (test_labels.empty()) throw ContractError("majority_baseline: empty test set");
  const auto hits = std::count(test_labels.begin(), test_labels.end(), label);
  return static_cast<double>(hits) / static_cast<double>(test_labels.size());
}

}  // namespace han3
