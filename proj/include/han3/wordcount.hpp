#pragma once

// Word-count baselines: bag-of-words / bag-of-ngrams featurizers with
// optional TF-IDF weighting, binomial logistic regression and the majority
// heuristic.

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "han3/data.hpp"

namespace han3 {

enum class FeatureMode { Bow, BowTfidf, Ngram, NgramTfidf };

FeatureMode parse_feature_mode(std::string_view name);
std::string feature_mode_name(FeatureMode mode);

struct FeatureLimits {
  std::size_t max_features = 50000;
  std::size_t n_max = 5;
};

/// Sorted (index, value) pairs.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

/// Headline tokens followed by every body token.
std::vector<std::string> article_tokens(const TokenizedArticle& article);

class CountFeaturizer {
 public:
  static CountFeaturizer fit(std::span<const std::vector<std::string>> corpus, FeatureMode mode,
                             const FeatureLimits& limits = {});

  SparseVector featurize(std::span<const std::string> document) const;

  FeatureMode mode() const { return mode_; }
  std::size_t size() const { return features_.size(); }
  std::size_t corpus_size() const { return corpus_size_; }
  const std::vector<std::string>& features() const { return features_; }
  std::size_t document_frequency(std::size_t index) const { return df_.at(index); }
  /// -1 when absent.
  long index_of(const std::string& feature) const;

  /// `feature<TAB>index<TAB>df` per line.
  std::string serialize() const;

 private:
  std::vector<std::string> terms(std::span<const std::string> document) const;
  bool tfidf() const { return mode_ == FeatureMode::BowTfidf || mode_ == FeatureMode::NgramTfidf; }

  FeatureMode mode_ = FeatureMode::Bow;
  std::size_t n_max_ = 1;
  std::size_t corpus_size_ = 0;
  std::vector<std::string> features_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LogisticConfig {
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  double predict(const SparseVector& x) const;
};

/// BCE-trained with the shared SGD-with-momentum optimizer.
LogisticModel train_logreg(std::span<const SparseVector> features, std::span<const int> labels,
                           std::size_t n_features, const LogisticConfig& config);
double accuracy(const LogisticModel& model, std::span<const SparseVector> features,
                std::span<const int> labels);

/// Constant predictor of the modal training label; ties go to fake.
struct MajorityBaseline {
  int label = kFake;

  static MajorityBaseline fit(std::span<const int> train_labels);
  double accuracy(std::span<const int> test_labels) const;
};

}  // namespace han3
