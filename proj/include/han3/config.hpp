#pragma once

#include <string>
#include <utility>
#include <vector>

#include "han3/data.hpp"
#include "han3/model.hpp"
#include "han3/wordcount.hpp"

namespace han3 {

/// Everything a command needs. Resolved from built-in defaults, then a flat
/// `key = value` file, then command-line overrides.
struct RunConfig {
  ModelConfig model;
  SplitRatios split;
  SynthSpec synth;
  FeatureMode feature_mode = FeatureMode::Bow;
  FeatureLimits features;
  std::size_t logreg_epochs = 20;

  std::string corpus;
  std::string data_dir = "prepared";
  std::string vocab;  // defaults to <data_dir>/vocab.tsv
  std::string embeddings;
  std::string checkpoint = "model.3han";
  std::string init_from;
  std::string initial_checkpoint;
  std::string history = "history.csv";
  std::string dataset;
  std::string input;
  std::string output;  // synth corpus or explain page
  std::size_t top_sentences = 5;
  std::size_t words_shown = 8;

  /// Returns false for an unknown key; ConfigError for a bad value.
  bool set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> entries() const;
  static std::vector<std::string> keys();

  /// Applies `key = value` lines; '#' starts a comment. Unknown keys are
  /// rejected with the offending line number.
  void apply_file(const std::string& path);
  void apply_text(const std::string& text, const std::string& origin);

  void validate() const;
  std::string vocab_path() const;
  std::string split_path(const std::string& part) const;
};

}  // namespace han3
