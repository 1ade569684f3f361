#pragma once

// Subcommands of the han3 tool. Each takes a resolved RunConfig, writes its
// result to `out`, progress to `log`, and throws on failure.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "han3/config.hpp"
#include "han3/data.hpp"

namespace han3 {

/// One row of the per-class corpus summary.
struct ClassStats {
  std::string type;
  std::size_t sites = 0;
  std::size_t articles = 0;
  double average_words = 0.0;      // body words per sentence
  double average_sentences = 0.0;  // body sentences per article
};

/// Fake row then genuine row, counted on untruncated tokenized bodies.
std::vector<ClassStats> corpus_stats(std::span<const RawArticle> corpus);
std::string stats_table(std::span<const ClassStats> rows);

void cmd_prepare(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_pretrain(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_explain(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_wordcount(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Articles for evaluate/predict: an encoded dataset file is used as is; a
/// raw corpus file is tokenized and encoded with the vocabulary at
/// config.vocab_path(). Labels of unlabelled raw lines default to genuine.
EncodedDataset load_articles(const std::string& path, const RunConfig& config,
                             const EncodeLimits& limits);

}  // namespace han3
