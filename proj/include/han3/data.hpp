#pragma once

// Text-to-id pipeline: tokenization, vocabulary, padding/truncation,
// pretrained embedding loading, dataset splitting and a synthetic corpus
// generator, plus the on-disk formats for each.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "han3/layers.hpp"

namespace han3 {

inline constexpr int kFake = 1;
inline constexpr int kGenuine = 0;

struct RawArticle {
  std::string headline;
  std::string body;
  int label = kGenuine;
  std::string source_id;
};

using Sentence = std::vector<std::string>;

/// Lowercases, keeps [a-z0-9] runs and the marks . , ! ? ' " ; : as their own
/// tokens, drops every other character. Sentences end at . ! ? followed by
/// whitespace or end of text.
std::vector<Sentence> tokenize(std::string_view text);
/// Every token of `text` in order, ignoring sentence boundaries.
std::vector<std::string> tokenize_flat(std::string_view text);

struct TokenizedArticle {
  std::vector<std::string> headline;
  std::vector<Sentence> body;
  int label = kGenuine;
};

TokenizedArticle tokenize_article(const RawArticle& article);

class Vocabulary {
 public:
  static constexpr std::size_t kMinFrequency = 6;
  static constexpr std::size_t kUnkFrequency = 5;

  Vocabulary();

  /// Tokens with frequency > 5 get ids 2.. in descending frequency then
  /// lexicographic order; exactly-5 tokens are counted into UNK.
  static Vocabulary build(std::span<const TokenizedArticle> corpus);

  std::size_t size() const { return tokens_.size(); }
  TokenId id(std::string_view token) const;  // UNK when absent
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t frequency(TokenId id) const { return frequencies_.at(id); }

  /// `token<TAB>id<TAB>frequency` per line.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  void append(std::string token, std::size_t frequency);

  std::vector<std::string> tokens_;
  std::vector<std::size_t> frequencies_;
  std::unordered_map<std::string, TokenId> index_;
};

struct EncodeLimits {
  std::size_t max_words_per_sentence = 32;
  std::size_t max_sentences = 21;
  std::size_t max_headline_words = 32;
};

struct EncodedArticle {
  std::vector<TokenId> headline_ids;  // [max_headline_words]
  std::vector<TokenId> sentence_ids;  // [max_sentences × max_words_per_sentence]
  std::size_t headline_len = 0;
  std::vector<std::size_t> sentence_lens;  // [max_sentences]
  std::size_t n_sentences = 0;
  int label = kGenuine;
  EncodeLimits limits;

  std::span<const TokenId> sentence(std::size_t i) const;
};

/// Pads/truncates to the limits. Returns nullopt (skip) when the headline or
/// the body has no tokens.
std::optional<EncodedArticle> encode(const TokenizedArticle& article,
                                     const Vocabulary& vocab,
                                     const EncodeLimits& limits);
std::optional<EncodedArticle> encode(const RawArticle& article,
                                     const Vocabulary& vocab,
                                     const EncodeLimits& limits);

/// Reads `token v1 ... v_dim` rows. Vocabulary tokens missing from the file
/// (and UNK) draw uniform(-0.25, 0.25); the PAD row is zero.
EmbeddingTable load_embeddings(const Vocabulary& vocab, const std::string& path,
                               std::size_t dim, std::uint64_t seed);
/// Writes every non-PAD row in the format load_embeddings reads.
void save_embeddings(const EmbeddingTable& table, const Vocabulary& vocab,
                     const std::string& path);

struct SplitRatios {
  double train = 0.2;
  double val = 0.1;
  double test = 0.7;
};

template <typename T>
struct Split {
  std::vector<T> train, val, test;
};

/// Label-stratified seeded split. Throws ConfigError when a part would be
/// empty or the ratios do not sum to 1.
Split<RawArticle> split_dataset(std::span<const RawArticle> articles,
                                const SplitRatios& ratios, std::uint64_t seed);
/// Index form of split_dataset over an arbitrary label sequence.
Split<std::size_t> split_indices(std::span<const int> labels,
                                 const SplitRatios& ratios, std::uint64_t seed);

/// Parameters of the synthetic two-class corpus.
///
/// Every article has a topic drawn uniformly from `topics`; body tokens come
/// from the topic's words with probability `topic_rate`, from the article's
/// class words with probability `class_signal`, else from shared filler.
/// Headlines draw topic words for their own topic, which equals the body
/// topic except for a fraction `phi` of fake articles, whose headline topic
/// contradicts the body. `headline_cue` mixes class words into headlines.
struct SynthSpec {
  std::size_t per_class = 100;
  std::size_t shared_vocab = 60;
  std::size_t class_vocab = 30;
  std::size_t topics = 2;
  std::size_t topic_vocab = 12;
  double topic_rate = 0.4;
  double class_signal = 0.0;
  double headline_cue = 0.0;
  double phi = 0.0;
  std::size_t min_sentences = 2, max_sentences = 4;
  std::size_t min_words = 4, max_words = 8;
  std::size_t min_headline_words = 3, max_headline_words = 6;

  void validate() const;
};

std::vector<RawArticle> synth_corpus(const SynthSpec& spec, std::uint64_t seed);

// ---- file formats -------------------------------------------------------

/// One JSON object per line: {"headline", "body", "label"} with label 0/1 or
/// "genuine"/"fake". With `require_label` off a missing label reads as
/// genuine.
std::vector<RawArticle> read_corpus(const std::string& path, bool require_label = true);
std::vector<RawArticle> parse_corpus(std::istream& in, bool require_label = true);
void write_corpus(const std::string& path, std::span<const RawArticle> articles);
std::string corpus_line(const RawArticle& article);

struct EncodedDataset {
  std::size_t vocab_size = 0;
  EncodeLimits limits;
  std::vector<EncodedArticle> articles;
};

/// Header line with vocab size and limits, then one article per line.
void write_encoded(const std::string& path, const EncodedDataset& dataset);
EncodedDataset read_encoded(const std::string& path);

/// Writes `content` to a sibling temp file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace han3
