#pragma once

// The three-level hierarchical attention network (words -> sentences ->
// headline+body), its neural baselines, training, headline pre-training,
// evaluation and checkpoints.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "han3/data.hpp"
#include "han3/layers.hpp"
#include "han3/tensor.hpp"

namespace han3 {

enum class Architecture { ThreeHan, Han, GruFlat, GruAveFlat, GloveAve };
enum class Composition { Attention, Average, Max };

/// Accepts 3han, han, gru_flat, gru_ave_flat, glove_ave and the pooled
/// variants 3han_ave, 3han_max, han_ave, han_max. A pooled variant also sets
/// `composition`.
Architecture parse_architecture(std::string_view name, Composition* composition = nullptr);
std::string architecture_name(Architecture architecture);
Composition parse_composition(std::string_view name);
std::string composition_name(Composition composition);

struct ModelConfig {
  std::size_t embed_dim = 100;
  std::size_t gru_hidden = 50;
  std::size_t att_dim = 100;
  std::size_t flat_gru_hidden = 300;
  std::size_t max_words_per_sentence = 32;
  std::size_t max_sentences = 21;
  std::size_t max_headline_words = 32;
  Composition composition = Composition::Attention;
  Architecture architecture = Architecture::ThreeHan;
  /// Restrict every sequence to its unpadded length. Off by default, so PAD
  /// positions take part in attention.
  bool mask_padding = false;
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;

  void validate() const;
  EncodeLimits limits() const;
  bool hierarchical() const {
    return architecture == Architecture::ThreeHan || architecture == Architecture::Han;
  }

  /// Flat `key=value` view, stable key order; parse_entry is its inverse.
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Returns false for an unknown key; throws ConfigError for a bad value.
  bool parse_entry(const std::string& key, const std::string& value);
};

/// Attention weights of one forward pass. For HAN the headline is row 0 of
/// word_weights and headline_weights is empty. Families are empty where the
/// composition is max pooling.
struct AttentionTrace {
  std::vector<std::vector<double>> word_weights;
  std::vector<double> sentence_weights;
  /// k headline positions followed by the body-vector position.
  std::vector<double> headline_weights;
};

struct Encoded {
  Var vector;
  std::vector<double> weights;
};

struct ForwardPass {
  Var probability;
  AttentionTrace trace;
};

struct Prediction {
  double probability = 0.5;
  AttentionTrace trace;
};

class Model {
 public:
  Model(const ModelConfig& config, std::size_t vocab_size);

  const ModelConfig& config() const { return config_; }
  std::size_t vocab_size() const { return embedding.vocab_size(); }

  /// Word encoder + word composition over one sentence's ids.
  Encoded encode_sentence(Tape& tape, std::span<const TokenId> ids);
  /// Sentence encoder + sentence composition; yields the body vector.
  Encoded encode_body(Tape& tape, std::span<const Var> sentence_vectors);
  /// Headline encoder over (y_1..y_k, v_b) + headline composition; yields
  /// the news vector.
  Encoded encode_headline(Tape& tape, std::span<const TokenId> headline_ids, Var body_vector);

  ForwardPass forward(Tape& tape, const EncodedArticle& article);
  /// Inference without gradient bookkeeping.
  Prediction predict(const EncodedArticle& article);

  /// All parameters in a fixed order (checkpoint order).
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  Parameter* find(std::string_view name);
  std::size_t parameter_count() const;

  /// Sets every parameter value (embeddings included) to `value`.
  void fill(double value);
  /// Replaces the embedding table (e.g. one built by load_embeddings).
  void set_embedding(const EmbeddingTable& table);

  EmbeddingTable embedding;
  std::optional<GruCell> word_fwd, word_bwd;
  std::optional<AttentionLayer> word_att;
  std::optional<GruCell> sent_fwd, sent_bwd;
  std::optional<AttentionLayer> sent_att;
  std::optional<GruCell> head_fwd, head_bwd;
  std::optional<AttentionLayer> head_att;
  std::optional<GruCell> flat_gru;
  Classifier classifier;

 private:
  Encoded compose(Tape& tape, AttentionLayer* layer, std::span<const Var> annotations);
  std::span<const TokenId> headline_span(const EncodedArticle& article) const;
  std::vector<std::span<const TokenId>> sentence_spans(const EncodedArticle& article) const;
  Var flat_feature(Tape& tape, const EncodedArticle& article);

  ModelConfig config_;
};

/// Headline-only auxiliary network used for supervised pre-training of the
/// word level: embedding, word biGRU, word composition and its own classifier.
class HeadlineModel {
 public:
  HeadlineModel(const ModelConfig& config, std::size_t vocab_size);

  const ModelConfig& config() const { return config_; }
  ForwardPass forward(Tape& tape, const EncodedArticle& article);
  Prediction predict(const EncodedArticle& article);
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  Parameter* find(std::string_view name);
  void set_embedding(const EmbeddingTable& table);

  EmbeddingTable embedding;
  GruCell word_fwd, word_bwd;
  std::optional<AttentionLayer> word_att;
  Classifier classifier;

 private:
  ModelConfig config_;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;  // NaN without a validation set
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  /// `epoch,train_loss,train_acc,val_acc` header plus one row per epoch.
  std::string to_csv() const;
};

using ForwardFn = std::function<Var(Tape&, const EncodedArticle&)>;
using EpochHook = std::function<void(const EpochRecord&)>;

/// Mini-batch SGD over `params` minimising mean BCE of `forward`. Batches
/// follow a shuffle fixed by (seed, epoch).
TrainHistory fit(std::span<Parameter* const> params, const ForwardFn& forward,
                 std::span<const EncodedArticle> train_set,
                 std::span<const EncodedArticle> val_set, const ModelConfig& config,
                 const EpochHook& on_epoch = {});

TrainHistory train(Model& model, std::span<const EncodedArticle> train_set,
                   std::span<const EncodedArticle> val_set, const EpochHook& on_epoch = {});

/// Trains the headline-only network; starts from `initial` when given.
HeadlineModel pretrain_headline(std::span<const EncodedArticle> train_set,
                                const ModelConfig& config, std::size_t vocab_size,
                                const EmbeddingTable* initial_embedding = nullptr,
                                TrainHistory* history = nullptr);

/// Copies embedding, word GRUs and word attention into `model`.
void transfer_word_level(const HeadlineModel& source, Model& model);
/// Same, from named parameter blocks (a headline checkpoint).
void transfer_word_level(std::span<const Parameter> source, Model& model);

/// Fraction of articles where (probability >= 0.5) == (label == fake).
double evaluate(Model& model, std::span<const EncodedArticle> dataset);
double evaluate(HeadlineModel& model, std::span<const EncodedArticle> dataset);
inline int predicted_label(double probability) { return probability >= 0.5 ? kFake : kGenuine; }

// ---- checkpoints --------------------------------------------------------

inline constexpr char kCheckpointMagic[4] = {'3', 'H', 'A', 'N'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string kind;  // "model" or "headline"
  ModelConfig config;
  std::size_t vocab_size = 0;
  std::vector<Parameter> parameters;
  std::vector<std::size_t> offsets;  // byte offset of each parameter block

  const Parameter* find(std::string_view name) const;
};

/// Binary layout: magic "3HAN", version byte, u32-length config text
/// (key=value lines), u32 block count, then per block: u32 name length, name,
/// u32 rank, u64 extents, little-endian f64 values.
std::string serialize_checkpoint(const std::string& kind, const ModelConfig& config,
                                 std::size_t vocab_size,
                                 std::span<const Parameter* const> parameters);
Checkpoint parse_checkpoint(std::string_view bytes);
Checkpoint read_checkpoint(const std::string& path);

void save_checkpoint(const Model& model, const std::string& path);
void save_checkpoint(const HeadlineModel& model, const std::string& path);
Model load_checkpoint(const std::string& path);
Model model_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace han3
