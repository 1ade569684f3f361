#include "han3/model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

#include "han3/errors.hpp"

namespace han3 {

// ---- names ----------------------------------------------------------------

Architecture parse_architecture(std::string_view name, Composition* composition) {
  auto set = [&](Composition c) {
    if (composition) *composition = c;
  };
  if (name == "3han") return Architecture::ThreeHan;
  if (name == "3han_ave") return set(Composition::Average), Architecture::ThreeHan;
  if (name == "3han_max") return set(Composition::Max), Architecture::ThreeHan;
  if (name == "han") return Architecture::Han;
  if (name == "han_ave") return set(Composition::Average), Architecture::Han;
  if (name == "han_max") return set(Composition::Max), Architecture::Han;
  if (name == "gru_flat") return Architecture::GruFlat;
  if (name == "gru_ave_flat") return Architecture::GruAveFlat;
  if (name == "glove_ave") return Architecture::GloveAve;
  throw ConfigError("unknown architecture '" + std::string(name) + "'");
}

std::string architecture_name(Architecture architecture) {
  switch (architecture) {
    case Architecture::ThreeHan: return "3han";
    case Architecture::Han: return "han";
    case Architecture::GruFlat: return "gru_flat";
    case Architecture::GruAveFlat: return "gru_ave_flat";
    case Architecture::GloveAve: return "glove_ave";
  }
  return "?";
}

Composition parse_composition(std::string_view name) {
  if (name == "attention") return Composition::Attention;
  if (name == "average") return Composition::Average;
  if (name == "max") return Composition::Max;
  throw ConfigError("unknown composition '" + std::string(name) + "'");
}

std::string composition_name(Composition composition) {
  switch (composition) {
    case Composition::Attention: return "attention";
    case Composition::Average: return "average";
    case Composition::Max: return "max";
  }
  return "?";
}

// ---- ModelConfig ----------------------------------------------------------

void ModelConfig::validate() const {
  for (auto [value, name] :
       {std::pair{embed_dim, "embed_dim"}, {gru_hidden, "gru_hidden"}, {att_dim, "att_dim"},
        {flat_gru_hidden, "flat_gru_hidden"},
        {max_words_per_sentence, "max_words_per_sentence"},
        {max_sentences, "max_sentences"}, {max_headline_words, "max_headline_words"},
        {batch_size, "batch_size"}}) {
    if (value == 0) throw ConfigError(std::string(name) + " must be positive");
  }
  if (embed_dim != 2 * gru_hidden) {
    throw ConfigError("embed_dim (" + std::to_string(embed_dim) +
                      ") must equal 2 * gru_hidden (" + std::to_string(2 * gru_hidden) +
                      ") so the body vector can join the headline sequence");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
}

EncodeLimits ModelConfig::limits() const {
  return {max_words_per_sentence, max_sentences, max_headline_words};
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T out{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("bad value '" + text + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("bad boolean '" + text + "' for " + key);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ModelConfig::entries() const {
  return {
      {"architecture", architecture_name(architecture)},
      {"composition", composition_name(composition)},
      {"embed_dim", std::to_string(embed_dim)},
      {"gru_hidden", std::to_string(gru_hidden)},
      {"att_dim", std::to_string(att_dim)},
      {"flat_gru_hidden", std::to_string(flat_gru_hidden)},
      {"max_words_per_sentence", std::to_string(max_words_per_sentence)},
      {"max_sentences", std::to_string(max_sentences)},
      {"max_headline_words", std::to_string(max_headline_words)},
      {"mask_padding", mask_padding ? "true" : "false"},
      {"lr", format_double(lr)},
      {"momentum", format_double(momentum)},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"seed", std::to_string(seed)},
  };
}

bool ModelConfig::parse_entry(const std::string& key, const std::string& value) {
  using Size = std::size_t;
  if (key == "architecture") {
    architecture = parse_architecture(value, &composition);
  } else if (key == "composition") {
    composition = parse_composition(value);
  } else if (key == "embed_dim") {
    embed_dim = parse_number<Size>(key, value);
  } else if (key == "gru_hidden") {
    gru_hidden = parse_number<Size>(key, value);
  } else if (key == "att_dim") {
    att_dim = parse_number<Size>(key, value);
  } else if (key == "flat_gru_hidden") {
    flat_gru_hidden = parse_number<Size>(key, value);
  } else if (key == "max_words_per_sentence") {
    max_words_per_sentence = parse_number<Size>(key, value);
  } else if (key == "max_sentences") {
    max_sentences = parse_number<Size>(key, value);
  } else if (key == "max_headline_words") {
    max_headline_words = parse_number<Size>(key, value);
  } else if (key == "mask_padding") {
    mask_padding = parse_bool(key, value);
  } else if (key == "lr") {
    lr = parse_number<double>(key, value);
  } else if (key == "momentum") {
    momentum = parse_number<double>(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_number<Size>(key, value);
  } else if (key == "epochs") {
    epochs = parse_number<Size>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else {
    return false;
  }
  return true;
}

// ---- Model ----------------------------------------------------------------

Model::Model(const ModelConfig& config, std::size_t vocab_size)
    : embedding("embedding", vocab_size, config.embed_dim), config_(config) {
  config_.validate();
  const std::size_t h = config_.gru_hidden, ann = 2 * h;
  const bool attention = config_.composition == Composition::Attention;
  Rng rng(config_.seed);
  embedding.init(rng);
  if (config_.hierarchical()) {
    word_fwd.emplace("word_fwd", config_.embed_dim, h);
    word_bwd.emplace("word_bwd", config_.embed_dim, h);
    word_fwd->init(rng);
    word_bwd->init(rng);
    if (attention) word_att.emplace("word_att", ann, config_.att_dim).init(rng);
    sent_fwd.emplace("sent_fwd", ann, h);
    sent_bwd.emplace("sent_bwd", ann, h);
    sent_fwd->init(rng);
    sent_bwd->init(rng);
    if (attention) sent_att.emplace("sent_att", ann, config_.att_dim).init(rng);
    if (config_.architecture == Architecture::ThreeHan) {
      head_fwd.emplace("head_fwd", config_.embed_dim, h);
      head_bwd.emplace("head_bwd", config_.embed_dim, h);
      head_fwd->init(rng);
      head_bwd->init(rng);
      if (attention) head_att.emplace("head_att", ann, config_.att_dim).init(rng);
    }
    classifier = Classifier("classifier", ann);
  } else if (config_.architecture == Architecture::GloveAve) {
    classifier = Classifier("classifier", config_.embed_dim);
  } else {
    flat_gru.emplace("flat_gru", config_.embed_dim, config_.flat_gru_hidden);
    flat_gru->init(rng);
    classifier = Classifier("classifier", config_.flat_gru_hidden);
  }
  classifier.init(rng);
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out{&embedding.W_e};
  auto cell = [&](std::optional<GruCell>& c) {
    if (c) for (auto* p : c->parameters()) out.push_back(p);
  };
  auto att = [&](std::optional<AttentionLayer>& a) {
    if (a) for (auto* p : a->parameters()) out.push_back(p);
  };
  cell(word_fwd);
  cell(word_bwd);
  att(word_att);
  cell(sent_fwd);
  cell(sent_bwd);
  att(sent_att);
  cell(head_fwd);
  cell(head_bwd);
  att(head_att);
  cell(flat_gru);
  for (auto* p : classifier.parameters()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  auto mutable_params = const_cast<Model*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

Parameter* Model::find(std::string_view name) {
  for (auto* p : parameters())
    if (p->name == name) return p;
  return nullptr;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

void Model::fill(double value) {
  for (auto* p : parameters()) std::fill(p->value.begin(), p->value.end(), value);
  std::fill_n(embedding.W_e.value.begin() + kPadId * embedding.dim(), embedding.dim(), 0.0);
}

void Model::set_embedding(const EmbeddingTable& table) {
  if (table.W_e.shape != embedding.W_e.shape) {
    throw DimensionError("set_embedding: table " + shape_string(table.W_e.shape) +
                         " for model expecting " + shape_string(embedding.W_e.shape));
  }
  embedding.W_e.value = table.W_e.value;
}

Encoded Model::compose(Tape& tape, AttentionLayer* layer, std::span<const Var> annotations) {
  switch (config_.composition) {
    case Composition::Attention: {
      auto pooled = attention_pool(tape, *layer, annotations);
      return {pooled.context, std::move(pooled.weights)};
    }
    case Composition::Average:
      return {average_pool(annotations),
              std::vector<double>(annotations.size(), 1.0 / static_cast<double>(annotations.size()))};
    case Composition::Max:
      return {max_pool(annotations), {}};
  }
  throw ConfigError("unknown composition");
}

Encoded Model::encode_sentence(Tape& tape, std::span<const TokenId> ids) {
  if (!word_fwd) throw ContractError("encode_sentence: model has no word encoder");
  if (ids.empty()) throw ContractError("encode_sentence: empty sentence");
  const std::size_t limit =
      std::max(config_.max_words_per_sentence, config_.max_headline_words);
  if (ids.size() > limit) {
    throw ContractError("encode_sentence: " + std::to_string(ids.size()) +
                        " words exceed the limit of " + std::to_string(limit));
  }
  auto words = embed(tape, embedding, ids);
  auto annotations = bigru_run(tape, *word_fwd, *word_bwd, words);
  return compose(tape, word_att ? &*word_att : nullptr, annotations);
}

Encoded Model::encode_body(Tape& tape, std::span<const Var> sentence_vectors) {
  if (!sent_fwd) throw ContractError("encode_body: model has no sentence encoder");
  if (sentence_vectors.empty()) throw ContractError("encode_body: empty body");
  if (sentence_vectors.size() > config_.max_sentences + 1) {
    throw ContractError("encode_body: " + std::to_string(sentence_vectors.size()) +
                        " sentences exceed the limit");
  }
  auto annotations = bigru_run(tape, *sent_fwd, *sent_bwd, sentence_vectors);
  return compose(tape, sent_att ? &*sent_att : nullptr, annotations);
}

Encoded Model::encode_headline(Tape& tape, std::span<const TokenId> headline_ids,
                               Var body_vector) {
  if (!head_fwd) throw ContractError("encode_headline: model has no headline encoder");
  if (headline_ids.empty()) throw ContractError("encode_headline: empty headline");
  if (headline_ids.size() > config_.max_headline_words) {
    throw ContractError("encode_headline: " + std::to_string(headline_ids.size()) +
                        " words exceed max_headline_words");
  }
  if (body_vector.shape() != Shape{config_.embed_dim}) {
    throw DimensionError("encode_headline: body vector " + shape_string(body_vector.shape()) +
                         " does not match embed_dim " + std::to_string(config_.embed_dim));
  }
  auto sequence = embed(tape, embedding, headline_ids);
  sequence.push_back(body_vector);
  auto annotations = bigru_run(tape, *head_fwd, *head_bwd, sequence);
  return compose(tape, head_att ? &*head_att : nullptr, annotations);
}

std::span<const TokenId> Model::headline_span(const EncodedArticle& article) const {
  std::span<const TokenId> ids(article.headline_ids);
  return config_.mask_padding ? ids.first(article.headline_len) : ids;
}

std::vector<std::span<const TokenId>> Model::sentence_spans(
    const EncodedArticle& article) const {
  std::vector<std::span<const TokenId>> spans;
  const std::size_t rows = config_.mask_padding ? article.n_sentences : article.limits.max_sentences;
  for (std::size_t i = 0; i < rows; ++i) {
    auto s = article.sentence(i);
    spans.push_back(config_.mask_padding ? s.first(article.sentence_lens[i]) : s);
  }
  return spans;
}

namespace {

void check_article(const EncodedArticle& article, const ModelConfig& config,
                   std::size_t vocab_size) {
  const auto& lim = article.limits;
  if (lim.max_words_per_sentence != config.max_words_per_sentence ||
      lim.max_sentences != config.max_sentences ||
      lim.max_headline_words != config.max_headline_words) {
    throw DimensionError("article padded to " + std::to_string(lim.max_sentences) + "x" +
                         std::to_string(lim.max_words_per_sentence) + " / headline " +
                         std::to_string(lim.max_headline_words) + ", model expects " +
                         std::to_string(config.max_sentences) + "x" +
                         std::to_string(config.max_words_per_sentence) + " / headline " +
                         std::to_string(config.max_headline_words));
  }
  if (article.headline_ids.size() != lim.max_headline_words ||
      article.sentence_ids.size() != lim.max_sentences * lim.max_words_per_sentence ||
      article.sentence_lens.size() != lim.max_sentences) {
    throw DimensionError("encoded article arrays disagree with its limits");
  }
  if (article.headline_len == 0 || article.n_sentences == 0) {
    throw ContractError("encoded article has an empty headline or body");
  }
  for (auto id : article.headline_ids)
    if (id >= vocab_size) throw ContractError("token id beyond vocabulary");
  for (auto id : article.sentence_ids)
    if (id >= vocab_size) throw ContractError("token id beyond vocabulary");
}

std::vector<TokenId> flat_tokens(const EncodedArticle& article) {
  std::vector<TokenId> ids(article.headline_ids.begin(),
                           article.headline_ids.begin() + article.headline_len);
  for (std::size_t i = 0; i < article.n_sentences; ++i) {
    auto s = article.sentence(i).first(article.sentence_lens[i]);
    ids.insert(ids.end(), s.begin(), s.end());
  }
  return ids;
}

}  // namespace

Var Model::flat_feature(Tape& tape, const EncodedArticle& article) {
  const auto ids = flat_tokens(article);
  auto words = embed(tape, embedding, ids);
  if (config_.architecture == Architecture::GloveAve) return average_pool(words);
  auto states = gru_run(tape, *flat_gru, words);
  if (config_.architecture == Architecture::GruFlat) return states.back();
  return average_pool(states);
}

ForwardPass Model::forward(Tape& tape, const EncodedArticle& article) {
  check_article(article, config_, vocab_size());
  ForwardPass out;
  if (!config_.hierarchical()) {
    out.probability = classify(tape, classifier, flat_feature(tape, article));
    return out;
  }
  auto spans = sentence_spans(article);
  if (config_.architecture == Architecture::Han) {
    spans.insert(spans.begin(), headline_span(article));
  }
  std::vector<Var> sentence_vectors;
  sentence_vectors.reserve(spans.size());
  for (const auto& span : spans) {
    auto s = encode_sentence(tape, span);
    sentence_vectors.push_back(s.vector);
    out.trace.word_weights.push_back(std::move(s.weights));
  }
  if (config_.composition == Composition::Max) out.trace.word_weights.clear();
  auto body = encode_body(tape, sentence_vectors);
  out.trace.sentence_weights = std::move(body.weights);
  if (config_.architecture == Architecture::Han) {
    out.probability = classify(tape, classifier, body.vector);
    return out;
  }
  auto news = encode_headline(tape, headline_span(article), body.vector);
  out.trace.headline_weights = std::move(news.weights);
  out.probability = classify(tape, classifier, news.vector);
  return out;
}

Prediction Model::predict(const EncodedArticle& article) {
  Tape tape(false);
  auto pass = forward(tape, article);
  return {pass.probability.item(), std::move(pass.trace)};
}

// ---- HeadlineModel --------------------------------------------------------

HeadlineModel::HeadlineModel(const ModelConfig& config, std::size_t vocab_size)
    : embedding("embedding", vocab_size, config.embed_dim),
      word_fwd("word_fwd", config.embed_dim, config.gru_hidden),
      word_bwd("word_bwd", config.embed_dim, config.gru_hidden),
      classifier("aux_classifier", 2 * config.gru_hidden),
      config_(config) {
  config_.validate();
  // Same draw order as Model, so both start from identical word-level weights.
  Rng rng(config_.seed);
  embedding.init(rng);
  word_fwd.init(rng);
  word_bwd.init(rng);
  if (config_.composition == Composition::Attention) {
    word_att.emplace("word_att", 2 * config_.gru_hidden, config_.att_dim).init(rng);
  }
  classifier.init(rng);
}

ForwardPass HeadlineModel::forward(Tape& tape, const EncodedArticle& article) {
  if (article.headline_len == 0) throw ContractError("pretrain: empty headline");
  std::span<const TokenId> ids(article.headline_ids);
  if (config_.mask_padding) ids = ids.first(article.headline_len);
  auto words = embed(tape, embedding, ids);
  auto annotations = bigru_run(tape, word_fwd, word_bwd, words);
  ForwardPass out;
  Var sentence;
  switch (config_.composition) {
    case Composition::Attention: {
      auto pooled = attention_pool(tape, *word_att, annotations);
      sentence = pooled.context;
      out.trace.word_weights.push_back(std::move(pooled.weights));
      break;
    }
    case Composition::Average:
      sentence = average_pool(annotations);
      break;
    case Composition::Max:
      sentence = max_pool(annotations);
      break;
  }
  out.probability = classify(tape, classifier, sentence);
  return out;
}

Prediction HeadlineModel::predict(const EncodedArticle& article) {
  Tape tape(false);
  auto pass = forward(tape, article);
  return {pass.probability.item(), std::move(pass.trace)};
}

std::vector<Parameter*> HeadlineModel::parameters() {
  std::vector<Parameter*> out{&embedding.W_e};
  for (auto* p : word_fwd.parameters()) out.push_back(p);
  for (auto* p : word_bwd.parameters()) out.push_back(p);
  if (word_att)
    for (auto* p : word_att->parameters()) out.push_back(p);
  for (auto* p : classifier.parameters()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> HeadlineModel::parameters() const {
  auto mutable_params = const_cast<HeadlineModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

Parameter* HeadlineModel::find(std::string_view name) {
  for (auto* p : parameters())
    if (p->name == name) return p;
  return nullptr;
}

void HeadlineModel::set_embedding(const EmbeddingTable& table) {
  if (table.W_e.shape != embedding.W_e.shape) {
    throw DimensionError("set_embedding: table " + shape_string(table.W_e.shape) +
                         " for model expecting " + shape_string(embedding.W_e.shape));
  }
  embedding.W_e.value = table.W_e.value;
}

// ---- training -------------------------------------------------------------

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,train_loss,train_acc,val_acc\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," +
           format_double(e.train_accuracy) + "," + format_double(e.val_accuracy) + "\n";
  }
  return out;
}

namespace {

double accuracy_of(const ForwardFn& forward, std::span<const EncodedArticle> dataset) {
  if (dataset.empty()) throw ContractError("evaluate: empty dataset");
  std::size_t correct = 0;
  for (const auto& article : dataset) {
    Tape tape(false);
    const double q = forward(tape, article).item();
    if (predicted_label(q) == article.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace

TrainHistory fit(std::span<Parameter* const> params, const ForwardFn& forward,
                 std::span<const EncodedArticle> train_set,
                 std::span<const EncodedArticle> val_set, const ModelConfig& config,
                 const EpochHook& on_epoch) {
  if (train_set.empty()) throw ContractError("train: empty training set");
  config.validate();
  SgdMomentum optimizer({config.lr, config.momentum},
                        std::vector<Parameter*>(params.begin(), params.end()));
  optimizer.zero_grad();
  const std::size_t n = train_set.size();
  TrainHistory history;
  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(config.seed ^ (0x9E3779B97F4A7C15ULL * epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_total = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto& article = train_set[order[k]];
        Tape tape;
        Var q = forward(tape, article);
        Var loss = bce_loss(q, static_cast<double>(article.label));
        loss_total += loss.item();
        if (predicted_label(q.item()) == article.label) ++correct;
        tape.backward(scale(loss, inv_batch));
      }
      optimizer.step();
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_total / static_cast<double>(n);
    record.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    record.val_accuracy = val_set.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : accuracy_of(forward, val_set);
    history.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return history;
}

TrainHistory train(Model& model, std::span<const EncodedArticle> train_set,
                   std::span<const EncodedArticle> val_set, const EpochHook& on_epoch) {
  auto params = model.parameters();
  ForwardFn forward = [&model](Tape& tape, const EncodedArticle& a) {
    return model.forward(tape, a).probability;
  };
  return fit(params, forward, train_set, val_set, model.config(), on_epoch);
}

HeadlineModel pretrain_headline(std::span<const EncodedArticle> train_set,
                                const ModelConfig& config, std::size_t vocab_size,
                                const EmbeddingTable* initial_embedding,
                                TrainHistory* history) {
  if (train_set.empty()) throw ContractError("pretrain: no headlines");
  HeadlineModel model(config, vocab_size);
  if (initial_embedding) model.set_embedding(*initial_embedding);
  auto params = model.parameters();
  ForwardFn forward = [&model](Tape& tape, const EncodedArticle& a) {
    return model.forward(tape, a).probability;
  };
  auto h = fit(params, forward, train_set, {}, config);
  if (history) *history = std::move(h);
  return model;
}

namespace {

bool is_word_level(std::string_view name) {
  return name == "embedding" || name.starts_with("word_fwd.") ||
         name.starts_with("word_bwd.") || name.starts_with("word_att.");
}

}  // namespace

void transfer_word_level(std::span<const Parameter> source, Model& model) {
  std::size_t copied = 0;
  for (auto* target : model.parameters()) {
    if (!is_word_level(target->name)) continue;
    auto it = std::find_if(source.begin(), source.end(),
                           [&](const Parameter& p) { return p.name == target->name; });
    if (it == source.end()) {
      throw ContractError("transfer: pretrained weights lack " + target->name);
    }
    if (it->shape != target->shape) {
      throw DimensionError("transfer: " + target->name + " is " + shape_string(it->shape) +
                           " in the pretrained weights, " + shape_string(target->shape) +
                           " in the model");
    }
    target->value = it->value;
    ++copied;
  }
  if (copied == 0) throw ContractError("transfer: model has no word level");
}

void transfer_word_level(const HeadlineModel& source, Model& model) {
  std::vector<Parameter> blocks;
  for (const auto* p : source.parameters()) blocks.push_back(*p);
  transfer_word_level(blocks, model);
}

double evaluate(Model& model, std::span<const EncodedArticle> dataset) {
  return accuracy_of(
      [&model](Tape& tape, const EncodedArticle& a) { return model.forward(tape, a).probability; },
      dataset);
}

double evaluate(HeadlineModel& model, std::span<const EncodedArticle> dataset) {
  return accuracy_of(
      [&model](Tape& tape, const EncodedArticle& a) { return model.forward(tape, a).probability; },
      dataset);
}

// ---- checkpoints ----------------------------------------------------------

namespace {

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

  std::string_view take(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) {
      throw FormatError("checkpoint truncated at byte " + std::to_string(pos_) +
                            " while reading " + what,
                        pos_);
    }
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T get(const char* what) {
    auto raw = take(sizeof(T), what);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, raw.data(), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

const Parameter* Checkpoint::find(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return &p;
  return nullptr;
}

std::string serialize_checkpoint(const std::string& kind, const ModelConfig& config,
                                 std::size_t vocab_size,
                                 std::span<const Parameter* const> parameters) {
  std::string text = "kind=" + kind + "\nvocab_size=" + std::to_string(vocab_size) + "\n";
  for (const auto& [k, v] : config.entries()) text += k + "=" + v + "\n";
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint8_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(parameters.size()));
  for (const auto* p : parameters) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->shape.size()));
    for (auto extent : p->shape) put<std::uint64_t>(out, extent);
    for (double v : p->value) put<double>(out, v);
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.take(4, "magic") != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError("not a checkpoint (bad magic)", 0);
  }
  const auto version = in.get<std::uint8_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  }
  const std::size_t config_offset = in.offset();
  const auto config_len = in.get<std::uint32_t>("config length");
  std::string text(in.take(config_len, "config block"));
  Checkpoint cp;
  bool have_vocab = false;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config block: malformed entry '" + line + "'", config_offset);
    }
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "kind") {
        cp.kind = value;
      } else if (key == "vocab_size") {
        cp.vocab_size = std::stoull(value);
        have_vocab = true;
      } else if (!cp.config.parse_entry(key, value)) {
        throw FormatError("config block: unknown key '" + key + "'", config_offset);
      }
    } catch (const ConfigError& e) {
      throw FormatError(std::string("config block: ") + e.what(), config_offset);
    } catch (const std::logic_error&) {
      throw FormatError("config block: bad value for '" + key + "'", config_offset);
    }
  }
  if (cp.kind.empty() || !have_vocab) {
    throw FormatError("config block lacks kind or vocab_size", config_offset);
  }
  const auto count = in.get<std::uint32_t>("block count");
  for (std::uint32_t b = 0; b < count; ++b) {
    const std::size_t block_offset = in.offset();
    Parameter p;
    const auto name_len = in.get<std::uint32_t>("name length");
    p.name = std::string(in.take(name_len, "parameter name"));
    const auto rank = in.get<std::uint32_t>("rank");
    if (rank == 0 || rank > 8) {
      throw FormatError("parameter " + p.name + ": implausible rank " + std::to_string(rank),
                        block_offset);
    }
    for (std::uint32_t r = 0; r < rank; ++r) p.shape.push_back(in.get<std::uint64_t>("extent"));
    const std::size_t n = element_count(p.shape);
    if (n > (bytes.size() - in.offset()) / sizeof(double)) {
      throw FormatError("checkpoint truncated at byte " + std::to_string(in.offset()) +
                            " in values of " + p.name,
                        in.offset());
    }
    p.value.resize(n);
    for (auto& v : p.value) v = in.get<double>("value");
    p.grad.assign(n, 0.0);
    cp.parameters.push_back(std::move(p));
    cp.offsets.push_back(block_offset);
  }
  if (!in.done()) {
    throw FormatError("trailing bytes after last parameter block", in.offset());
  }
  return cp;
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path, 0);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

void save_checkpoint(const Model& model, const std::string& path) {
  auto params = model.parameters();
  write_file_atomic(path, serialize_checkpoint("model", model.config(), model.vocab_size(), params));
}

void save_checkpoint(const HeadlineModel& model, const std::string& path) {
  auto params = model.parameters();
  write_file_atomic(path, serialize_checkpoint("headline", model.config(),
                                               model.embedding.vocab_size(), params));
}

Model model_from_checkpoint(const Checkpoint& checkpoint) {
  if (checkpoint.kind != "model") {
    throw FormatError("checkpoint holds '" + checkpoint.kind + "' weights, not a model", 0);
  }
  Model model(checkpoint.config, checkpoint.vocab_size);
  auto params = model.parameters();
  if (params.size() != checkpoint.parameters.size()) {
    throw FormatError("checkpoint has " + std::to_string(checkpoint.parameters.size()) +
                          " parameter blocks, model expects " + std::to_string(params.size()),
                      checkpoint.offsets.empty() ? 0 : checkpoint.offsets.front());
  }
  for (auto* p : params) {
    const auto* block = checkpoint.find(p->name);
    if (!block) throw FormatError("checkpoint lacks parameter " + p->name, 0);
    if (block->shape != p->shape) {
      const auto idx = static_cast<std::size_t>(block - checkpoint.parameters.data());
      throw FormatError("parameter " + p->name + " has shape " + shape_string(block->shape) +
                            ", expected " + shape_string(p->shape),
                        checkpoint.offsets[idx]);
    }
    p->value = block->value;
  }
  return model;
}

Model load_checkpoint(const std::string& path) { return model_from_checkpoint(read_checkpoint(path)); }

}  // namespace han3
