#include "han3/app.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "han3/errors.hpp"
#include "han3/heatmap.hpp"
#include "han3/model.hpp"
#include "han3/wordcount.hpp"

namespace fs = std::filesystem;

namespace han3 {

namespace {

std::string f4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path not set");
  if (!fs::is_regular_file(path)) throw ConfigError(what + " not found: " + path);
}

std::string limits_string(const EncodeLimits& l) {
  return std::to_string(l.max_words_per_sentence) + "/" + std::to_string(l.max_sentences) + "/" +
         std::to_string(l.max_headline_words);
}

void check_limits(const EncodeLimits& data, const EncodeLimits& model, const std::string& path) {
  if (data.max_words_per_sentence != model.max_words_per_sentence ||
      data.max_sentences != model.max_sentences ||
      data.max_headline_words != model.max_headline_words) {
    throw ConfigError(path + " was encoded with limits " + limits_string(data) +
                      " but the model uses " + limits_string(model));
  }
}

void check_vocab_size(std::size_t data, std::size_t model, const std::string& path) {
  if (data != model) {
    throw ConfigError("vocabulary size mismatch: checkpoint has " + std::to_string(model) +
                      ", " + path + " has " + std::to_string(data));
  }
}

EncodedDataset read_split(const RunConfig& config, const std::string& part, std::size_t vocab_size) {
  const std::string path = config.split_path(part);
  require_file(path, part + " split");
  auto ds = read_encoded(path);
  check_vocab_size(ds.vocab_size, vocab_size, path);
  check_limits(ds.limits, config.model.limits(), path);
  return ds;
}

std::optional<EmbeddingTable> maybe_embeddings(const RunConfig& config, const Vocabulary& vocab) {
  if (config.embeddings.empty()) return std::nullopt;
  require_file(config.embeddings, "embeddings file");
  return load_embeddings(vocab, config.embeddings, config.model.embed_dim, config.model.seed);
}

Model checkpoint_model(const RunConfig& config, Checkpoint* out = nullptr) {
  require_file(config.checkpoint, "checkpoint");
  auto ckpt = read_checkpoint(config.checkpoint);
  if (ckpt.kind != "model") {
    throw ConfigError(config.checkpoint + " is a '" + ckpt.kind + "' checkpoint, not a model");
  }
  Model model = model_from_checkpoint(ckpt);
  if (out) *out = std::move(ckpt);
  return model;
}

void log_epoch(std::ostream& log, const EpochRecord& r) {
  log << "epoch " << r.epoch << " loss " << f4(r.train_loss) << " train_acc "
      << f4(r.train_accuracy) << " val_acc " << f4(r.val_accuracy) << '\n';
}

}  // namespace

std::vector<ClassStats> corpus_stats(std::span<const RawArticle> corpus) {
  std::vector<ClassStats> rows(2);
  rows[0].type = "Fake";
  rows[1].type = "Genuine";
  std::set<std::string> sites[2];
  std::size_t words[2] = {0, 0}, sentences[2] = {0, 0};
  for (const auto& a : corpus) {
    const int r = a.label == kFake ? 0 : 1;
    ++rows[r].articles;
    if (!a.source_id.empty()) sites[r].insert(a.source_id);
    for (const auto& s : tokenize(a.body)) {
      ++sentences[r];
      words[r] += s.size();
    }
  }
  for (int r = 0; r < 2; ++r) {
    rows[r].sites = sites[r].size();
    if (sentences[r]) rows[r].average_words = double(words[r]) / double(sentences[r]);
    if (rows[r].articles) rows[r].average_sentences = double(sentences[r]) / double(rows[r].articles);
  }
  return rows;
}

std::string stats_table(std::span<const ClassStats> rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %8s %9s %14s %18s\n", "Type", "Sites", "Articles",
                "Average Words", "Average Sentences");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-8s %8zu %9zu %14.2f %18.2f\n", r.type.c_str(), r.sites,
                  r.articles, r.average_words, r.average_sentences);
    out += buf;
  }
  return out;
}

void cmd_prepare(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  require_file(config.corpus, "corpus");
  const auto corpus = read_corpus(config.corpus);
  if (corpus.empty()) throw FormatError("empty corpus: " + config.corpus, 0);

  const auto split = split_dataset(corpus, config.split, config.model.seed);
  auto tokenize_all = [](const std::vector<RawArticle>& part) {
    std::vector<TokenizedArticle> t;
    t.reserve(part.size());
    for (const auto& a : part) t.push_back(tokenize_article(a));
    return t;
  };
  const auto train = tokenize_all(split.train);
  const auto vocab = Vocabulary::build(train);
  const auto limits = config.model.limits();

  auto encode_all = [&](const std::vector<TokenizedArticle>& part, const std::string& name) {
    EncodedDataset ds{vocab.size(), limits, {}};
    std::size_t skipped = 0;
    for (const auto& a : part) {
      if (auto e = encode(a, vocab, limits)) ds.articles.push_back(std::move(*e));
      else ++skipped;
    }
    if (skipped) log << name << ": skipped " << skipped << " articles with no tokens\n";
    return ds;
  };
  const auto train_ds = encode_all(train, "train");
  const auto val_ds = encode_all(tokenize_all(split.val), "val");
  const auto test_ds = encode_all(tokenize_all(split.test), "test");

  fs::create_directories(config.data_dir);
  vocab.save(config.vocab_path());
  write_encoded(config.split_path("train"), train_ds);
  write_encoded(config.split_path("val"), val_ds);
  write_encoded(config.split_path("test"), test_ds);
  log << "vocabulary " << vocab.size() << " tokens; splits " << train_ds.articles.size() << "/"
      << val_ds.articles.size() << "/" << test_ds.articles.size() << '\n';
  out << stats_table(corpus_stats(corpus));
}

void cmd_synth(const RunConfig& config, std::ostream& out, std::ostream&) {
  config.synth.validate();
  if (config.output.empty()) throw ConfigError("output path not set");
  const auto corpus = synth_corpus(config.synth, config.model.seed);
  write_corpus(config.output, corpus);
  std::size_t fake = 0;
  for (const auto& a : corpus) fake += a.label == kFake;
  out << "fake=" << fake << " genuine=" << corpus.size() - fake << '\n';
}

void cmd_train(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  if (!config.init_from.empty()) require_file(config.init_from, "--init-from checkpoint");
  const auto vocab = Vocabulary::load(config.vocab_path());
  const auto train_ds = read_split(config, "train", vocab.size());
  const auto val_ds = read_split(config, "val", vocab.size());

  Model model(config.model, vocab.size());
  if (auto table = maybe_embeddings(config, vocab)) model.set_embedding(*table);
  if (!config.init_from.empty()) {
    const auto ckpt = read_checkpoint(config.init_from);
    check_vocab_size(vocab.size(), ckpt.vocab_size, config.init_from);
    transfer_word_level(ckpt.parameters, model);
    log << "word level initialised from " << config.init_from << '\n';
  }
  if (!config.initial_checkpoint.empty()) save_checkpoint(model, config.initial_checkpoint);

  const auto history = train(model, train_ds.articles, val_ds.articles,
                             [&](const EpochRecord& r) { log_epoch(log, r); });
  save_checkpoint(model, config.checkpoint);
  write_file_atomic(config.history, history.to_csv());
  const double final_val = history.epochs.empty() ? 0.0 : history.epochs.back().val_accuracy;
  out << "val_accuracy " << f4(final_val) << '\n';
}

void cmd_pretrain(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  if (!config.model.hierarchical()) {
    throw ConfigError("pretraining needs a hierarchical architecture (3han or han)");
  }
  const auto vocab = Vocabulary::load(config.vocab_path());
  const auto train_ds = read_split(config, "train", vocab.size());
  const auto table = maybe_embeddings(config, vocab);
  TrainHistory history;
  auto model = pretrain_headline(train_ds.articles, config.model, vocab.size(),
                                 table ? &*table : nullptr, &history);
  for (const auto& r : history.epochs) log_epoch(log, r);
  save_checkpoint(model, config.checkpoint);
  write_file_atomic(config.history, history.to_csv());
  const double acc = history.epochs.empty() ? 0.0 : history.epochs.back().train_accuracy;
  out << "train_accuracy " << f4(acc) << '\n';
}

EncodedDataset load_articles(const std::string& path, const RunConfig& config,
                             const EncodeLimits& limits) {
  require_file(path, "input");
  std::string first;
  {
    std::ifstream in(path);
    std::getline(in, first);
  }
  if (first.find("\"han3-encoded\"") != std::string::npos) {
    auto ds = read_encoded(path);
    check_limits(ds.limits, limits, path);
    return ds;
  }
  const auto vocab = Vocabulary::load(config.vocab_path());
  const auto raw = read_corpus(path, false);
  EncodedDataset ds{vocab.size(), limits, {}};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto e = encode(raw[i], vocab, limits);
    if (!e) {
      throw FormatError(path + ": record " + std::to_string(i + 1) + " has no headline or body tokens",
                        i + 1);
    }
    ds.articles.push_back(std::move(*e));
  }
  return ds;
}

void cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream&) {
  Checkpoint ckpt;
  auto model = checkpoint_model(config, &ckpt);
  const std::string path = config.dataset.empty() ? config.split_path("test") : config.dataset;
  const auto ds = load_articles(path, config, model.config().limits());
  check_vocab_size(ds.vocab_size, ckpt.vocab_size, path);
  if (ds.articles.empty()) throw ContractError("evaluate: " + path + " has no articles");
  out << f4(evaluate(model, ds.articles)) << '\n';
}

void cmd_predict(const RunConfig& config, std::ostream& out, std::ostream&) {
  Checkpoint ckpt;
  auto model = checkpoint_model(config, &ckpt);
  const auto ds = load_articles(config.input, config, model.config().limits());
  check_vocab_size(ds.vocab_size, ckpt.vocab_size, config.input);
  for (const auto& a : ds.articles) out << g17(model.predict(a).probability) << '\n';
}

void cmd_explain(const RunConfig& config, std::ostream& out, std::ostream&) {
  Checkpoint ckpt;
  auto model = checkpoint_model(config, &ckpt);
  const auto& mc = model.config();
  if (!mc.hierarchical() || mc.composition != Composition::Attention) {
    throw ConfigError("explain needs a 3han or han model with attention composition");
  }
  if (config.top_sentences == 0 || config.words_shown == 0) {
    throw ConfigError("top_sentences and words_shown must be positive");
  }
  require_file(config.input, "article");
  const auto vocab = Vocabulary::load(config.vocab_path());
  check_vocab_size(vocab.size(), ckpt.vocab_size, config.vocab_path());
  const auto raw = read_corpus(config.input, false);
  if (raw.empty()) throw FormatError(config.input + ": no article", 0);
  const auto tokens = tokenize_article(raw.front());
  const auto encoded = encode(tokens, vocab, mc.limits());
  if (!encoded) throw FormatError(config.input + ": article has no headline or body tokens", 1);
  const auto prediction = model.predict(*encoded);

  HeatmapInput input;
  input.probability = prediction.probability;
  input.trace = prediction.trace;
  auto clip = [](const std::vector<std::string>& words, std::size_t n) {
    return std::vector<std::string>(words.begin(), words.begin() + std::min(n, words.size()));
  };
  const auto headline = clip(tokens.headline, mc.max_headline_words);
  std::vector<std::vector<std::string>> body;
  for (std::size_t i = 0; i < encoded->n_sentences; ++i) {
    body.push_back(clip(tokens.body[i], mc.max_words_per_sentence));
  }
  if (mc.architecture == Architecture::ThreeHan) {
    input.headline.assign(input.trace.headline_weights.size(), "");
    std::copy(headline.begin(), headline.end(), input.headline.begin());
    input.headline.back() = "[body]";
    input.sentences = body;
  } else {
    // HAN reads the headline as its first sentence.
    input.sentences.push_back(headline);
    input.sentences.insert(input.sentences.end(), body.begin(), body.end());
  }
  input.real_sentences = input.sentences.size();

  const std::string output = config.output.empty() ? "heatmap.html" : config.output;
  write_file_atomic(output, render_heatmap(input, {config.top_sentences, config.words_shown}));
  out << f4(prediction.probability) << '\n';
}

void cmd_wordcount(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  require_file(config.corpus, "corpus");
  const auto corpus = read_corpus(config.corpus);
  if (corpus.empty()) throw FormatError("empty corpus: " + config.corpus, 0);
  const auto split = split_dataset(corpus, config.split, config.model.seed);

  std::vector<std::vector<std::string>> train_docs, test_docs;
  std::vector<int> train_labels, test_labels;
  auto add = [](const std::vector<RawArticle>& part, auto& docs, auto& labels) {
    for (const auto& a : part) {
      docs.push_back(article_tokens(tokenize_article(a)));
      labels.push_back(a.label);
    }
  };
  add(split.train, train_docs, train_labels);
  add(split.val, train_docs, train_labels);
  add(split.test, test_docs, test_labels);

  const auto featurizer = CountFeaturizer::fit(train_docs, config.feature_mode, config.features);
  std::vector<SparseVector> x_train, x_test;
  for (const auto& d : train_docs) x_train.push_back(featurizer.featurize(d));
  for (const auto& d : test_docs) x_test.push_back(featurizer.featurize(d));
  log << featurizer.size() << " features (" << feature_mode_name(config.feature_mode) << ")\n";

  LogisticConfig lc{config.model.lr, config.model.momentum, config.model.batch_size,
                    config.logreg_epochs, config.model.seed};
  const auto model = train_logreg(x_train, train_labels, featurizer.size(), lc);
  const auto majority = MajorityBaseline::fit(train_labels);
  out << "majority " << f4(majority.accuracy(test_labels)) << '\n';
  out << "logreg " << f4(accuracy(model, x_test, test_labels)) << '\n';
}

}  // namespace han3
