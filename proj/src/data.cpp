#include "han3/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "han3/errors.hpp"
#include "json.hpp"

namespace han3 {

using json = nlohmann::json;

// ---- tokenization -------------------------------------------------------

namespace {

bool is_significant_mark(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case '\'': case '"': case ';': case ':':
      return true;
    default:
      return false;
  }
}

bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

Sentence tokenize_sentence(std::string_view text) {
  Sentence tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(c);
    } else if (is_significant_mark(c)) {
      flush();
      tokens.emplace_back(1, c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

}  // namespace

std::vector<Sentence> tokenize(std::string_view text) {
  std::vector<Sentence> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_sentence_end(text[i])) continue;
    if (i + 1 < text.size() && !is_space(text[i + 1])) continue;
    auto tokens = tokenize_sentence(text.substr(start, i + 1 - start));
    if (!tokens.empty()) sentences.push_back(std::move(tokens));
    start = i + 1;
  }
  if (start < text.size()) {
    auto tokens = tokenize_sentence(text.substr(start));
    if (!tokens.empty()) sentences.push_back(std::move(tokens));
  }
  return sentences;
}

std::vector<std::string> tokenize_flat(std::string_view text) {
  std::vector<std::string> out;
  for (auto& sentence : tokenize(text)) {
    for (auto& tok : sentence) out.push_back(std::move(tok));
  }
  return out;
}

TokenizedArticle tokenize_article(const RawArticle& article) {
  return {tokenize_flat(article.headline), tokenize(article.body), article.label};
}

// ---- Vocabulary ---------------------------------------------------------

Vocabulary::Vocabulary() {
  append("<pad>", 0);
  append("<unk>", 0);
}

void Vocabulary::append(std::string token, std::size_t frequency) {
  const auto id = static_cast<TokenId>(tokens_.size());
  index_.emplace(token, id);
  tokens_.push_back(std::move(token));
  frequencies_.push_back(frequency);
}

Vocabulary Vocabulary::build(std::span<const TokenizedArticle> corpus) {
  if (corpus.empty()) throw ContractError("build_vocab: empty corpus");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& article : corpus) {
    for (const auto& tok : article.headline) ++counts[tok];
    for (const auto& sentence : article.body)
      for (const auto& tok : sentence) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  std::size_t unk = 0;
  for (auto& [tok, n] : counts) {
    if (n >= kMinFrequency) {
      kept.emplace_back(tok, n);
    } else if (n == kUnkFrequency) {
      unk += n;
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  vocab.frequencies_[kUnkId] = unk;
  for (auto& [tok, n] : kept) {
    if (vocab.index_.count(tok)) continue;  // never collides with <pad>/<unk>
    vocab.append(std::move(tok), n);
  }
  return vocab;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw ContractError("vocabulary id " + std::to_string(id) + " out of range");
  }
  return tokens_[id];
}

void Vocabulary::save(const std::string& path) const {
  std::ostringstream out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i] << '\t' << i << '\t' << frequencies_[i] << '\n';
  }
  write_file_atomic(path, out.str());
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocabulary file " + path, 0);
  Vocabulary vocab;
  vocab.tokens_.clear();
  vocab.frequencies_.clear();
  vocab.index_.clear();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token, id_text, freq_text;
    if (!std::getline(fields, token, '\t') || !std::getline(fields, id_text, '\t') ||
        !std::getline(fields, freq_text)) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                            ": expected token<TAB>id<TAB>frequency",
                        line_no);
    }
    std::size_t id = 0, freq = 0;
    auto [p1, e1] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    auto [p2, e2] =
        std::from_chars(freq_text.data(), freq_text.data() + freq_text.size(), freq);
    if (e1 != std::errc() || e2 != std::errc() || p1 != id_text.data() + id_text.size() ||
        p2 != freq_text.data() + freq_text.size()) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": bad number", line_no);
    }
    if (id != vocab.tokens_.size()) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": id " +
                            std::to_string(id) + " out of sequence",
                        line_no);
    }
    vocab.append(token, freq);
  }
  if (vocab.size() < 2 || vocab.tokens_[kPadId] != "<pad>" ||
      vocab.tokens_[kUnkId] != "<unk>") {
    throw FormatError(path + ": vocabulary must start with <pad> and <unk>", line_no);
  }
  return vocab;
}

// ---- encoding -----------------------------------------------------------

std::span<const TokenId> EncodedArticle::sentence(std::size_t i) const {
  const std::size_t w = limits.max_words_per_sentence;
  return std::span<const TokenId>(sentence_ids).subspan(i * w, w);
}

std::optional<EncodedArticle> encode(const TokenizedArticle& article,
                                     const Vocabulary& vocab,
                                     const EncodeLimits& limits) {
  if (limits.max_words_per_sentence == 0 || limits.max_sentences == 0 ||
      limits.max_headline_words == 0) {
    throw ConfigError("encode: padding limits must be positive");
  }
  if (article.headline.empty() || article.body.empty()) return std::nullopt;
  EncodedArticle out;
  out.limits = limits;
  out.label = article.label;
  out.headline_ids.assign(limits.max_headline_words, kPadId);
  out.headline_len = std::min(article.headline.size(), limits.max_headline_words);
  for (std::size_t j = 0; j < out.headline_len; ++j) {
    out.headline_ids[j] = vocab.id(article.headline[j]);
  }
  const std::size_t w = limits.max_words_per_sentence;
  out.sentence_ids.assign(limits.max_sentences * w, kPadId);
  out.sentence_lens.assign(limits.max_sentences, 0);
  out.n_sentences = std::min(article.body.size(), limits.max_sentences);
  for (std::size_t i = 0; i < out.n_sentences; ++i) {
    const auto& sentence = article.body[i];
    const std::size_t n = std::min(sentence.size(), w);
    out.sentence_lens[i] = n;
    for (std::size_t j = 0; j < n; ++j) out.sentence_ids[i * w + j] = vocab.id(sentence[j]);
  }
  return out;
}

std::optional<EncodedArticle> encode(const RawArticle& article, const Vocabulary& vocab,
                                     const EncodeLimits& limits) {
  return encode(tokenize_article(article), vocab, limits);
}

// ---- embeddings ---------------------------------------------------------

namespace {

bool parse_double(std::string_view text, double& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace

EmbeddingTable load_embeddings(const Vocabulary& vocab, const std::string& path,
                               std::size_t dim, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embedding file " + path, 0);
  EmbeddingTable table("embedding", vocab.size(), dim);
  std::vector<bool> found(vocab.size(), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dim) + " values, found " +
                            std::to_string(fields.size() - 1),
                        line_no);
    }
    std::vector<double> values(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_double(fields[k + 1], values[k])) {
        throw FormatError(path + ":" + std::to_string(line_no) + ": bad number '" +
                              std::string(fields[k + 1]) + "'",
                          line_no);
      }
    }
    const std::string token(fields[0]);
    if (!vocab.contains(token)) continue;
    const TokenId id = vocab.id(token);
    if (id == kPadId || id == kUnkId || found[id]) continue;
    std::copy(values.begin(), values.end(), table.W_e.value.begin() + id * dim);
    found[id] = true;
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-0.25, 0.25);
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    if (id == kPadId || found[id]) continue;
    for (std::size_t k = 0; k < dim; ++k) {
      double v;
      do {
        v = dist(rng);
      } while (v == -0.25);
      table.W_e.value[id * dim + k] = v;
    }
  }
  std::fill_n(table.W_e.value.begin() + kPadId * dim, dim, 0.0);
  return table;
}

void save_embeddings(const EmbeddingTable& table, const Vocabulary& vocab,
                     const std::string& path) {
  if (table.vocab_size() != vocab.size()) {
    throw DimensionError("save_embeddings: table has " +
                         std::to_string(table.vocab_size()) + " rows, vocabulary " +
                         std::to_string(vocab.size()));
  }
  std::string out;
  char buf[32];
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    if (id == kPadId) continue;
    out += vocab.token(static_cast<TokenId>(id));
    for (double v : table.row(static_cast<TokenId>(id))) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out += buf;
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

// ---- splitting ----------------------------------------------------------

Split<std::size_t> split_indices(std::span<const int> labels, const SplitRatios& ratios,
                                 std::uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  Rng rng(seed);
  Split<std::size_t> out;
  for (auto& [label, idx] : groups) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n = static_cast<double>(idx.size());
    auto n_train = static_cast<std::size_t>(std::llround(ratios.train * n));
    auto n_val = static_cast<std::size_t>(std::llround(ratios.val * n));
    n_train = std::min(n_train, idx.size());
    n_val = std::min(n_val, idx.size() - n_train);
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + n_train);
    out.val.insert(out.val.end(), idx.begin() + n_train, idx.begin() + n_train + n_val);
    out.test.insert(out.test.end(), idx.begin() + n_train + n_val, idx.end());
  }
  if (out.train.empty() || out.val.empty() || out.test.empty()) {
    throw ConfigError("split ratios (" + std::to_string(ratios.train) + ", " +
                      std::to_string(ratios.val) + ", " + std::to_string(ratios.test) +
                      ") leave a part empty for " + std::to_string(labels.size()) +
                      " articles");
  }
  std::shuffle(out.train.begin(), out.train.end(), rng);
  std::shuffle(out.val.begin(), out.val.end(), rng);
  std::shuffle(out.test.begin(), out.test.end(), rng);
  return out;
}

Split<RawArticle> split_dataset(std::span<const RawArticle> articles,
                                const SplitRatios& ratios, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(articles.size());
  for (const auto& a : articles) labels.push_back(a.label);
  auto idx = split_indices(labels, ratios, seed);
  Split<RawArticle> out;
  for (auto i : idx.train) out.train.push_back(articles[i]);
  for (auto i : idx.val) out.val.push_back(articles[i]);
  for (auto i : idx.test) out.test.push_back(articles[i]);
  return out;
}

// ---- synthetic corpus ---------------------------------------------------

void SynthSpec::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  };
  prob(topic_rate, "topic_rate");
  prob(class_signal, "class_signal");
  prob(headline_cue, "headline_cue");
  prob(phi, "phi");
  if (topic_rate + class_signal > 1.0) {
    throw ConfigError("topic_rate + class_signal must not exceed 1");
  }
  if (per_class == 0) throw ConfigError("per_class must be positive");
  if (shared_vocab == 0 || topics == 0 || topic_vocab == 0) {
    throw ConfigError("vocabulary sizes and topic count must be positive");
  }
  if ((class_signal > 0 || headline_cue > 0) && class_vocab == 0) {
    throw ConfigError("class_vocab must be positive when class signal is used");
  }
  if (phi > 0 && topics < 2) throw ConfigError("phi > 0 needs at least two topics");
  if (min_sentences == 0 || min_sentences > max_sentences || min_words == 0 ||
      min_words > max_words || min_headline_words == 0 ||
      min_headline_words > max_headline_words) {
    throw ConfigError("length ranges must be positive with min <= max");
  }
}

std::vector<RawArticle> synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };
  auto between = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  auto filler = [&] { return "w" + std::to_string(pick(spec.shared_vocab)); };
  auto class_word = [&](int label) {
    return std::string(label == kFake ? "f" : "g") + std::to_string(pick(spec.class_vocab));
  };
  auto topic_word = [&](std::size_t topic) {
    return "t" + std::to_string(topic) + "n" + std::to_string(pick(spec.topic_vocab));
  };
  auto capitalize = [](std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
  };
  constexpr double kHeadlineTopicRate = 0.6;

  std::vector<RawArticle> articles;
  articles.reserve(2 * spec.per_class);
  for (int label : {kGenuine, kFake}) {
    for (std::size_t n = 0; n < spec.per_class; ++n) {
      const std::size_t topic = pick(spec.topics);
      std::size_t headline_topic = topic;
      if (label == kFake && spec.phi > 0 && unit(rng) < spec.phi) {
        headline_topic = (topic + 1 + pick(spec.topics - 1)) % spec.topics;
      }
      RawArticle article;
      article.label = label;
      const std::size_t k = between(spec.min_headline_words, spec.max_headline_words);
      for (std::size_t j = 0; j < k; ++j) {
        const double u = unit(rng);
        std::string word = u < spec.headline_cue ? class_word(label)
                           : u < spec.headline_cue + (1 - spec.headline_cue) * kHeadlineTopicRate
                               ? topic_word(headline_topic)
                               : filler();
        article.headline += (j ? " " : "") + capitalize(std::move(word));
      }
      const std::size_t sentences = between(spec.min_sentences, spec.max_sentences);
      for (std::size_t s = 0; s < sentences; ++s) {
        const std::size_t words = between(spec.min_words, spec.max_words);
        std::string text;
        for (std::size_t j = 0; j < words; ++j) {
          const double u = unit(rng);
          std::string word = u < spec.class_signal                     ? class_word(label)
                             : u < spec.class_signal + spec.topic_rate ? topic_word(topic)
                                                                       : filler();
          text += j ? " " + word : capitalize(std::move(word));
        }
        article.body += (s ? " " : "") + text + ".";
      }
      article.source_id = "synth-" + std::to_string(label) + "-" + std::to_string(n);
      articles.push_back(std::move(article));
    }
  }
  std::shuffle(articles.begin(), articles.end(), rng);
  return articles;
}

// ---- file formats -------------------------------------------------------

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

std::string corpus_line(const RawArticle& article) {
  json j = {{"headline", article.headline}, {"body", article.body}, {"label", article.label}};
  if (!article.source_id.empty()) j["source_id"] = article.source_id;
  return j.dump();
}

std::vector<RawArticle> parse_corpus(std::istream& in, bool require_label) {
  std::vector<RawArticle> out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError("line " + std::to_string(line_no) + ": " + why, line_no);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (split_whitespace(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(std::string("malformed record: ") + e.what());
    }
    if (!j.is_object()) fail("record is not an object");
    RawArticle a;
    if (!j.contains("headline") || !j["headline"].is_string()) fail("missing headline");
    if (!j.contains("body") || !j["body"].is_string()) fail("missing body");
    if (!j.contains("label") && require_label) fail("missing label");
    a.headline = j["headline"].get<std::string>();
    a.body = j["body"].get<std::string>();
    const json label = j.value("label", json(kGenuine));
    if (label.is_number_integer() && (label.get<int>() == 0 || label.get<int>() == 1)) {
      a.label = label.get<int>();
    } else if (label.is_string() && label.get<std::string>() == "fake") {
      a.label = kFake;
    } else if (label.is_string() && label.get<std::string>() == "genuine") {
      a.label = kGenuine;
    } else {
      fail("label must be 0, 1, \"genuine\" or \"fake\"");
    }
    if (split_whitespace(a.headline).empty()) fail("empty headline");
    if (split_whitespace(a.body).empty()) fail("empty body");
    if (j.contains("source_id") && j["source_id"].is_string()) {
      a.source_id = j["source_id"].get<std::string>();
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<RawArticle> read_corpus(const std::string& path, bool require_label) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open corpus file " + path, 0);
  return parse_corpus(in, require_label);
}

void write_corpus(const std::string& path, std::span<const RawArticle> articles) {
  std::string out;
  for (const auto& a : articles) {
    out += corpus_line(a);
    out += '\n';
  }
  write_file_atomic(path, out);
}

void write_encoded(const std::string& path, const EncodedDataset& dataset) {
  std::string out;
  json header = {{"format", "han3-encoded"},
                 {"version", 1},
                 {"vocab_size", dataset.vocab_size},
                 {"max_words_per_sentence", dataset.limits.max_words_per_sentence},
                 {"max_sentences", dataset.limits.max_sentences},
                 {"max_headline_words", dataset.limits.max_headline_words}};
  out += header.dump() + "\n";
  for (const auto& a : dataset.articles) {
    json sentences = json::array();
    for (std::size_t i = 0; i < a.n_sentences; ++i) {
      auto s = a.sentence(i).first(a.sentence_lens[i]);
      sentences.push_back(std::vector<TokenId>(s.begin(), s.end()));
    }
    json line = {{"label", a.label},
                 {"headline", std::vector<TokenId>(a.headline_ids.begin(),
                                                   a.headline_ids.begin() + a.headline_len)},
                 {"sentences", std::move(sentences)}};
    out += line.dump() + "\n";
  }
  write_file_atomic(path, out);
}

EncodedDataset read_encoded(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open encoded dataset " + path, 0);
  EncodedDataset ds;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(path + ":" + std::to_string(line_no) + ": " + why, line_no);
  };
  try {
    if (!std::getline(in, line)) fail("missing header");
    ++line_no;
    auto header = json::parse(line);
    if (header.value("format", "") != "han3-encoded") fail("not an encoded dataset");
    ds.vocab_size = header.at("vocab_size").get<std::size_t>();
    ds.limits.max_words_per_sentence = header.at("max_words_per_sentence").get<std::size_t>();
    ds.limits.max_sentences = header.at("max_sentences").get<std::size_t>();
    ds.limits.max_headline_words = header.at("max_headline_words").get<std::size_t>();
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto j = json::parse(line);
      EncodedArticle a;
      a.limits = ds.limits;
      a.label = j.at("label").get<int>();
      auto headline = j.at("headline").get<std::vector<TokenId>>();
      auto sentences = j.at("sentences").get<std::vector<std::vector<TokenId>>>();
      if (headline.empty() || headline.size() > ds.limits.max_headline_words ||
          sentences.empty() || sentences.size() > ds.limits.max_sentences) {
        fail("lengths outside the header limits");
      }
      a.headline_ids.assign(ds.limits.max_headline_words, kPadId);
      std::copy(headline.begin(), headline.end(), a.headline_ids.begin());
      a.headline_len = headline.size();
      const std::size_t w = ds.limits.max_words_per_sentence;
      a.sentence_ids.assign(ds.limits.max_sentences * w, kPadId);
      a.sentence_lens.assign(ds.limits.max_sentences, 0);
      a.n_sentences = sentences.size();
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (sentences[i].size() > w) fail("sentence longer than the header limit");
        std::copy(sentences[i].begin(), sentences[i].end(), a.sentence_ids.begin() + i * w);
        a.sentence_lens[i] = sentences[i].size();
      }
      for (auto id : a.headline_ids)
        if (id >= ds.vocab_size) fail("token id beyond vocabulary size");
      for (auto id : a.sentence_ids)
        if (id >= ds.vocab_size) fail("token id beyond vocabulary size");
      ds.articles.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    fail(e.what());
  }
  return ds;
}

}  // namespace han3
