#include "han3/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "han3/errors.hpp"

namespace han3 {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T number(const std::string& key, const std::string& text) {
  T out{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("bad value '" + text + "' for " + key);
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool RunConfig::set(const std::string& key, const std::string& value) {
  using Size = std::size_t;
  if (model.parse_entry(key, value)) return true;
  if (key == "train_ratio") split.train = number<double>(key, value);
  else if (key == "val_ratio") split.val = number<double>(key, value);
  else if (key == "test_ratio") split.test = number<double>(key, value);
  else if (key == "synth_per_class") synth.per_class = number<Size>(key, value);
  else if (key == "synth_shared_vocab") synth.shared_vocab = number<Size>(key, value);
  else if (key == "synth_class_vocab") synth.class_vocab = number<Size>(key, value);
  else if (key == "synth_topics") synth.topics = number<Size>(key, value);
  else if (key == "synth_topic_vocab") synth.topic_vocab = number<Size>(key, value);
  else if (key == "synth_topic_rate") synth.topic_rate = number<double>(key, value);
  else if (key == "synth_class_signal") synth.class_signal = number<double>(key, value);
  else if (key == "synth_headline_cue") synth.headline_cue = number<double>(key, value);
  else if (key == "synth_phi") synth.phi = number<double>(key, value);
  else if (key == "synth_min_sentences") synth.min_sentences = number<Size>(key, value);
  else if (key == "synth_max_sentences") synth.max_sentences = number<Size>(key, value);
  else if (key == "synth_min_words") synth.min_words = number<Size>(key, value);
  else if (key == "synth_max_words") synth.max_words = number<Size>(key, value);
  else if (key == "synth_min_headline_words") synth.min_headline_words = number<Size>(key, value);
  else if (key == "synth_max_headline_words") synth.max_headline_words = number<Size>(key, value);
  else if (key == "feature_mode") feature_mode = parse_feature_mode(value);
  else if (key == "max_features") features.max_features = number<Size>(key, value);
  else if (key == "n_max") features.n_max = number<Size>(key, value);
  else if (key == "logreg_epochs") logreg_epochs = number<Size>(key, value);
  else if (key == "corpus") corpus = value;
  else if (key == "data_dir") data_dir = value;
  else if (key == "vocab") vocab = value;
  else if (key == "embeddings") embeddings = value;
  else if (key == "checkpoint") checkpoint = value;
  else if (key == "init_from") init_from = value;
  else if (key == "initial_checkpoint") initial_checkpoint = value;
  else if (key == "history") history = value;
  else if (key == "dataset") dataset = value;
  else if (key == "input") input = value;
  else if (key == "output") output = value;
  else if (key == "top_sentences") top_sentences = number<Size>(key, value);
  else if (key == "words_shown") words_shown = number<Size>(key, value);
  else return false;
  return true;
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  auto out = model.entries();
  auto add = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
  add("train_ratio", fmt(split.train));
  add("val_ratio", fmt(split.val));
  add("test_ratio", fmt(split.test));
  add("synth_per_class", std::to_string(synth.per_class));
  add("synth_shared_vocab", std::to_string(synth.shared_vocab));
  add("synth_class_vocab", std::to_string(synth.class_vocab));
  add("synth_topics", std::to_string(synth.topics));
  add("synth_topic_vocab", std::to_string(synth.topic_vocab));
  add("synth_topic_rate", fmt(synth.topic_rate));
  add("synth_class_signal", fmt(synth.class_signal));
  add("synth_headline_cue", fmt(synth.headline_cue));
  add("synth_phi", fmt(synth.phi));
  add("synth_min_sentences", std::to_string(synth.min_sentences));
  add("synth_max_sentences", std::to_string(synth.max_sentences));
  add("synth_min_words", std::to_string(synth.min_words));
  add("synth_max_words", std::to_string(synth.max_words));
  add("synth_min_headline_words", std::to_string(synth.min_headline_words));
  add("synth_max_headline_words", std::to_string(synth.max_headline_words));
  add("feature_mode", feature_mode_name(feature_mode));
  add("max_features", std::to_string(features.max_features));
  add("n_max", std::to_string(features.n_max));
  add("logreg_epochs", std::to_string(logreg_epochs));
  add("corpus", corpus);
  add("data_dir", data_dir);
  add("vocab", vocab);
  add("embeddings", embeddings);
  add("checkpoint", checkpoint);
  add("init_from", init_from);
  add("initial_checkpoint", initial_checkpoint);
  add("history", history);
  add("dataset", dataset);
  add("input", input);
  add("output", output);
  add("top_sentences", std::to_string(top_sentences));
  add("words_shown", std::to_string(words_shown));
  return out;
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (auto& [k, v] : RunConfig{}.entries()) out.push_back(k);
  return out;
}

void RunConfig::apply_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (!set(key, value)) {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_text(buffer.str(), path);
}

void RunConfig::validate() const {
  model.validate();
  if (split.train < 0 || split.val < 0 || split.test < 0 ||
      std::abs(split.train + split.val + split.test - 1.0) > 1e-9) {
    throw ConfigError("train_ratio + val_ratio + test_ratio must equal 1");
  }
  if (top_sentences == 0 || words_shown == 0) {
    throw ConfigError("top_sentences and words_shown must be positive");
  }
  if (features.max_features == 0 || features.n_max == 0) {
    throw ConfigError("max_features and n_max must be positive");
  }
}

std::string RunConfig::vocab_path() const {
  return vocab.empty() ? data_dir + "/vocab.tsv" : vocab;
}

std::string RunConfig::split_path(const std::string& part) const {
  return data_dir + "/" + part + ".jsonl";
}

}  // namespace han3
