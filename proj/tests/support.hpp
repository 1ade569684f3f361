#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "han3/data.hpp"
#include "han3/model.hpp"
#include "han3/tensor.hpp"

namespace testing {

/// ||a - n|| / max(||a||, ||n||, 1e-8)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& n) {
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-8});
}

using LeafFn = std::function<han3::Var(han3::Tape&, const std::vector<han3::Var>&)>;

/// Central-difference check of d loss / d leaf for tape leaves. Returns the
/// worst per-leaf relative error.
inline double leaf_grad_check(const std::vector<han3::Shape>& shapes,
                              std::vector<std::vector<double>> values, const LeafFn& loss,
                              double h = 1e-5) {
  auto run = [&](bool backward, std::vector<std::vector<double>>* grads) {
    han3::Tape tape;
    std::vector<han3::Var> leaves;
    for (std::size_t i = 0; i < shapes.size(); ++i) leaves.push_back(tape.leaf(shapes[i], values[i]));
    auto l = loss(tape, leaves);
    if (backward) {
      tape.backward(l);
      for (auto& v : leaves) grads->emplace_back(v.grad().begin(), v.grad().end());
    }
    return l.item();
  };
  std::vector<std::vector<double>> analytic;
  run(true, &analytic);
  double worst = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::vector<double> numeric(values[i].size());
    for (std::size_t k = 0; k < values[i].size(); ++k) {
      const double x = values[i][k];
      values[i][k] = x + h;
      const double up = run(false, nullptr);
      values[i][k] = x - h;
      const double down = run(false, nullptr);
      values[i][k] = x;
      numeric[k] = (up - down) / (2 * h);
    }
    std::vector<double> a = analytic[i];
    if (a.empty()) a.assign(values[i].size(), 0.0);
    worst = std::max(worst, relative_error(a, numeric));
  }
  return worst;
}

struct ParamError {
  std::string name;
  double error;
};

/// Same check over parameters; `skip` excludes elements (e.g. the frozen PAD
/// row) from both sides.
inline std::vector<ParamError> param_grad_check(
    const std::vector<han3::Parameter*>& params, const std::function<han3::Var(han3::Tape&)>& loss,
    double h = 1e-5,
    const std::function<bool(const han3::Parameter&, std::size_t)>& skip = {}) {
  for (auto* p : params) p->zero_grad();
  {
    han3::Tape tape;
    tape.backward(loss(tape));
  }
  auto value = [&] {
    han3::Tape tape;
    return loss(tape).item();
  };
  std::vector<ParamError> out;
  for (auto* p : params) {
    std::vector<double> a, n;
    for (std::size_t k = 0; k < p->size(); ++k) {
      if (skip && skip(*p, k)) continue;
      const double x = p->value[k];
      p->value[k] = x + h;
      const double up = value();
      p->value[k] = x - h;
      const double down = value();
      p->value[k] = x;
      a.push_back(p->grad[k]);
      n.push_back((up - down) / (2 * h));
    }
    out.push_back({p->name, relative_error(a, n)});
    p->zero_grad();
  }
  return out;
}

inline bool skip_pad_row(const han3::Parameter& p, std::size_t k) {
  return p.shape.size() == 2 && p.name == "embedding" && k < p.shape[1];
}

/// Builds a padded article from explicit id lists.
inline han3::EncodedArticle make_article(const std::vector<han3::TokenId>& headline,
                                         const std::vector<std::vector<han3::TokenId>>& sentences,
                                         const han3::EncodeLimits& limits, int label = han3::kFake) {
  han3::EncodedArticle a;
  a.limits = limits;
  a.label = label;
  a.headline_ids.assign(limits.max_headline_words, han3::kPadId);
  std::copy(headline.begin(), headline.end(), a.headline_ids.begin());
  a.headline_len = headline.size();
  const std::size_t w = limits.max_words_per_sentence;
  a.sentence_ids.assign(limits.max_sentences * w, han3::kPadId);
  a.sentence_lens.assign(limits.max_sentences, 0);
  a.n_sentences = sentences.size();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::copy(sentences[i].begin(), sentences[i].end(), a.sentence_ids.begin() + i * w);
    a.sentence_lens[i] = sentences[i].size();
  }
  return a;
}

/// Random article whose lengths fill between 1 and the limits.
inline han3::EncodedArticle random_article(std::mt19937_64& rng, std::size_t vocab,
                                           const han3::EncodeLimits& limits) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  auto word = [&] { return static_cast<han3::TokenId>(pick(1, vocab - 1)); };
  std::vector<han3::TokenId> head(pick(1, limits.max_headline_words));
  for (auto& t : head) t = word();
  std::vector<std::vector<han3::TokenId>> body(pick(1, limits.max_sentences));
  for (auto& s : body) {
    s.resize(pick(1, limits.max_words_per_sentence));
    for (auto& t : s) t = word();
  }
  return make_article(head, body, limits, static_cast<int>(pick(0, 1)));
}

inline han3::ModelConfig tiny_config(han3::Architecture arch = han3::Architecture::ThreeHan) {
  han3::ModelConfig c;
  c.embed_dim = 4;
  c.gru_hidden = 2;
  c.att_dim = 4;
  c.flat_gru_hidden = 3;
  c.max_words_per_sentence = 3;
  c.max_sentences = 2;
  c.max_headline_words = 2;
  c.architecture = arch;
  c.seed = 7;
  return c;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("han3_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace testing
