#include "han3/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "han3/errors.hpp"
#include "json.hpp"

namespace han3 {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// Red wash whose opacity is the weight relative to the family maximum.
std::string shade(double weight, double max_weight) {
  const double a = max_weight > 0 ? weight / max_weight : 0.0;
  char buf[96];
  std::snprintf(buf, sizeof buf, "background-color:rgba(214,39,40,%.4f);padding:1px 3px;", a);
  return buf;
}

}  // namespace

std::string trace_json(const AttentionTrace& trace, double probability) {
  nlohmann::json j;
  j["probability"] = probability;
  j["word_weights"] = trace.word_weights;
  j["sentence_weights"] = trace.sentence_weights;
  j["headline_weights"] = trace.headline_weights;
  return j.dump();
}

AttentionTrace parse_trace_json(const std::string& text, double* probability) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("trace: ") + e.what(), e.byte);
  }
  AttentionTrace trace;
  trace.word_weights = j.at("word_weights").get<std::vector<std::vector<double>>>();
  trace.sentence_weights = j.at("sentence_weights").get<std::vector<double>>();
  trace.headline_weights = j.at("headline_weights").get<std::vector<double>>();
  if (probability) *probability = j.at("probability").get<double>();
  return trace;
}

std::string render_heatmap(const HeatmapInput& input, const HeatmapOptions& options) {
  const auto& trace = input.trace;
  if (trace.sentence_weights.empty() || trace.word_weights.empty()) {
    throw ContractError("heatmap: trace has no attention weights");
  }
  if (input.real_sentences > input.sentences.size() ||
      input.row_offset + input.sentences.size() > trace.sentence_weights.size()) {
    throw DimensionError("heatmap: more sentences than sentence weights");
  }

  std::string html;
  html += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  html += "<title>attention heatmap</title>\n</head>\n";
  html += "<body style=\"font-family:sans-serif;margin:2em;\">\n";
  {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.4f", input.probability);
    html += "<p style=\"font-size:1.1em;\">P(fake) = <b>" + std::string(buf) + "</b> (" +
            (predicted_label(input.probability) == kFake ? "fake" : "genuine") + ")</p>\n";
  }

  // headline
  const auto& beta = trace.headline_weights;
  if (!beta.empty()) {
    if (input.headline.size() > beta.size()) {
      throw DimensionError("heatmap: more headline tokens than headline weights");
    }
    const double max_beta = *std::max_element(beta.begin(), beta.end());
    html += "<p style=\"font-size:1.3em;\">";
    for (std::size_t i = 0; i < input.headline.size(); ++i) {
      if (input.headline[i].empty()) continue;
      html += "<span data-family=\"headline\" data-position=\"" + std::to_string(i) +
              "\" data-weight=\"" + g17(beta[i]) + "\" style=\"" + shade(beta[i], max_beta) +
              "\">" + escape(input.headline[i]) + "</span> ";
    }
    html += "</p>\n";
  }

  // sentences ranked by alpha_s
  std::vector<std::size_t> rows(input.real_sentences);
  std::iota(rows.begin(), rows.end(), 0);
  auto alpha_s = [&](std::size_t row) { return trace.sentence_weights[input.row_offset + row]; };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](std::size_t a, std::size_t b) { return alpha_s(a) > alpha_s(b); });
  if (rows.size() > options.top_sentences) rows.resize(options.top_sentences);

  struct Cell {
    std::size_t row, position;
    double weight;
  };
  std::vector<Cell> cells;
  double max_word = 0.0, max_sentence = 0.0;
  for (auto row : rows) {
    const auto& words = trace.word_weights.at(input.row_offset + row);
    const std::size_t shown = std::min({options.words_shown, input.sentences[row].size(), words.size()});
    for (std::size_t p = 0; p < shown; ++p) {
      const double w = std::sqrt(alpha_s(row)) * words[p];
      cells.push_back({row, p, w});
      max_word = std::max(max_word, w);
    }
    max_sentence = std::max(max_sentence, alpha_s(row));
  }

  html += "<table style=\"border-collapse:collapse;\">\n";
  std::size_t next = 0;
  for (auto row : rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", alpha_s(row));
    html += "<tr><td data-family=\"sentence\" data-row=\"" + std::to_string(input.row_offset + row) +
            "\" data-weight=\"" + g17(alpha_s(row)) + "\" style=\"" +
            shade(alpha_s(row), max_sentence) + "font-family:monospace;\">" + buf + "</td><td>";
    for (; next < cells.size() && cells[next].row == row; ++next) {
      const auto& c = cells[next];
      html += "<span data-family=\"word\" data-row=\"" + std::to_string(input.row_offset + c.row) +
              "\" data-position=\"" + std::to_string(c.position) + "\" data-weight=\"" +
              g17(c.weight) + "\" style=\"" + shade(c.weight, max_word) + "\">" +
              escape(input.sentences[row][c.position]) + "</span> ";
    }
    html += "</td></tr>\n";
  }
  html += "</table>\n";

  html += std::string(kTraceMarker) + "\n" + trace_json(trace, input.probability) + "\n-->\n";
  html += "</body>\n</html>\n";
  return html;
}

}  // namespace han3
