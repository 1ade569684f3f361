#pragma once

// Standalone HTML attention heatmap: headline shaded by its attention
// weights, the top sentences by sentence weight with their first words shaded
// by sqrt(alpha_s) * alpha_w, and the raw trace in a comment block.

#include <string>
#include <vector>

#include "han3/model.hpp"

namespace han3 {

struct HeatmapOptions {
  std::size_t top_sentences = 5;
  std::size_t words_shown = 8;
};

struct HeatmapInput {
  /// Display text per headline position (as many as there are weights,
  /// body-vector slot included). Empty entries are not drawn.
  std::vector<std::string> headline;
  /// Display text per body row, one entry per word position.
  std::vector<std::vector<std::string>> sentences;
  /// Rows of `sentences` eligible for display (the real, unpadded ones).
  std::size_t real_sentences = 0;
  /// Index of the first body row in the trace's word/sentence families
  /// (1 for HAN, whose row 0 is the headline).
  std::size_t row_offset = 0;
  double probability = 0.5;
  AttentionTrace trace;
};

/// Opening marker of the embedded trace; the JSON follows on the next line.
inline constexpr const char* kTraceMarker = "<!-- han3-trace";

std::string render_heatmap(const HeatmapInput& input, const HeatmapOptions& options = {});

/// Serializes a trace as JSON; doubles round-trip exactly.
std::string trace_json(const AttentionTrace& trace, double probability);
/// Inverse of trace_json.
AttentionTrace parse_trace_json(const std::string& text, double* probability = nullptr);

}  // namespace han3
