#pragma once

// Neural building blocks of the hierarchical attention network: GRU cell and
// bidirectional runner, relevance-vector attention, pooling, embeddings, the
// sigmoid classifier and binary cross-entropy.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "han3/tensor.hpp"

namespace han3 {

using TokenId = std::uint32_t;
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;

using Rng = std::mt19937_64;

/// Fills `p` with uniform(-bound, bound) draws.
void init_uniform(Parameter& p, double bound, Rng& rng);

struct GruCell {
  GruCell() = default;
  GruCell(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);

  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Parameter W_z, W_r, W_h;  // [hidden × input]
  Parameter U_z, U_r, U_h;  // [hidden × hidden]
  Parameter b_z, b_r, b_h;  // [hidden]

  /// uniform(±1/sqrt(fan_in)) matrices, zero biases.
  void init(Rng& rng);
  std::vector<Parameter*> parameters();
};

struct AttentionLayer {
  AttentionLayer() = default;
  AttentionLayer(const std::string& prefix, std::size_t annotation_dim,
                 std::size_t attention_dim);

  std::size_t annotation_dim = 0;
  std::size_t attention_dim = 0;
  Parameter W;  // [att × ann]
  Parameter b;  // [att]
  Parameter u;  // relevance vector [att]

  void init(Rng& rng);
  std::vector<Parameter*> parameters();
};

/// Word vectors; row kPadId is held at zero and never updated.
struct EmbeddingTable {
  EmbeddingTable() = default;
  EmbeddingTable(const std::string& name, std::size_t vocab_size, std::size_t dim);

  Parameter W_e;  // [vocab × dim]

  std::size_t vocab_size() const { return W_e.shape.empty() ? 0 : W_e.shape[0]; }
  std::size_t dim() const { return W_e.shape.size() < 2 ? 0 : W_e.shape[1]; }
  std::span<const double> row(TokenId id) const;

  /// uniform(-0.25, 0.25) everywhere except the PAD row.
  void init(Rng& rng);
  std::vector<Parameter*> parameters() { return {&W_e}; }
};

struct Classifier {
  Classifier() = default;
  Classifier(const std::string& prefix, std::size_t input_dim);

  Parameter W_c;  // [input]
  Parameter b_c;  // [1]

  void init(Rng& rng);
  std::vector<Parameter*> parameters() { return {&W_c, &b_c}; }
};

/// One GRU transition h_{t-1} -> h_t.
Var gru_step(Tape& tape, GruCell& cell, Var x, Var h_prev);

/// Hidden state after each input, starting from a zero state.
std::vector<Var> gru_run(Tape& tape, GruCell& cell, std::span<const Var> sequence);

/// Annotation j is [forward state after x_1..x_j, backward state after
/// x_T..x_j]; each has dimension 2·hidden.
std::vector<Var> bigru_run(Tape& tape, GruCell& fwd, GruCell& bwd,
                           std::span<const Var> sequence);

struct Pooled {
  Var context;
  std::vector<double> weights;
};

/// Relevance-vector attention: u_j = tanh(W h_j + b), alpha = softmax(u_j·u),
/// context = sum_j alpha_j h_j.
Pooled attention_pool(Tape& tape, AttentionLayer& layer,
                      std::span<const Var> annotations);
Var average_pool(std::span<const Var> annotations);
Var max_pool(std::span<const Var> annotations);

std::vector<Var> embed(Tape& tape, EmbeddingTable& table, std::span<const TokenId> ids);

/// sigmoid(W_c · v + b_c) as a one-element tensor.
Var classify(Tape& tape, Classifier& classifier, Var v);

inline constexpr double kProbabilityClamp = 1e-12;

/// -[p ln q + (1-p) ln(1-q)] with q clamped to [1e-12, 1-1e-12].
Var bce_loss(Var q, double label);
double bce_value(double q, double label);

}  // namespace han3
