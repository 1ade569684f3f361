#include "han3/layers.hpp"

#include <algorithm>
#include <cmath>

#include "han3/errors.hpp"

namespace han3 {

void init_uniform(Parameter& p, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.value) {
    do {
      v = dist(rng);
    } while (v == -bound);
  }
}

namespace {

void require_positive(std::size_t v, const char* what) {
  if (v == 0) throw ConfigError(std::string(what) + " must be positive");
}

}  // namespace

// ---- GruCell ------------------------------------------------------------

GruCell::GruCell(const std::string& prefix, std::size_t input, std::size_t hidden)
    : input_dim(input),
      hidden_dim(hidden),
      W_z(prefix + ".W_z", {hidden, input}),
      W_r(prefix + ".W_r", {hidden, input}),
      W_h(prefix + ".W_h", {hidden, input}),
      U_z(prefix + ".U_z", {hidden, hidden}),
      U_r(prefix + ".U_r", {hidden, hidden}),
      U_h(prefix + ".U_h", {hidden, hidden}),
      b_z(prefix + ".b_z", {hidden}),
      b_r(prefix + ".b_r", {hidden}),
      b_h(prefix + ".b_h", {hidden}) {
  require_positive(input, "GRU input dimension");
  require_positive(hidden, "GRU hidden dimension");
}

void GruCell::init(Rng& rng) {
  const double wx = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double wh = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  init_uniform(W_z, wx, rng);
  init_uniform(W_r, wx, rng);
  init_uniform(W_h, wx, rng);
  init_uniform(U_z, wh, rng);
  init_uniform(U_r, wh, rng);
  init_uniform(U_h, wh, rng);
  for (auto* b : {&b_z, &b_r, &b_h}) std::fill(b->value.begin(), b->value.end(), 0.0);
}

std::vector<Parameter*> GruCell::parameters() {
  return {&W_z, &W_r, &W_h, &U_z, &U_r, &U_h, &b_z, &b_r, &b_h};
}

// ---- AttentionLayer -----------------------------------------------------

AttentionLayer::AttentionLayer(const std::string& prefix, std::size_t ann,
                               std::size_t att)
    : annotation_dim(ann),
      attention_dim(att),
      W(prefix + ".W", {att, ann}),
      b(prefix + ".b", {att}),
      u(prefix + ".u", {att}) {
  require_positive(ann, "annotation dimension");
  require_positive(att, "attention dimension");
}

void AttentionLayer::init(Rng& rng) {
  init_uniform(W, 1.0 / std::sqrt(static_cast<double>(annotation_dim)), rng);
  std::fill(b.value.begin(), b.value.end(), 0.0);
  init_uniform(u, 0.25, rng);
}

std::vector<Parameter*> AttentionLayer::parameters() { return {&W, &b, &u}; }

// ---- EmbeddingTable -----------------------------------------------------

EmbeddingTable::EmbeddingTable(const std::string& name, std::size_t vocab,
                               std::size_t dim)
    : W_e(name, {vocab, dim}) {
  require_positive(vocab, "vocabulary size");
  require_positive(dim, "embedding dimension");
}

std::span<const double> EmbeddingTable::row(TokenId id) const {
  if (id >= vocab_size()) {
    throw ContractError("embedding id " + std::to_string(id) +
                        " out of range for vocabulary of " +
                        std::to_string(vocab_size()));
  }
  return std::span<const double>(W_e.value).subspan(id * dim(), dim());
}

void EmbeddingTable::init(Rng& rng) {
  init_uniform(W_e, 0.25, rng);
  std::fill_n(W_e.value.begin() + kPadId * dim(), dim(), 0.0);
}

// ---- Classifier ---------------------------------------------------------

Classifier::Classifier(const std::string& prefix, std::size_t input)
    : W_c(prefix + ".W_c", {input}), b_c(prefix + ".b_c", {1}) {
  require_positive(input, "classifier input dimension");
}

void Classifier::init(Rng& rng) {
  init_uniform(W_c, 1.0 / std::sqrt(static_cast<double>(W_c.size())), rng);
  b_c.value[0] = 0.0;
}

// ---- operations ---------------------------------------------------------

Var gru_step(Tape& tape, GruCell& cell, Var x, Var h_prev) {
  if (x.shape() != Shape{cell.input_dim} || h_prev.shape() != Shape{cell.hidden_dim}) {
    throw DimensionError("gru_step: cell expects input " +
                         shape_string({cell.input_dim}) + " and state " +
                         shape_string({cell.hidden_dim}) + ", got " +
                         shape_string(x.shape()) + " and " +
                         shape_string(h_prev.shape()));
  }
  auto gate = [&](Parameter& W, Parameter& U, Parameter& b, Var h) {
    return add(add(matvec(tape.param(W), x), matvec(tape.param(U), h)), tape.param(b));
  };
  Var z = sigmoid(gate(cell.W_z, cell.U_z, cell.b_z, h_prev));
  Var r = sigmoid(gate(cell.W_r, cell.U_r, cell.b_r, h_prev));
  Var candidate = tanh(gate(cell.W_h, cell.U_h, cell.b_h, hadamard(r, h_prev)));
  // (1 - z) ⊙ h_prev + z ⊙ candidate, written as h_prev + z ⊙ (candidate - h_prev).
  return add(h_prev, hadamard(z, sub(candidate, h_prev)));
}

std::vector<Var> gru_run(Tape& tape, GruCell& cell, std::span<const Var> sequence) {
  if (sequence.empty()) throw ContractError("gru_run: empty sequence");
  std::vector<Var> states;
  states.reserve(sequence.size());
  Var h = tape.constant({cell.hidden_dim}, std::vector<double>(cell.hidden_dim, 0.0));
  for (const auto& x : sequence) {
    h = gru_step(tape, cell, x, h);
    states.push_back(h);
  }
  return states;
}

std::vector<Var> bigru_run(Tape& tape, GruCell& fwd, GruCell& bwd,
                           std::span<const Var> sequence) {
  if (sequence.empty()) throw ContractError("bigru_run: empty sequence");
  if (fwd.input_dim != bwd.input_dim || fwd.hidden_dim != bwd.hidden_dim) {
    throw DimensionError("bigru_run: forward and backward cells differ in shape");
  }
  const std::size_t T = sequence.size();
  auto forward_states = gru_run(tape, fwd, sequence);
  std::vector<Var> reversed(sequence.rbegin(), sequence.rend());
  auto backward_states = gru_run(tape, bwd, reversed);
  std::vector<Var> annotations;
  annotations.reserve(T);
  for (std::size_t j = 0; j < T; ++j) {
    annotations.push_back(concat(forward_states[j], backward_states[T - 1 - j]));
  }
  return annotations;
}

Pooled attention_pool(Tape& tape, AttentionLayer& layer,
                      std::span<const Var> annotations) {
  if (annotations.empty()) throw ContractError("attention_pool: no annotations");
  Var W = tape.param(layer.W);
  Var b = tape.param(layer.b);
  Var u = tape.param(layer.u);
  std::vector<Var> scores;
  scores.reserve(annotations.size());
  for (const auto& h : annotations) {
    if (h.shape() != Shape{layer.annotation_dim}) {
      throw DimensionError("attention_pool: annotation " + shape_string(h.shape()) +
                           " for layer expecting " +
                           shape_string({layer.annotation_dim}));
    }
    scores.push_back(dot(tanh(add(matvec(W, h), b)), u));
  }
  const std::size_t n = annotations.size();
  Var alpha = softmax(reshape(stack(scores), {n}));
  std::vector<Var> rows(annotations.begin(), annotations.end());
  Var context = matvec(transpose(stack(rows)), alpha);
  auto a = alpha.value();
  return {context, std::vector<double>(a.begin(), a.end())};
}

Var average_pool(std::span<const Var> annotations) {
  if (annotations.empty()) throw ContractError("average_pool: no annotations");
  return mean_rows(stack(std::vector<Var>(annotations.begin(), annotations.end())));
}

Var max_pool(std::span<const Var> annotations) {
  if (annotations.empty()) throw ContractError("max_pool: no annotations");
  return max_rows(stack(std::vector<Var>(annotations.begin(), annotations.end())));
}

std::vector<Var> embed(Tape& tape, EmbeddingTable& table, std::span<const TokenId> ids) {
  static constexpr std::size_t kFrozen[] = {kPadId};
  std::vector<Var> out;
  out.reserve(ids.size());
  for (auto id : ids) {
    if (id >= table.vocab_size()) {
      throw ContractError("embed: id " + std::to_string(id) +
                          " out of range for vocabulary of " +
                          std::to_string(table.vocab_size()));
    }
    out.push_back(gather_row(tape, table.W_e, id, kFrozen));
  }
  return out;
}

Var classify(Tape& tape, Classifier& classifier, Var v) {
  if (v.shape() != classifier.W_c.shape) {
    throw DimensionError("classify: expects " + shape_string(classifier.W_c.shape) +
                         ", got " + shape_string(v.shape()));
  }
  return sigmoid(add(dot(tape.param(classifier.W_c), v), tape.param(classifier.b_c)));
}

double bce_value(double q, double label) {
  const double qc = std::clamp(q, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -(label * std::log(qc) + (1.0 - label) * std::log(1.0 - qc));
}

Var bce_loss(Var q, double label) {
  if (q.size() != 1) {
    throw DimensionError("bce_loss: expects a single probability, got " +
                         shape_string(q.shape()));
  }
  const double qc = std::clamp(q.item(), kProbabilityClamp, 1.0 - kProbabilityClamp);
  const double loss = bce_value(qc, label);
  const auto iq = q.id();
  return q.tape().record({1}, {loss}, {q}, [iq, qc, label](Tape& t, std::uint32_t self) {
    const double g = t.upstream(self)[0];
    t.grad_buffer(iq)[0] += g * (-label / qc + (1.0 - label) / (1.0 - qc));
  });
}

}  // namespace han3
