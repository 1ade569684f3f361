#pragma once

// Dense double-precision tensors recorded on a define-by-run tape, plus the
// SGD-with-momentum optimizer that consumes the resulting gradients.
//
// A Tape is rebuilt for every forward pass. Parameters live outside the tape
// and are bound to it on first use; backward() accumulates straight into
// Parameter::grad, so several tapes (one per article of a mini-batch) can add
// their contributions before a single optimizer step.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace han3 {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// A named trainable array that outlives any single tape.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Shape shape);

  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool trainable = true;

  std::size_t size() const { return value.size(); }
  void zero_grad();
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Shape& shape() const;
  std::size_t size() const;
  std::span<const double> value() const;
  std::span<const double> grad() const;
  double item() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  /// With gradients disabled nothing is recorded for the backward sweep;
  /// used for inference.
  explicit Tape(bool gradients_enabled) : gradients_enabled_(gradients_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// A leaf that never receives gradient.
  Var constant(Shape shape, std::vector<double> values);
  /// A leaf owned by the tape; its gradient is readable through Var::grad().
  Var leaf(Shape shape, std::vector<double> values, bool requires_grad = true);
  /// Binds a parameter. Repeated calls with the same parameter return the
  /// same node; gradients accumulate into parameter.grad.
  Var param(Parameter& parameter);

  /// Records an operation result. `backward` is dropped when no input needs
  /// gradient.
  Var record(Shape shape, std::vector<double> values,
             std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Shape shape, std::vector<double> values,
             const std::vector<Var>& inputs, BackwardFn backward);

  /// A gradient-carrying node without tape inputs; `backward` forwards its
  /// gradient to storage outside the tape.
  Var external(Shape shape, std::vector<double> values, BackwardFn backward);

  /// Reverse sweep from a single-element loss.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  const Shape& shape(std::uint32_t id) const { return nodes_[id].shape; }
  std::span<const double> value(std::uint32_t id) const;
  std::span<const double> grad(std::uint32_t id) const;
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  /// Mutable gradient buffer for use inside backward rules. Allocated zeroed
  /// on first access.
  std::span<double> grad_buffer(std::uint32_t id);
  /// Gradient flowing into `id` during the sweep (empty when none arrived).
  std::span<const double> upstream(std::uint32_t id) const;

 private:
  struct Node {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    Parameter* parameter = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Node node);

  bool gradients_enabled_ = true;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::uint32_t> bound_;
};

// ---- operations ---------------------------------------------------------

/// C[m×n] = A[m×k] · B[k×n].
Var matmul(Var a, Var b);
/// y[m] = A[m×k] · x[k].
Var matvec(Var a, Var x);
Var transpose(Var a);
/// Same values, new shape of equal element count.
Var reshape(Var a, Shape shape);

enum class ElementwiseOp { Add, Sub, Hadamard };
Var elementwise(ElementwiseOp op, Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double factor);

enum class Activation { Sigmoid, Tanh };
Var activation(Activation op, Var x);
Var sigmoid(Var x);
Var tanh(Var x);

/// Max-subtracted softmax over a one-dimensional tensor.
Var softmax(Var v);
Var concat(Var a, Var b);
Var dot(Var a, Var b);
Var sum(Var a);
/// Stacks n equally sized one-dimensional tensors into an [n×d] matrix.
Var stack(const std::vector<Var>& rows);
/// Row `index` of a 2-D tensor as a one-dimensional tensor.
Var row(Var matrix, std::size_t index);
Var mean_rows(Var matrix);
/// Column-wise maximum; ties route gradient to the first maximal row.
Var max_rows(Var matrix);
/// Row `index` of a [rows×d] parameter, without binding the whole table.
/// Rows listed in `frozen_rows` never receive gradient.
Var gather_row(Tape& tape, Parameter& table, std::size_t index,
               std::span<const std::size_t> frozen_rows = {});

// ---- optimizer ----------------------------------------------------------

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
};

/// Classical momentum: v <- momentum*v + g; p <- p - lr*v.
class SgdMomentum {
 public:
  explicit SgdMomentum(SgdConfig config);
  SgdMomentum(SgdConfig config, std::vector<Parameter*> params);

  void add_parameter(Parameter& parameter);
  /// Applies one update to every registered parameter, then clears grads.
  void step();
  void zero_grad();

  const SgdConfig& config() const { return config_; }
  std::span<const double> velocity(const Parameter& parameter) const;

 private:
  SgdConfig config_;
  std::vector<Parameter*> params_;
  std::vector<std::vector<double>> velocity_;
};

}  // namespace han3
