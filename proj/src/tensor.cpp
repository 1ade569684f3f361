#include "han3/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "han3/errors.hpp"

namespace han3 {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << "x";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Parameter::Parameter(std::string name_, Shape shape_)
    : name(std::move(name_)), shape(std::move(shape_)) {
  value.assign(element_count(shape), 0.0);
  grad.assign(value.size(), 0.0);
}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

// ---- Var ----------------------------------------------------------------

const Shape& Var::shape() const { return tape_->shape(id_); }
std::size_t Var::size() const { return tape_->value(id_).size(); }
std::span<const double> Var::value() const { return tape_->value(id_); }
std::span<const double> Var::grad() const { return tape_->grad(id_); }

double Var::item() const {
  auto v = value();
  if (v.size() != 1) {
    throw ContractError("item() on tensor of shape " + shape_string(shape()));
  }
  return v[0];
}

// ---- Tape ---------------------------------------------------------------

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(Shape shape, std::vector<double> values) {
  return leaf(std::move(shape), std::move(values), false);
}

Var Tape::leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (element_count(shape) != values.size()) {
    throw DimensionError("leaf shape " + shape_string(shape) + " holds " +
                         std::to_string(element_count(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  Node node;
  node.shape = std::move(shape);
  node.values = std::move(values);
  node.requires_grad = requires_grad && gradients_enabled_;
  return push(std::move(node));
}

Var Tape::param(Parameter& parameter) {
  if (auto it = bound_.find(&parameter); it != bound_.end()) {
    return Var(this, it->second);
  }
  if (element_count(parameter.shape) != parameter.value.size()) {
    throw DimensionError("parameter " + parameter.name + " shape " +
                         shape_string(parameter.shape) + " disagrees with " +
                         std::to_string(parameter.value.size()) + " values");
  }
  Node node;
  node.shape = parameter.shape;
  node.parameter = &parameter;
  node.requires_grad = parameter.trainable && gradients_enabled_;
  auto var = push(std::move(node));
  bound_.emplace(&parameter, var.id());
  return var;
}

Var Tape::record(Shape shape, std::vector<double> values,
                 std::initializer_list<Var> inputs, BackwardFn backward) {
  Node node;
  node.shape = std::move(shape);
  node.values = std::move(values);
  for (const auto& in : inputs) {
    if (nodes_[in.id()].requires_grad) node.requires_grad = true;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  return push(std::move(node));
}

Var Tape::record(Shape shape, std::vector<double> values,
                 const std::vector<Var>& inputs, BackwardFn backward) {
  Node node;
  node.shape = std::move(shape);
  node.values = std::move(values);
  for (const auto& in : inputs) {
    if (nodes_[in.id()].requires_grad) node.requires_grad = true;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  return push(std::move(node));
}

Var Tape::external(Shape shape, std::vector<double> values, BackwardFn backward) {
  Node node;
  node.shape = std::move(shape);
  node.values = std::move(values);
  node.requires_grad = gradients_enabled_;
  if (gradients_enabled_) node.backward = std::move(backward);
  return push(std::move(node));
}

std::span<const double> Tape::value(std::uint32_t id) const {
  const auto& node = nodes_[id];
  if (node.parameter) return node.parameter->value;
  return node.values;
}

std::span<const double> Tape::grad(std::uint32_t id) const {
  const auto& node = nodes_[id];
  if (node.parameter) return node.parameter->grad;
  return node.grad;
}

std::span<double> Tape::grad_buffer(std::uint32_t id) {
  auto& node = nodes_[id];
  if (node.parameter) {
    auto& g = node.parameter->grad;
    if (g.size() != node.parameter->value.size()) {
      g.assign(node.parameter->value.size(), 0.0);
    }
    return g;
  }
  if (node.grad.empty()) node.grad.assign(node.values.size(), 0.0);
  return node.grad;
}

std::span<const double> Tape::upstream(std::uint32_t id) const {
  return nodes_[id].grad;
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) {
    throw ContractError("backward: loss belongs to a different tape");
  }
  const auto root = loss.id();
  if (value(root).size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_string(shape(root)));
  }
  if (!nodes_[root].requires_grad) return;
  grad_buffer(root)[0] += 1.0;
  for (std::uint32_t id = root + 1; id-- > 0;) {
    auto& node = nodes_[id];
    if (!node.backward || node.grad.empty()) continue;
    node.backward(*this, id);
  }
}

// ---- operations ---------------------------------------------------------

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) {
    throw ContractError(std::string(op) + ": operands on different tapes");
  }
}

void require_rank(Var a, std::size_t rank, const char* op) {
  if (a.shape().size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got " +
                         shape_string(a.shape()));
  }
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions disagree " +
                         shape_string(a.shape()) + " · " +
                         shape_string(b.shape()));
  }
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * bv[p * n + j];
    }
  }
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(
      {m, n}, std::move(out), {a, b},
      [ia, ib, m, k, n](Tape& t, std::uint32_t self) {
        auto g = t.upstream(self);
        if (t.requires_grad(ia)) {
          auto bv = t.value(ib);
          auto ga = t.grad_buffer(ia);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
              ga[i * k + p] += acc;
            }
        }
        if (t.requires_grad(ib)) {
          auto av = t.value(ia);
          auto gb = t.grad_buffer(ib);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = av[i * k + p];
              for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
            }
        }
      });
}

Var matvec(Var a, Var x) {
  require_same_tape(a, x, "matvec");
  require_rank(a, 2, "matvec");
  require_rank(x, 1, "matvec");
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  if (x.shape()[0] != k) {
    throw DimensionError("matvec: inner dimensions disagree " +
                         shape_string(a.shape()) + " · " +
                         shape_string(x.shape()));
  }
  auto av = a.value();
  auto xv = x.value();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* rowp = av.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) acc += rowp[p] * xv[p];
    out[i] = acc;
  }
  const auto ia = a.id(), ix = x.id();
  return a.tape().record(
      {m}, std::move(out), {a, x}, [ia, ix, m, k](Tape& t, std::uint32_t self) {
        auto g = t.upstream(self);
        if (t.requires_grad(ia)) {
          auto xv = t.value(ix);
          auto ga = t.grad_buffer(ia);
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            double* rowp = ga.data() + i * k;
            for (std::size_t p = 0; p < k; ++p) rowp[p] += gi * xv[p];
          }
        }
        if (t.requires_grad(ix)) {
          auto av = t.value(ia);
          auto gx = t.grad_buffer(ix);
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = g[i];
            const double* rowp = av.data() + i * k;
            for (std::size_t p = 0; p < k; ++p) gx[p] += gi * rowp[p];
          }
        }
      });
}

Var transpose(Var a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  auto av = a.value();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  const auto ia = a.id();
  return a.tape().record({n, m}, std::move(out), {a},
                         [ia, m, n](Tape& t, std::uint32_t self) {
                           auto g = t.upstream(self);
                           auto ga = t.grad_buffer(ia);
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t j = 0; j < n; ++j)
                               ga[i * n + j] += g[j * m + i];
                         });
}

Var reshape(Var a, Shape shape) {
  if (element_count(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(a.shape()) +
                         " as " + shape_string(shape));
  }
  auto av = a.value();
  const auto ia = a.id();
  return a.tape().record(std::move(shape), std::vector<double>(av.begin(), av.end()),
                         {a}, [ia](Tape& t, std::uint32_t self) {
                           auto g = t.upstream(self);
                           auto ga = t.grad_buffer(ia);
                           for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                         });
}

Var elementwise(ElementwiseOp op, Var a, Var b) {
  require_same_tape(a, b, "elementwise");
  require_same_shape(a, b, "elementwise");
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> out(av.size());
  switch (op) {
    case ElementwiseOp::Add:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
      break;
    case ElementwiseOp::Sub:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
      break;
    case ElementwiseOp::Hadamard:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
      break;
  }
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(
      a.shape(), std::move(out), {a, b},
      [op, ia, ib](Tape& t, std::uint32_t self) {
        auto g = t.upstream(self);
        const std::size_t n = g.size();
        if (t.requires_grad(ia)) {
          auto ga = t.grad_buffer(ia);
          if (op == ElementwiseOp::Hadamard) {
            auto bv = t.value(ib);
            for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * bv[i];
          } else {
            for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
          }
        }
        if (t.requires_grad(ib)) {
          auto gb = t.grad_buffer(ib);
          switch (op) {
            case ElementwiseOp::Add:
              for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
              break;
            case ElementwiseOp::Sub:
              for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
              break;
            case ElementwiseOp::Hadamard: {
              auto av = t.value(ia);
              for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * av[i];
              break;
            }
          }
        }
      });
}

Var add(Var a, Var b) { return elementwise(ElementwiseOp::Add, a, b); }
Var sub(Var a, Var b) { return elementwise(ElementwiseOp::Sub, a, b); }
Var hadamard(Var a, Var b) { return elementwise(ElementwiseOp::Hadamard, a, b); }

Var scale(Var a, double factor) {
  auto av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
  const auto ia = a.id();
  return a.tape().record(a.shape(), std::move(out), {a},
                         [ia, factor](Tape& t, std::uint32_t self) {
                           auto g = t.upstream(self);
                           auto ga = t.grad_buffer(ia);
                           for (std::size_t i = 0; i < g.size(); ++i)
                             ga[i] += g[i] * factor;
                         });
}

Var activation(Activation op, Var x) {
  auto xv = x.value();
  std::vector<double> out(xv.size());
  if (op == Activation::Sigmoid) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      // Branches keep exp() from overflowing for large |x|.
      const double v = xv[i];
      if (v >= 0) {
        out[i] = 1.0 / (1.0 + std::exp(-v));
      } else {
        const double e = std::exp(v);
        out[i] = e / (1.0 + e);
      }
    }
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  }
  const auto ix = x.id();
  return x.tape().record(
      x.shape(), std::move(out), {x}, [op, ix](Tape& t, std::uint32_t self) {
        auto g = t.upstream(self);
        auto y = t.value(self);
        auto gx = t.grad_buffer(ix);
        if (op == Activation::Sigmoid) {
          for (std::size_t i = 0; i < g.size(); ++i)
            gx[i] += g[i] * y[i] * (1.0 - y[i]);
        } else {
          for (std::size_t i = 0; i < g.size(); ++i)
            gx[i] += g[i] * (1.0 - y[i] * y[i]);
        }
      });
}

Var sigmoid(Var x) { return activation(Activation::Sigmoid, x); }
Var tanh(Var x) { return activation(Activation::Tanh, x); }

Var softmax(Var v) {
  require_rank(v, 1, "softmax");
  auto xv = v.value();
  if (xv.empty()) throw DimensionError("softmax: empty input");
  const double peak = *std::max_element(xv.begin(), xv.end());
  std::vector<double> out(xv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(xv[i] - peak);
    total += out[i];
  }
  for (auto& o : out) o /= total;
  const auto iv = v.id();
  return v.tape().record(v.shape(), std::move(out), {v},
                         [iv](Tape& t, std::uint32_t self) {
                           auto g = t.upstream(self);
                           auto y = t.value(self);
                           double inner = 0.0;
                           for (std::size_t i = 0; i < g.size(); ++i)
                             inner += g[i] * y[i];
                           auto gv = t.grad_buffer(iv);
                           for (std::size_t i = 0; i < g.size(); ++i)
                             gv[i] += y[i] * (g[i] - inner);
                         });
}

Var concat(Var a, Var b) {
  require_same_tape(a, b, "concat");
  require_rank(a, 1, "concat");
  require_rank(b, 1, "concat");
  auto av = a.value();
  auto bv = b.value();
  const std::size_t na = av.size(), nb = bv.size();
  std::vector<double> out;
  out.reserve(na + nb);
  out.insert(out.end(), av.begin(), av.end());
  out.insert(out.end(), bv.begin(), bv.end());
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(
      {na + nb}, std::move(out), {a, b},
      [ia, ib, na, nb](Tape& t, std::uint32_t self) {
        auto g = t.upstream(self);
        if (t.requires_grad(ia) && na) {
          auto ga = t.grad_buffer(ia);
          for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
        }
        if (t.requires_grad(ib) && nb) {
          auto gb = t.grad_buffer(ib);
          for (std::size_t i = 0; i < nb; ++i) gb[i] += g[na + i];
        }
      });
}

Var dot(Var a, Var b) {
  require_same_tape(a, b, "dot");
  require_same_shape(a, b, "dot");
  auto av = a.value();
  auto bv = b.value();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape().record({1}, {acc}, {a, b},
                         [ia, ib](Tape& t, std::uint32_t self) {
                           const double g = t.upstream(self)[0];
                           if (t.requires_grad(ia)) {
                             auto bv = t.value(ib);
                             auto ga = t.grad_buffer(ia);
                             for (std::size_t i = 0; i < ga.size(); ++i)
                               ga[i] += g * bv[i];
                           }
                           if (t.requires_grad(ib)) {
                             auto av = t.value(ia);
                             auto gb = t.grad_buffer(ib);
                             for (std::size_t i = 0; i < gb.size(); ++i)
                               gb[i] += g * av[i];
                           }
                         });
}

Var sum(Var a) {
  auto av = a.value();
  double acc = 0.0;
  for (double v : av) acc += v;
  const auto ia = a.id();
  return a.tape().record({1}, {acc}, {a}, [ia](Tape& t, std::uint32_t self) {
    const double g = t.upstream(self)[0];
    for (auto& x : t.grad_buffer(ia)) x += g;
  });
}

Var stack(const std::vector<Var>& rows) {
  if (rows.empty()) throw ContractError("stack: no rows");
  Tape& tape = rows.front().tape();
  const std::size_t d = rows.front().size();
  std::vector<double> out;
  out.reserve(rows.size() * d);
  for (const auto& r : rows) {
    require_same_tape(rows.front(), r, "stack");
    require_rank(r, 1, "stack");
    if (r.size() != d) {
      throw DimensionError("stack: row of shape " + shape_string(r.shape()) +
                           " among rows of length " + std::to_string(d));
    }
    auto rv = r.value();
    out.insert(out.end(), rv.begin(), rv.end());
  }
  std::vector<std::uint32_t> ids;
  ids.reserve(rows.size());
  for (const auto& r : rows) ids.push_back(r.id());
  return tape.record({rows.size(), d}, std::move(out), rows,
                     [ids = std::move(ids), d](Tape& t, std::uint32_t self) {
                       auto g = t.upstream(self);
                       for (std::size_t r = 0; r < ids.size(); ++r) {
                         if (!t.requires_grad(ids[r])) continue;
                         auto gr = t.grad_buffer(ids[r]);
                         for (std::size_t j = 0; j < d; ++j) gr[j] += g[r * d + j];
                       }
                     });
}

Var row(Var matrix, std::size_t index) {
  require_rank(matrix, 2, "row");
  const std::size_t n = matrix.shape()[0], d = matrix.shape()[1];
  if (index >= n) {
    throw ContractError("row: index " + std::to_string(index) +
                        " out of range for " + shape_string(matrix.shape()));
  }
  auto mv = matrix.value();
  std::vector<double> out(mv.begin() + index * d, mv.begin() + (index + 1) * d);
  const auto im = matrix.id();
  return matrix.tape().record({d}, std::move(out), {matrix},
                              [im, index, d](Tape& t, std::uint32_t self) {
                                auto g = t.upstream(self);
                                auto gm = t.grad_buffer(im);
                                for (std::size_t j = 0; j < d; ++j)
                                  gm[index * d + j] += g[j];
                              });
}

Var mean_rows(Var matrix) {
  require_rank(matrix, 2, "mean_rows");
  const std::size_t n = matrix.shape()[0], d = matrix.shape()[1];
  if (n == 0) throw ContractError("mean_rows: no rows");
  auto mv = matrix.value();
  std::vector<double> out(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) out[j] += mv[r * d + j];
  for (auto& o : out) o /= static_cast<double>(n);
  const auto im = matrix.id();
  return matrix.tape().record({d}, std::move(out), {matrix},
                              [im, n, d](Tape& t, std::uint32_t self) {
                                auto g = t.upstream(self);
                                auto gm = t.grad_buffer(im);
                                const double inv = 1.0 / static_cast<double>(n);
                                for (std::size_t r = 0; r < n; ++r)
                                  for (std::size_t j = 0; j < d; ++j)
                                    gm[r * d + j] += g[j] * inv;
                              });
}

Var max_rows(Var matrix) {
  require_rank(matrix, 2, "max_rows");
  const std::size_t n = matrix.shape()[0], d = matrix.shape()[1];
  if (n == 0) throw ContractError("max_rows: no rows");
  auto mv = matrix.value();
  std::vector<double> out(mv.begin(), mv.begin() + d);
  std::vector<std::size_t> arg(d, 0);
  for (std::size_t r = 1; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j)
      if (mv[r * d + j] > out[j]) {
        out[j] = mv[r * d + j];
        arg[j] = r;
      }
  const auto im = matrix.id();
  return matrix.tape().record(
      {d}, std::move(out), {matrix},
      [im, d, arg = std::move(arg)](Tape& t, std::uint32_t self) {
        auto g = t.upstream(self);
        auto gm = t.grad_buffer(im);
        for (std::size_t j = 0; j < d; ++j) gm[arg[j] * d + j] += g[j];
      });
}

Var gather_row(Tape& tape, Parameter& table, std::size_t index,
               std::span<const std::size_t> frozen_rows) {
  if (table.shape.size() != 2) {
    throw DimensionError("gather_row: table " + table.name + " has shape " +
                         shape_string(table.shape));
  }
  const std::size_t rows = table.shape[0], d = table.shape[1];
  if (index >= rows) {
    throw ContractError("gather_row: id " + std::to_string(index) +
                        " out of range for table of " + std::to_string(rows) +
                        " rows");
  }
  std::vector<double> out(table.value.begin() + index * d,
                          table.value.begin() + (index + 1) * d);
  const bool frozen =
      !table.trainable ||
      std::find(frozen_rows.begin(), frozen_rows.end(), index) != frozen_rows.end();
  if (frozen) return tape.constant({d}, std::move(out));
  Parameter* p = &table;
  return tape.external({d}, std::move(out), [p, index, d](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    if (p->grad.size() != p->value.size()) p->grad.assign(p->value.size(), 0.0);
    for (std::size_t j = 0; j < d; ++j) p->grad[index * d + j] += g[j];
  });
}

// ---- optimizer ----------------------------------------------------------

SgdMomentum::SgdMomentum(SgdConfig config) : config_(config) {
  if (!(config_.learning_rate >= 0.0)) {
    throw ConfigError("learning rate must be non-negative");
  }
  if (!(config_.momentum >= 0.0 && config_.momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
}

SgdMomentum::SgdMomentum(SgdConfig config, std::vector<Parameter*> params)
    : SgdMomentum(config) {
  for (auto* p : params) add_parameter(*p);
}

void SgdMomentum::add_parameter(Parameter& parameter) {
  if (std::find(params_.begin(), params_.end(), &parameter) != params_.end()) return;
  params_.push_back(&parameter);
  velocity_.emplace_back(parameter.value.size(), 0.0);
}

void SgdMomentum::step() {
  const double lr = config_.learning_rate, mu = config_.momentum;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    if (!p.trainable) continue;
    auto& v = velocity_[k];
    if (p.grad.size() != p.value.size()) p.grad.assign(p.value.size(), 0.0);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      v[i] = mu * v[i] + p.grad[i];
      p.value[i] -= lr * v[i];
    }
  }
  zero_grad();
}

void SgdMomentum::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

std::span<const double> SgdMomentum::velocity(const Parameter& parameter) const {
  for (std::size_t k = 0; k < params_.size(); ++k)
    if (params_[k] == &parameter) return velocity_[k];
  throw ContractError("velocity: parameter " + parameter.name + " not registered");
}

}  // namespace han3
