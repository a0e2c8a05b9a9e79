#include "nerkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "nerkit/error.hpp"

namespace nerkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::shared_ptr<Node> leaf(Matrix value, Role role) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->role = role;
  n->requires_grad = role == Role::kParameter;
  return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.value()) + " vs " +
                     shape_string(b.value()));
  }
}

}  // namespace

std::string shape_string(const Matrix& m) {
  return "[" + std::to_string(m.rows()) + " x " + std::to_string(m.cols()) + "]";
}

Tensor Tensor::parameter(Matrix value) { return Tensor(leaf(std::move(value), Role::kParameter)); }
Tensor Tensor::input(Matrix value) { return Tensor(leaf(std::move(value), Role::kInput)); }
Tensor Tensor::scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return input(std::move(m));
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on non-scalar " + shape_string(value()));
  return node_->value(0, 0);
}

Matrix Tensor::grad_or_zero() const {
  if (has_grad()) return node_->grad;
  return Matrix::Zero(rows(), cols());
}

Tensor make_derived(Matrix value, std::vector<Tensor> parents, BackwardFn fn, const char* op) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->role = Role::kDerived;
  n->op = op;
  n->requires_grad = std::any_of(parents.begin(), parents.end(),
                                 [](const Tensor& p) { return p.requires_grad(); });
  if (n->requires_grad) {
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(fn);
  }
  return Tensor(std::move(n));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: shape mismatch " + shape_string(a.value()) + " x " +
                     shape_string(b.value()));
  }
  return make_derived(
      a.value() * b.value(), {a, b},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) g[0]->noalias() += self.grad * self.parent(1).transpose();
        if (g[1]) g[1]->noalias() += self.parent(0).transpose() * self.grad;
      },
      "matmul");
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  return make_derived(
      a.value() + b.value(), {a, b},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) *g[0] += self.grad;
        if (g[1]) *g[1] += self.grad;
      },
      "add");
}

Tensor add_row(const Tensor& a, const Tensor& b) {
  if (b.rows() != 1 || b.cols() != a.cols()) {
    throw ShapeError("add_row: shape mismatch " + shape_string(a.value()) + " + " +
                     shape_string(b.value()));
  }
  Matrix out = a.value();
  out.rowwise() += b.value().row(0);
  return make_derived(
      std::move(out), {a, b},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) *g[0] += self.grad;
        if (g[1]) *g[1] += self.grad.colwise().sum();
      },
      "add_row");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return make_derived(
      a.value() - b.value(), {a, b},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) *g[0] += self.grad;
        if (g[1]) *g[1] -= self.grad;
      },
      "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  return make_derived(
      a.value().cwiseProduct(b.value()), {a, b},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) *g[0] += self.grad.cwiseProduct(self.parent(1));
        if (g[1]) *g[1] += self.grad.cwiseProduct(self.parent(0));
      },
      "mul");
}

Tensor scale(const Tensor& a, double c) {
  return make_derived(
      a.value() * c, {a},
      [c](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) *g[0] += self.grad * c;
      },
      "scale");
}

Tensor neg(const Tensor& a) {
  return make_derived(
      -a.value(), {a},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) *g[0] -= self.grad;
      },
      "neg");
}

Tensor tanh(const Tensor& a) {
  return make_derived(
      a.value().array().tanh().matrix(), {a},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) {
          *g[0] += (self.grad.array() * (1.0 - self.value.array().square())).matrix();
        }
      },
      "tanh");
}

Tensor exp(const Tensor& a) {
  return make_derived(
      a.value().array().exp().matrix(), {a},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) *g[0] += self.grad.cwiseProduct(self.value);
      },
      "exp");
}

Tensor log(const Tensor& a) {
  return make_derived(
      a.value().array().log().matrix(), {a},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) *g[0] += (self.grad.array() / self.parent(0).array()).matrix();
      },
      "log");
}

Tensor transpose(const Tensor& a) {
  return make_derived(
      a.value().transpose(), {a},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) *g[0] += self.grad.transpose();
      },
      "transpose");
}

Tensor sum(const Tensor& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return make_derived(
      std::move(out), {a},
      [](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) g[0]->array() += self.grad(0, 0);
      },
      "sum");
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean of empty tensor");
  const double n = static_cast<double>(a.size());
  Matrix out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return make_derived(
      std::move(out), {a},
      [n](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) g[0]->array() += self.grad(0, 0) / n;
      },
      "mean");
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw ShapeError("concat_rows: shape mismatch " + shape_string(parts[0].value()) + " vs " +
                       shape_string(p.value()));
    }
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return make_derived(
      std::move(out), std::vector<Tensor>(parts.begin(), parts.end()),
      [](const Node& self, std::span<Matrix* const> g) {
        Index at = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          const Index r = self.parent(i).rows();
          if (g[i]) *g[i] += self.grad.middleRows(at, r);
          at += r;
        }
      },
      "concat_rows");
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: shape mismatch " + shape_string(parts[0].value()) + " vs " +
                       shape_string(p.value()));
    }
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return make_derived(
      std::move(out), std::vector<Tensor>(parts.begin(), parts.end()),
      [](const Node& self, std::span<Matrix* const> g) {
        Index at = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          const Index c = self.parent(i).cols();
          if (g[i]) *g[i] += self.grad.middleCols(at, c);
          at += c;
        }
      },
      "concat_cols");
}

Tensor slice_rows(const Tensor& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw ShapeError("slice_rows: rows [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") outside " + shape_string(a.value()));
  }
  return make_derived(
      a.value().middleRows(start, count), {a},
      [start, count](const Node& self, std::span<Matrix* const> g) {
        if (g[0]) g[0]->middleRows(start, count) += self.grad;
      },
      "slice_rows");
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  Matrix out(static_cast<Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw ShapeError("gather_rows: id " + std::to_string(ids[i]) + " outside " +
                       shape_string(table.value()));
    }
    out.row(static_cast<Index>(i)) = table.value().row(ids[i]);
  }
  std::vector<int> kept(ids.begin(), ids.end());
  return make_derived(
      std::move(out), {table},
      [kept = std::move(kept)](const Node& self, std::span<Matrix* const> g) {
        if (!g[0]) return;
        for (std::size_t i = 0; i < kept.size(); ++i) {
          g[0]->row(kept[i]) += self.grad.row(static_cast<Index>(i));
        }
      },
      "gather_rows");
}

Tensor masked_softmax(const Tensor& x, const std::vector<bool>& mask) {
  if (static_cast<Index>(mask.size()) != x.cols()) {
    throw ShapeError("masked_softmax: mask of length " + std::to_string(mask.size()) +
                     " for " + shape_string(x.value()));
  }
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw NumericError("masked_softmax: every position is masked");
  }
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    double mx = kNegInf;
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask[c]) mx = std::max(mx, x.value()(r, c));
    }
    double z = 0.0;
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask[c]) {
        out(r, c) = std::exp(x.value()(r, c) - mx);
        z += out(r, c);
      }
    }
    out.row(r) /= z;
  }
  return make_derived(
      std::move(out), {x},
      [](const Node& self, std::span<Matrix* const> g) {
        if (!g[0]) return;
        // dx = y * (dy - <dy, y>); masked entries have y == 0.
        for (Index r = 0; r < self.value.rows(); ++r) {
          const double dot = self.grad.row(r).dot(self.value.row(r));
          g[0]->row(r).array() +=
              self.value.row(r).array() * (self.grad.row(r).array() - dot);
        }
      },
      "masked_softmax");
}

Tensor log_sum_exp(const Tensor& x, int axis) {
  if (axis != 0 && axis != 1) throw ShapeError("log_sum_exp: axis must be 0 or 1");
  const Matrix& v = x.value();
  const bool rows = axis == 0;
  Matrix out = rows ? Matrix(1, v.cols()) : Matrix(v.rows(), 1);
  const Index lanes = rows ? v.cols() : v.rows();
  for (Index k = 0; k < lanes; ++k) {
    const auto lane = [&](Index i) { return rows ? v(i, k) : v(k, i); };
    const Index n = rows ? v.rows() : v.cols();
    double mx = kNegInf;
    for (Index i = 0; i < n; ++i) mx = std::max(mx, lane(i));
    double s = 0.0;
    if (std::isfinite(mx)) {
      for (Index i = 0; i < n; ++i) s += std::exp(lane(i) - mx);
    }
    (rows ? out(0, k) : out(k, 0)) = std::isfinite(mx) ? mx + std::log(s) : mx;
  }
  return make_derived(
      std::move(out), {x},
      [rows](const Node& self, std::span<Matrix* const> g) {
        if (!g[0]) return;
        const Matrix& in = self.parent(0);
        for (Index i = 0; i < in.rows(); ++i) {
          for (Index j = 0; j < in.cols(); ++j) {
            const Index k = rows ? j : i;
            const double lse = rows ? self.value(0, k) : self.value(k, 0);
            const double up = rows ? self.grad(0, k) : self.grad(k, 0);
            if (std::isfinite(lse)) (*g[0])(i, j) += up * std::exp(in(i, j) - lse);
          }
        }
      },
      "log_sum_exp");
}

void backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + shape_string(loss.value()));
  }
  Node* root = loss.node().get();
  if (root->backward_done) {
    throw Error("backward called twice on the same loss without rebuilding the graph");
  }
  root->backward_done = true;
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->role == Role::kDerived) n->grad = Matrix::Zero(n->value.rows(), n->value.cols());
  }
  if (root->grad.size() == 0) root->grad = Matrix::Zero(1, 1);
  root->grad(0, 0) += 1.0;

  std::vector<Matrix*> slots;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->role != Role::kDerived || !n->backward) continue;
    slots.assign(n->parents.size(), nullptr);
    for (std::size_t i = 0; i < n->parents.size(); ++i) {
      Node* p = n->parents[i].get();
      if (!p->requires_grad) continue;
      if (p->grad.size() == 0) p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
      slots[i] = &p->grad;
    }
    n->backward(*n, slots);
  }
  // Intermediate gradients are not needed once propagated.
  for (Node* n : order) {
    if (n->role == Role::kDerived && n != root) n->grad.resize(0, 0);
  }
}

}  // namespace nerkit
