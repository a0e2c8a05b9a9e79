#ifndef NERKIT_TENSOR_HPP
#define NERKIT_TENSOR_HPP

// Dense reverse-mode automatic differentiation over row-major Eigen matrices.
//
// A Tensor is a shared handle to a graph node. Parameters persist across
// steps and accumulate gradients; every operation creates a derived node that
// remembers its parents and a backward rule. Tensors are rank <= 2: vectors
// are 1 x n rows and scalars are 1 x 1.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nerkit {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

enum class Role { kParameter, kInput, kDerived };

struct Node;

// Backward rule: read self.grad (and self.value / parent values), accumulate
// into parent_grads[i]. Entries are null for parents that need no gradient.
using BackwardFn = std::function<void(const Node& self, std::span<Matrix* const> parent_grads)>;

struct Node {
  Matrix value;
  Matrix grad;  // size 0 until materialized
  Role role = Role::kInput;
  bool requires_grad = false;
  bool backward_done = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;

  const Matrix& parent(std::size_t i) const { return parents[i]->value; }
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor parameter(Matrix value);
  static Tensor input(Matrix value);
  static Tensor scalar(double v);

  bool defined() const { return node_ != nullptr; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  std::array<Index, 2> shape() const { return {rows(), cols()}; }
  Index size() const { return node_->value.size(); }
  Role role() const { return node_->role; }
  bool requires_grad() const { return node_->requires_grad; }
  const char* op() const { return node_->op; }

  const Matrix& value() const { return node_->value; }
  // Mutable access for initializers and optimizers. Derived values must not
  // be changed after creation.
  Matrix& value_mut() { return node_->value; }
  double item() const;

  bool has_grad() const { return node_->grad.size() != 0; }
  // Zero-shaped when no gradient has been materialized.
  const Matrix& grad() const { return node_->grad; }
  // Returns the gradient or zeros of the value's shape.
  Matrix grad_or_zero() const;
  void zero_grad() { node_->grad.resize(0, 0); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  friend Tensor make_derived(Matrix value, std::vector<Tensor> parents, BackwardFn fn,
                             const char* op);
  std::shared_ptr<Node> node_;
};

// Creates a derived node. The backward rule is dropped when no parent needs
// gradients.
Tensor make_derived(Matrix value, std::vector<Tensor> parents, BackwardFn fn, const char* op);

std::string shape_string(const Matrix& m);

// Forward operations.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
// a [r x c] + row vector b [1 x c] added to every row.
Tensor add_row(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor neg(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor transpose(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& a, Index start, Index count);
// Row i of the result is row ids[i] of table.
Tensor gather_rows(const Tensor& table, std::span<const int> ids);
// Row-wise softmax; positions with mask[j] == false get probability 0.
Tensor masked_softmax(const Tensor& x, const std::vector<bool>& mask);
// axis 0 reduces over rows (result 1 x c), axis 1 over columns (r x 1).
Tensor log_sum_exp(const Tensor& x, int axis);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(double c, const Tensor& a) { return scale(a, c); }

// Gradient of a scalar loss w.r.t. everything reachable. Parameter gradients
// accumulate until zero_grad(); a given loss may be back-propagated once.
void backward(const Tensor& loss);

}  // namespace nerkit

#endif  // NERKIT_TENSOR_HPP
