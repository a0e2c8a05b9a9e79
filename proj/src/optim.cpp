#include "nerkit/optim.hpp"

#include <cmath>
#include <limits>

#include "nerkit/error.hpp"

namespace nerkit {

std::vector<Tensor> tensors_of(const ParameterList& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

void zero_grads(std::span<Tensor> params) {
  for (auto& p : params) p.zero_grad();
}

Matrix xavier_uniform(Index rows, Index cols, Index fan_in, Index fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

AdamState::AdamState(AdamConfig cfg, std::span<const Tensor> params) : config(cfg) {
  for (const auto& p : params) {
    m.push_back(Matrix::Zero(p.rows(), p.cols()));
    v.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void adam_update(Matrix& theta, const Matrix& grad, Matrix& m, Matrix& v, std::int64_t t,
                 const AdamConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  theta.array() -=
      cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
}

void adam_step(std::span<Tensor> params, AdamState& state) {
  if (state.m.size() != params.size()) {
    throw ShapeError("adam_step: state tracks " + std::to_string(state.m.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  ++state.t;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    if (state.m[i].rows() != p.rows() || state.m[i].cols() != p.cols()) {
      throw ShapeError("adam_step: state shape " + shape_string(state.m[i]) +
                       " does not match parameter " + shape_string(p.value()));
    }
    if (p.has_grad()) {
      adam_update(p.value_mut(), p.grad(), state.m[i], state.v[i], state.t, state.config);
    } else {
      adam_update(p.value_mut(), Matrix::Zero(p.rows(), p.cols()), state.m[i], state.v[i],
                  state.t, state.config);
    }
  }
}

FiniteDiffResult finite_diff_check(const std::function<Tensor()>& f, std::span<Tensor> params,
                                   double h) {
  zero_grads(params);
  backward(f());
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.grad_or_zero());
  zero_grads(params);

  FiniteDiffResult res;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& x = params[k].value_mut();
    for (Index r = 0; r < x.rows(); ++r) {
      for (Index c = 0; c < x.cols(); ++c) {
        const double saved = x(r, c);
        x(r, c) = saved + h;
        const double up = f().item();
        x(r, c) = saved - h;
        const double down = f().item();
        x(r, c) = saved;

        const double a = analytic[k](r, c);
        const double n = (up - down) / (2.0 * h);
        double err = std::abs(a - n) / std::max(1e-8, std::abs(a) + std::abs(n));
        if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
        ++res.checked;
        if (err > res.max_rel_error || res.checked == 1) {
          res.max_rel_error = std::max(err, res.max_rel_error);
          res.parameter = k;
          res.row = r;
          res.col = c;
          res.analytic = a;
          res.numeric = n;
        }
      }
    }
  }
  return res;
}

}  // namespace nerkit
