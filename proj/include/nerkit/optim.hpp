#ifndef NERKIT_OPTIM_HPP
#define NERKIT_OPTIM_HPP

// Parameter bookkeeping, initialization, Adam and the finite-difference
// gradient checker.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nerkit/rng.hpp"
#include "nerkit/tensor.hpp"

namespace nerkit {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

// Parameters in a fixed, serialization-relevant order.
using ParameterList = std::vector<NamedParameter>;

std::vector<Tensor> tensors_of(const ParameterList& params);
void zero_grads(std::span<Tensor> params);

// Glorot/Xavier uniform: U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))),
// filled in row-major order from rng.
Matrix xavier_uniform(Index rows, Index cols, Index fan_in, Index fan_out, Rng& rng);
inline Matrix xavier_uniform(Index rows, Index cols, Rng& rng) {
  return xavier_uniform(rows, cols, rows, cols, rng);
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t t = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::span<const Tensor> params);
};

// One bias-corrected Adam update for a single array at step t (t >= 1).
void adam_update(Matrix& theta, const Matrix& grad, Matrix& m, Matrix& v, std::int64_t t,
                 const AdamConfig& cfg);

// Increments state.t and updates every parameter from its accumulated
// gradient (absent gradients count as zero).
void adam_step(std::span<Tensor> params, AdamState& state);

struct FiniteDiffResult {
  double max_rel_error = 0.0;
  std::size_t parameter = 0;  // index of the worst parameter
  Index row = 0;
  Index col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;  // number of scalar coordinates
};

inline constexpr double kFiniteDiffStep = 1e-5;

// Compares backward() against central differences
// (f(x+h) - f(x-h)) / 2h for every coordinate of every parameter, using the
// relative error |a - n| / max(1e-8, |a| + |n|). f must rebuild its graph
// on every call. Parameter gradients are cleared on return.
FiniteDiffResult finite_diff_check(const std::function<Tensor()>& f, std::span<Tensor> params,
                                   double h = kFiniteDiffStep);

}  // namespace nerkit

#endif  // NERKIT_OPTIM_HPP
