#ifndef NERKIT_GRADIENT_SUITE_HPP
#define NERKIT_GRADIENT_SUITE_HPP

// Finite-difference checks for every differentiable piece of the toolkit,
// shared by the CLI `gradcheck` command and the test suites.

#include <cstdint>
#include <string>
#include <vector>

namespace nerkit {

inline constexpr double kGradientTolerance = 1e-4;

struct GradientCheck {
  std::string name;
  std::string group;  // "op", "attention_pool", "span_loss", "crf_encoder"
  double max_rel_error = 0.0;
  std::size_t points = 0;
  std::size_t coordinates = 0;

  bool passed() const { return max_rel_error < kGradientTolerance; }
};

// Runs every check at `points` random parameter settings.
std::vector<GradientCheck> run_gradient_suite(std::uint64_t seed = 7, std::size_t points = 10);

}  // namespace nerkit

#endif  // NERKIT_GRADIENT_SUITE_HPP
