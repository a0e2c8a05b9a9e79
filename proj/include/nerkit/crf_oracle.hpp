#ifndef NERKIT_CRF_ORACLE_HPP
#define NERKIT_CRF_ORACLE_HPP

// Brute-force CRF reference: enumerates every tag sequence. Shares nothing
// with the dynamic programs in crf.cpp beyond the score definition.

#include <cstdint>
#include <vector>

#include "nerkit/crf.hpp"

namespace nerkit {

// Largest |tags|^l the oracle accepts (2^20).
inline constexpr std::uint64_t kOracleMaxPaths = std::uint64_t{1} << 20;

double oracle_log_partition(const Matrix& emissions, const CrfScores& s);
// First path (lexicographic order) with the maximal score.
ViterbiResult oracle_best_path(const Matrix& emissions, const CrfScores& s,
                               const TransitionConstraints* constraints = nullptr);

}  // namespace nerkit

#endif  // NERKIT_CRF_ORACLE_HPP
