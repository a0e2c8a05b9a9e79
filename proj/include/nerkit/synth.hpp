#ifndef NERKIT_SYNTH_HPP
#define NERKIT_SYNTH_HPP

// Deterministic synthetic NER corpus: per-class entity lexicons with
// class-specific word shapes, slotted into template sentences.

#include <cstdint>
#include <string>
#include <vector>

#include "nerkit/corpus.hpp"

namespace nerkit {

struct SynthConfig {
  std::uint64_t seed = 1;            // sentence stream
  std::uint64_t lexicon_seed = 2022; // entity lexicons; share it between splits
  std::size_t sentences = 200;
  std::size_t entities_per_class = 25;
  // Fraction of sentences that reuse an entity word as an ordinary word.
  double ambiguity_rate = 0.05;
  std::string id_prefix = "synth";
};

// The six entity classes the generator uses.
const std::vector<std::string>& synth_classes();

Corpus synthesize(const SynthConfig& cfg);

}  // namespace nerkit

#endif  // NERKIT_SYNTH_HPP
