#ifndef NERKIT_ENCODER_HPP
#define NERKIT_ENCODER_HPP

// Small trainable sentence encoder: greedy subword tokenization, subword
// embeddings, attention pooling of subwords into words, and a windowed
// feed-forward contextualizer over the pooled word vectors.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nerkit/corpus.hpp"
#include "nerkit/optim.hpp"
#include "nerkit/rng.hpp"
#include "nerkit/tensor.hpp"

namespace nerkit {

// Splits UTF-8 text into code points. Invalid bytes become one-byte units.
std::vector<std::string_view> utf8_chars(std::string_view text);

class SubwordVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadPiece = "[PAD]";
  static constexpr std::string_view kUnkPiece = "[UNK]";

  SubwordVocab();
  // pieces[0] and pieces[1] must be the PAD and UNK markers.
  explicit SubwordVocab(std::vector<std::string> pieces);

  std::size_t size() const { return pieces_.size(); }
  // -1 when absent.
  int find(std::string_view piece) const;
  const std::string& piece(int id) const { return pieces_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& pieces() const { return pieces_; }
  // Longest piece length in code points.
  std::size_t max_piece_chars() const { return max_chars_; }

  // "id<TAB>piece" lines in id order.
  std::vector<std::string> to_lines() const;
  static SubwordVocab from_lines(const std::vector<std::string>& lines);

  bool operator==(const SubwordVocab& o) const { return pieces_ == o.pieces_; }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> ids_;
  std::size_t max_chars_ = 1;
};

// PAD, UNK, every character of the corpus (sorted), then the most frequent
// 2- to 4-character n-grams (count descending, ties lexicographic) until
// target_size entries exist.
SubwordVocab build_subword_vocab(const Corpus& corpus, std::size_t target_size);

// Greedy longest match, left to right. Characters with no piece map to UNK.
// Output is cut to max_pieces entries; *truncated is incremented when that
// happens.
std::vector<int> tokenize_word(std::string_view word, const SubwordVocab& vocab,
                               std::size_t max_pieces, std::size_t* truncated = nullptr);

// Attention pooling weights for a site holding up to capacity() items of
// width dim().
struct PoolingParams {
  Tensor w_a;      // [d x 1]
  Tensor w_alpha;  // [K x K]

  Index dim() const { return w_a.rows(); }
  Index capacity() const { return w_alpha.rows(); }
};

PoolingParams make_pooling(Index dim, Index capacity, Rng& rng);
void append_parameters(const PoolingParams& p, const std::string& prefix, ParameterList& out);

// h holds exactly capacity() rows; rows with mask[i] == false are padding.
//   C     = tanh(h * w_a) with padded rows zeroed          [K x 1]
//   alpha = masked_softmax(C^T * w_alpha)                   [1 x K]
//   out   = alpha * h                                       [1 x d]
Tensor attention_pool(const Tensor& h, const std::vector<bool>& mask, const PoolingParams& p);

struct EncoderConfig {
  Index dim = 32;
  Index window = 1;
  Index max_subwords = 12;
};

struct EncoderParams {
  EncoderConfig config;
  Tensor embeddings;  // [|vocab| x d]; row 0 is the PAD vector
  Tensor ctx_w1;      // [(2w+1)d x d]
  Tensor ctx_b1;      // [1 x d]
  Tensor ctx_w2;      // [d x d]
  Tensor ctx_b2;      // [1 x d]
  PoolingParams word_pool;
};

EncoderParams make_encoder(std::size_t vocab_size, const EncoderConfig& cfg, Rng& rng);
void append_parameters(const EncoderParams& p, ParameterList& out);

// [l x d] contextual word representations. Depends only on the words and
// the parameters.
Tensor encode_words(std::span<const std::string> words, const EncoderParams& params,
                    const SubwordVocab& vocab);
Tensor encode_sentence(const Sentence& sentence, const EncoderParams& params,
                       const SubwordVocab& vocab);

}  // namespace nerkit

#endif  // NERKIT_ENCODER_HPP
