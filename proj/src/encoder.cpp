#include "nerkit/encoder.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "nerkit/error.hpp"

namespace nerkit {

std::vector<std::string_view> utf8_chars(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = lead < 0xF0 ? 3 : 1;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

SubwordVocab::SubwordVocab()
    : SubwordVocab(std::vector<std::string>{std::string(kPadPiece), std::string(kUnkPiece)}) {}

SubwordVocab::SubwordVocab(std::vector<std::string> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.size() < 2 || pieces_[kPad] != kPadPiece || pieces_[kUnk] != kUnkPiece) {
    throw DataError("subword vocabulary must start with [PAD] and [UNK]");
  }
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!ids_.emplace(pieces_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate subword '" + pieces_[i] + "'");
    }
    if (i >= 2) max_chars_ = std::max(max_chars_, utf8_chars(pieces_[i]).size());
  }
}

int SubwordVocab::find(std::string_view piece) const {
  const auto it = ids_.find(std::string(piece));
  return it == ids_.end() ? -1 : it->second;
}

std::vector<std::string> SubwordVocab::to_lines() const {
  std::vector<std::string> out;
  out.reserve(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    out.push_back(std::to_string(i) + "\t" + pieces_[i]);
  }
  return out;
}

SubwordVocab SubwordVocab::from_lines(const std::vector<std::string>& lines) {
  std::vector<std::string> pieces;
  pieces.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    const std::size_t tab = l.find('\t');
    std::size_t id = 0;
    if (tab == std::string::npos ||
        std::from_chars(l.data(), l.data() + tab, id).ptr != l.data() + tab || id != i) {
      throw DataError("malformed vocabulary line " + std::to_string(i) + ": '" + l + "'");
    }
    pieces.push_back(l.substr(tab + 1));
  }
  return SubwordVocab(std::move(pieces));
}

SubwordVocab build_subword_vocab(const Corpus& corpus, std::size_t target_size) {
  if (corpus.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::set<std::string> chars;
  std::map<std::string, std::size_t> ngrams;
  for (const auto& s : corpus.sentences) {
    for (const auto& row : s.rows) {
      const auto cs = utf8_chars(row.surface);
      for (const auto c : cs) chars.emplace(c);
      for (std::size_t n = 2; n <= 4; ++n) {
        for (std::size_t i = 0; i + n <= cs.size(); ++i) {
          const char* begin = cs[i].data();
          const char* end = cs[i + n - 1].data() + cs[i + n - 1].size();
          ++ngrams[std::string(begin, end)];
        }
      }
    }
  }
  if (target_size < chars.size() + 2) {
    throw DataError("vocabulary size " + std::to_string(target_size) + " cannot hold the " +
                    std::to_string(chars.size()) + " distinct characters plus [PAD]/[UNK]");
  }

  std::vector<std::string> pieces{std::string(SubwordVocab::kPadPiece),
                                  std::string(SubwordVocab::kUnkPiece)};
  pieces.insert(pieces.end(), chars.begin(), chars.end());

  std::vector<std::pair<std::string, std::size_t>> ranked(ngrams.begin(), ngrams.end());
  // ngrams is already in lexicographic order; stable sort keeps that on ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [gram, count] : ranked) {
    if (pieces.size() >= target_size) break;
    pieces.push_back(gram);
  }
  return SubwordVocab(std::move(pieces));
}

std::vector<int> tokenize_word(std::string_view word, const SubwordVocab& vocab,
                               std::size_t max_pieces, std::size_t* truncated) {
  const auto cs = utf8_chars(word);
  std::vector<int> ids;
  std::size_t i = 0;
  while (i < cs.size()) {
    const std::size_t longest = std::min(vocab.max_piece_chars(), cs.size() - i);
    int id = SubwordVocab::kUnk;
    std::size_t used = 1;
    for (std::size_t n = longest; n >= 1; --n) {
      const char* begin = cs[i].data();
      const char* end = cs[i + n - 1].data() + cs[i + n - 1].size();
      const int found = vocab.find(std::string_view(begin, static_cast<std::size_t>(end - begin)));
      if (found >= 2) {
        id = found;
        used = n;
        break;
      }
    }
    ids.push_back(id);
    i += used;
  }
  if (ids.empty()) ids.push_back(SubwordVocab::kUnk);
  if (ids.size() > max_pieces) {
    ids.resize(max_pieces);
    if (truncated) ++*truncated;
  }
  return ids;
}

PoolingParams make_pooling(Index dim, Index capacity, Rng& rng) {
  return {Tensor::parameter(xavier_uniform(dim, 1, rng)),
          Tensor::parameter(xavier_uniform(capacity, capacity, rng))};
}

void append_parameters(const PoolingParams& p, const std::string& prefix, ParameterList& out) {
  out.push_back({prefix + ".w_a", p.w_a});
  out.push_back({prefix + ".w_alpha", p.w_alpha});
}

Tensor attention_pool(const Tensor& h, const std::vector<bool>& mask, const PoolingParams& p) {
  if (h.rows() != p.capacity() || h.cols() != p.dim()) {
    throw ShapeError("attention_pool: items " + shape_string(h.value()) + " vs pooling for " +
                     std::to_string(p.capacity()) + " items of width " + std::to_string(p.dim()));
  }
  if (static_cast<Index>(mask.size()) != h.rows()) {
    throw ShapeError("attention_pool: mask length " + std::to_string(mask.size()) + " for " +
                     shape_string(h.value()));
  }
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw NumericError("attention_pool: every position is masked");
  }
  Matrix keep(h.rows(), 1);
  for (Index i = 0; i < h.rows(); ++i) keep(i, 0) = mask[i] ? 1.0 : 0.0;

  const Tensor c = mul(tanh(matmul(h, p.w_a)), Tensor::input(std::move(keep)));
  const Tensor alpha = masked_softmax(matmul(transpose(c), p.w_alpha), mask);
  return matmul(alpha, h);
}

EncoderParams make_encoder(std::size_t vocab_size, const EncoderConfig& cfg, Rng& rng) {
  if (cfg.dim < 1 || cfg.window < 0 || cfg.max_subwords < 1) {
    throw DataError("encoder needs dim >= 1, window >= 0, max_subwords >= 1");
  }
  const Index d = cfg.dim;
  const Index in = (2 * cfg.window + 1) * d;
  EncoderParams p;
  p.config = cfg;
  p.embeddings = Tensor::parameter(xavier_uniform(static_cast<Index>(vocab_size), d, rng));
  p.ctx_w1 = Tensor::parameter(xavier_uniform(in, d, rng));
  p.ctx_b1 = Tensor::parameter(Matrix::Zero(1, d));
  p.ctx_w2 = Tensor::parameter(xavier_uniform(d, d, rng));
  p.ctx_b2 = Tensor::parameter(Matrix::Zero(1, d));
  p.word_pool = make_pooling(d, cfg.max_subwords, rng);
  return p;
}

void append_parameters(const EncoderParams& p, ParameterList& out) {
  out.push_back({"encoder.embeddings", p.embeddings});
  out.push_back({"encoder.ctx_w1", p.ctx_w1});
  out.push_back({"encoder.ctx_b1", p.ctx_b1});
  out.push_back({"encoder.ctx_w2", p.ctx_w2});
  out.push_back({"encoder.ctx_b2", p.ctx_b2});
  append_parameters(p.word_pool, "encoder.word_pool", out);
}

Tensor encode_words(std::span<const std::string> words, const EncoderParams& params,
                    const SubwordVocab& vocab) {
  if (words.empty()) throw DataError("cannot encode an empty sentence");
  const auto k = static_cast<std::size_t>(params.config.max_subwords);
  const Index l = static_cast<Index>(words.size());
  const Index w = params.config.window;

  std::vector<Tensor> pooled;
  pooled.reserve(words.size() + 2 * static_cast<std::size_t>(w));
  const int pad_id[] = {SubwordVocab::kPad};
  const Tensor pad = w > 0 ? gather_rows(params.embeddings, pad_id) : Tensor();
  for (Index i = 0; i < w; ++i) pooled.push_back(pad);

  std::vector<int> ids(k);
  std::vector<bool> mask(k);
  for (const auto& word : words) {
    const auto pieces = tokenize_word(word, vocab, k);
    std::fill(ids.begin(), ids.end(), SubwordVocab::kPad);
    std::fill(mask.begin(), mask.end(), false);
    std::copy(pieces.begin(), pieces.end(), ids.begin());
    std::fill_n(mask.begin(), pieces.size(), true);
    pooled.push_back(attention_pool(gather_rows(params.embeddings, ids), mask, params.word_pool));
  }
  for (Index i = 0; i < w; ++i) pooled.push_back(pad);

  const Tensor padded = concat_rows(pooled);
  std::vector<Tensor> shifted;
  shifted.reserve(static_cast<std::size_t>(2 * w + 1));
  for (Index off = 0; off <= 2 * w; ++off) shifted.push_back(slice_rows(padded, off, l));
  const Tensor window = w > 0 ? concat_cols(shifted) : shifted.front();

  const Tensor hidden = tanh(add_row(matmul(window, params.ctx_w1), params.ctx_b1));
  return add_row(matmul(hidden, params.ctx_w2), params.ctx_b2);
}

Tensor encode_sentence(const Sentence& sentence, const EncoderParams& params,
                       const SubwordVocab& vocab) {
  const auto words = sentence.surfaces();
  return encode_words(words, params, vocab);
}

}  // namespace nerkit
