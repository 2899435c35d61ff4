#pragma once

// Free-semigroup words and the truncated creation operators S_i, R_i on
// P_m = span{e_alpha : |alpha| <= m}. Word order is length-major with
// lexicographic order within each length, so every level-m operator built
// downstream is the leading principal submatrix of its level-m' extension.

#include "ncball/matrix.hpp"

#include <algorithm>

namespace ncball {

using Word = std::vector<int>;  // letters in 1..n; empty word is the identity

enum class Side { left, right };

constexpr std::int64_t kMaxFockDim = 2'000'000;

inline std::int64_t fock_dim(int n, int m) {
  if (n < 1) throw DomainError("fock_dim: generator count must be >= 1");
  if (m < 0) throw DomainError("fock_dim: level must be >= 0");
  std::int64_t dim = 1, pw = 1;
  for (int k = 1; k <= m; ++k) {
    pw *= n;
    dim += pw;
    if (dim > kMaxFockDim)
      throw DomainError("fock_dim: truncation dimension exceeds cap");
  }
  return dim;
}

struct FockTruncation {
  int n = 1;
  int m = 0;
  std::int64_t dim = 1;
  std::vector<Word> words;                // all |alpha| <= m, length-major
  std::vector<std::int64_t> offsets;      // offsets[k] = first index of length k

  // Arithmetic index: offset of |w| plus the base-n value of (letters - 1).
  std::int64_t index_of(const Word& w) const {
    const int len = static_cast<int>(w.size());
    if (len > m) return -1;
    std::int64_t within = 0;
    for (int letter : w) {
      if (letter < 1 || letter > n)
        throw DomainError("index_of: letter out of range");
      within = within * n + (letter - 1);
    }
    return offsets[len] + within;
  }
};

inline FockTruncation enumerate_words(int n, int m) {
  FockTruncation t;
  t.n = n;
  t.m = m;
  t.dim = fock_dim(n, m);
  t.offsets.resize(static_cast<size_t>(m) + 2, 0);
  t.words.reserve(static_cast<size_t>(t.dim));
  t.words.push_back({});
  std::int64_t pw = 1;
  for (int k = 1; k <= m; ++k) {
    t.offsets[k] = static_cast<std::int64_t>(t.words.size());
    pw *= n;
    Word w(static_cast<size_t>(k), 1);
    for (std::int64_t c = 0; c < pw; ++c) {
      t.words.push_back(w);
      for (int pos = k - 1; pos >= 0; --pos) {  // odometer, lex order
        if (w[static_cast<size_t>(pos)] < n) {
          ++w[static_cast<size_t>(pos)];
          break;
        }
        w[static_cast<size_t>(pos)] = 1;
      }
    }
  }
  t.offsets[m + 1] = t.dim;
  return t;
}

inline Word word_reverse(Word w) {
  std::reverse(w.begin(), w.end());
  return w;
}

inline Word word_concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// S_i (left): e_alpha -> e_{g_i alpha}; R_i (right): e_alpha -> e_{alpha g_i};
// words of length m are annihilated.
inline CMat creation_matrix(const FockTruncation& t, Side side, int i) {
  if (i < 1 || i > t.n)
    throw DomainError("creation_matrix: generator index out of range");
  CMat M = CMat::Zero(t.dim, t.dim);
  const Word gi{i};
  for (std::int64_t col = 0; col < t.dim; ++col) {
    const Word& alpha = t.words[static_cast<size_t>(col)];
    if (static_cast<int>(alpha.size()) >= t.m) continue;
    const Word target = (side == Side::left) ? word_concat(gi, alpha)
                                             : word_concat(alpha, gi);
    M(t.index_of(target), col) = cplx(1.0, 0.0);
  }
  return M;
}

// word_matrix(left, w)  = S_{w_1} ... S_{w_k}: e_alpha -> e_{w alpha}.
// word_matrix(right, w) = R_{w_1} ... R_{w_k}: e_alpha -> e_{alpha w~}.
// Both equal the product of creation_matrix factors exactly: these shifts
// are length-graded, so compressions compose without loss.
inline CMat word_matrix(const FockTruncation& t, Side side, const Word& w) {
  for (int letter : w)
    if (letter < 1 || letter > t.n)
      throw DomainError("word_matrix: letter out of range");
  CMat M = CMat::Zero(t.dim, t.dim);
  const int len = static_cast<int>(w.size());
  if (len > t.m) return M;
  const Word suffix = (side == Side::left) ? w : word_reverse(w);
  for (std::int64_t col = 0; col < t.dim; ++col) {
    const Word& alpha = t.words[static_cast<size_t>(col)];
    if (static_cast<int>(alpha.size()) + len > t.m) continue;
    const Word target = (side == Side::left) ? word_concat(suffix, alpha)
                                             : word_concat(alpha, suffix);
    M(t.index_of(target), col) = cplx(1.0, 0.0);
  }
  return M;
}

// Projection onto span{e_alpha : |alpha| <= k} as a diagonal 0/1 matrix.
inline CMat level_projection(const FockTruncation& t, int k) {
  CMat Q = CMat::Zero(t.dim, t.dim);
  const std::int64_t upto = (k >= t.m) ? t.dim : t.offsets[k + 1];
  for (std::int64_t j = 0; j < upto; ++j) Q(j, j) = cplx(1.0, 0.0);
  return Q;
}

}  // namespace ncball
