#ifndef CBT_MEASURES_HPP_
#define CBT_MEASURES_HPP_

#include <gmp.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sorted_set.hpp"

namespace cbt::measures {

// Bits to write v in binary; zero and negative values cost one bit.
inline std::uint64_t cost(std::int64_t v) {
  return static_cast<std::uint64_t>(std::bit_width(static_cast<std::uint64_t>(std::max<std::int64_t>(v, 1))));
}

inline std::uint64_t gap(const SortedSet& s) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::int64_t g = static_cast<std::int64_t>(i == 0 ? s[0] : s[i] - s[i - 1] - 1);
    total += cost(g);
  }
  return total;
}

inline std::uint64_t rle(const SortedSet& s) {
  const RunDecomposition rd = decompose_runs(s.elements());
  std::uint64_t total = 0;
  for (std::size_t r = 0; r < rd.count(); ++r) {
    total += cost(static_cast<std::int64_t>(rd.gaps[r]) - 1);
    total += cost(static_cast<std::int64_t>(rd.lengths[r]) - 1);
  }
  return total;
}

// Edges of the binary trie over ell-bit codes, via prefix omission:
// ell + sum of |x_i (-) x_{i-1}|, where the omitted prefix is the common one.
inline std::uint64_t trie(const SortedSet& s) {
  if (s.empty()) return 0;
  std::uint64_t total = s.depth();
  for (std::size_t i = 1; i < s.size(); ++i) total += static_cast<std::uint64_t>(std::bit_width(s[i] ^ s[i - 1]));
  return total;
}

// Edges after removing every maximal full subtree. Each maximal run splits
// into maximal aligned dyadic blocks; a block of 2^h leaves (h >= 1) is a
// maximal full subtree holding 2^(h+1) - 2 edges.
inline std::uint64_t rtrie(const SortedSet& s) {
  if (s.empty()) return 0;
  std::uint64_t removed = 0;
  const RunDecomposition rd = decompose_runs(s.elements());
  std::uint64_t start = 0;
  for (std::size_t r = 0; r < rd.count(); ++r) {
    start = (r == 0) ? rd.gaps[0] : start + rd.gaps[r];
    std::uint64_t pos = start, left = rd.lengths[r];
    while (left > 0) {
      unsigned h = pos == 0 ? s.depth() : static_cast<unsigned>(std::countr_zero(pos));
      h = std::min<unsigned>(h, static_cast<unsigned>(std::bit_width(left) - 1));
      std::uint64_t block = 1ULL << h;
      removed += 2 * block - 2;
      pos += block;
      left -= block;
    }
    start = pos;
  }
  return trie(s) - removed;
}

// ceil(lg C(u, n)), exact.
inline std::uint64_t binom_bound(std::uint64_t n, std::uint64_t u) {
  if (n > u) throw std::invalid_argument("binom_bound: n=" + std::to_string(n) + " exceeds u=" + std::to_string(u));
  mpz_t c;
  mpz_init(c);
  mpz_bin_uiui(c, static_cast<unsigned long>(u), static_cast<unsigned long>(n));
  mpz_sub_ui(c, c, 1);
  std::uint64_t bits = mpz_sgn(c) == 0 ? 0 : static_cast<std::uint64_t>(mpz_sizeinbase(c, 2));
  mpz_clear(c);
  return bits;
}

// S + a = {(x + a) mod u}, re-sorted.
inline SortedSet shift_set(const SortedSet& s, std::uint64_t a) {
  if (a >= s.universe()) throw std::invalid_argument("shift_set: shift must be below the universe size");
  const std::uint64_t u = s.universe();
  // Elements >= u - a wrap to the front; both halves stay sorted.
  auto split = std::lower_bound(s.begin(), s.end(), u - a);
  std::vector<std::uint64_t> out;
  out.reserve(s.size());
  for (auto it = split; it != s.end(); ++it) out.push_back(*it + a - u);
  for (auto it = s.begin(); it != split; ++it) out.push_back(*it + a);
  return SortedSet(std::move(out), u);
}

}  // namespace cbt::measures

#endif  // CBT_MEASURES_HPP_
