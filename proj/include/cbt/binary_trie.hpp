#ifndef CBT_BINARY_TRIE_HPP_
#define CBT_BINARY_TRIE_HPP_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trie_levels.hpp"

namespace cbt {

/*
 * Level-wise binary trie of a set over [0, 2^ell). Node codes are 01, 10 or
 * 11; the payload is exactly 2 * (trie(S) - n + 1) bits. Immutable once built.
 */
template <RankedBits Bits = DenseRankBits>
class BinaryTrie {
 public:
  using bits_type = Bits;
  static constexpr TrieKind kKind = TrieKind::kPlain;
  static constexpr char kMagic[4] = {'B', 'T', 'R', 'I'};

  BinaryTrie() = default;

  static BinaryTrie build(const SortedSet& s, BuildOptions opts = {}) {
    return BinaryTrie(detail::LevelStore<Bits>(detail::build_level_bits(s, false), s.universe(), s.size(), opts, false));
  }

  // Wraps level vectors produced elsewhere (e.g. an intersection). The caller
  // guarantees they describe a valid plain trie holding n elements.
  static BinaryTrie from_levels(std::vector<BitVector> levels, std::uint64_t universe, std::uint64_t n, BuildOptions opts = {}) {
    return BinaryTrie(detail::LevelStore<Bits>(std::move(levels), universe, n, opts, false));
  }

  std::uint64_t universe() const { return store_.universe(); }
  unsigned depth() const { return store_.depth(); }
  std::uint64_t size() const { return store_.size(); }
  const BuildOptions& options() const { return store_.options(); }
  const detail::LevelStore<Bits>& store() const { return store_; }
  const Bits& level(unsigned li) const { return store_.level(li); }
  std::string level_string(unsigned li) const { return store_.level(li).to_bit_vector().to_string(); }

  std::uint64_t payload_bits() const { return store_.payload_bits(); }
  std::uint64_t directory_bits() const { return store_.directory_bits(); }
  std::uint64_t count_ones() const { return store_.count_ones(); }

  bool contains(std::uint64_t x) const {
    check_query(x, "contains");
    const unsigned ell = depth();
    std::uint64_t p = 0;
    for (unsigned li = 0; li < ell; ++li) {
      const unsigned c = store_.code(li, p);
      const unsigned b = bit_at(x, li);
      if (!(c & (b ? kRight : kLeft))) return false;
      if (li + 1 < ell) p = store_.child_base(li, p) + (b && (c & kLeft) ? 1 : 0);
    }
    return true;
  }

  // |{y in S : y <= x}|. Descends along x; on a dead end the predecessor is
  // the rightmost leaf below the left child of the last branching node where
  // the path turned right.
  std::uint64_t rank(std::uint64_t x) const {
    check_query(x, "rank");
    store_.require_last_rank("rank");
    const unsigned ell = depth();
    const Bits& last = store_.level(ell - 1);
    std::uint64_t p = 0;
    std::optional<std::pair<unsigned, std::uint64_t>> pivot;  // node whose left subtree holds the predecessor
    for (unsigned li = 0; li < ell; ++li) {
      const unsigned c = store_.code(li, p);
      const unsigned b = bit_at(x, li);
      if (li + 1 == ell) {
        if (b && (c & kRight)) return last.rank1_before(2 * p + 2);
        if (c & kLeft) return last.rank1_before(2 * p + 1);  // x itself, or its left sibling
        break;
      }
      if (b) {
        if (c & kLeft) pivot = {li, p};
        if (!(c & kRight)) break;
        p = store_.child_base(li, p) + ((c & kLeft) ? 1 : 0);
      } else {
        if (!(c & kLeft)) break;
        p = store_.child_base(li, p);
      }
    }
    if (!pivot) return 0;
    auto [li, p0] = *pivot;
    if (li + 1 == ell) return last.rank1_before(2 * p0 + 1);
    p = store_.child_base(li, p0);
    for (unsigned l = li + 1;; ++l) {
      const unsigned c = store_.code(l, p);
      if (l + 1 == ell) return last.rank1_before(2 * p + ((c & kRight) ? 2 : 1));
      p = store_.child_base(l, p) + ((c & kRight) && (c & kLeft) ? 1 : 0);
    }
  }

  // The j-th smallest element, 1 <= j <= n. Climbs from the j-th one of the
  // deepest level; each parent is a select1 one level up.
  std::uint64_t select(std::uint64_t j) const {
    store_.require_select("select");
    if (j == 0 || j > size()) throw std::out_of_range("select: rank " + std::to_string(j) + " outside [1, " + std::to_string(size()) + "]");
    const unsigned ell = depth();
    std::uint64_t pos = store_.select1(ell - 1, j);
    std::uint64_t x = pos & 1;
    for (unsigned li = ell - 1; li-- > 0;) {
      pos = store_.select1(li, (pos >> 1) + 1);
      x |= (pos & 1) << (ell - 1 - li);
    }
    return x;
  }

  // Smallest element >= x.
  std::optional<std::uint64_t> successor(std::uint64_t x) const {
    check_query(x, "successor");
    const unsigned ell = depth();
    std::uint64_t p = 0, prefix = 0;
    struct Pivot {
      unsigned li;
      std::uint64_t p, prefix;
    };
    std::optional<Pivot> pivot;  // last node where the path went left past an existing right child
    for (unsigned li = 0; li < ell; ++li) {
      const unsigned c = store_.code(li, p);
      const unsigned b = bit_at(x, li);
      if (li + 1 == ell) {
        if (!b) return (prefix << 1) | ((c & kLeft) ? 0 : 1);
        if (c & kRight) return (prefix << 1) | 1;
        break;
      }
      if (!b) {
        if (c & kLeft) {
          if (c & kRight) pivot = Pivot{li, p, prefix};
          p = store_.child_base(li, p);
          prefix <<= 1;
        } else {
          return leftmost(li + 1, store_.child_base(li, p), (prefix << 1) | 1);
        }
      } else {
        if (!(c & kRight)) break;
        p = store_.child_base(li, p) + ((c & kLeft) ? 1 : 0);
        prefix = (prefix << 1) | 1;
      }
    }
    if (!pivot) return std::nullopt;
    const std::uint64_t right_prefix = (pivot->prefix << 1) | 1;
    if (pivot->li + 1 == ell) return right_prefix;
    return leftmost(pivot->li + 1, store_.child_base(pivot->li, pivot->p) + 1, right_prefix);
  }

  // Largest element <= x.
  std::optional<std::uint64_t> predecessor(std::uint64_t x) const {
    check_query(x, "predecessor");
    const unsigned ell = depth();
    std::uint64_t p = 0, prefix = 0;
    struct Pivot {
      unsigned li;
      std::uint64_t p, prefix;
    };
    std::optional<Pivot> pivot;
    for (unsigned li = 0; li < ell; ++li) {
      const unsigned c = store_.code(li, p);
      const unsigned b = bit_at(x, li);
      if (li + 1 == ell) {
        if (b) return (prefix << 1) | ((c & kRight) ? 1 : 0);
        if (c & kLeft) return prefix << 1;
        break;
      }
      if (b) {
        if (c & kRight) {
          if (c & kLeft) pivot = Pivot{li, p, prefix};
          p = store_.child_base(li, p) + ((c & kLeft) ? 1 : 0);
          prefix = (prefix << 1) | 1;
        } else {
          return rightmost(li + 1, store_.child_base(li, p), prefix << 1);
        }
      } else {
        if (!(c & kLeft)) break;
        p = store_.child_base(li, p);
        prefix <<= 1;
      }
    }
    if (!pivot) return std::nullopt;
    const std::uint64_t left_prefix = pivot->prefix << 1;
    if (pivot->li + 1 == ell) return left_prefix;
    return rightmost(pivot->li + 1, store_.child_base(pivot->li, pivot->p), left_prefix);
  }

  std::vector<std::uint64_t> decode() const {
    std::vector<std::uint64_t> out;
    out.reserve(size());
    store_.decode_subtree(0, 0, 0, [&out](std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t v = lo; v < hi; ++v) out.push_back(v);
    });
    return out;
  }

  SortedSet decode_set() const { return SortedSet(decode(), universe()); }

  // Empty string when every structural invariant holds, otherwise a description.
  std::string check_invariants() const {
    const unsigned ell = depth();
    if (store_.level_pairs(0) != 1) return "first level must hold exactly the root";
    for (unsigned li = 0; li < ell; ++li) {
      const Bits& l = store_.level(li);
      for (std::uint64_t p = 0; p < store_.level_pairs(li); ++p) {
        if (l.pair(p) == kFull) return "code 00 at level " + std::to_string(li + 1) + " pair " + std::to_string(p);
      }
      const std::uint64_t ones = l.count_ones();
      if (li + 1 < ell && ones != store_.level_pairs(li + 1)) {
        return "level " + std::to_string(li + 1) + " has " + std::to_string(ones) + " ones but next level has " +
               std::to_string(store_.level_pairs(li + 1)) + " nodes";
      }
      if (li + 1 == ell && ones != size()) return "last level ones do not match element count";
    }
    return {};
  }

  void write(std::ostream& os) const { store_.write(os, kMagic); }
  std::uint64_t serialized_bytes() const { return store_.serialized_bytes(); }

  static BinaryTrie read(std::istream& is, BuildOptions opts = {}) {
    detail::expect_magic(is, kMagic);
    return BinaryTrie(detail::LevelStore<Bits>::read_body(is, opts, false));
  }

 private:
  explicit BinaryTrie(detail::LevelStore<Bits> store) : store_(std::move(store)) {}

  unsigned bit_at(std::uint64_t x, unsigned li) const { return static_cast<unsigned>((x >> (depth() - 1 - li)) & 1); }

  void check_query(std::uint64_t x, const char* what) const {
    if (x >= universe()) {
      throw std::out_of_range(std::string(what) + ": " + std::to_string(x) + " outside universe [0, " + std::to_string(universe()) + ")");
    }
  }

  std::uint64_t leftmost(unsigned li, std::uint64_t p, std::uint64_t prefix) const {
    for (;; ++li) {
      const unsigned c = store_.code(li, p);
      const unsigned go = (c & kLeft) ? 0 : 1;
      prefix = (prefix << 1) | go;
      if (li + 1 == depth()) return prefix;
      p = store_.child_base(li, p);
    }
  }

  std::uint64_t rightmost(unsigned li, std::uint64_t p, std::uint64_t prefix) const {
    for (;; ++li) {
      const unsigned c = store_.code(li, p);
      const unsigned go = (c & kRight) ? 1 : 0;
      prefix = (prefix << 1) | go;
      if (li + 1 == depth()) return prefix;
      p = store_.child_base(li, p) + (go && (c & kLeft) ? 1 : 0);
    }
  }

  detail::LevelStore<Bits> store_;
};

}  // namespace cbt

#endif  // CBT_BINARY_TRIE_HPP_
