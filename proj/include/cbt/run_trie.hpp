#ifndef CBT_RUN_TRIE_HPP_
#define CBT_RUN_TRIE_HPP_

#include <array>
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
 * Binary trie with every maximal full subtree removed and its root coded 00.
 * A 00 code at (0-based) level li stands for 2^(ell - li) consecutive
 * elements. Each level carries a 00-pair directory for rank.
 */
template <RankedBits Bits = DenseRankBits>
class RunTrie {
 public:
  using bits_type = Bits;
  static constexpr TrieKind kKind = TrieKind::kRuns;
  static constexpr char kMagic[4] = {'R', 'T', 'R', 'I'};

  RunTrie() = default;

  static RunTrie build(const SortedSet& s, BuildOptions opts = {}) {
    return RunTrie(detail::LevelStore<Bits>(detail::build_level_bits(s, true), s.universe(), s.size(), opts, true));
  }

  static RunTrie from_levels(std::vector<BitVector> levels, std::uint64_t universe, std::uint64_t n, BuildOptions opts = {}) {
    return RunTrie(detail::LevelStore<Bits>(std::move(levels), universe, n, opts, true));
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

  // Leaves covered by a node stored at level li.
  std::uint64_t span(unsigned li) const { return 1ULL << (depth() - li); }

  bool contains(std::uint64_t x) const {
    check_query(x, "contains");
    const unsigned ell = depth();
    std::uint64_t p = 0;
    for (unsigned li = 0; li < ell; ++li) {
      const unsigned c = store_.code(li, p);
      if (c == kFull) return true;
      const unsigned b = bit_at(x, li);
      if (!(c & (b ? kRight : kLeft))) return false;
      if (li + 1 < ell) p = store_.child_base(li, p) + (b && (c & kLeft) ? 1 : 0);
    }
    return true;
  }

  // Number of elements in the nodes of level li with pair index < q. Follows
  // the left boundary down, adding 2^(ell-l) per 00 code and finally the ones
  // of the deepest level.
  std::uint64_t elements_before(unsigned li, std::uint64_t q) const {
    const unsigned ell = depth();
    std::uint64_t total = 0;
    for (unsigned l = li;; ++l) {
      total += span(l) * store_.rank00(l, q);
      if (l + 1 == ell) return total + store_.level(l).rank1_before(2 * q);
      q = store_.child_base(l, q);
    }
  }

  // Elements strictly before node (li, p), given the pair index of its
  // ancestor at every level above (path[0..li)).
  std::uint64_t elements_before_node(unsigned li, std::uint64_t p, const std::array<std::uint64_t, 64>& path) const {
    std::uint64_t d = 0;
    for (unsigned l = 0; l < li; ++l) d += span(l) * store_.rank00(l, path[l]);
    d += span(li) * store_.rank00(li, p);
    if (li + 1 < depth()) return d + elements_before(li + 1, store_.child_base(li, p));
    return d + store_.level(li).rank1_before(2 * p);
  }

  // |{y in S : y <= x}|: the plain descent toward the predecessor, with
  // d += 2^(ell-l) * rank00 at every level of the final path.
  std::uint64_t rank(std::uint64_t x) const {
    check_query(x, "rank");
    store_.require_last_rank("rank");
    const unsigned ell = depth();
    std::array<std::uint64_t, 64> path{};
    std::uint64_t p = 0;
    std::optional<unsigned> pivot;  // level of the last node whose left subtree holds the predecessor
    auto leaf_rank = [&](unsigned pos) {
      std::uint64_t d = 0;
      for (unsigned l = 0; l < ell; ++l) d += span(l) * store_.rank00(l, path[l]);
      return d + store_.level(ell - 1).rank1_before(2 * path[ell - 1] + pos + 1);
    };
    for (unsigned li = 0; li < ell; ++li) {
      path[li] = p;
      const unsigned c = store_.code(li, p);
      if (c == kFull) {
        const std::uint64_t base = (x >> (ell - li)) << (ell - li);
        return elements_before_node(li, p, path) + (x - base) + 1;
      }
      const unsigned b = bit_at(x, li);
      if (li + 1 == ell) {
        if (b && (c & kRight)) return leaf_rank(1);
        if (c & kLeft) return leaf_rank(0);
        break;
      }
      if (b) {
        if (c & kLeft) pivot = li;
        if (!(c & kRight)) break;
        p = store_.child_base(li, p) + ((c & kLeft) ? 1 : 0);
      } else {
        if (!(c & kLeft)) break;
        p = store_.child_base(li, p);
      }
    }
    if (!pivot) return 0;
    const unsigned li = *pivot;
    if (li + 1 == ell) return leaf_rank(0);
    p = store_.child_base(li, path[li]);
    for (unsigned l = li + 1;; ++l) {
      path[l] = p;
      const unsigned c = store_.code(l, p);
      if (c == kFull) return elements_before_node(l, p, path) + span(l);
      if (l + 1 == ell) return leaf_rank((c & kRight) ? 1 : 0);
      p = store_.child_base(l, p) + ((c & kRight) && (c & kLeft) ? 1 : 0);
    }
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

  std::string check_invariants() const {
    const unsigned ell = depth();
    if (store_.level_pairs(0) != 1) return "first level must hold exactly the root";
    std::uint64_t elided = 0;
    for (unsigned li = 0; li < ell; ++li) {
      const Bits& l = store_.level(li);
      std::uint64_t zeros = 0;
      for (std::uint64_t p = 0; p < store_.level_pairs(li); ++p) zeros += l.pair(p) == kFull;
      elided += zeros * span(li);
      const std::uint64_t ones = l.count_ones();
      if (li + 1 < ell && ones != store_.level_pairs(li + 1)) {
        return "level " + std::to_string(li + 1) + " ones do not match next level node count";
      }
      if (li + 1 < ell) {
        for (std::uint64_t p = 0; p < store_.level_pairs(li); ++p) {
          if (l.pair(p) != kBoth) continue;
          const std::uint64_t q = store_.child_base(li, p);
          if (store_.code(li + 1, q) == kFull && store_.code(li + 1, q + 1) == kFull) {
            return "full subtree at level " + std::to_string(li + 1) + " pair " + std::to_string(p) + " not elided";
          }
        }
      }
      if (li + 1 == ell) {
        for (std::uint64_t p = 0; p < store_.level_pairs(li); ++p) {
          if (l.pair(p) == kBoth) return "full leaf pair coded 11 instead of 00 at the last level";
        }
        if (ones + elided != size()) return "element count does not match leaves plus elided runs";
      }
    }
    return {};
  }

  void write(std::ostream& os) const { store_.write(os, kMagic); }
  std::uint64_t serialized_bytes() const { return store_.serialized_bytes(); }

  static RunTrie read(std::istream& is, BuildOptions opts = {}) {
    detail::expect_magic(is, kMagic);
    return RunTrie(detail::LevelStore<Bits>::read_body(is, opts, true));
  }

 private:
  explicit RunTrie(detail::LevelStore<Bits> store) : store_(std::move(store)) {}

  unsigned bit_at(std::uint64_t x, unsigned li) const { return static_cast<unsigned>((x >> (depth() - 1 - li)) & 1); }

  void check_query(std::uint64_t x, const char* what) const {
    if (x >= universe()) {
      throw std::out_of_range(std::string(what) + ": " + std::to_string(x) + " outside universe [0, " + std::to_string(universe()) + ")");
    }
  }

  detail::LevelStore<Bits> store_;
};

}  // namespace cbt

#endif  // CBT_RUN_TRIE_HPP_
