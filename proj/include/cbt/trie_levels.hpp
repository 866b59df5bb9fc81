#ifndef CBT_TRIE_LEVELS_HPP_
#define CBT_TRIE_LEVELS_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bit_vector.hpp"
#include "rank_support.hpp"
#include "sorted_set.hpp"

namespace cbt {

// Raw two-bit node codes as read by RankedBitsBase::pair(): the left-child bit
// sits at the even position, so it is the low bit of the code.
inline constexpr unsigned kLeft = 1;
inline constexpr unsigned kRight = 2;
inline constexpr unsigned kBoth = 3;
inline constexpr unsigned kFull = 0;  // 00: elided full subtree (run tries only)

struct BuildOptions {
  // rank1 directory on the deepest level; needed for rank() and rank tuples.
  bool last_level_rank = false;
  // select1 samples on every level; needed for select().
  bool select = false;
};

enum class TrieKind : std::uint8_t { kPlain = 0, kRuns = 1 };

namespace detail {

inline constexpr std::uint16_t kTrieFormatVersion = 1;

// Level-wise node codes for the trie of `s`. With `elide_full`, a node whose
// range is entirely present is written 00 and not expanded.
inline std::vector<BitVector> build_level_bits(const SortedSet& s, bool elide_full) {
  if (s.empty()) throw build_error("cannot build a trie of the empty set");
  const unsigned ell = s.depth();
  const auto& x = s.values();
  std::vector<BitVector> levels(ell);
  struct Range {
    std::size_t lo, hi;
  };
  std::vector<Range> cur{{0, x.size()}}, next;
  for (unsigned li = 0; li < ell; ++li) {
    const unsigned bit = ell - 1 - li;
    const std::uint64_t span = 2ULL << bit;  // leaves covered by a node at this level
    next.clear();
    for (const Range& r : cur) {
      if (elide_full && r.hi - r.lo == span) {
        levels[li].append_bits(kFull, 2);
        continue;
      }
      auto mid_it = std::partition_point(x.begin() + static_cast<std::ptrdiff_t>(r.lo), x.begin() + static_cast<std::ptrdiff_t>(r.hi),
                                         [bit](std::uint64_t v) { return ((v >> bit) & 1) == 0; });
      const std::size_t mid = static_cast<std::size_t>(mid_it - x.begin());
      unsigned code = (mid > r.lo ? kLeft : 0) | (r.hi > mid ? kRight : 0);
      levels[li].append_bits(code, 2);
      if (li + 1 < ell) {
        if (code & kLeft) next.push_back({r.lo, mid});
        if (code & kRight) next.push_back({mid, r.hi});
      }
    }
    std::swap(cur, next);
  }
  return levels;
}

/*
 * Level vectors plus their directories. Level li (0-based) holds the codes
 * of the nodes at depth li, whose children sit at depth li + 1; the deepest
 * level's children are the leaves.
 */
template <RankedBits Bits>
class LevelStore {
 public:
  LevelStore() = default;

  LevelStore(std::vector<BitVector> raw, std::uint64_t universe, std::uint64_t n, BuildOptions opts, bool zero_rank)
      : u_(universe), ell_(bits::ceil_log2(universe)), n_(n), opts_(opts) {
    if (raw.size() != ell_) throw std::invalid_argument("level count does not match universe depth");
    levels_.reserve(ell_);
    for (unsigned li = 0; li < ell_; ++li) {
      if (raw[li].size() & 1) throw std::invalid_argument("level " + std::to_string(li + 1) + " has odd length");
      const bool with_rank = li + 1 < ell_ || opts.last_level_rank;
      levels_.emplace_back(std::move(raw[li]), with_rank);
    }
    if (opts.select) {
      for (const auto& l : levels_) select_.emplace_back(l);
    }
    if (zero_rank) {
      for (const auto& l : levels_) zero_.emplace_back(l);
    }
  }

  std::uint64_t universe() const { return u_; }
  unsigned depth() const { return ell_; }
  std::uint64_t size() const { return n_; }
  const BuildOptions& options() const { return opts_; }
  const Bits& level(unsigned li) const { return levels_[li]; }
  std::uint64_t level_pairs(unsigned li) const { return levels_[li].size() / 2; }

  unsigned code(unsigned li, std::uint64_t p) const { return levels_[li].pair(p); }

  // Pair index in level li + 1 where the children of node p begin.
  std::uint64_t child_base(unsigned li, std::uint64_t p) const { return levels_[li].rank1_before(2 * p); }

  std::uint64_t rank00(unsigned li, std::uint64_t q) const { return zero_[li].rank00(levels_[li], q); }

  bool has_last_rank() const { return levels_.back().has_rank(); }
  void require_last_rank(const char* what) const {
    if (!has_last_rank()) throw capability_error(std::string(what) + ": build with last_level_rank to enable it");
  }
  void require_select(const char* what) const {
    if (select_.empty()) throw capability_error(std::string(what) + ": build with select to enable it");
  }

  std::uint64_t select1(unsigned li, std::uint64_t j) const { return select_[li].select1(levels_[li], j); }

  std::uint64_t payload_bits() const {
    std::uint64_t b = 0;
    for (const auto& l : levels_) b += l.size();
    return b;
  }

  std::uint64_t directory_bits() const {
    std::uint64_t b = 0;
    for (const auto& l : levels_) b += l.directory_bits();
    for (const auto& s : select_) b += s.directory_bits();
    for (const auto& z : zero_) b += z.directory_bits();
    return b;
  }

  std::uint64_t count_ones() const {
    std::uint64_t c = 0;
    for (const auto& l : levels_) c += l.count_ones();
    return c;
  }

  std::vector<BitVector> raw_levels() const {
    std::vector<BitVector> out;
    out.reserve(ell_);
    for (const auto& l : levels_) out.push_back(l.to_bit_vector());
    return out;
  }

  // Calls emit(lo, hi) for every maximal group of consecutive elements found
  // in preorder below node (li, p) whose path prefix is `prefix` (li bits).
  // Per-level cursors replace rank calls: preorder meets each level's nodes
  // left to right.
  template <class Emit>
  void decode_subtree(unsigned li, std::uint64_t p, std::uint64_t prefix, Emit&& emit) const {
    std::array<std::uint64_t, 64> cursor{};
    cursor[li] = p;
    for (unsigned l = li; l + 1 < ell_; ++l) cursor[l + 1] = child_base(l, cursor[l]);
    decode_walk(li, prefix, cursor, emit);
  }

  void write(std::ostream& os, const char magic[4]) const {
    os.write(magic, 4);
    io::write_le<std::uint16_t>(os, kTrieFormatVersion);
    io::write_le<std::uint64_t>(os, u_);
    io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(ell_));
    io::write_le<std::uint64_t>(os, n_);
    io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(Bits::kVariant));
    for (const auto& l : levels_) l.write(os);
  }

  std::uint64_t serialized_bytes() const {
    std::uint64_t b = 4 + 2 + 8 + 1 + 8 + 1;
    for (const auto& l : levels_) b += BitVector::serialized_bytes(l.size());
    return b;
  }

  // Reads the body after the magic, which the caller has checked.
  static LevelStore read_body(std::istream& is, BuildOptions opts, bool zero_rank) {
    const auto version = io::read_le<std::uint16_t>(is);
    if (version != kTrieFormatVersion) throw std::runtime_error("unsupported trie format version " + std::to_string(version));
    const auto u = io::read_le<std::uint64_t>(is);
    const auto ell = io::read_le<std::uint8_t>(is);
    const auto n = io::read_le<std::uint64_t>(is);
    const auto variant = io::read_le<std::uint8_t>(is);
    if (u < 2 || ell != bits::ceil_log2(u)) throw std::runtime_error("trie header: inconsistent universe and depth");
    if (variant != static_cast<std::uint8_t>(Bits::kVariant)) {
      throw std::runtime_error("trie header: stored rank variant does not match the requested one");
    }
    std::vector<BitVector> raw;
    for (unsigned li = 0; li < ell; ++li) raw.push_back(BitVector::read(is));
    return LevelStore(std::move(raw), u, n, opts, zero_rank);
  }

 private:
  template <class Emit>
  void decode_walk(unsigned li, std::uint64_t prefix, std::array<std::uint64_t, 64>& cursor, Emit& emit) const {
    const unsigned c = code(li, cursor[li]++);
    const unsigned below = ell_ - li;  // node covers 2^below leaves
    if (c == kFull) {
      emit(prefix << below, (prefix + 1) << below);
      return;
    }
    if (li + 1 == ell_) {
      if (c == kBoth) {
        emit(prefix << 1, (prefix << 1) + 2);
      } else {
        const std::uint64_t x = (prefix << 1) | (c == kRight ? 1 : 0);
        emit(x, x + 1);
      }
      return;
    }
    if (c & kLeft) decode_walk(li + 1, prefix << 1, cursor, emit);
    if (c & kRight) decode_walk(li + 1, (prefix << 1) | 1, cursor, emit);
  }

  std::vector<Bits> levels_;
  std::vector<SelectSamples> select_;
  std::vector<PairZeroRank> zero_;
  std::uint64_t u_ = 2;
  unsigned ell_ = 1;
  std::uint64_t n_ = 0;
  BuildOptions opts_{};
};

inline void expect_magic(std::istream& is, const char magic[4]) {
  char buf[4];
  if (!is.read(buf, 4) || std::string(buf, 4) != std::string(magic, 4)) {
    throw std::runtime_error(std::string("bad magic, expected ") + std::string(magic, 4));
  }
}

}  // namespace detail

}  // namespace cbt

#endif  // CBT_TRIE_LEVELS_HPP_
