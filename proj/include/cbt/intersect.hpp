#ifndef CBT_INTERSECT_HPP_
#define CBT_INTERSECT_HPP_

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "binary_trie.hpp"
#include "run_trie.hpp"

namespace cbt {

enum class OutputMode : std::uint8_t { kArray, kTrie };

inline std::string to_string(OutputMode m) { return m == OutputMode::kArray ? "array" : "trie"; }

inline OutputMode parse_output_mode(const std::string& s) {
  if (s == "array") return OutputMode::kArray;
  if (s == "trie") return OutputMode::kTrie;
  throw std::invalid_argument("unknown output mode '" + s + "' (expected array or trie)");
}

struct IntersectOptions {
  OutputMode mode = OutputMode::kArray;
  // Emit, per result element, its 1-based rank in every input set.
  bool with_ranks = false;
  // Directories built on the TRIE-mode result.
  BuildOptions output{};
};

template <class Trie>
struct IntersectionOutput {
  OutputMode mode = OutputMode::kArray;
  std::size_t k = 0;
  std::vector<std::uint64_t> elements;  // ARRAY mode
  std::optional<Trie> trie;             // TRIE mode; nullopt when the result is empty
  std::vector<std::uint64_t> rank_seqs;  // k entries per result element, when requested
  std::uint64_t count = 0;
  std::uint64_t nodes_visited = 0;
  std::uint64_t rank1_calls = 0;
  std::uint64_t rank00_calls = 0;

  std::uint64_t size() const { return count; }
  bool has_ranks() const { return !rank_seqs.empty() || count == 0; }

  std::span<const std::uint64_t> rank_tuple(std::size_t j) const { return {rank_seqs.data() + j * k, k}; }

  std::vector<std::uint64_t> values() const {
    if (mode == OutputMode::kArray) return elements;
    return trie ? trie->decode() : std::vector<std::uint64_t>{};
  }
};

namespace detail {

template <class Trie>
void check_query(std::span<const Trie* const> tries) {
  if (tries.size() < 2) throw std::invalid_argument("intersection needs at least two sets");
  for (const Trie* t : tries) {
    if (t == nullptr) throw std::invalid_argument("intersection: null trie");
    if (t->universe() != tries[0]->universe()) throw std::invalid_argument("intersection: sets have different universes");
  }
}

/*
 * The synchronized descent. State for the node being evaluated at level li
 * lives in slot li of flat k-wide arrays, so a subtree's children overwrite
 * only deeper slots and the right child can still read its parent.
 *
 * Per trie i: pos = pair index of the current node; active = still
 * descending (run tries drop out below a 00 node); acc = for an active trie,
 * the run elements before the path so far (2^(ell-l) * rank00 summed up the
 * levels); for an excluded one, the elements before its 00 node; lo = the
 * first value under that 00 node.
 */
template <class Trie>
class AcEngine {
 public:
  static constexpr bool kRuns = Trie::kKind == TrieKind::kRuns;

  struct Frame {
    unsigned level = 0;
    std::uint64_t prefix = 0;
    std::vector<std::uint64_t> pos, acc, lo;
    std::vector<std::uint8_t> active;
  };

  enum class Step { kEmpty, kTerminal, kInner };

  struct Piece {
    std::vector<BitVector> levels;
    std::vector<std::uint64_t> elements;
    std::vector<std::uint64_t> ranks;
  };

  AcEngine(std::span<const Trie* const> tries, OutputMode mode, bool with_ranks)
      : tries_(tries.begin(), tries.end()),
        k_(tries.size()),
        ell_(tries[0]->depth()),
        mode_(mode),
        ranks_(with_ranks),
        pos_(k_ * ell_),
        acc_(k_ * ell_),
        lo_(k_ * ell_),
        base_(k_ * ell_),
        code_(k_ * ell_),
        active_(k_ * ell_),
        child_acc_saved_(k_ * ell_) {
    if (ranks_) {
      for (const Trie* t : tries_) t->store().require_last_rank("intersection rank tuples");
    }
    reset_piece();
  }

  std::size_t k() const { return k_; }
  unsigned depth() const { return ell_; }

  Frame root() const {
    Frame f;
    f.pos.assign(k_, 0);
    f.acc.assign(k_, 0);
    f.lo.assign(k_, 0);
    f.active.assign(k_, 1);
    return f;
  }

  // Full descent below f. Returns whether the subtree holds any result.
  bool run(const Frame& f) {
    load(f);
    return visit(f.level, f.prefix);
  }

  // One planning step: evaluates f's node; for an inner node appends its
  // surviving children to `children` (left first) and returns their code.
  Step expand(Frame& f, std::vector<Frame>& children, unsigned& code) {
    const std::uint64_t counters[3] = {nodes_visited, rank1_calls, rank00_calls};
    load(f);
    const Eval e = evaluate(f.level, f.prefix);
    bool terminal = f.level + 1 == ell_ && e.s != 0;
    if constexpr (kRuns) terminal = terminal || e.live <= 1;
    if (terminal) {
      // left untouched so the seed's own run evaluates (and counts) it once
      nodes_visited = counters[0];
      rank1_calls = counters[1];
      rank00_calls = counters[2];
      return Step::kTerminal;
    }
    store_back(f);
    if (e.s == 0) return Step::kEmpty;
    prepare_children(f.level);
    code = e.s;
    const std::size_t o = slot(f.level);
    for (unsigned b = 0; b < 2; ++b) {
      if (!(e.s & (b ? kRight : kLeft))) continue;
      Frame c = f;
      c.level = f.level + 1;
      c.prefix = (f.prefix << 1) | b;
      for (std::size_t i = 0; i < k_; ++i) {
        if (!active_[o + i]) continue;
        c.pos[i] = base_[o + i] + (b && (code_[o + i] & kLeft) ? 1 : 0);
        c.acc[i] = child_acc_[i];
      }
      children.push_back(std::move(c));
    }
    return Step::kInner;
  }

  // Moves out everything produced since the last take.
  Piece take() {
    Piece p = std::move(piece_);
    reset_piece();
    return p;
  }

  std::uint64_t nodes_visited = 0;
  std::uint64_t rank1_calls = 0;
  std::uint64_t rank00_calls = 0;

 private:
  struct Eval {
    unsigned s = kBoth;
    unsigned live = 0;
    std::size_t only = 0;
  };

  std::size_t slot(unsigned li) const { return static_cast<std::size_t>(li) * k_; }
  const auto& store_of(std::size_t i) const { return tries_[i]->store(); }
  bool want_elements() const { return mode_ == OutputMode::kArray || ranks_; }

  void reset_piece() {
    piece_ = Piece{};
    if (mode_ == OutputMode::kTrie) piece_.levels.resize(ell_);
  }

  void load(const Frame& f) {
    const std::size_t o = slot(f.level);
    for (std::size_t i = 0; i < k_; ++i) {
      pos_[o + i] = f.pos[i];
      acc_[o + i] = f.acc[i];
      lo_[o + i] = f.lo[i];
      active_[o + i] = f.active[i];
    }
  }

  void store_back(Frame& f) const {
    const std::size_t o = slot(f.level);
    for (std::size_t i = 0; i < k_; ++i) {
      f.acc[i] = acc_[o + i];
      f.lo[i] = lo_[o + i];
      f.active[i] = active_[o + i];
    }
  }

  // Elements of trie i before node (li, p), given acc for the levels above.
  std::uint64_t elements_before_node(std::size_t i, unsigned li, std::uint64_t p, std::uint64_t acc) {
    const auto& st = store_of(i);
    ++rank00_calls;
    acc += (1ULL << (ell_ - li)) * st.rank00(li, p);
    if (li + 1 == ell_) {
      ++rank1_calls;
      return acc + st.level(li).rank1_before(2 * p);
    }
    ++rank1_calls;
    const std::uint64_t q = st.child_base(li, p);
    // elements_before walks one rank00 and one rank1 per remaining level
    rank00_calls += ell_ - li - 1;
    rank1_calls += ell_ - li - 1;
    return acc + tries_[i]->elements_before(li + 1, q);
  }

  Eval evaluate(unsigned li, std::uint64_t prefix) {
    ++nodes_visited;
    const std::size_t o = slot(li);
    Eval e;
    for (std::size_t i = 0; i < k_; ++i) {
      if (!active_[o + i]) continue;
      const unsigned c = store_of(i).code(li, pos_[o + i]);
      if constexpr (kRuns) {
        if (c == kFull) {
          active_[o + i] = 0;
          if (ranks_) {
            acc_[o + i] = elements_before_node(i, li, pos_[o + i], acc_[o + i]);
            lo_[o + i] = prefix << (ell_ - li);
          }
          continue;
        }
      }
      code_[o + i] = c;
      e.s &= c;
      ++e.live;
      e.only = i;
    }
    return e;
  }

  // Child pair bases (one rank per active trie) and the acc children inherit.
  void prepare_children(unsigned li) {
    const std::size_t o = slot(li);
    child_acc_.resize(k_);
    for (std::size_t i = 0; i < k_; ++i) {
      child_acc_[i] = acc_[o + i];
      if (!active_[o + i]) continue;
      base_[o + i] = store_of(i).child_base(li, pos_[o + i]);
      ++rank1_calls;
      if constexpr (kRuns) {
        if (ranks_) {
          child_acc_[i] += (1ULL << (ell_ - li)) * store_of(i).rank00(li, pos_[o + i]);
          ++rank00_calls;
        }
      }
    }
  }

  void set_child(unsigned li, unsigned b) {
    const std::size_t o = slot(li), c = slot(li + 1);
    for (std::size_t i = 0; i < k_; ++i) {
      active_[c + i] = active_[o + i];
      lo_[c + i] = lo_[o + i];
      if (active_[o + i]) {
        pos_[c + i] = base_[o + i] + (b && (code_[o + i] & kLeft) ? 1 : 0);
        acc_[c + i] = child_acc_saved_[o + i];
      } else {
        acc_[c + i] = acc_[o + i];
      }
    }
  }

  bool visit(unsigned li, std::uint64_t prefix) {
    const Eval e = evaluate(li, prefix);
    if constexpr (kRuns) {
      if (e.live == 0) {
        emit_full(li, prefix);
        return true;
      }
      if (e.live == 1) {
        copy_subtree(e.only, li, prefix);
        return true;
      }
    }
    if (e.s == 0) return false;
    if (li + 1 == ell_) {
      emit_leaves(li, prefix, e.s);
      return true;
    }
    prepare_children(li);
    const std::size_t o = slot(li);
    for (std::size_t i = 0; i < k_; ++i) child_acc_saved_[o + i] = child_acc_[i];
    unsigned res = 0;
    if (e.s & kLeft) {
      set_child(li, 0);
      if (visit(li + 1, prefix << 1)) res |= kLeft;
    }
    if (e.s & kRight) {
      set_child(li, 1);
      if (visit(li + 1, (prefix << 1) | 1)) res |= kRight;
    }
    if (res && mode_ == OutputMode::kTrie) piece_.levels[li].append_bits(res, 2);
    return res != 0;
  }

  void push_excluded_rank(std::size_t o, std::size_t i, std::uint64_t x) {
    piece_.ranks.push_back(acc_[o + i] + (x - lo_[o + i]) + 1);
  }

  void emit_leaves(unsigned li, std::uint64_t prefix, unsigned s) {
    if (mode_ == OutputMode::kTrie) piece_.levels[li].append_bits(s, 2);
    if (!want_elements()) return;
    const std::size_t o = slot(li);
    if (ranks_) {
      leaf_before_.resize(k_);
      for (std::size_t i = 0; i < k_; ++i) {
        if (!active_[o + i]) continue;
        leaf_before_[i] = store_of(i).level(li).rank1_before(2 * pos_[o + i]);
        ++rank1_calls;
        if constexpr (kRuns) {
          leaf_before_[i] += 2 * store_of(i).rank00(li, pos_[o + i]);
          ++rank00_calls;
        }
      }
    }
    for (unsigned b = 0; b < 2; ++b) {
      if (!(s & (b ? kRight : kLeft))) continue;
      const std::uint64_t x = (prefix << 1) | b;
      if (mode_ == OutputMode::kArray) piece_.elements.push_back(x);
      if (!ranks_) continue;
      for (std::size_t i = 0; i < k_; ++i) {
        if (active_[o + i]) {
          const std::uint64_t extra = b && (code_[o + i] & kLeft) ? 1 : 0;
          piece_.ranks.push_back(acc_[o + i] + leaf_before_[i] + extra + 1);
        } else {
          push_excluded_rank(o, i, x);
        }
      }
    }
  }

  void emit_range(std::size_t o, std::uint64_t lo, std::uint64_t hi, std::size_t active_i, std::uint64_t active_base) {
    for (std::uint64_t x = lo; x < hi; ++x) {
      if (mode_ == OutputMode::kArray) piece_.elements.push_back(x);
      if (!ranks_) continue;
      for (std::size_t i = 0; i < k_; ++i) {
        if (i == active_i) {
          piece_.ranks.push_back(++active_base);
        } else {
          push_excluded_rank(o, i, x);
        }
      }
    }
  }

  void emit_full(unsigned li, std::uint64_t prefix) {
    if (mode_ == OutputMode::kTrie) piece_.levels[li].append_bits(kFull, 2);
    if (!want_elements()) return;
    const unsigned below = ell_ - li;
    emit_range(slot(li), prefix << below, (prefix + 1) << below, k_, 0);
  }

  // Only trie i is still active: its subtree is the answer here.
  void copy_subtree(std::size_t i, unsigned li, std::uint64_t prefix) {
    const auto& st = store_of(i);
    const std::size_t o = slot(li);
    const std::uint64_t p = pos_[o + i];
    if (mode_ == OutputMode::kTrie) {
      std::uint64_t start = p, end = p + 1;
      for (unsigned l = li;; ++l) {
        const auto& lv = st.level(l);
        piece_.levels[l].append_range_by([&lv](std::uint64_t w) { return lv.word(w); }, 2 * start, 2 * end);
        if (l + 1 == ell_) break;
        start = st.child_base(l, start);
        end = st.child_base(l, end);
        rank1_calls += 2;
        ++nodes_visited;
        if (start == end) break;
      }
    }
    if (!want_elements()) return;
    std::uint64_t base = 0;
    if (ranks_) base = elements_before_node(i, li, p, acc_[o + i]);
    if (mode_ != OutputMode::kTrie) {
      // decode_subtree seeds one cursor per level below li
      nodes_visited += ell_ - li - 1;
      rank1_calls += ell_ - li - 1;
    }
    st.decode_subtree(li, p, prefix, [&](std::uint64_t lo, std::uint64_t hi) {
      emit_range(o, lo, hi, i, base);
      base += hi - lo;
    });
  }

  std::vector<const Trie*> tries_;
  std::size_t k_;
  unsigned ell_;
  OutputMode mode_;
  bool ranks_;
  std::vector<std::uint64_t> pos_, acc_, lo_, base_;
  std::vector<unsigned> code_;
  std::vector<std::uint8_t> active_;
  std::vector<std::uint64_t> child_acc_saved_;
  std::vector<std::uint64_t> child_acc_, leaf_before_;
  Piece piece_;
};

// Element count of a level-wise result: deepest-level ones plus the leaves
// under every 00 code.
inline std::uint64_t count_level_elements(const std::vector<BitVector>& levels) {
  const unsigned ell = static_cast<unsigned>(levels.size());
  std::uint64_t n = 0;
  for (unsigned li = 0; li < ell; ++li) {
    const auto& lv = levels[li];
    std::uint64_t zeros = 0;
    for (std::uint64_t w = 0; w < lv.num_words(); ++w) {
      std::uint64_t z = bits::zero_pairs(lv.word(w));
      const std::uint64_t valid = lv.size() - 64 * w;
      if (valid < 64) z &= bits::low_mask(static_cast<unsigned>(valid));
      zeros += static_cast<std::uint64_t>(std::popcount(z));
    }
    n += zeros << (ell - li);
  }
  return n + levels.back().count_ones();
}

template <class Trie>
IntersectionOutput<Trie> finish_output(std::vector<BitVector> levels, std::vector<std::uint64_t> elements, std::vector<std::uint64_t> ranks,
                                       std::uint64_t universe, std::size_t k, const IntersectOptions& opts) {
  IntersectionOutput<Trie> out;
  out.mode = opts.mode;
  out.k = k;
  out.rank_seqs = std::move(ranks);
  if (opts.mode == OutputMode::kArray) {
    out.count = elements.size();
    out.elements = std::move(elements);
  } else if (!levels.empty() && !levels[0].empty()) {
    out.count = count_level_elements(levels);
    out.trie = Trie::from_levels(std::move(levels), universe, out.count, opts.output);
  }
  return out;
}

template <class Trie>
IntersectionOutput<Trie> run_sequential(std::span<const Trie* const> tries, const IntersectOptions& opts) {
  check_query(tries);
  AcEngine<Trie> eng(tries, opts.mode, opts.with_ranks);
  eng.run(eng.root());
  auto piece = eng.take();
  auto out = finish_output<Trie>(std::move(piece.levels), std::move(piece.elements), std::move(piece.ranks), tries[0]->universe(),
                                 tries.size(), opts);
  out.nodes_visited = eng.nodes_visited;
  out.rank1_calls = eng.rank1_calls;
  out.rank00_calls = eng.rank00_calls;
  return out;
}

}  // namespace detail

// k-way intersection over plain tries: the AND of the current node codes
// steers a synchronized depth-first descent.
template <RankedBits Bits>
IntersectionOutput<BinaryTrie<Bits>> ac_intersect(const std::vector<const BinaryTrie<Bits>*>& tries, const IntersectOptions& opts = {}) {
  return detail::run_sequential<BinaryTrie<Bits>>(tries, opts);
}

// The same descent over run tries; a trie at a 00 node drops out of its
// subtree, and a lone survivor's subtree is copied as is.
template <RankedBits Bits>
IntersectionOutput<RunTrie<Bits>> ac_intersect_runs(const std::vector<const RunTrie<Bits>*>& tries, const IntersectOptions& opts = {}) {
  return detail::run_sequential<RunTrie<Bits>>(tries, opts);
}

template <class Trie>
IntersectionOutput<Trie> intersect(const std::vector<const Trie*>& tries, const IntersectOptions& opts = {}) {
  return detail::run_sequential<Trie>(tries, opts);
}

// Rank tuples for the elements of `out`, taken from the side output when it
// was requested and recomputed with per-set rank queries otherwise.
template <class Trie>
std::vector<std::uint64_t> rank_sequences(const std::vector<const Trie*>& tries, const IntersectionOutput<Trie>& out) {
  if (!out.rank_seqs.empty() || out.count == 0) return out.rank_seqs;
  for (const Trie* t : tries) t->store().require_last_rank("rank_sequences");
  std::vector<std::uint64_t> r;
  for (std::uint64_t x : out.values()) {
    for (const Trie* t : tries) r.push_back(t->rank(x));
  }
  return r;
}

}  // namespace cbt

#endif  // CBT_INTERSECT_HPP_
