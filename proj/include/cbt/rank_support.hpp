#ifndef CBT_RANK_SUPPORT_HPP_
#define CBT_RANK_SUPPORT_HPP_

#include <concepts>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bit_vector.hpp"
#include "bits.hpp"

namespace cbt {

enum class RankVariant : std::uint8_t { kDense = 0, kSparse = 1, kInterleaved = 2 };

inline std::string_view to_string(RankVariant v) {
  switch (v) {
    case RankVariant::kDense: return "dense";
    case RankVariant::kSparse: return "sparse";
    case RankVariant::kInterleaved: return "interleaved";
  }
  return "?";
}

inline std::optional<RankVariant> parse_rank_variant(std::string_view s) {
  if (s == "dense") return RankVariant::kDense;
  if (s == "sparse") return RankVariant::kSparse;
  if (s == "interleaved") return RankVariant::kInterleaved;
  return std::nullopt;
}

class capability_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

[[noreturn]] inline void rank_out_of_range(std::uint64_t i, std::uint64_t n) {
  throw std::out_of_range("rank1: index " + std::to_string(i) + " outside [0, " + std::to_string(n) + ")");
}

}  // namespace detail

/*
 * A bit vector bundled with a rank1 directory. All three layouts answer
 * rank1_before(i) = #ones in [0, i) with one directory probe and a bounded
 * popcount sweep. They can be built without a directory, in which case only
 * access works.
 */
template <class T>
concept RankedBits = requires(const T& t, std::uint64_t i) {
  { T::kVariant } -> std::convertible_to<RankVariant>;
  { t.size() } -> std::same_as<std::uint64_t>;
  { t.word(i) } -> std::same_as<std::uint64_t>;
  { t.rank1_before(i) } -> std::same_as<std::uint64_t>;
  { t.has_rank() } -> std::same_as<bool>;
  { t.directory_bits() } -> std::same_as<std::uint64_t>;
};

template <class Derived>
class RankedBitsBase {
 public:
  bool operator[](std::uint64_t i) const { return (self().word(i >> 6) >> (i & 63)) & 1; }

  // Raw two-bit node code at pair index p: bit 2p in the low position, bit 2p+1 high.
  unsigned pair(std::uint64_t p) const {
    return static_cast<unsigned>((self().word(p >> 5) >> ((2 * p) & 63)) & 3);
  }

  std::uint64_t num_pairs() const { return self().size() / 2; }
  std::uint64_t num_words() const { return (self().size() + 63) / 64; }

  // Inclusive rank: #ones in [0, i].
  std::uint64_t rank1(std::uint64_t i) const {
    if (i >= self().size()) detail::rank_out_of_range(i, self().size());
    if (!self().has_rank()) throw capability_error("rank1: no rank directory on this vector");
    return self().rank1_before(i + 1);
  }

  std::uint64_t count_ones() const {
    std::uint64_t c = 0;
    for (std::uint64_t w = 0; w < num_words(); ++w) c += bits::popcount(self().word(w));
    return c;
  }

  BitVector to_bit_vector() const {
    BitVector bv;
    bv.append_range_by([this](std::uint64_t w) { return self().word(w); }, 0, self().size());
    return bv;
  }

  void write(std::ostream& os) const {
    io::write_le<std::uint64_t>(os, self().size());
    for (std::uint64_t w = 0; w < num_words(); ++w) io::write_le<std::uint64_t>(os, self().word(w));
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// 512-bit blocks, each with a 64-bit absolute count and a 64-bit word of seven
// packed 9-bit counts relative to the block start. 128 bits per 512 (25%).
class DenseRankBits : public RankedBitsBase<DenseRankBits> {
 public:
  static constexpr RankVariant kVariant = RankVariant::kDense;

  DenseRankBits() = default;
  explicit DenseRankBits(BitVector bits, bool with_rank = true) : bits_(std::move(bits)) {
    if (!with_rank) return;
    const std::uint64_t nblocks = bits_.size() / 512 + 1;
    dir_.assign(2 * nblocks, 0);
    std::uint64_t total = 0;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
      dir_[2 * b] = total;
      std::uint64_t rel = 0, packed = 0;
      for (unsigned j = 0; j < 8; ++j) {
        std::uint64_t w = 8 * b + j;
        if (j > 0) packed |= rel << (9 * (j - 1));
        if (w < bits_.num_words()) rel += bits::popcount(bits_.word(w));
      }
      dir_[2 * b + 1] = packed;
      total += rel;
    }
  }

  std::uint64_t size() const { return bits_.size(); }
  std::uint64_t word(std::uint64_t w) const { return bits_.word(w); }
  bool has_rank() const { return !dir_.empty(); }
  std::uint64_t directory_bits() const { return 64 * dir_.size(); }

  std::uint64_t rank1_before(std::uint64_t i) const {
    const std::uint64_t b = i >> 9;
    const unsigned j = static_cast<unsigned>((i >> 6) & 7);
    std::uint64_t r = dir_[2 * b];
    if (j) r += (dir_[2 * b + 1] >> (9 * (j - 1))) & 0x1FF;
    if (i & 63) r += bits::popcount(bits_.word(i >> 6) & bits::low_mask(i & 63));
    return r;
  }

 private:
  BitVector bits_;
  std::vector<std::uint64_t> dir_;
};

// 2048-bit superblocks with a 64-bit absolute count and a 64-bit word of three
// packed 11-bit counts for the 512-bit sub-blocks. 128 bits per 2048 (6.25%);
// a query sweeps at most seven full words.
class SparseRankBits : public RankedBitsBase<SparseRankBits> {
 public:
  static constexpr RankVariant kVariant = RankVariant::kSparse;

  SparseRankBits() = default;
  explicit SparseRankBits(BitVector bits, bool with_rank = true) : bits_(std::move(bits)) {
    if (!with_rank) return;
    const std::uint64_t nsuper = bits_.size() / 2048 + 1;
    dir_.assign(2 * nsuper, 0);
    std::uint64_t total = 0;
    for (std::uint64_t s = 0; s < nsuper; ++s) {
      dir_[2 * s] = total;
      std::uint64_t rel = 0, packed = 0;
      for (unsigned sub = 0; sub < 4; ++sub) {
        if (sub > 0) packed |= rel << (11 * (sub - 1));
        for (unsigned j = 0; j < 8; ++j) {
          std::uint64_t w = 32 * s + 8 * sub + j;
          if (w < bits_.num_words()) rel += bits::popcount(bits_.word(w));
        }
      }
      dir_[2 * s + 1] = packed;
      total += rel;
    }
  }

  std::uint64_t size() const { return bits_.size(); }
  std::uint64_t word(std::uint64_t w) const { return bits_.word(w); }
  bool has_rank() const { return !dir_.empty(); }
  std::uint64_t directory_bits() const { return 64 * dir_.size(); }

  std::uint64_t rank1_before(std::uint64_t i) const {
    const std::uint64_t s = i >> 11;
    const unsigned sub = static_cast<unsigned>((i >> 9) & 3);
    std::uint64_t r = dir_[2 * s];
    if (sub) r += (dir_[2 * s + 1] >> (11 * (sub - 1))) & 0x7FF;
    const std::uint64_t w_end = i >> 6;
    for (std::uint64_t w = (i >> 9) << 3; w < w_end; ++w) r += bits::popcount(bits_.word(w));
    if (i & 63) r += bits::popcount(bits_.word(w_end) & bits::low_mask(i & 63));
    return r;
  }

 private:
  BitVector bits_;
  std::vector<std::uint64_t> dir_;
};

// Each 512-bit block is stored as [absolute count | 8 payload words], so a rank
// query touches one contiguous 72-byte run. 64 bits per 512 (12.5%). Without a
// directory the blocks are stored back to back with no count slot.
class InterleavedRankBits : public RankedBitsBase<InterleavedRankBits> {
 public:
  static constexpr RankVariant kVariant = RankVariant::kInterleaved;

  InterleavedRankBits() = default;
  explicit InterleavedRankBits(const BitVector& bits, bool with_rank = true)
      : size_(bits.size()), stride_(with_rank ? 9 : 8), head_(with_rank ? 1 : 0) {
    const std::uint64_t nblocks = with_rank ? bits.size() / 512 + 1 : (bits.num_words() + 7) / 8;
    data_.assign(nblocks * stride_, 0);
    std::uint64_t total = 0;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
      if (with_rank) data_[b * stride_] = total;
      for (unsigned j = 0; j < 8; ++j) {
        std::uint64_t w = 8 * b + j;
        if (w < bits.num_words()) {
          data_[b * stride_ + head_ + j] = bits.word(w);
          total += bits::popcount(bits.word(w));
        }
      }
    }
  }

  std::uint64_t size() const { return size_; }
  std::uint64_t word(std::uint64_t w) const { return data_[(w >> 3) * stride_ + head_ + (w & 7)]; }
  bool has_rank() const { return head_ == 1; }
  std::uint64_t directory_bits() const { return has_rank() ? 64 * (data_.size() / 9) : 0; }

  std::uint64_t rank1_before(std::uint64_t i) const {
    const std::uint64_t* block = data_.data() + (i >> 9) * 9;
    std::uint64_t r = block[0];
    const unsigned j = static_cast<unsigned>((i >> 6) & 7);
    for (unsigned q = 0; q < j; ++q) r += bits::popcount(block[1 + q]);
    if (i & 63) r += bits::popcount(block[1 + j] & bits::low_mask(i & 63));
    return r;
  }

 private:
  std::uint64_t size_ = 0;
  unsigned stride_ = 8;
  unsigned head_ = 0;
  std::vector<std::uint64_t> data_;
};

static_assert(RankedBits<DenseRankBits>);
static_assert(RankedBits<SparseRankBits>);
static_assert(RankedBits<InterleavedRankBits>);

template <RankVariant V>
struct RankBitsFor;
template <>
struct RankBitsFor<RankVariant::kDense> { using type = DenseRankBits; };
template <>
struct RankBitsFor<RankVariant::kSparse> { using type = SparseRankBits; };
template <>
struct RankBitsFor<RankVariant::kInterleaved> { using type = InterleavedRankBits; };

// Calls f(tag) with tag::value the rank type matching `v`.
template <class F>
decltype(auto) dispatch_rank_variant(RankVariant v, F&& f) {
  switch (v) {
    case RankVariant::kSparse: return f(std::type_identity<SparseRankBits>{});
    case RankVariant::kInterleaved: return f(std::type_identity<InterleavedRankBits>{});
    case RankVariant::kDense: break;
  }
  return f(std::type_identity<DenseRankBits>{});
}

/*
 * Sampled select1: the position of every 8192nd one is stored, a query scans
 * words forward from the nearest sample. Works over any RankedBits.
 */
class SelectSamples {
 public:
  static constexpr std::uint64_t kSampleRate = 8192;

  SelectSamples() = default;

  template <RankedBits Bits>
  explicit SelectSamples(const Bits& b) {
    std::uint64_t seen = 0;
    for (std::uint64_t w = 0; w < b.num_words(); ++w) {
      std::uint64_t c = bits::popcount(b.word(w));
      // Sample (word, ones before word) for every word holding a one of rank 1 + m * rate.
      while (seen + c > kSampleRate * samples_.size()) samples_.push_back({w, seen});
      seen += c;
    }
    ones_ = seen;
  }

  std::uint64_t ones() const { return ones_; }
  std::uint64_t directory_bits() const { return 128 * samples_.size(); }

  // Smallest i with rank1(i) = j, for 1 <= j <= ones().
  template <RankedBits Bits>
  std::uint64_t select1(const Bits& b, std::uint64_t j) const {
    if (j == 0 || j > ones_) {
      throw std::out_of_range("select1: rank " + std::to_string(j) + " outside [1, " + std::to_string(ones_) + "]");
    }
    const Sample& s = samples_[(j - 1) / kSampleRate];
    std::uint64_t w = s.word;
    std::uint64_t before = s.ones_before;
    for (;;) {
      std::uint64_t x = b.word(w);
      std::uint64_t c = bits::popcount(x);
      if (before + c >= j) return 64 * w + bits::select_in_word(x, static_cast<unsigned>(j - before - 1));
      before += c;
      ++w;
    }
  }

 private:
  struct Sample {
    std::uint64_t word;
    std::uint64_t ones_before;
  };
  std::vector<Sample> samples_;
  std::uint64_t ones_ = 0;
};

/*
 * Counts aligned 00 pairs (node codes 00) before a pair index. One 64-bit
 * cumulative count per 512-bit block.
 */
class PairZeroRank {
 public:
  PairZeroRank() = default;

  template <RankedBits Bits>
  explicit PairZeroRank(const Bits& b) : pairs_(b.size() / 2) {
    const std::uint64_t nblocks = b.size() / 512 + 1;
    dir_.assign(nblocks, 0);
    std::uint64_t total = 0;
    for (std::uint64_t blk = 0; blk < nblocks; ++blk) {
      dir_[blk] = total;
      for (unsigned j = 0; j < 8; ++j) {
        std::uint64_t w = 8 * blk + j;
        if (w < b.num_words()) total += bits::popcount(masked(b, w));
      }
    }
  }

  bool built() const { return !dir_.empty(); }
  std::uint64_t directory_bits() const { return 64 * dir_.size(); }

  // Number of 00 codes among pairs [0, q). Requires q <= number of pairs.
  template <RankedBits Bits>
  std::uint64_t rank00(const Bits& b, std::uint64_t q) const {
    const std::uint64_t i = 2 * q;
    std::uint64_t r = dir_[i >> 9];
    const std::uint64_t w_end = i >> 6;
    for (std::uint64_t w = (i >> 9) << 3; w < w_end; ++w) r += bits::popcount(masked(b, w));
    if (i & 63) r += bits::popcount(masked(b, w_end) & bits::low_mask(i & 63));
    return r;
  }

 private:
  template <RankedBits Bits>
  std::uint64_t masked(const Bits& b, std::uint64_t w) const {
    std::uint64_t z = bits::zero_pairs(b.word(w));
    std::uint64_t valid = 2 * pairs_;
    if (64 * (w + 1) > valid) z &= bits::low_mask(static_cast<unsigned>(valid > 64 * w ? valid - 64 * w : 0));
    return z;
  }

  std::uint64_t pairs_ = 0;
  std::vector<std::uint64_t> dir_;
};

// rank_pairs00 with the bit-index contract: i must be even and <= length.
template <RankedBits Bits>
std::uint64_t rank_pairs00(const Bits& b, const PairZeroRank& dir, std::uint64_t i) {
  if (i & 1) throw std::invalid_argument("rank_pairs00: bit index " + std::to_string(i) + " is not pair-aligned");
  if (b.size() & 1) throw std::invalid_argument("rank_pairs00: vector length is odd");
  if (i > b.size()) detail::rank_out_of_range(i, b.size() + 1);
  return dir.rank00(b, i / 2);
}

}  // namespace cbt

#endif  // CBT_RANK_SUPPORT_HPP_
