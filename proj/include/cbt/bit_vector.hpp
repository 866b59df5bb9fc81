#ifndef CBT_BIT_VECTOR_HPP_
#define CBT_BIT_VECTOR_HPP_

#include <atomic>
#include <cassert>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bits.hpp"

namespace cbt {

/*
 * Append-built bit sequence. Bit i lives in word i / 64 at offset i % 64.
 * Unused high bits of the last word are always zero.
 */
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::uint64_t n) : words_((n + 63) / 64, 0), size_(n) {}

  // "0110..." -> bits in order; whitespace is skipped.
  static BitVector from_string(std::string_view s) {
    BitVector bv;
    for (char c : s) {
      if (c == '0' || c == '1') {
        bv.push_back(c == '1');
      } else if (c != ' ' && c != '\t' && c != '\n') {
        throw std::invalid_argument("bit string contains non-binary character");
      }
    }
    return bv;
  }

  std::uint64_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::uint64_t num_words() const { return words_.size(); }
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::uint64_t word(std::uint64_t w) const { return words_[w]; }

  bool operator[](std::uint64_t i) const {
    assert(i < size_);
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  bool access(std::uint64_t i) const {
    if (i >= size_) throw std::out_of_range("BitVector::access: index " + std::to_string(i) + " >= length " + std::to_string(size_));
    return (*this)[i];
  }

  void push_back(bool b) {
    if ((size_ & 63) == 0) words_.push_back(0);
    if (b) words_.back() |= 1ULL << (size_ & 63);
    ++size_;
  }

  // Appends the low `n` bits of `value`, least significant first. n <= 64.
  void append_bits(std::uint64_t value, unsigned n) {
    if (n == 0) return;
    value &= bits::low_mask(n);
    unsigned off = static_cast<unsigned>(size_ & 63);
    if (off == 0) {
      words_.push_back(value);
    } else {
      words_.back() |= value << off;
      if (off + n > 64) words_.push_back(value >> (64 - off));
    }
    size_ += n;
  }

  // Appends bits [from, to) of `src`.
  void append_range(const BitVector& src, std::uint64_t from, std::uint64_t to) {
    append_range_by([&src](std::uint64_t w) { return src.words_[w]; }, from, to);
  }

  // Same as append_range but reads source words through `word_at(w)`.
  template <class WordAt>
  void append_range_by(WordAt&& word_at, std::uint64_t from, std::uint64_t to) {
    assert(from <= to);
    while (from < to) {
      unsigned off = static_cast<unsigned>(from & 63);
      unsigned take = static_cast<unsigned>(std::min<std::uint64_t>(64 - off, to - from));
      append_bits(word_at(from >> 6) >> off, take);
      from += take;
    }
  }

  void set(std::uint64_t i, bool b) {
    assert(i < size_);
    if (b) {
      words_[i >> 6] |= 1ULL << (i & 63);
    } else {
      words_[i >> 6] &= ~(1ULL << (i & 63));
    }
  }

  // ORs bits [0, n) of `src` (read via word_at) into positions [pos, pos + n) of a
  // pre-sized, zero-initialized vector. Words shared with a neighbouring slice are
  // updated atomically, so disjoint slices may be written from different threads.
  template <class WordAt>
  void write_slice(std::uint64_t pos, WordAt&& word_at, std::uint64_t n) {
    assert(pos + n <= size_);
    if (n == 0) return;
    const std::uint64_t first_word = pos >> 6;
    const std::uint64_t last_word = (pos + n - 1) >> 6;
    const unsigned shift = static_cast<unsigned>(pos & 63);
    auto store = [&](std::uint64_t w, std::uint64_t v) {
      if (v == 0) return;
      if (w == first_word || w == last_word) {
        std::atomic_ref<std::uint64_t>(words_[w]).fetch_or(v, std::memory_order_relaxed);
      } else {
        words_[w] |= v;
      }
    };
    const std::uint64_t src_words = (n + 63) / 64;
    for (std::uint64_t s = 0; s < src_words; ++s) {
      std::uint64_t v = word_at(s);
      if (s + 1 == src_words) v &= bits::low_mask(static_cast<unsigned>(n - 64 * s));
      std::uint64_t w = first_word + s;
      store(w, v << shift);
      if (shift != 0 && w + 1 <= last_word) store(w + 1, v >> (64 - shift));
    }
  }

  std::uint64_t count_ones() const {
    std::uint64_t c = 0;
    for (auto w : words_) c += bits::popcount(w);
    return c;
  }

  std::string to_string() const {
    std::string s;
    s.reserve(size_);
    for (std::uint64_t i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
    return s;
  }

  // Wire format: bit length (u64 LE), then ceil(len/64) payload words (u64 LE).
  void write(std::ostream& os) const {
    io::write_le<std::uint64_t>(os, size_);
    for (auto w : words_) io::write_le<std::uint64_t>(os, w);
  }

  static BitVector read(std::istream& is) {
    BitVector bv;
    bv.size_ = io::read_le<std::uint64_t>(is);
    if (bv.size_ > (1ULL << 48)) throw std::runtime_error("BitVector::read: implausible bit length");
    bv.words_.resize((bv.size_ + 63) / 64);
    for (auto& w : bv.words_) w = io::read_le<std::uint64_t>(is);
    if (bv.size_ & 63) {
      if (bv.words_.back() & ~bits::low_mask(static_cast<unsigned>(bv.size_ & 63))) {
        throw std::runtime_error("BitVector::read: nonzero padding bits");
      }
    }
    return bv;
  }

  static std::uint64_t serialized_bytes(std::uint64_t nbits) { return 8 + 8 * ((nbits + 63) / 64); }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::vector<std::uint64_t> words_;
  std::uint64_t size_ = 0;
};

}  // namespace cbt

#endif  // CBT_BIT_VECTOR_HPP_
