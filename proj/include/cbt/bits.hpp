#ifndef CBT_BITS_HPP_
#define CBT_BITS_HPP_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cbt {

namespace bits {

inline constexpr std::uint64_t kEvenMask = 0x5555555555555555ULL;

inline std::uint64_t popcount(std::uint64_t x) { return static_cast<std::uint64_t>(std::popcount(x)); }

// Mask with the lowest n bits set, n in [0, 64].
inline constexpr std::uint64_t low_mask(unsigned n) {
  return n >= 64 ? ~0ULL : ((1ULL << n) - 1);
}

// Position of the k-th (0-based) set bit of x. Requires popcount(x) > k.
inline unsigned select_in_word(std::uint64_t x, unsigned k) {
  // Skip whole bytes first, then finish bit by bit.
  unsigned base = 0;
  for (;;) {
    unsigned c = static_cast<unsigned>(std::popcount(x & 0xFFu));
    if (k < c) break;
    k -= c;
    x >>= 8;
    base += 8;
  }
  for (; k > 0; --k) x &= x - 1;
  return base + static_cast<unsigned>(std::countr_zero(x));
}

// One bit at each even position 2q where the aligned pair (2q, 2q+1) is 00.
inline std::uint64_t zero_pairs(std::uint64_t x) { return ~(x | (x >> 1)) & kEvenMask; }

// ceil(lg u) for u >= 1.
inline unsigned ceil_log2(std::uint64_t u) {
  return u <= 1 ? 0u : static_cast<unsigned>(std::bit_width(u - 1));
}

}  // namespace bits

namespace io {

template <class T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_unsigned_v<T>);
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  os.write(buf, sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw std::runtime_error("unexpected end of stream");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
  return value;
}

}  // namespace io

}  // namespace cbt

#endif  // CBT_BITS_HPP_
