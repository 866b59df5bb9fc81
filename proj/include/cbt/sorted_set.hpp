#ifndef CBT_SORTED_SET_HPP_
#define CBT_SORTED_SET_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bits.hpp"

namespace cbt {

class build_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/*
 * Strictly increasing integers drawn from [0, u). u >= 2 so that the trie has
 * at least one level; the trie depth is ell = ceil(lg u).
 */
class SortedSet {
 public:
  SortedSet() = default;

  SortedSet(std::vector<std::uint64_t> elems, std::uint64_t universe) : elems_(std::move(elems)), u_(universe) {
    if (u_ < 2) throw build_error("universe must be at least 2, got " + std::to_string(u_));
    if (u_ > (1ULL << 62)) throw build_error("universe larger than 2^62 is not supported");
    for (std::size_t i = 0; i < elems_.size(); ++i) {
      if (elems_[i] >= u_) {
        throw build_error("element " + std::to_string(elems_[i]) + " at index " + std::to_string(i) +
                          " outside universe [0, " + std::to_string(u_) + ")");
      }
      if (i > 0 && elems_[i] <= elems_[i - 1]) {
        throw build_error("elements not strictly increasing at index " + std::to_string(i));
      }
    }
  }

  std::uint64_t universe() const { return u_; }
  unsigned depth() const { return bits::ceil_log2(u_); }
  std::uint64_t padded_universe() const { return 1ULL << depth(); }
  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  std::uint64_t operator[](std::size_t i) const { return elems_[i]; }
  std::span<const std::uint64_t> elements() const { return elems_; }
  const std::vector<std::uint64_t>& values() const { return elems_; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

  friend bool operator==(const SortedSet&, const SortedSet&) = default;

 private:
  std::vector<std::uint64_t> elems_;
  std::uint64_t u_ = 2;
};

// Maximal runs of consecutive elements. gaps[i] is the number of absent
// universe values between run i-1 and run i (gaps[0] = first element).
struct RunDecomposition {
  std::vector<std::uint64_t> gaps;
  std::vector<std::uint64_t> lengths;

  std::size_t count() const { return lengths.size(); }
};

inline RunDecomposition decompose_runs(std::span<const std::uint64_t> s) {
  RunDecomposition rd;
  std::uint64_t prev_end = 0;
  bool first = true;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i + 1;
    while (j < s.size() && s[j] == s[j - 1] + 1) ++j;
    rd.gaps.push_back(first ? s[i] : s[i] - prev_end - 1);
    rd.lengths.push_back(j - i);
    prev_end = s[j - 1];
    first = false;
    i = j;
  }
  return rd;
}

inline std::vector<std::uint64_t> recompose_runs(const RunDecomposition& rd) {
  std::vector<std::uint64_t> out;
  std::uint64_t next = 0;
  for (std::size_t r = 0; r < rd.count(); ++r) {
    std::uint64_t start = (r == 0) ? rd.gaps[0] : next + rd.gaps[r];
    for (std::uint64_t k = 0; k < rd.lengths[r]; ++k) out.push_back(start + k);
    next = start + rd.lengths[r];
  }
  return out;
}

}  // namespace cbt

#endif  // CBT_SORTED_SET_HPP_
