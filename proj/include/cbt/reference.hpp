#ifndef CBT_REFERENCE_HPP_
#define CBT_REFERENCE_HPP_

// Intersection baselines over plain sorted arrays, used as oracles.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace cbt {

using SetView = std::span<const std::uint64_t>;

namespace detail {

// First index >= from whose value is >= x, by doubling from the finger and
// then binary search inside the last step.
inline std::size_t gallop(SetView s, std::size_t from, std::uint64_t x) {
  if (from >= s.size() || s[from] >= x) return from;
  std::size_t step = 1, lo = from, hi = from + 1;
  while (hi < s.size() && s[hi] < x) {
    lo = hi;
    step <<= 1;
    hi = from + step;
  }
  hi = std::min(hi, s.size());
  return static_cast<std::size_t>(std::lower_bound(s.begin() + static_cast<std::ptrdiff_t>(lo) + 1, s.begin() + static_cast<std::ptrdiff_t>(hi), x) -
                                  s.begin());
}

}  // namespace detail

// Round-robin over the sets: the current eliminator is pushed through each
// set's successor in turn; it is reported once all k sets agree on it.
inline std::vector<std::uint64_t> bk_intersect(const std::vector<SetView>& sets) {
  std::vector<std::uint64_t> out;
  const std::size_t k = sets.size();
  if (k == 0) return out;
  for (const auto& s : sets) {
    if (s.empty()) return out;
  }
  if (k == 1) return {sets[0].begin(), sets[0].end()};
  std::vector<std::size_t> finger(k, 0);
  std::uint64_t e = sets[0][0];
  std::size_t agree = 1, i = 1;
  for (;;) {
    const SetView s = sets[i];
    finger[i] = detail::gallop(s, finger[i], e);
    if (finger[i] == s.size()) return out;
    const std::uint64_t y = s[finger[i]];
    if (y == e) {
      if (++agree == k) {
        out.push_back(e);
        ++finger[i];
        if (finger[i] == s.size()) return out;
        e = s[finger[i]];
        agree = 1;
      }
    } else {
      e = y;
      agree = 1;
    }
    i = (i + 1) % k;
  }
}

namespace detail {

inline void tp_recurse(const std::vector<SetView>& sets, std::vector<std::pair<std::size_t, std::size_t>>& range, std::uint64_t lo,
                       std::uint64_t hi, std::vector<std::uint64_t>& out) {
  for (const auto& [a, b] : range) {
    if (a == b) return;
  }
  if (hi - lo == 1) {
    out.push_back(lo);
    return;
  }
  const std::uint64_t mid = lo + (hi - lo) / 2;
  auto saved = range;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    auto [a, b] = saved[i];
    auto m = std::lower_bound(sets[i].begin() + static_cast<std::ptrdiff_t>(a), sets[i].begin() + static_cast<std::ptrdiff_t>(b), mid) -
             sets[i].begin();
    range[i] = {a, static_cast<std::size_t>(m)};
  }
  tp_recurse(sets, range, lo, mid, out);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    auto [a, b] = saved[i];
    auto m = std::lower_bound(sets[i].begin() + static_cast<std::ptrdiff_t>(a), sets[i].begin() + static_cast<std::ptrdiff_t>(b), mid) -
             sets[i].begin();
    range[i] = {static_cast<std::size_t>(m), b};
  }
  tp_recurse(sets, range, mid, hi, out);
  range = saved;
}

}  // namespace detail

// Divide and conquer on the universe [lo, hi): halve the interval, locate
// the split in every set by binary search, and stop once a set runs dry.
inline std::vector<std::uint64_t> tp_intersect_naive(const std::vector<SetView>& sets, std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  if (sets.empty() || lo >= hi) return out;
  std::vector<std::pair<std::size_t, std::size_t>> range;
  for (const auto& s : sets) {
    auto a = std::lower_bound(s.begin(), s.end(), lo) - s.begin();
    auto b = std::lower_bound(s.begin(), s.end(), hi) - s.begin();
    range.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }
  detail::tp_recurse(sets, range, lo, hi, out);
  return out;
}

}  // namespace cbt

#endif  // CBT_REFERENCE_HPP_
