#ifndef CBT_CERTIFY_HPP_
#define CBT_CERTIFY_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "reference.hpp"

namespace cbt {

enum class CertMode : std::uint8_t { kDelta, kXi };

struct CertInterval {
  static constexpr std::size_t kNoSet = std::numeric_limits<std::size_t>::max();

  std::uint64_t lo = 0, hi = 0;  // inclusive
  // Index of a set with no element in [lo..hi], or kNoSet for a member run.
  std::size_t eliminator = kNoSet;

  bool member() const { return eliminator == kNoSet; }
  bool operator==(const CertInterval&) const = default;
};

struct Certificate {
  std::uint64_t universe = 0;
  CertMode mode = CertMode::kDelta;
  std::vector<CertInterval> intervals;

  std::size_t size() const { return intervals.size(); }
};

namespace detail {

inline void check_sets(const std::vector<SetView>& sets, std::uint64_t u) {
  if (sets.size() < 2) throw std::invalid_argument("certificate needs at least two sets");
  for (const auto& s : sets) {
    if (!s.empty() && s.back() >= u) throw std::invalid_argument("certificate: element outside the universe");
  }
}

}  // namespace detail

/*
 * Left-to-right sweep. At cursor x: if every set holds x the interval is
 * [x..x]; otherwise it reaches up to just before the farthest successor of
 * x among the sets (u for a set with none), lowest set index on ties.
 * In xi mode consecutive member singletons merge into one run.
 */
inline Certificate compute_certificate(const std::vector<SetView>& sets, std::uint64_t u, CertMode mode) {
  detail::check_sets(sets, u);
  Certificate c{u, mode, {}};
  std::vector<std::size_t> finger(sets.size(), 0);
  std::uint64_t x = 0;
  while (x < u) {
    std::uint64_t far = x;
    std::size_t who = CertInterval::kNoSet;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      finger[i] = detail::gallop(sets[i], finger[i], x);
      const std::uint64_t succ = finger[i] < sets[i].size() ? sets[i][finger[i]] : u;
      if (succ > far) {
        far = succ;
        who = i;
      }
    }
    if (who == CertInterval::kNoSet) {
      auto& iv = c.intervals;
      if (mode == CertMode::kXi && !iv.empty() && iv.back().member() && iv.back().hi + 1 == x) {
        iv.back().hi = x;
      } else {
        iv.push_back({x, x, CertInterval::kNoSet});
      }
      ++x;
    } else {
      c.intervals.push_back({x, far - 1, who});
      x = far;
    }
  }
  return c;
}

inline Certificate compute_delta(const std::vector<SetView>& sets, std::uint64_t u) { return compute_certificate(sets, u, CertMode::kDelta); }

inline Certificate compute_xi(const std::vector<SetView>& sets, std::uint64_t u) { return compute_certificate(sets, u, CertMode::kXi); }

// Checks the partition, that every eliminator interval misses its set and
// that member intervals lie inside the intersection (singletons in delta
// mode). An empty string means valid.
inline std::string explain_invalid(const Certificate& c, const std::vector<SetView>& sets) {
  std::uint64_t next = 0;
  for (std::size_t j = 0; j < c.intervals.size(); ++j) {
    const auto& iv = c.intervals[j];
    const std::string at = "interval " + std::to_string(j) + " [" + std::to_string(iv.lo) + ".." + std::to_string(iv.hi) + "]";
    if (iv.lo != next || iv.hi < iv.lo) return at + " breaks the partition";
    if (iv.hi >= c.universe) return at + " leaves the universe";
    next = iv.hi + 1;
    if (iv.member()) {
      if (c.mode == CertMode::kDelta && iv.lo != iv.hi) return at + " is a member run in delta mode";
      for (const auto& s : sets) {
        auto a = std::lower_bound(s.begin(), s.end(), iv.lo);
        auto b = std::upper_bound(s.begin(), s.end(), iv.hi);
        if (static_cast<std::uint64_t>(b - a) != iv.hi - iv.lo + 1) return at + " is not contained in the intersection";
      }
    } else {
      if (iv.eliminator >= sets.size()) return at + " names a set that does not exist";
      const auto& s = sets[iv.eliminator];
      auto a = std::lower_bound(s.begin(), s.end(), iv.lo);
      if (a != s.end() && *a <= iv.hi) return at + " is not empty in its eliminating set";
    }
  }
  if (next != c.universe) return "intervals stop at " + std::to_string(next) + " before the universe ends";
  return {};
}

inline bool validate(const Certificate& c, const std::vector<SetView>& sets) { return explain_invalid(c, sets).empty(); }

}  // namespace cbt

#endif  // CBT_CERTIFY_HPP_
