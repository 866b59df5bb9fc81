#ifndef CBT_TESTS_TEST_SUPPORT_HPP_
#define CBT_TESTS_TEST_SUPPORT_HPP_

// Generators and independent oracles shared by the test binaries. Nothing in
// here calls into the library's trie code.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <iterator>
#include <set>
#include <span>
#include <vector>

#include "cbt/bit_vector.hpp"
#include "cbt/sorted_set.hpp"

namespace cbt::testing {

using Elems = std::vector<std::uint64_t>;

inline const Elems kS1 = {1, 3, 7, 8, 9, 10, 11, 12};
inline const Elems kS2 = {2, 5, 7, 12, 15};
// Four-set family with runs (u = 16).
inline const std::vector<Elems> kRunFamily = {
    {7, 8, 9, 10, 11, 12, 13, 14, 15},
    {5, 6, 7, 8, 9, 10, 11, 12, 13, 14},
    {4, 5, 6, 7, 8, 9, 11, 12, 13, 14},
    {8, 9, 10, 11, 12, 13, 14, 15},
};

inline BitVector random_bits(std::mt19937_64& rng, std::uint64_t n, double density) {
  std::bernoulli_distribution d(density);
  BitVector bv;
  for (std::uint64_t i = 0; i < n; ++i) bv.push_back(d(rng));
  return bv;
}

// n distinct values from [0, u), sorted.
inline Elems uniform_set(std::mt19937_64& rng, std::uint64_t n, std::uint64_t u) {
  n = std::min(n, u);
  Elems out;
  if (n * 2 > u) {
    for (std::uint64_t v = 0; v < u; ++v) out.push_back(v);
    std::shuffle(out.begin(), out.end(), rng);
    out.resize(n);
  } else {
    std::set<std::uint64_t> s;
    std::uniform_int_distribution<std::uint64_t> d(0, u - 1);
    while (s.size() < n) s.insert(d(rng));
    out.assign(s.begin(), s.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Runs of consecutive values separated by random gaps; about n elements.
inline Elems clustered_set(std::mt19937_64& rng, std::uint64_t n, std::uint64_t u, std::uint64_t mean_run) {
  Elems out;
  std::geometric_distribution<std::uint64_t> run_len(1.0 / static_cast<double>(std::max<std::uint64_t>(mean_run, 1)));
  const double density = std::min(0.95, static_cast<double>(n) / static_cast<double>(u));
  const double mean_gap = static_cast<double>(mean_run) * (1.0 - density) / std::max(density, 1e-9);
  std::geometric_distribution<std::uint64_t> gap_len(1.0 / (1.0 + mean_gap));
  std::uint64_t x = gap_len(rng);
  while (x < u && out.size() < n) {
    std::uint64_t len = 1 + run_len(rng);
    for (std::uint64_t k = 0; k < len && x < u; ++k) out.push_back(x++);
    x += 1 + gap_len(rng);
  }
  if (out.empty()) out.push_back(std::uniform_int_distribution<std::uint64_t>(0, u - 1)(rng));
  return out;
}

inline Elems set_union(const Elems& a, const Elems& b) {
  Elems out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// k sets over [0, u) that share a random core, so intersections are usually
// nonempty; each adds its own noise. Clustered families use run-shaped
// cores and noise.
inline std::vector<Elems> random_family(std::mt19937_64& rng, std::size_t k, std::uint64_t u, bool clustered, std::uint64_t max_n = 4000) {
  auto draw = [&](std::uint64_t n) {
    n = std::max<std::uint64_t>(1, std::min(n, u / 2));
    return clustered ? clustered_set(rng, n, u, 2 + rng() % 30) : uniform_set(rng, n, u);
  };
  const Elems core = draw(1 + rng() % std::max<std::uint64_t>(1, max_n / 4));
  std::vector<Elems> fam;
  for (std::size_t i = 0; i < k; ++i) fam.push_back(set_union(core, draw(1 + rng() % max_n)));
  return fam;
}

inline std::vector<std::span<const std::uint64_t>> views(const std::vector<Elems>& fam) {
  return {fam.begin(), fam.end()};
}

inline std::uint64_t oracle_rank(const Elems& s, std::uint64_t x) {
  return static_cast<std::uint64_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
}

inline std::optional<std::uint64_t> oracle_successor(const Elems& s, std::uint64_t x) {
  auto it = std::lower_bound(s.begin(), s.end(), x);
  if (it == s.end()) return std::nullopt;
  return *it;
}

inline std::optional<std::uint64_t> oracle_predecessor(const Elems& s, std::uint64_t x) {
  auto it = std::upper_bound(s.begin(), s.end(), x);
  if (it == s.begin()) return std::nullopt;
  return *(it - 1);
}

// k-way merge: advance the smallest head; emit when all heads agree.
inline Elems merge_intersection(const std::vector<Elems>& sets) {
  Elems out;
  std::vector<std::size_t> pos(sets.size(), 0);
  for (;;) {
    std::uint64_t hi = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (pos[i] == sets[i].size()) return out;
      hi = std::max(hi, sets[i][pos[i]]);
    }
    bool all = true;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      while (pos[i] < sets[i].size() && sets[i][pos[i]] < hi) ++pos[i];
      if (pos[i] == sets[i].size()) return out;
      if (sets[i][pos[i]] != hi) all = false;
    }
    if (all) {
      out.push_back(hi);
      for (auto& p : pos) ++p;
    }
  }
}

// Smallest certificate by dynamic programming over every partition of
// [0, u): best[b] = fewest intervals covering [0, b). runs_merge lets an
// interval hold several consecutive members (xi); otherwise members are
// singletons (delta).
inline std::size_t exhaustive_minimum(const std::vector<Elems>& fam, std::uint64_t u, bool runs_merge) {
  std::vector<std::vector<bool>> has(fam.size(), std::vector<bool>(u, false));
  for (std::size_t i = 0; i < fam.size(); ++i) {
    for (auto x : fam[i]) has[i][x] = true;
  }
  auto in_all = [&](std::uint64_t x) {
    for (const auto& h : has) {
      if (!h[x]) return false;
    }
    return true;
  };
  auto missing_somewhere = [&](std::uint64_t a, std::uint64_t b) {
    for (const auto& h : has) {
      bool any = false;
      for (auto x = a; x <= b; ++x) any = any || h[x];
      if (!any) return true;
    }
    return false;
  };
  auto all_members = [&](std::uint64_t a, std::uint64_t b) {
    for (auto x = a; x <= b; ++x) {
      if (!in_all(x)) return false;
    }
    return true;
  };
  const std::size_t inf = 1u << 30;
  std::vector<std::size_t> best(u + 1, inf);
  best[0] = 0;
  for (std::uint64_t b = 1; b <= u; ++b) {
    for (std::uint64_t a = 0; a < b; ++a) {
      if (best[a] == inf) continue;
      const std::uint64_t lo = a, hi = b - 1;
      bool ok = missing_somewhere(lo, hi);
      if (!ok) ok = runs_merge ? all_members(lo, hi) : (lo == hi && in_all(lo));
      if (ok) best[b] = std::min(best[b], best[a] + 1);
    }
  }
  return best[u];
}

// Explicit pointer trie over ell-bit codes.
class PointerTrie {
 public:
  PointerTrie(const Elems& s, unsigned ell) : ell_(ell), root_(std::make_unique<Node>()) {
    for (std::uint64_t x : s) {
      Node* v = root_.get();
      for (unsigned d = 0; d < ell; ++d) {
        auto& child = v->child[(x >> (ell - 1 - d)) & 1];
        if (!child) child = std::make_unique<Node>();
        v = child.get();
      }
    }
  }

  std::uint64_t edges() const { return edges(root_.get()); }

  // Edges left after deleting the subtree below every maximal full node.
  std::uint64_t edges_without_full_subtrees() const { return pruned_edges(root_.get(), 0); }

  // Level codes in "LR" text form (bit 1 = child present), one string per level.
  std::vector<std::string> level_strings() const {
    std::vector<std::string> out(ell_);
    std::vector<const Node*> cur{root_.get()}, next;
    for (unsigned d = 0; d < ell_; ++d) {
      next.clear();
      for (const Node* v : cur) {
        out[d] += v->child[0] ? '1' : '0';
        out[d] += v->child[1] ? '1' : '0';
        for (const auto& c : v->child) {
          if (c) next.push_back(c.get());
        }
      }
      std::swap(cur, next);
    }
    return out;
  }

 private:
  struct Node {
    std::unique_ptr<Node> child[2];
  };

  static std::uint64_t edges(const Node* v) {
    std::uint64_t e = 0;
    for (const auto& c : v->child) {
      if (c) e += 1 + edges(c.get());
    }
    return e;
  }

  // Leaves under v (a node at depth d).
  static std::uint64_t leaves(const Node* v, unsigned d, unsigned ell) {
    if (d == ell) return 1;
    std::uint64_t n = 0;
    for (const auto& c : v->child) {
      if (c) n += leaves(c.get(), d + 1, ell);
    }
    return n;
  }

  std::uint64_t pruned_edges(const Node* v, unsigned d) const {
    if (d < ell_ && leaves(v, d, ell_) == (1ULL << (ell_ - d))) return 0;
    std::uint64_t e = 0;
    for (const auto& c : v->child) {
      if (c) e += 1 + pruned_edges(c.get(), d + 1);
    }
    return e;
  }

  unsigned ell_;
  std::unique_ptr<Node> root_;
};

}  // namespace cbt::testing

#endif  // CBT_TESTS_TEST_SUPPORT_HPP_
