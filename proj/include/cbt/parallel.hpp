#ifndef CBT_PARALLEL_HPP_
#define CBT_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <thread>
#include <vector>

#include "intersect.hpp"

namespace cbt {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

// Runs fn(0..n-1) on `threads` workers pulling indices from a shared counter.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0u);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i; (i = next.fetch_add(1, std::memory_order_relaxed)) < n;) fn(i, w);
    });
  }
  for (auto& th : pool) th.join();
}

// Top of the recursion tree, expanded breadth first until there is a frame
// per worker. Leaves of this tree are the seeds handed to workers.
template <class Trie>
struct ParallelPlan {
  using Engine = AcEngine<Trie>;

  struct Node {
    unsigned level = 0;
    bool seed = false;
    bool empty = false;
    int child[2] = {-1, -1};
    std::size_t seed_index = 0;
  };

  std::vector<Node> nodes;
  std::vector<typename Engine::Frame> seeds;
  std::vector<int> seed_node;

  ParallelPlan(Engine& eng, unsigned t) {
    const unsigned c = static_cast<unsigned>(std::bit_width(t) - 1);
    std::vector<std::pair<int, typename Engine::Frame>> frontier, next;
    nodes.push_back({});
    frontier.emplace_back(0, eng.root());
    for (unsigned depth = 0; !frontier.empty(); ++depth) {
      const bool stop = (depth >= c && frontier.size() >= t) || depth >= 2 * c;
      next.clear();
      for (auto& [id, f] : frontier) {
        if (stop) {
          make_seed(id, std::move(f));
          continue;
        }
        std::vector<typename Engine::Frame> kids;
        unsigned code = 0;
        switch (eng.expand(f, kids, code)) {
          case Engine::Step::kEmpty:
            nodes[id].empty = true;
            break;
          case Engine::Step::kTerminal:
            make_seed(id, std::move(f));
            break;
          case Engine::Step::kInner: {
            std::size_t j = 0;
            for (unsigned b = 0; b < 2; ++b) {
              if (!(code & (b ? kRight : kLeft))) continue;
              const int cid = static_cast<int>(nodes.size());
              nodes.push_back({});
              nodes.back().level = nodes[id].level + 1;
              nodes[id].child[b] = cid;
              next.emplace_back(cid, std::move(kids[j++]));
            }
            break;
          }
        }
      }
      std::swap(frontier, next);
    }
  }

  // Seed indices in left-to-right order.
  std::vector<std::size_t> seed_order() const {
    std::vector<std::size_t> out;
    walk(0, [&](int id) {
      if (nodes[id].seed) out.push_back(nodes[id].seed_index);
    });
    return out;
  }

  // Preorder over the plan tree; preorder meets each level left to right.
  template <class Fn>
  void walk(int id, Fn&& fn) const {
    fn(id);
    for (int c : nodes[id].child) {
      if (c >= 0) walk(c, fn);
    }
  }

 private:
  void make_seed(int id, typename Engine::Frame f) {
    nodes[id].seed = true;
    nodes[id].seed_index = seeds.size();
    seed_node.push_back(id);
    seeds.push_back(std::move(f));
  }
};

}  // namespace detail

/*
 * Multithreaded intersection. The descent is expanded to depth floor(lg t)
 * (further, up to twice that, while fewer than t frames survive); each
 * surviving frame is finished by a worker into a private buffer, and the
 * buffers are stitched together level by level at precomputed offsets.
 * The output is identical to the sequential routine for every t.
 */
template <class Trie>
IntersectionOutput<Trie> par_intersect(const std::vector<const Trie*>& tries, unsigned threads, const IntersectOptions& opts = {}) {
  using Engine = detail::AcEngine<Trie>;
  detail::check_query<Trie>(tries);
  const unsigned t = resolve_threads(threads);
  Engine planner(tries, opts.mode, opts.with_ranks);
  detail::ParallelPlan<Trie> plan(planner, t);
  const std::size_t ns = plan.seeds.size();

  std::vector<typename Engine::Piece> pieces(ns);
  std::vector<std::uint8_t> nonempty(ns, 0);
  std::vector<std::uint64_t> nodes(t, 0), r1(t, 0), r00(t, 0);
  detail::parallel_for(ns, t, [&](std::size_t s, unsigned w) {
    Engine eng(tries, opts.mode, opts.with_ranks);
    nonempty[s] = eng.run(plan.seeds[s]);
    pieces[s] = eng.take();
    nodes[w] += eng.nodes_visited;
    r1[w] += eng.rank1_calls;
    r00[w] += eng.rank00_calls;
  });

  // Inner plan nodes get their codes from which children produced output.
  auto& pn = plan.nodes;
  std::vector<unsigned> code(pn.size(), 0);
  std::vector<std::uint8_t> live(pn.size(), 0);
  for (std::size_t id = pn.size(); id-- > 0;) {
    if (pn[id].seed) {
      live[id] = nonempty[pn[id].seed_index];
    } else if (!pn[id].empty) {
      for (unsigned b = 0; b < 2; ++b) {
        if (pn[id].child[b] >= 0 && live[static_cast<std::size_t>(pn[id].child[b])]) code[id] |= b ? kRight : kLeft;
      }
      live[id] = code[id] != 0;
    }
  }

  const std::size_t k = tries.size();
  const unsigned ell = planner.depth();
  const auto order = plan.seed_order();
  std::vector<BitVector> levels;
  std::vector<std::uint64_t> elements, ranks;

  if (opts.mode == OutputMode::kTrie && live[0]) {
    // Per level: sizes first, then inner codes in place, then seed slices.
    std::vector<std::uint64_t> total(ell, 0);
    plan.walk(0, [&](int id) {
      const auto& n = pn[static_cast<std::size_t>(id)];
      if (!live[static_cast<std::size_t>(id)]) return;
      if (!n.seed) {
        total[n.level] += 2;
      } else {
        for (unsigned l = n.level; l < ell; ++l) total[l] += pieces[n.seed_index].levels[l].size();
      }
    });
    for (unsigned l = 0; l < ell; ++l) levels.emplace_back(total[l]);
    std::vector<std::uint64_t> cursor(ell, 0);
    std::vector<std::vector<std::uint64_t>> seed_off(ns, std::vector<std::uint64_t>(ell, 0));
    plan.walk(0, [&](int id) {
      const auto& n = pn[static_cast<std::size_t>(id)];
      if (!live[static_cast<std::size_t>(id)]) return;
      if (!n.seed) {
        const std::uint64_t c = code[static_cast<std::size_t>(id)];
        levels[n.level].write_slice(cursor[n.level], [c](std::uint64_t) { return c; }, 2);
        cursor[n.level] += 2;
      } else {
        for (unsigned l = n.level; l < ell; ++l) {
          seed_off[n.seed_index][l] = cursor[l];
          cursor[l] += pieces[n.seed_index].levels[l].size();
        }
      }
    });
    detail::parallel_for(ns, t, [&](std::size_t s, unsigned) {
      const unsigned from = pn[static_cast<std::size_t>(plan.seed_node[s])].level;
      for (unsigned l = from; l < ell; ++l) {
        const auto& src = pieces[s].levels[l];
        if (src.empty()) continue;
        levels[l].write_slice(seed_off[s][l], [&src](std::uint64_t w) { return src.word(w); }, src.size());
      }
    });
  }

  if (opts.mode == OutputMode::kArray || opts.with_ranks) {
    std::vector<std::uint64_t> eoff(ns + 1, 0), roff(ns + 1, 0);
    std::uint64_t esum = 0, rsum = 0;
    for (std::size_t s : order) {
      eoff[s] = esum;
      roff[s] = rsum;
      esum += pieces[s].elements.size();
      rsum += pieces[s].ranks.size();
    }
    elements.resize(esum);
    ranks.resize(rsum);
    detail::parallel_for(ns, t, [&](std::size_t s, unsigned) {
      std::copy(pieces[s].elements.begin(), pieces[s].elements.end(), elements.begin() + static_cast<std::ptrdiff_t>(eoff[s]));
      std::copy(pieces[s].ranks.begin(), pieces[s].ranks.end(), ranks.begin() + static_cast<std::ptrdiff_t>(roff[s]));
    });
  }

  auto out = detail::finish_output<Trie>(std::move(levels), std::move(elements), std::move(ranks), tries[0]->universe(), k, opts);
  out.nodes_visited = planner.nodes_visited;
  out.rank1_calls = planner.rank1_calls;
  out.rank00_calls = planner.rank00_calls;
  for (unsigned w = 0; w < t; ++w) {
    out.nodes_visited += nodes[w];
    out.rank1_calls += r1[w];
    out.rank00_calls += r00[w];
  }
  return out;
}

}  // namespace cbt

#endif  // CBT_PARALLEL_HPP_
