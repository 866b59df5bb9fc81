#ifndef CBT_REPORT_HPP_
#define CBT_REPORT_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "certify.hpp"
#include "family.hpp"
#include "intersect.hpp"
#include "measures.hpp"
#include "parallel.hpp"

namespace cbt {

struct SetStats {
  std::string name;
  std::uint64_t n = 0;
  std::uint64_t gap = 0, rle = 0, trie = 0, rtrie = 0, binom = 0;
  std::uint64_t payload_bits = 0;    // level vectors as stored
  std::uint64_t directory_bits = 0;  // rank/select/00 directories rebuilt on load
  std::uint64_t entry_bytes = 0;     // bytes this entry takes in the family file
};

struct FamilyStats {
  std::uint64_t universe = 0;
  std::string kind, variant;
  std::vector<SetStats> sets;
  SetStats total;  // name "total"; field-wise sums
  std::uint64_t header_bytes = 0;
  std::uint64_t file_bytes = 0;  // header_bytes + sum of entry_bytes

  static double bpi(std::uint64_t bits, std::uint64_t n) { return n ? static_cast<double>(bits) / static_cast<double>(n) : 0.0; }
};

template <class Trie>
FamilyStats compute_stats(const SetFamily<Trie>& f) {
  FamilyStats st;
  st.universe = f.universe();
  st.kind = to_string(Trie::kKind);
  st.variant = std::string(to_string(Trie::bits_type::kVariant));
  st.header_bytes = kFamilyHeaderBytes;
  st.total.name = "total";
  for (std::size_t i = 0; i < f.size(); ++i) {
    SetStats s;
    s.name = f.name(i);
    s.entry_bytes = f.entry_bytes(i);
    if (const auto& t = f.entry(i)) {
      const SortedSet set(t->decode(), f.universe());
      s.n = set.size();
      s.gap = measures::gap(set);
      s.rle = measures::rle(set);
      s.trie = measures::trie(set);
      s.rtrie = measures::rtrie(set);
      s.binom = measures::binom_bound(s.n, f.universe());
      s.payload_bits = t->payload_bits();
      s.directory_bits = t->directory_bits();
    }
    for (auto [acc, v] : {std::pair{&st.total.n, s.n}, {&st.total.gap, s.gap}, {&st.total.rle, s.rle}, {&st.total.trie, s.trie},
                          {&st.total.rtrie, s.rtrie}, {&st.total.binom, s.binom}, {&st.total.payload_bits, s.payload_bits},
                          {&st.total.directory_bits, s.directory_bits}, {&st.total.entry_bytes, s.entry_bytes}}) {
      *acc += v;
    }
    st.sets.push_back(std::move(s));
  }
  st.file_bytes = st.header_bytes + st.total.entry_bytes;
  return st;
}

struct QueryOptions {
  OutputMode mode = OutputMode::kArray;
  unsigned threads = 1;  // per intersection; 0 = all cores
  bool with_ranks = false;
  bool certify = false;       // also compute delta, xi and |I(Q)|
  bool keep_results = false;  // keep elements (and rank tuples) per query
  unsigned warmups = 0;
  unsigned repeats = 1;          // timing is the median over repeats
  bool parallel_queries = false;  // replay queries concurrently
};

struct QueryResult {
  std::size_t line = 0;
  std::vector<std::string> names;
  std::string error;  // nonempty when the query could not run
  std::uint64_t size = 0;
  std::uint64_t nanos = 0;
  std::uint64_t nodes_visited = 0;
  std::uint64_t rank1_calls = 0;
  std::optional<std::uint64_t> delta, xi;
  std::vector<std::uint64_t> elements;
  std::vector<std::uint64_t> rank_seqs;

  bool ok() const { return error.empty(); }
};

struct QuerySummary {
  std::size_t queries = 0, failed = 0;
  std::uint64_t total_results = 0;
  double mean_ns = 0;
  std::uint64_t p50_ns = 0, p90_ns = 0, p99_ns = 0, max_ns = 0;
};

struct QueryReport {
  std::vector<QueryResult> results;
  QuerySummary summary;
};

namespace detail {

inline std::uint64_t percentile(std::vector<std::uint64_t> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(p * static_cast<double>(v.size() - 1) + 0.5);
  return v[std::min(idx, v.size() - 1)];
}

template <class Trie>
QueryResult run_one(const SetFamily<Trie>& f, const Query& q, const QueryOptions& opts, unsigned threads) {
  QueryResult r;
  r.line = q.line;
  r.names = q.names;
  if (q.names.size() < 2) {
    r.error = "a query needs at least two set names";
    return r;
  }
  std::vector<const Trie*> tries;
  bool any_empty = false;
  std::vector<std::size_t> ids;
  for (const auto& n : q.names) {
    auto id = f.find(n);
    if (!id) {
      r.error = "unknown set '" + n + "'";
      return r;
    }
    ids.push_back(*id);
    if (const auto& t = f.entry(*id)) {
      tries.push_back(&*t);
    } else {
      any_empty = true;
    }
  }
  if (opts.certify) {
    std::vector<std::vector<std::uint64_t>> sets;
    for (auto id : ids) sets.push_back(f.values(id));
    const std::vector<SetView> v(sets.begin(), sets.end());
    r.delta = compute_delta(v, f.universe()).size();
    r.xi = compute_xi(v, f.universe()).size();
  }
  if (any_empty) return r;  // an empty member empties the intersection

  const IntersectOptions iopts{.mode = opts.mode, .with_ranks = opts.with_ranks};
  auto call = [&] { return threads > 1 ? par_intersect(tries, threads, iopts) : intersect(tries, iopts); };
  try {
    for (unsigned w = 0; w < opts.warmups; ++w) (void)call();
    std::vector<std::uint64_t> times;
    std::optional<IntersectionOutput<Trie>> out;
    for (unsigned rep = 0; rep < std::max(1u, opts.repeats); ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      auto o = call();
      const auto t1 = std::chrono::steady_clock::now();
      times.push_back(static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
      out = std::move(o);
    }
    r.nanos = percentile(times, 0.5);
    r.size = out->size();
    r.nodes_visited = out->nodes_visited;
    r.rank1_calls = out->rank1_calls;
    if (opts.keep_results) {
      r.elements = out->values();
      r.rank_seqs = std::move(out->rank_seqs);
    }
  } catch (const capability_error& e) {
    r.error = e.what();
  }
  return r;
}

}  // namespace detail

template <class Trie>
QueryReport run_queries(const SetFamily<Trie>& f, const std::vector<Query>& log, const QueryOptions& opts) {
  QueryReport rep;
  rep.results.resize(log.size());
  const unsigned inner = opts.parallel_queries ? 1 : resolve_threads(opts.threads);
  const unsigned outer = opts.parallel_queries ? resolve_threads(opts.threads) : 1;
  detail::parallel_for(log.size(), outer, [&](std::size_t i, unsigned) { rep.results[i] = detail::run_one(f, log[i], opts, inner); });
  auto& s = rep.summary;
  s.queries = log.size();
  std::vector<std::uint64_t> times;
  double sum = 0;
  for (const auto& r : rep.results) {
    if (!r.ok()) {
      ++s.failed;
      continue;
    }
    s.total_results += r.size;
    times.push_back(r.nanos);
    sum += static_cast<double>(r.nanos);
  }
  if (!times.empty()) s.mean_ns = sum / static_cast<double>(times.size());
  s.p50_ns = detail::percentile(times, 0.5);
  s.p90_ns = detail::percentile(times, 0.9);
  s.p99_ns = detail::percentile(times, 0.99);
  s.max_ns = times.empty() ? 0 : *std::max_element(times.begin(), times.end());
  return rep;
}

}  // namespace cbt

#endif  // CBT_REPORT_HPP_
