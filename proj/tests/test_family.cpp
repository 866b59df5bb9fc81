#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cbt/family.hpp"
#include "cbt/report.hpp"
#include "test_support.hpp"

using namespace cbt;
using namespace cbt::testing;

namespace {

RawCorpus running_corpus() {
  std::istringstream in("S1: 1 3 7 8 9 10 11 12\nS2: 2 5 7 12 15\n");
  return parse_text_sets(in, 16);
}

RawCorpus random_corpus(std::mt19937_64& rng, std::size_t count, std::uint64_t u) {
  RawCorpus c;
  c.universe = u;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t n = 1 + rng() % 300;
    c.sets.push_back({"t" + std::to_string(i), i % 2 ? clustered_set(rng, n, u, 1 + rng() % 20) : uniform_set(rng, n, u), 0});
  }
  return c;
}

std::string bytes_of(const AnyFamily& f) {
  std::stringstream ss;
  write_family(ss, f);
  return ss.str();
}

std::string expect_data_error(const std::string& text, std::uint64_t u = 0) {
  std::istringstream in(text);
  try {
    parse_text_sets(in, u);
  } catch (const data_error& e) {
    return e.what();
  }
  ADD_FAILURE() << "no error for: " << text;
  return {};
}

std::vector<Query> log_of(const std::string& text) {
  std::istringstream in(text);
  return parse_query_log(in);
}

}  // namespace

TEST(Ingest, RunningFamily) {
  auto c = running_corpus();
  ASSERT_EQ(c.sets.size(), 2u);
  EXPECT_EQ(c.sets[0].values, kS1);
  EXPECT_EQ(c.sets[1].values, kS2);
  auto fam = build_family(c, {});
  EXPECT_EQ(std::visit([](const auto& f) { return f.size(); }, fam), 2u);
}

TEST(Ingest, EmptyFileGivesEmptyFamily) {
  std::istringstream in("");
  auto c = parse_text_sets(in, 16);
  EXPECT_TRUE(c.sets.empty());
  auto fam = build_family(c, {});
  EXPECT_EQ(std::visit([](const auto& f) { return f.size(); }, fam), 0u);
  std::stringstream ss(bytes_of(fam));
  EXPECT_EQ(bytes_of(read_family(ss)), bytes_of(fam));
}

TEST(Ingest, ErrorsCarryLineNumbers) {
  EXPECT_NE(expect_data_error("a: 1 2\nb: 3 3\n").find("line 2"), std::string::npos);
  EXPECT_NE(expect_data_error("a: 1 2\n\nb: 5 4\n").find("line 3"), std::string::npos);
  EXPECT_NE(expect_data_error("a: 1 x\n").find("line 1"), std::string::npos);
  EXPECT_NE(expect_data_error("a 1 2\n").find("line 1"), std::string::npos);
  EXPECT_NE(expect_data_error("a: 1\nb: 2\na: 3\n").find("line 3"), std::string::npos);
  EXPECT_NE(expect_data_error("a: 1 2\nb: 16\n", 16).find("line 2"), std::string::npos);
  EXPECT_NE(expect_data_error("a: 99999999999999999999\n").find("line 1"), std::string::npos);
}

TEST(Ingest, AutoUniverse) {
  std::istringstream in("a: 3 9\nb: 4\n");
  EXPECT_EQ(parse_text_sets(in).universe, 10u);
}

TEST(Ingest, ThousandSetRoundTrip) {
  std::mt19937_64 rng(1000);
  const auto c = random_corpus(rng, 1000, 1ULL << 16);
  for (auto kind : {TrieKind::kPlain, TrieKind::kRuns}) {
    auto fam = build_family(c, {.kind = kind, .threads = 4});
    std::visit(
        [&](const auto& f) {
          ASSERT_EQ(f.size(), c.sets.size());
          for (std::size_t i = 0; i < f.size(); ++i) {
            ASSERT_EQ(f.name(i), c.sets[i].name);
            ASSERT_EQ(f.values(i), c.sets[i].values) << f.name(i);
          }
        },
        fam);
  }
  // Both set file formats carry the same corpus.
  std::stringstream bin, txt;
  write_binary_sets(bin, c);
  write_text_sets(txt, c);
  const auto from_bin = parse_binary_sets(bin);
  const auto from_txt = parse_text_sets(txt, c.universe);
  ASSERT_EQ(from_bin.sets.size(), c.sets.size());
  ASSERT_EQ(from_txt.sets.size(), c.sets.size());
  for (std::size_t i = 0; i < c.sets.size(); ++i) {
    EXPECT_EQ(from_bin.sets[i].values, c.sets[i].values);
    EXPECT_EQ(from_txt.sets[i].values, c.sets[i].values);
    EXPECT_EQ(from_bin.sets[i].name, c.sets[i].name);
  }
}

TEST(Ingest, BinaryFormatRejectsBadInput) {
  std::istringstream bad_magic("NOPE");
  EXPECT_THROW(parse_binary_sets(bad_magic), data_error);
  RawCorpus c;
  c.universe = 16;
  c.sets.push_back({"a", {1, 2, 3}, 0});
  std::stringstream ss;
  write_binary_sets(ss, c);
  std::string s = ss.str();
  std::istringstream truncated(s.substr(0, s.size() - 2));
  EXPECT_THROW(parse_binary_sets(truncated), data_error);
}

TEST(Ingest, MinSizeFilter) {
  std::istringstream in("a: 1\nb: 1 2 3 4\nc:\nd: 5 6\n");
  const auto c = parse_text_sets(in, 16);
  auto names = [](const AnyFamily& fam) {
    return std::visit(
        [](const auto& f) {
          std::vector<std::string> n;
          for (std::size_t i = 0; i < f.size(); ++i) n.push_back(f.name(i));
          return n;
        },
        fam);
  };
  EXPECT_EQ(names(build_family(c, {})), (std::vector<std::string>{"a", "b", "d"}));
  EXPECT_EQ(names(build_family(c, {.min_size = 2})), (std::vector<std::string>{"b", "d"}));
  EXPECT_EQ(names(build_family(c, {.min_size = 0})), (std::vector<std::string>{"a", "b", "c", "d"}));
}

TEST(Persistence, SaveLoadIsByteIdentical) {
  std::mt19937_64 rng(77);
  const auto c = random_corpus(rng, 40, 1ULL << 14);
  const auto path = (std::filesystem::temp_directory_path() / "cbt_family_test.cbtf").string();
  for (auto kind : {TrieKind::kPlain, TrieKind::kRuns}) {
    for (auto v : {RankVariant::kDense, RankVariant::kSparse, RankVariant::kInterleaved}) {
      for (bool ranks : {false, true}) {
        auto fam = build_family(c, {.kind = kind, .variant = v, .build = {.last_level_rank = ranks}});
        save_family(path, fam);
        auto back = load_family(path);
        EXPECT_EQ(back.index(), fam.index());
        EXPECT_EQ(bytes_of(back), bytes_of(fam));
        EXPECT_EQ(std::filesystem::file_size(path), bytes_of(fam).size());
      }
    }
  }
  std::filesystem::remove(path);
}

TEST(Persistence, RejectsCorruptFiles) {
  auto fam = build_family(running_corpus(), {});
  const std::string good = bytes_of(fam);
  std::istringstream magic("XXXX" + good.substr(4));
  EXPECT_THROW(read_family(magic), data_error);
  std::istringstream cut(good.substr(0, good.size() - 3));
  EXPECT_THROW(read_family(cut), std::exception);
}

TEST(Stats, RunningFamily) {
  auto fam = build_family(running_corpus(), {});
  const auto st = std::visit([](const auto& f) { return compute_stats(f); }, fam);
  ASSERT_EQ(st.sets.size(), 2u);
  EXPECT_DOUBLE_EQ(FamilyStats::bpi(st.sets[0].trie, st.sets[0].n), 2.5);
  EXPECT_EQ(st.sets[0].payload_bits, 2 * (20 - 8 + 1));
}

TEST(Stats, FullUniverseHasZeroRtrieBpi) {
  RawCorpus c;
  c.universe = 64;
  c.sets.push_back({"all", {}, 0});
  for (std::uint64_t v = 0; v < 64; ++v) c.sets[0].values.push_back(v);
  auto fam = build_family(c, {.kind = TrieKind::kRuns});
  const auto st = std::visit([](const auto& f) { return compute_stats(f); }, fam);
  EXPECT_EQ(FamilyStats::bpi(st.sets[0].rtrie, st.sets[0].n), 0.0);
}

TEST(Stats, ReconcilesToStoredBytes) {
  std::mt19937_64 rng(31);
  const auto c = random_corpus(rng, 60, 1ULL << 18);
  for (auto kind : {TrieKind::kPlain, TrieKind::kRuns}) {
    for (auto v : {RankVariant::kDense, RankVariant::kSparse, RankVariant::kInterleaved}) {
      auto fam = build_family(c, {.kind = kind, .variant = v});
      const auto st = std::visit([](const auto& f) { return compute_stats(f); }, fam);
      EXPECT_EQ(st.file_bytes, bytes_of(fam).size());
      std::uint64_t sum = st.header_bytes;
      for (const auto& s : st.sets) {
        sum += s.entry_bytes;
        if (kind == TrieKind::kPlain) EXPECT_EQ(s.payload_bits, 2 * (s.trie - s.n + 1)) << s.name;
      }
      EXPECT_EQ(sum, st.file_bytes);
    }
  }
}

TEST(Queries, RunningFamily) {
  auto fam = build_family(running_corpus(), {.build = {.last_level_rank = true}});
  const auto log = log_of("# comment\nS1 S2\n\nS1 S1\nS2 S2\nS1 nope\nS1\n");
  ASSERT_EQ(log.size(), 5u);
  const auto rep = std::visit([&](const auto& f) { return run_queries(f, log, {.with_ranks = true, .certify = true, .keep_results = true}); }, fam);
  ASSERT_EQ(rep.results.size(), 5u);
  EXPECT_EQ(rep.results[0].line, 2u);
  EXPECT_EQ(rep.results[0].size, 2u);
  EXPECT_EQ(rep.results[0].elements, (Elems{7, 12}));
  EXPECT_EQ(rep.results[0].rank_seqs, (Elems{3, 3, 8, 4}));
  EXPECT_EQ(rep.results[0].delta, 8u);
  EXPECT_EQ(rep.results[1].size, kS1.size());
  EXPECT_EQ(rep.results[2].size, kS2.size());
  EXPECT_FALSE(rep.results[3].ok());
  EXPECT_NE(rep.results[3].error.find("nope"), std::string::npos);
  EXPECT_FALSE(rep.results[4].ok());
  EXPECT_EQ(rep.summary.failed, 2u);
  EXPECT_EQ(rep.summary.total_results, 2 + kS1.size() + kS2.size());
}

TEST(Queries, RanksWithoutDirectoryIsPerQueryError) {
  auto fam = build_family(running_corpus(), {});
  const auto rep = std::visit([&](const auto& f) { return run_queries(f, log_of("S1 S2\n"), {.with_ranks = true}); }, fam);
  EXPECT_FALSE(rep.results[0].ok());
}

TEST(Queries, EmptyMemberGivesEmptyResult) {
  std::istringstream in("a: 1 2\nz:\n");
  auto fam = build_family(parse_text_sets(in, 8), {.min_size = 0});
  const auto rep = std::visit([&](const auto& f) { return run_queries(f, log_of("a z\n"), {.certify = true}); }, fam);
  ASSERT_TRUE(rep.results[0].ok());
  EXPECT_EQ(rep.results[0].size, 0u);
}

TEST(Queries, IndependentOfModeThreadsAndVariant) {
  std::mt19937_64 rng(12);
  RawCorpus c;
  c.universe = 1ULL << 16;
  std::string log_text;
  for (int q = 0; q < 10; ++q) {
    auto sets = random_family(rng, 2 + q % 4, c.universe, q % 2, 3000);
    std::string line;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const std::string name = "q" + std::to_string(q) + "_" + std::to_string(i);
      c.sets.push_back({name, sets[i], 0});
      line += name + " ";
    }
    log_text += line + "\n";
  }
  const auto log = log_of(log_text);
  std::optional<std::vector<Elems>> expect;
  for (auto kind : {TrieKind::kPlain, TrieKind::kRuns}) {
    for (auto v : {RankVariant::kDense, RankVariant::kSparse, RankVariant::kInterleaved}) {
      auto fam = build_family(c, {.kind = kind, .variant = v, .build = {.last_level_rank = true}});
      for (auto mode : {OutputMode::kArray, OutputMode::kTrie}) {
        for (unsigned t : {1u, 4u}) {
          for (bool pq : {false, true}) {
            const QueryOptions o{.mode = mode, .threads = t, .with_ranks = true, .keep_results = true, .parallel_queries = pq};
            const auto rep = std::visit([&](const auto& f) { return run_queries(f, log, o); }, fam);
            std::vector<Elems> got;
            for (const auto& r : rep.results) {
              ASSERT_TRUE(r.ok()) << r.error;
              got.push_back(r.elements);
              got.push_back(r.rank_seqs);
            }
            if (!expect) expect = got;
            ASSERT_EQ(got, *expect);
          }
        }
      }
    }
  }
  // First result checked against the merge oracle.
  std::vector<Elems> first;
  for (const auto& name : log[0].names) {
    for (const auto& s : c.sets) {
      if (s.name == name) first.push_back(s.values);
    }
  }
  EXPECT_EQ((*expect)[0], merge_intersection(first));
}

TEST(Queries, ReplayIsDeterministic) {
  std::mt19937_64 rng(3);
  const auto c = random_corpus(rng, 30, 1ULL << 12);
  std::string text;
  for (int i = 0; i + 2 < 30; i += 3) text += "t" + std::to_string(i) + " t" + std::to_string(i + 1) + " t" + std::to_string(i + 2) + "\n";
  auto fam = build_family(c, {});
  const auto log = log_of(text);
  auto sizes = [&] {
    const auto rep = std::visit([&](const auto& f) { return run_queries(f, log, {}); }, fam);
    std::vector<std::uint64_t> s;
    for (const auto& r : rep.results) s.push_back(r.size);
    return s;
  };
  EXPECT_EQ(sizes(), sizes());
}
