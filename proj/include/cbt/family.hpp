#ifndef CBT_FAMILY_HPP_
#define CBT_FAMILY_HPP_

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "binary_trie.hpp"
#include "parallel.hpp"
#include "run_trie.hpp"

namespace cbt {

// Malformed input files; the CLI maps it to exit code 2.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RawSet {
  std::string name;
  std::vector<std::uint64_t> values;
  std::size_t line = 0;  // 1-based source line for text input, 0 otherwise
};

struct RawCorpus {
  std::uint64_t universe = 0;
  std::vector<RawSet> sets;
};

inline constexpr std::uint64_t kMaxUniverse = 1ULL << 62;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string at_line(std::size_t line) { return line ? "line " + std::to_string(line) + ": " : ""; }

// Universe checks shared by both input formats.
inline void check_corpus(RawCorpus& c) {
  std::uint64_t top = 0;
  for (const auto& s : c.sets) {
    if (!s.values.empty()) top = std::max(top, s.values.back() + 1);
  }
  if (c.universe == 0) c.universe = std::max<std::uint64_t>(2, top);
  if (c.universe < 2 || c.universe > kMaxUniverse) throw data_error("universe " + std::to_string(c.universe) + " outside [2, 2^62]");
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& s : c.sets) {
    if (!s.values.empty() && s.values.back() >= c.universe) {
      throw data_error(at_line(s.line) + "set '" + s.name + "' has value " + std::to_string(s.values.back()) + " outside universe [0, " +
                       std::to_string(c.universe) + ")");
    }
    if (!seen.emplace(s.name, s.line).second) throw data_error(at_line(s.line) + "duplicate set name '" + s.name + "'");
  }
}

}  // namespace detail

// One set per line, "name: v1 v2 ...", strictly increasing decimals. Blank
// lines and lines starting with '#' are skipped. universe = 0 picks
// max value + 1.
inline RawCorpus parse_text_sets(std::istream& is, std::uint64_t universe = 0) {
  RawCorpus c;
  c.universe = universe;
  std::string line;
  std::size_t no = 0;
  while (std::getline(is, line)) {
    ++no;
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) throw data_error(detail::at_line(no) + "expected 'name: values'");
    RawSet s;
    s.name = std::string(detail::trim(body.substr(0, colon)));
    s.line = no;
    if (s.name.empty()) throw data_error(detail::at_line(no) + "empty set name");
    if (s.name.size() > 0xFFFF) throw data_error(detail::at_line(no) + "set name too long");
    for (auto tok : detail::split_ws(body.substr(colon + 1))) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || p != tok.data() + tok.size()) throw data_error(detail::at_line(no) + "bad value '" + std::string(tok) + "'");
      if (!s.values.empty() && v <= s.values.back()) {
        throw data_error(detail::at_line(no) + (v == s.values.back() ? "duplicate value " : "values not increasing at ") + std::to_string(v));
      }
      s.values.push_back(v);
    }
    c.sets.push_back(std::move(s));
  }
  detail::check_corpus(c);
  return c;
}

inline constexpr char kSetFileMagic[4] = {'S', 'E', 'T', 'F'};

// "SETF", u64 count, u64 universe, then per set: u16 name length, name
// bytes, u64 n, n u32 values; little endian throughout.
inline RawCorpus parse_binary_sets(std::istream& is) {
  try {
    detail::expect_magic(is, kSetFileMagic);
    RawCorpus c;
    const auto count = io::read_le<std::uint64_t>(is);
    c.universe = io::read_le<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < count; ++i) {
      RawSet s;
      const auto len = io::read_le<std::uint16_t>(is);
      s.name.resize(len);
      if (!is.read(s.name.data(), len)) throw data_error("truncated set name");
      const auto n = io::read_le<std::uint64_t>(is);
      for (std::uint64_t j = 0; j < n; ++j) {
        const std::uint64_t v = io::read_le<std::uint32_t>(is);
        if (!s.values.empty() && v <= s.values.back()) {
          throw data_error("set '" + s.name + "' (#" + std::to_string(i) + "): values not increasing at index " + std::to_string(j));
        }
        s.values.push_back(v);
      }
      c.sets.push_back(std::move(s));
    }
    detail::check_corpus(c);
    return c;
  } catch (const data_error&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw data_error(std::string("binary set file: ") + e.what());
  }
}

inline void write_binary_sets(std::ostream& os, const RawCorpus& c) {
  os.write(kSetFileMagic, 4);
  io::write_le<std::uint64_t>(os, c.sets.size());
  io::write_le<std::uint64_t>(os, c.universe);
  for (const auto& s : c.sets) {
    io::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(s.name.size()));
    os.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
    io::write_le<std::uint64_t>(os, s.values.size());
    for (auto v : s.values) {
      if (v > 0xFFFFFFFFULL) throw std::invalid_argument("binary set format holds 32-bit values only");
      io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(v));
    }
  }
}

inline void write_text_sets(std::ostream& os, const RawCorpus& c) {
  for (const auto& s : c.sets) {
    os << s.name << ':';
    for (auto v : s.values) os << ' ' << v;
    os << '\n';
  }
}

// Reads either format, telling them apart by the binary magic.
inline RawCorpus load_corpus(const std::string& path, std::uint64_t universe = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  char head[4] = {};
  in.read(head, 4);
  const bool binary = in.gcount() == 4 && std::string_view(head, 4) == std::string_view(kSetFileMagic, 4);
  in.clear();
  in.seekg(0);
  if (!binary) return parse_text_sets(in, universe);
  RawCorpus c = parse_binary_sets(in);
  if (universe != 0 && universe != c.universe) {
    c.universe = universe;
    detail::check_corpus(c);
  }
  return c;
}

struct FamilyOptions {
  TrieKind kind = TrieKind::kPlain;
  RankVariant variant = RankVariant::kDense;
  // Sets with fewer elements are dropped. 0 keeps empty sets as null entries.
  std::uint64_t min_size = 1;
  BuildOptions build{};
  unsigned threads = 1;
};

inline std::string to_string(TrieKind k) { return k == TrieKind::kPlain ? "trie" : "rtrie"; }

inline TrieKind parse_trie_kind(const std::string& s) {
  if (s == "trie") return TrieKind::kPlain;
  if (s == "rtrie") return TrieKind::kRuns;
  throw std::invalid_argument("unknown trie kind '" + s + "' (expected trie or rtrie)");
}

inline constexpr char kFamilyMagic[4] = {'C', 'B', 'T', 'F'};
inline constexpr std::uint16_t kFamilyFormatVersion = 1;
// magic, version, kind, variant, flags, universe, count
inline constexpr std::uint64_t kFamilyHeaderBytes = 4 + 2 + 1 + 1 + 1 + 8 + 8;

/*
 * Named sets over one universe, all stored as the same trie type. Empty
 * sets are kept as null entries.
 */
template <class Trie>
class SetFamily {
 public:
  using trie_type = Trie;

  SetFamily() = default;
  SetFamily(std::uint64_t universe, BuildOptions opts) : u_(universe), opts_(opts) {}

  static SetFamily build(const RawCorpus& c, const FamilyOptions& opts) {
    SetFamily f(c.universe, opts.build);
    std::vector<const RawSet*> keep;
    for (const auto& s : c.sets) {
      if (s.values.size() >= opts.min_size) keep.push_back(&s);
    }
    f.tries_.resize(keep.size());
    detail::parallel_for(keep.size(), resolve_threads(opts.threads), [&](std::size_t i, unsigned) {
      if (!keep[i]->values.empty()) f.tries_[i] = Trie::build(SortedSet(keep[i]->values, c.universe), opts.build);
    });
    for (const RawSet* s : keep) f.add_name(s->name);
    return f;
  }

  std::uint64_t universe() const { return u_; }
  const BuildOptions& build_options() const { return opts_; }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::optional<Trie>& entry(std::size_t i) const { return tries_[i]; }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::uint64_t> values(std::size_t i) const { return tries_[i] ? tries_[i]->decode() : std::vector<std::uint64_t>{}; }

  // Bytes entry i occupies in the family file.
  std::uint64_t entry_bytes(std::size_t i) const {
    return 2 + names_[i].size() + 1 + (tries_[i] ? tries_[i]->serialized_bytes() : 0);
  }

  std::uint64_t serialized_bytes() const {
    std::uint64_t b = kFamilyHeaderBytes;
    for (std::size_t i = 0; i < size(); ++i) b += entry_bytes(i);
    return b;
  }

  void write(std::ostream& os) const {
    os.write(kFamilyMagic, 4);
    io::write_le<std::uint16_t>(os, kFamilyFormatVersion);
    io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(Trie::kKind));
    io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(Trie::bits_type::kVariant));
    io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>((opts_.last_level_rank ? 1 : 0) | (opts_.select ? 2 : 0)));
    io::write_le<std::uint64_t>(os, u_);
    io::write_le<std::uint64_t>(os, size());
    for (std::size_t i = 0; i < size(); ++i) {
      io::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(names_[i].size()));
      os.write(names_[i].data(), static_cast<std::streamsize>(names_[i].size()));
      io::write_le<std::uint8_t>(os, tries_[i] ? 1 : 0);
      if (tries_[i]) tries_[i]->write(os);
    }
  }

  // Reads the part after the common header.
  static SetFamily read_body(std::istream& is, std::uint64_t universe, BuildOptions opts, std::uint64_t count) {
    SetFamily f(universe, opts);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto len = io::read_le<std::uint16_t>(is);
      std::string name(len, '\0');
      if (!is.read(name.data(), len)) throw data_error("family file: truncated set name");
      const auto present = io::read_le<std::uint8_t>(is);
      if (present > 1) throw data_error("family file: bad presence flag for '" + name + "'");
      std::optional<Trie> t;
      if (present) {
        t = Trie::read(is, opts);
        if (t->universe() != universe) throw data_error("family file: set '" + name + "' has a different universe");
      }
      f.tries_.push_back(std::move(t));
      f.add_name(name);
    }
    return f;
  }

 private:
  void add_name(const std::string& n) {
    if (!index_.emplace(n, names_.size()).second) throw data_error("duplicate set name '" + n + "'");
    names_.push_back(n);
  }

  std::uint64_t u_ = 2;
  BuildOptions opts_{};
  std::vector<std::string> names_;
  std::vector<std::optional<Trie>> tries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using AnyFamily = std::variant<SetFamily<BinaryTrie<DenseRankBits>>, SetFamily<BinaryTrie<SparseRankBits>>,
                               SetFamily<BinaryTrie<InterleavedRankBits>>, SetFamily<RunTrie<DenseRankBits>>,
                               SetFamily<RunTrie<SparseRankBits>>, SetFamily<RunTrie<InterleavedRankBits>>>;

// Calls f(std::type_identity<Trie>) for the trie type a kind and variant name.
template <class F>
decltype(auto) dispatch_trie_type(TrieKind kind, RankVariant v, F&& f) {
  return dispatch_rank_variant(v, [&]<class Bits>(std::type_identity<Bits>) -> decltype(auto) {
    if (kind == TrieKind::kPlain) return f(std::type_identity<BinaryTrie<Bits>>{});
    return f(std::type_identity<RunTrie<Bits>>{});
  });
}

inline AnyFamily build_family(const RawCorpus& c, const FamilyOptions& opts) {
  return dispatch_trie_type(opts.kind, opts.variant, [&]<class Trie>(std::type_identity<Trie>) -> AnyFamily {
    return SetFamily<Trie>::build(c, opts);
  });
}

inline void write_family(std::ostream& os, const AnyFamily& f) {
  std::visit([&](const auto& fam) { fam.write(os); }, f);
}

inline AnyFamily read_family(std::istream& is) {
  try {
    detail::expect_magic(is, kFamilyMagic);
    const auto version = io::read_le<std::uint16_t>(is);
    if (version != kFamilyFormatVersion) throw data_error("family file: unsupported version " + std::to_string(version));
    const auto kind = io::read_le<std::uint8_t>(is);
    const auto variant = io::read_le<std::uint8_t>(is);
    const auto flags = io::read_le<std::uint8_t>(is);
    const auto u = io::read_le<std::uint64_t>(is);
    const auto count = io::read_le<std::uint64_t>(is);
    if (kind > 1 || variant > 2 || flags > 3) throw data_error("family file: bad header");
    const BuildOptions opts{.last_level_rank = (flags & 1) != 0, .select = (flags & 2) != 0};
    return dispatch_trie_type(static_cast<TrieKind>(kind), static_cast<RankVariant>(variant), [&]<class Trie>(std::type_identity<Trie>) -> AnyFamily {
      return SetFamily<Trie>::read_body(is, u, opts, count);
    });
  } catch (const data_error&) {
    throw;
  } catch (const std::exception& e) {
    throw data_error(std::string("family file: ") + e.what());
  }
}

inline void save_family(const std::string& path, const AnyFamily& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path);
  write_family(out, f);
  if (!out) throw data_error("write failed for " + path);
}

inline AnyFamily load_family(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  return read_family(in);
}

struct Query {
  std::size_t line = 0;
  std::vector<std::string> names;
};

// One query per line, whitespace-separated set names; blank lines and
// '#' comments skipped.
inline std::vector<Query> parse_query_log(std::istream& is) {
  std::vector<Query> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(is, line)) {
    ++no;
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    Query q{no, {}};
    for (auto tok : detail::split_ws(body)) q.names.emplace_back(tok);
    out.push_back(std::move(q));
  }
  return out;
}

inline std::vector<Query> load_query_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  return parse_query_log(in);
}

}  // namespace cbt

#endif  // CBT_FAMILY_HPP_
