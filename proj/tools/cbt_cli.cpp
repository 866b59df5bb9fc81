// cbt: build, inspect and query compressed binary trie indexes.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cbt/cbt.hpp"

namespace {

using nlohmann::json;
using namespace cbt;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct BuildArgs {
  std::string input, output;
  std::uint64_t universe = 0;
  std::string kind = "trie", rank = "dense";
  std::uint64_t min_size = 1;
  bool with_ranks = false;
  unsigned threads = 0;
};

struct QueryArgs {
  std::string index, log;
  std::string mode = "array";
  unsigned threads = 1;
  bool with_ranks = false, certify = false, dump = false, json = false, parallel_queries = false;
  unsigned warmups = 0, repeats = 1;
};

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string join(const std::vector<std::string>& v, const char* sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

int cmd_build(const BuildArgs& a) {
  RawCorpus corpus = load_corpus(a.input, a.universe);
  FamilyOptions opts;
  opts.kind = parse_trie_kind(a.kind);
  opts.variant = *parse_rank_variant(a.rank);
  opts.min_size = a.min_size;
  opts.build.last_level_rank = a.with_ranks;
  opts.threads = a.threads;
  AnyFamily fam = build_family(corpus, opts);
  save_family(a.output, fam);
  std::visit(
      [&](const auto& f) {
        std::cout << "built " << f.size() << " of " << corpus.sets.size() << " sets, universe " << f.universe() << ", " << a.kind << "/" << a.rank
                  << ", " << f.serialized_bytes() << " bytes -> " << a.output << "\n";
      },
      fam);
  return kExitOk;
}

json stats_json(const SetStats& s) {
  return {{"name", s.name},
          {"n", s.n},
          {"gap_bits", s.gap},
          {"rle_bits", s.rle},
          {"trie_edges", s.trie},
          {"rtrie_edges", s.rtrie},
          {"binom_bits", s.binom},
          {"payload_bits", s.payload_bits},
          {"directory_bits", s.directory_bits},
          {"entry_bytes", s.entry_bytes},
          {"bpi",
           {{"gap", FamilyStats::bpi(s.gap, s.n)},
            {"rle", FamilyStats::bpi(s.rle, s.n)},
            {"trie", FamilyStats::bpi(s.trie, s.n)},
            {"rtrie", FamilyStats::bpi(s.rtrie, s.n)},
            {"binom", FamilyStats::bpi(s.binom, s.n)},
            {"payload", FamilyStats::bpi(s.payload_bits, s.n)},
            {"with_directories", FamilyStats::bpi(s.payload_bits + s.directory_bits, s.n)},
            {"stored", FamilyStats::bpi(8 * s.entry_bytes, s.n)}}}};
}

void print_stats_row(const SetStats& s) {
  auto b = [&](std::uint64_t bits) { return fixed(FamilyStats::bpi(bits, s.n)); };
  std::cout << s.name << '\t' << s.n << '\t' << b(s.gap) << '\t' << b(s.rle) << '\t' << b(s.trie) << '\t' << b(s.rtrie) << '\t' << b(s.binom) << '\t'
            << b(s.payload_bits) << '\t' << b(s.payload_bits + s.directory_bits) << '\t' << b(8 * s.entry_bytes) << '\t' << s.entry_bytes << "\n";
}

int cmd_stats(const std::string& index, bool as_json) {
  AnyFamily fam = load_family(index);
  FamilyStats st = std::visit([](const auto& f) { return compute_stats(f); }, fam);
  if (as_json) {
    json sets = json::array();
    for (const auto& s : st.sets) sets.push_back(stats_json(s));
    json out = {{"universe", st.universe}, {"kind", st.kind},           {"rank", st.variant},
                {"sets", sets},            {"total", stats_json(st.total)}, {"header_bytes", st.header_bytes},
                {"file_bytes", st.file_bytes}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  }
  std::cout << "universe " << st.universe << ", kind " << st.kind << ", rank " << st.variant << ", " << st.sets.size() << " sets, " << st.file_bytes
            << " bytes (" << st.header_bytes << " header)\n";
  std::cout << "bits per integer\n";
  std::cout << "set\tn\tgap\trle\ttrie\trtrie\tB(n,u)\tpayload\t+dirs\tstored\tbytes\n";
  for (const auto& s : st.sets) print_stats_row(s);
  print_stats_row(st.total);
  return kExitOk;
}

QueryOptions to_query_options(const QueryArgs& a) {
  QueryOptions o;
  o.mode = parse_output_mode(a.mode);
  o.threads = a.threads;
  o.with_ranks = a.with_ranks;
  o.certify = a.certify;
  o.keep_results = a.dump;
  o.warmups = a.warmups;
  o.repeats = a.repeats;
  o.parallel_queries = a.parallel_queries;
  return o;
}

json result_json(const QueryResult& r, std::size_t k) {
  json j = {{"line", r.line}, {"sets", r.names}};
  if (!r.ok()) {
    j["error"] = r.error;
    return j;
  }
  j["size"] = r.size;
  j["ns"] = r.nanos;
  j["nodes_visited"] = r.nodes_visited;
  j["rank1_calls"] = r.rank1_calls;
  if (r.delta) j["delta"] = *r.delta;
  if (r.xi) j["xi"] = *r.xi;
  if (!r.elements.empty()) j["result"] = r.elements;
  if (!r.rank_seqs.empty()) {
    json tuples = json::array();
    for (std::size_t i = 0; i + k <= r.rank_seqs.size(); i += k) tuples.push_back(std::vector<std::uint64_t>(r.rank_seqs.begin() + i, r.rank_seqs.begin() + i + k));
    j["ranks"] = tuples;
  }
  return j;
}

int cmd_query(const QueryArgs& a, bool bench) {
  AnyFamily fam = load_family(a.index);
  const auto log = load_query_log(a.log);
  const QueryOptions opts = to_query_options(a);
  QueryReport rep = std::visit([&](const auto& f) { return run_queries(f, log, opts); }, fam);
  const auto& s = rep.summary;
  if (a.json) {
    json results = json::array();
    for (const auto& r : rep.results) results.push_back(result_json(r, r.names.size()));
    json out = {{"mode", a.mode},
                {"threads", resolve_threads(a.threads)},
                {"warmups", opts.warmups},
                {"repeats", opts.repeats},
                {"queries", results},
                {"summary",
                 {{"queries", s.queries},
                  {"failed", s.failed},
                  {"total_results", s.total_results},
                  {"mean_ns", s.mean_ns},
                  {"p50_ns", s.p50_ns},
                  {"p90_ns", s.p90_ns},
                  {"p99_ns", s.p99_ns},
                  {"max_ns", s.max_ns}}}};
    std::cout << out.dump(2) << "\n";
  } else {
    if (!bench) {
      for (const auto& r : rep.results) {
        std::cout << "line " << r.line << " [" << join(r.names) << "]: ";
        if (!r.ok()) {
          std::cout << "error: " << r.error << "\n";
          continue;
        }
        std::cout << r.size << " results, " << r.nanos << " ns, " << r.nodes_visited << " nodes";
        if (r.delta) std::cout << ", delta " << *r.delta << ", xi " << *r.xi;
        std::cout << "\n";
        if (!r.elements.empty()) {
          std::cout << "  ";
          for (std::size_t i = 0; i < r.elements.size(); ++i) std::cout << (i ? " " : "") << r.elements[i];
          std::cout << "\n";
        }
        const std::size_t k = r.names.size();
        for (std::size_t i = 0; i + k <= r.rank_seqs.size(); i += k) {
          std::cout << "  ranks(" << (r.elements.empty() ? std::string("#") + std::to_string(i / k) : std::to_string(r.elements[i / k])) << ") =";
          for (std::size_t j = 0; j < k; ++j) std::cout << ' ' << r.rank_seqs[i + j];
          std::cout << "\n";
        }
      }
    }
    std::cout << s.queries << " queries, " << s.failed << " failed, " << s.total_results << " results; ns mean " << fixed(s.mean_ns, 0) << " p50 "
              << s.p50_ns << " p90 " << s.p90_ns << " p99 " << s.p99_ns << " max " << s.max_ns;
    if (bench) std::cout << " (median of " << opts.repeats << " after " << opts.warmups << " warmups)";
    std::cout << "\n";
    if (bench) {
      for (const auto& r : rep.results) {
        if (!r.ok()) std::cout << "line " << r.line << ": error: " << r.error << "\n";
      }
    }
  }
  return kExitOk;
}

int cmd_certify(const std::string& index, const std::vector<std::string>& names, bool as_json) {
  AnyFamily fam = load_family(index);
  return std::visit(
      [&](const auto& f) {
        std::vector<std::vector<std::uint64_t>> sets;
        for (const auto& n : names) {
          auto id = f.find(n);
          if (!id) throw data_error("unknown set '" + n + "'");
          sets.push_back(f.values(*id));
        }
        const std::vector<SetView> v(sets.begin(), sets.end());
        const Certificate d = compute_delta(v, f.universe());
        const Certificate x = compute_xi(v, f.universe());
        const auto inter = bk_intersect(v);
        auto intervals = [&](const Certificate& c) {
          json arr = json::array();
          for (const auto& iv : c.intervals) {
            json j = {{"lo", iv.lo}, {"hi", iv.hi}};
            if (iv.member()) {
              j["member"] = true;
            } else {
              j["eliminated_by"] = names[iv.eliminator];
            }
            arr.push_back(j);
          }
          return arr;
        };
        if (as_json) {
          json out = {{"sets", names},         {"delta", d.size()},          {"xi", x.size()}, {"intersection_size", inter.size()},
                      {"intersection", inter}, {"delta_intervals", intervals(d)}, {"xi_intervals", intervals(x)}};
          std::cout << out.dump(2) << "\n";
          return kExitOk;
        }
        std::cout << "delta " << d.size() << ", xi " << x.size() << ", |I(Q)| " << inter.size() << "\n";
        for (const auto* c : {&d, &x}) {
          std::cout << (c == &d ? "delta" : "xi") << " intervals:";
          for (const auto& iv : c->intervals) {
            std::cout << " [" << iv.lo << ".." << iv.hi << "]" << (iv.member() ? "*" : "");
          }
          std::cout << "\n";
        }
        std::cout << "(* marks intervals inside the intersection)\n";
        return kExitOk;
      },
      fam);
}

void add_query_flags(CLI::App* c, QueryArgs& a) {
  c->add_option("index", a.index, "family file written by build")->required();
  c->add_option("log", a.log, "query log: one query per line, set names separated by spaces")->required();
  c->add_option("--mode", a.mode, "result form")->check(CLI::IsMember({"array", "trie"}));
  c->add_option("--threads", a.threads, "threads per intersection, 0 = all cores");
  c->add_flag("--with-ranks", a.with_ranks, "emit rank tuples (index built with --with-ranks)");
  c->add_flag("--json", a.json, "JSON report");
  c->add_flag("--parallel-queries", a.parallel_queries, "replay queries concurrently, one thread each");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed binary trie sets: build indexes, report space, run and certify intersections."};
  app.require_subcommand(1);

  BuildArgs b;
  auto* build = app.add_subcommand("build", "build a family file from a text or SETF binary set file");
  build->add_option("input", b.input, "set file")->required()->check(CLI::ExistingFile);
  build->add_option("-o,--output", b.output, "family file to write")->required();
  build->add_option("--universe", b.universe, "universe size u (default: largest value + 1)");
  build->add_option("--kind", b.kind, "trie or rtrie (full subtrees elided)")->check(CLI::IsMember({"trie", "rtrie"}));
  build->add_option("--rank", b.rank, "rank directory layout")->check(CLI::IsMember({"dense", "sparse", "interleaved"}));
  build->add_option("--min-size", b.min_size, "drop sets with fewer elements; 0 keeps empty sets");
  build->add_flag("--with-ranks", b.with_ranks, "add a rank directory on the deepest level (rank queries, rank tuples)");
  build->add_option("--threads", b.threads, "build threads, 0 = all cores");

  std::string stats_index;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "space report in bits per integer");
  stats->add_option("index", stats_index, "family file")->required();
  stats->add_flag("--json", stats_json, "JSON report");

  QueryArgs q;
  auto* query = app.add_subcommand("query", "run a query log");
  add_query_flags(query, q);
  query->add_flag("--certify", q.certify, "also report delta and xi");
  query->add_flag("--dump", q.dump, "print result elements");

  QueryArgs bq;
  bq.warmups = 3;
  bq.repeats = 5;
  auto* bench = app.add_subcommand("bench", "time a query log");
  add_query_flags(bench, bq);
  bench->add_option("--warmups", bq.warmups, "discarded runs per query");
  bench->add_option("--repeats", bq.repeats, "timed runs per query; the median is reported");

  std::string cert_index;
  std::vector<std::string> cert_names;
  bool cert_json = false;
  auto* cert = app.add_subcommand("certify", "delta and xi certificates for one query");
  cert->add_option("index", cert_index, "family file")->required();
  cert->add_option("sets", cert_names, "two or more set names")->required()->expected(2, -1);
  cert->add_flag("--json", cert_json, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) return cmd_build(b);
    if (*stats) return cmd_stats(stats_index, stats_json);
    if (*query) return cmd_query(q, false);
    if (*bench) return cmd_query(bq, true);
    if (*cert) return cmd_certify(cert_index, cert_names, cert_json);
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const build_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
