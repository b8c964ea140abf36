#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "chgh/corpus.hpp"
#include "chgh/pipeline.hpp"
#include "chgh/synth.hpp"

using namespace chgh;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() / ("chgh_corpus_test_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::path path = dir / name;
  std::ofstream out(path);
  out << content;
  return path;
}

// Hand-rolled 6-record fixture; month indices relative to 2017-09.
const char* kJdFixture = R"({"id":"j1","timestamp":"2017-09","skills":["java","sql"]}
{"id":"j2","timestamp":"2017-09","skills":["java","java"]}
{"id":"j3","timestamp":"2017-10","skills":["python"]}
{"id":"j4","timestamp":"2017-12","skills":["java","python","sql"]}
{"id":"j5","timestamp":"2018-01","skills":["sql"]}
{"id":"j6","timestamp":"2018-02","skills":[]}
)";

SkillVocabulary tiny_vocab(const std::vector<std::string>& names) {
  SkillVocabulary vocab;
  for (const auto& n : names) vocab.add(n);
  return vocab;
}

Document make_doc(int timestep, std::set<int> skills) {
  Document d;
  d.id = "d" + std::to_string(timestep);
  d.timestep = timestep;
  d.skills = std::move(skills);
  return d;
}

}  // namespace

TEST_CASE("ingest maps months to contiguous indices from the earliest month") {
  auto dir = temp_dir();
  auto jd_path = write_file(dir, "jd.jsonl", kJdFixture);
  auto we_path = write_file(dir, "we.jsonl",
                            R"({"id":"w1","timestamp":"2017-11","skills":["java"]})" "\n");
  auto jd = ingest_file(jd_path, DocKind::JobDescription);
  auto we = ingest_file(we_path, DocKind::WorkExperience);
  REQUIRE(jd.size() == 6);
  MonthAxis axis = build_month_axis(jd, we);
  CHECK(axis.base_year == 2017);
  CHECK(axis.base_month == 9);
  CHECK(axis.n_steps == 6);  // 2017-09 .. 2018-02

  auto vocab = tiny_vocab({"java", "sql", "python"});
  auto docs = bind_documents(jd, vocab, axis);
  // Expected month indices per record, hand-enumerated.
  std::vector<int> expected = {0, 0, 1, 3, 4, 5};
  for (size_t i = 0; i < docs.size(); ++i) CHECK(docs[i].timestep == expected[i]);

  // Duplicate skill names collapse to set semantics.
  CHECK(docs[1].skills == std::set<int>{0});
  CHECK(docs[0].skills == std::set<int>({0, 1}));
}

TEST_CASE("ingest rejects malformed records with a line number") {
  auto dir = temp_dir();
  auto path = write_file(dir, "bad.jsonl",
                         "{\"id\":\"a\",\"timestamp\":\"2020-01\",\"skills\":[\"x\"]}\n"
                         "this is not json\n");
  try {
    ingest_file(path, DocKind::JobDescription);
    FAIL("expected UserError");
  } catch (const UserError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("ingest rejects out-of-range timestamps") {
  auto dir = temp_dir();
  auto path = write_file(dir, "bad_ts.jsonl",
                         "{\"id\":\"a\",\"timestamp\":\"0100-01\",\"skills\":[\"x\"]}\n");
  CHECK_THROWS_AS(ingest_file(path, DocKind::JobDescription), UserError);
  auto path2 = write_file(dir, "bad_month.jsonl",
                          "{\"id\":\"a\",\"timestamp\":\"2020-13\",\"skills\":[\"x\"]}\n");
  CHECK_THROWS_AS(ingest_file(path2, DocKind::JobDescription), UserError);
}

TEST_CASE("strict binding rejects unknown skills, build mode drops them") {
  auto dir = temp_dir();
  auto path = write_file(dir, "jd.jsonl",
                         R"({"id":"a","timestamp":"2020-01","skills":["java","cobol"]})" "\n");
  auto raw = ingest_file(path, DocKind::JobDescription);
  MonthAxis axis = build_month_axis(raw, {});
  auto vocab = tiny_vocab({"java"});
  auto docs = bind_documents(raw, vocab, axis, /*strict=*/false);
  CHECK(docs[0].skills == std::set<int>{0});
  CHECK_THROWS_AS(bind_documents(raw, vocab, axis, /*strict=*/true), UserError);
}

TEST_CASE("filter_sparse_skills thresholds and orders by count then name") {
  std::vector<RawDocument> docs;
  auto add = [&](std::vector<std::string> skills) {
    RawDocument d;
    d.id = std::to_string(docs.size());
    d.year = 2020;
    d.month = 1;
    d.skills = std::move(skills);
    docs.push_back(d);
  };
  for (int i = 0; i < 5; ++i) add({"a"});
  add({"b"});

  auto vocab = filter_sparse_skills(docs, 2);
  REQUIRE(vocab.size() == 1);
  CHECK(vocab.name(0) == "a");

  auto all = filter_sparse_skills(docs, 1);
  CHECK(all.size() == 2);

  CHECK_THROWS_AS(filter_sparse_skills(docs, 100), UserError);
}

TEST_CASE("filter_sparse_skills matches a brute-force count oracle on a 20-document fixture") {
  Rng rng(7);
  std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g"};
  std::vector<RawDocument> docs;
  for (int i = 0; i < 20; ++i) {
    RawDocument d;
    d.id = std::to_string(i);
    d.year = 2020;
    d.month = 1;
    for (const auto& s : pool)
      if (rng.bernoulli(0.4)) d.skills.push_back(s);
    docs.push_back(d);
  }
  // Independent scan (document-presence counting).
  std::map<std::string, long> counts;
  for (const auto& d : docs) {
    std::set<std::string> uniq(d.skills.begin(), d.skills.end());
    for (const auto& s : uniq) ++counts[s];
  }
  const int min_count = 3;
  auto vocab = filter_sparse_skills(docs, min_count);
  std::set<std::string> expected;
  for (const auto& [name, c] : counts)
    if (c >= min_count) expected.insert(name);
  std::set<std::string> got(vocab.names().begin(), vocab.names().end());
  CHECK(got == expected);
  for (int i = 0; i + 1 < vocab.size(); ++i) {
    bool ordered = vocab.count(i) > vocab.count(i + 1) ||
                   (vocab.count(i) == vocab.count(i + 1) && vocab.name(i) < vocab.name(i + 1));
    CHECK(ordered);
  }
}

TEST_CASE("share series counts document fractions") {
  auto vocab = tiny_vocab({"java", "sql"});
  std::vector<Document> docs = {
      make_doc(0, {0, 1}), make_doc(0, {0}), make_doc(0, {0}), make_doc(0, {1})};
  auto shares = compute_share_series(docs, vocab, View::Demand, 2);
  CHECK(shares.values(0, 0) == doctest::Approx(0.75));  // 3 of 4 documents
  CHECK(shares.values(1, 0) == doctest::Approx(0.5));
  CHECK(shares.values(0, 1) == 0.0);  // no documents at t=1

  std::vector<std::string> warnings;
  compute_share_series(docs, vocab, View::Demand, 2, &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("timestep 1") != std::string::npos);
}

TEST_CASE("share upper and lower bounds") {
  auto vocab = tiny_vocab({"x", "y"});
  std::vector<Document> docs = {make_doc(0, {0}), make_doc(0, {0})};
  auto shares = compute_share_series(docs, vocab, View::Supply, 1);
  CHECK(shares.values(0, 0) == 1.0);  // present in every document
  CHECK(shares.values(1, 0) == 0.0);  // present in none
}

TEST_CASE("skill gap is an elementwise difference with matching shapes") {
  ShareSeries d{View::Demand, Mat::Constant(2, 2, 0.3)};
  ShareSeries s{View::Supply, Mat::Constant(2, 2, 0.2)};
  auto gap = compute_skill_gap(d, s);
  CHECK(gap.values(0, 0) == doctest::Approx(0.1));
  auto zero = compute_skill_gap(d, d);
  CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);

  ShareSeries bad{View::Supply, Mat::Zero(3, 2)};
  CHECK_THROWS_AS(compute_skill_gap(d, bad), InternalError);
}

TEST_CASE("co-occurrence graph: asymmetry, diagonal, thresholds") {
  auto vocab = tiny_vocab({"a", "b"});
  std::vector<Document> docs = {make_doc(0, {0, 1}), make_doc(0, {0, 1}), make_doc(0, {0})};

  auto graph = build_cooccurrence_graph(docs, vocab, View::Demand, 0.5);
  Mat a = graph.dense();
  CHECK(a(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(a(1, 0) == 1.0);
  CHECK(a(0, 0) == 1.0);
  CHECK(a(1, 1) == 1.0);

  // Near-saturation threshold keeps only the exact-1 entries.
  auto tight = build_cooccurrence_graph(docs, vocab, View::Demand, 0.99);
  Mat t = tight.dense();
  CHECK(t(0, 1) == 0.0);
  CHECK(t(1, 0) == 1.0);
  CHECK(t(0, 0) == 1.0);

  // A skill that never occurs has an all-zero row.
  auto vocab3 = tiny_vocab({"a", "b", "ghost"});
  auto with_ghost = build_cooccurrence_graph(docs, vocab3, View::Demand, 0.1);
  Mat g3 = with_ghost.dense();
  CHECK(g3.row(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("edge sets shrink monotonically in epsilon") {
  MarketSpec spec;
  spec.n_skills = 12;
  spec.n_clusters_true = 3;
  spec.n_steps = 4;
  spec.docs_per_step = 40;
  spec.seed = 11;
  auto market = generate_market(spec);
  MonthAxis axis = build_month_axis(market.jd, market.we);
  auto vocab = filter_sparse_skills(market.jd, 1);
  auto docs = bind_documents(market.jd, vocab, axis);

  size_t prev_edges = SIZE_MAX;
  std::vector<GraphEdge> prev;
  for (double eps : {0.0, 0.1, 0.3, 0.6, 0.9}) {
    auto graph = build_cooccurrence_graph(docs, vocab, View::Demand, eps);
    CHECK(graph.edges.size() <= prev_edges);
    // Subset relation: every surviving edge existed at the smaller epsilon.
    if (!prev.empty()) {
      for (const auto& e : graph.edges) {
        bool found = false;
        for (const auto& q : prev)
          if (q.src == e.src && q.dst == e.dst && q.weight == e.weight) found = true;
        CHECK(found);
      }
    }
    prev_edges = graph.edges.size();
    prev = graph.edges;
  }
}

TEST_CASE("stored weights satisfy epsilon < w <= 1") {
  MarketSpec spec;
  spec.n_skills = 10;
  spec.n_steps = 3;
  spec.docs_per_step = 30;
  spec.seed = 3;
  auto market = generate_market(spec);
  MonthAxis axis = build_month_axis(market.jd, market.we);
  auto vocab = filter_sparse_skills(market.jd, 1);
  auto docs = bind_documents(market.jd, vocab, axis);
  const double eps = 0.25;
  auto graph = build_cooccurrence_graph(docs, vocab, View::Demand, eps);
  REQUIRE(!graph.edges.empty());
  for (const auto& e : graph.edges) {
    CHECK(e.weight > eps);
    CHECK(e.weight <= 1.0);
  }
}

TEST_CASE("pipeline equals the brute-force oracles exactly") {
  MarketSpec spec;
  spec.n_skills = 16;
  spec.n_clusters_true = 4;
  spec.n_steps = 6;
  spec.docs_per_step = 50;
  spec.seed = 21;
  auto market = generate_market(spec);
  MonthAxis axis = build_month_axis(market.jd, market.we);
  std::vector<RawDocument> all = market.jd;
  all.insert(all.end(), market.we.begin(), market.we.end());
  auto vocab = filter_sparse_skills(all, 1);
  auto jd = bind_documents(market.jd, vocab, axis);
  auto we = bind_documents(market.we, vocab, axis);

  auto shares_d = compute_share_series(jd, vocab, View::Demand, axis.n_steps);
  auto shares_s = compute_share_series(we, vocab, View::Supply, axis.n_steps);
  CHECK(shares_d.values == oracle_shares(jd, vocab.size(), axis.n_steps));
  CHECK(shares_s.values == oracle_shares(we, vocab.size(), axis.n_steps));

  auto gap = compute_skill_gap(shares_d, shares_s);
  CHECK(gap.values == oracle_gap(shares_d.values, shares_s.values));
  CHECK(gap.values.maxCoeff() <= 1.0);
  CHECK(gap.values.minCoeff() >= -1.0);

  for (double eps : {0.0, 0.2}) {
    auto graph = build_cooccurrence_graph(jd, vocab, View::Demand, eps);
    CHECK(graph.dense() == oracle_graph(jd, vocab.size(), eps));
  }
}

TEST_CASE("permutation equivariance of shares and adjacency") {
  auto vocab = tiny_vocab({"a", "b", "c"});
  std::vector<Document> docs = {make_doc(0, {0, 1}), make_doc(0, {1, 2}), make_doc(1, {0, 2}),
                                make_doc(1, {2})};
  auto shares = compute_share_series(docs, vocab, View::Demand, 2);
  auto graph = build_cooccurrence_graph(docs, vocab, View::Demand, 0.0);

  // Relabel ids with the permutation p: old -> new.
  std::vector<int> p = {2, 0, 1};
  auto vocab_p = tiny_vocab({"b", "c", "a"});  // new id order
  std::vector<Document> docs_p;
  for (const auto& d : docs) {
    std::set<int> remapped;
    for (int k : d.skills) remapped.insert(p[k]);
    docs_p.push_back(make_doc(d.timestep, remapped));
  }
  auto shares_p = compute_share_series(docs_p, vocab_p, View::Demand, 2);
  auto graph_p = build_cooccurrence_graph(docs_p, vocab_p, View::Demand, 0.0);
  Mat a = graph.dense(), a_p = graph_p.dense();
  for (int i = 0; i < 3; ++i) {
    CHECK(shares.values.row(i) == shares_p.values.row(p[i]));
    for (int j = 0; j < 3; ++j) CHECK(a(i, j) == a_p(p[i], p[j]));
  }
}

TEST_CASE("serialization round-trips exactly") {
  auto dir = temp_dir();
  auto vocab = tiny_vocab({"java", "sql", "python"});
  std::vector<Document> docs = {make_doc(0, {0, 1}), make_doc(0, {0, 2}), make_doc(1, {1}),
                                make_doc(2, {0, 1, 2})};
  auto shares = compute_share_series(docs, vocab, View::Demand, 3);
  write_shares_csv(dir / "shares.csv", shares, vocab);
  auto shares2 = read_shares_csv(dir / "shares.csv", vocab, View::Demand);
  CHECK(shares.values == shares2.values);

  auto graph = build_cooccurrence_graph(docs, vocab, View::Demand, 0.1);
  write_graph_tsv(dir / "graph.tsv", graph);
  auto graph2 = read_graph_tsv(dir / "graph.tsv", 3, View::Demand, 0.1);
  CHECK(graph.dense() == graph2.dense());

  write_vocabulary_csv(dir / "vocab.csv", vocab);
  auto vocab2 = read_vocabulary_csv(dir / "vocab.csv");
  REQUIRE(vocab2.size() == vocab.size());
  for (int i = 0; i < vocab.size(); ++i) CHECK(vocab2.name(i) == vocab.name(i));
}

TEST_CASE("build_corpus writes a loadable directory") {
  auto dir = temp_dir();
  MarketSpec spec;
  spec.n_skills = 10;
  spec.n_clusters_true = 2;
  spec.n_steps = 8;
  spec.docs_per_step = 40;
  spec.seed = 5;
  auto market = generate_market(spec);
  write_market(dir / "raw", market, spec);

  BuildCorpusOptions options;
  options.jd_path = dir / "raw" / "jd.jsonl";
  options.we_path = dir / "raw" / "we.jsonl";
  options.out_dir = dir / "corpus";
  options.epsilon = 0.1;
  options.min_count = 1;
  options.train_end = 6;
  build_corpus(options);

  auto data = load_corpus_dir(dir / "corpus");
  CHECK(data.n_skills() == 10);
  CHECK(data.n_steps() == 8);
  CHECK(data.gap.values == (data.demand.values - data.supply.values));
  Mat fixed = data.fixed_adjacency();
  CHECK(fixed.rows() == 20);
  // Off-diagonal blocks stay zero.
  CHECK(fixed.topRightCorner(10, 10).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fixed.bottomLeftCorner(10, 10).cwiseAbs().maxCoeff() == 0.0);
}
