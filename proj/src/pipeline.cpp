#include "chgh/pipeline.hpp"

#include <nlohmann/json.hpp>

namespace chgh {

using nlohmann::json;

std::vector<std::string> build_corpus(const BuildCorpusOptions& options) {
  namespace fs = std::filesystem;
  std::vector<std::string> warnings;

  auto raw_jd = ingest_file(options.jd_path, DocKind::JobDescription);
  auto raw_we = ingest_file(options.we_path, DocKind::WorkExperience);
  MonthAxis axis = build_month_axis(raw_jd, raw_we);

  std::vector<RawDocument> all_raw = raw_jd;
  all_raw.insert(all_raw.end(), raw_we.begin(), raw_we.end());
  SkillVocabulary vocab = filter_sparse_skills(all_raw, options.min_count);

  auto jd = bind_documents(raw_jd, vocab, axis);
  auto we = bind_documents(raw_we, vocab, axis);

  ShareSeries demand = compute_share_series(jd, vocab, View::Demand, axis.n_steps, &warnings);
  ShareSeries supply = compute_share_series(we, vocab, View::Supply, axis.n_steps, &warnings);

  if (options.train_end < 1 || options.train_end > axis.n_steps)
    throw UserError("train-end must be in 1.." + std::to_string(axis.n_steps) +
                    " (number of timesteps in the corpora)");
  auto train_slice = [&](const std::vector<Document>& docs) {
    std::vector<Document> kept;
    for (const auto& d : docs)
      if (d.timestep < options.train_end) kept.push_back(d);
    return kept;
  };
  SkillGraph graph_d =
      build_cooccurrence_graph(train_slice(jd), vocab, View::Demand, options.epsilon);
  SkillGraph graph_s =
      build_cooccurrence_graph(train_slice(we), vocab, View::Supply, options.epsilon);

  fs::create_directories(options.out_dir);
  write_vocabulary_csv(options.out_dir / "vocabulary.csv", vocab);
  write_shares_csv(options.out_dir / "demand_shares.csv", demand, vocab);
  write_shares_csv(options.out_dir / "supply_shares.csv", supply, vocab);
  write_graph_tsv(options.out_dir / "demand_graph.tsv", graph_d);
  write_graph_tsv(options.out_dir / "supply_graph.tsv", graph_s);

  json meta;
  meta["n_skills"] = vocab.size();
  meta["n_steps"] = axis.n_steps;
  meta["base_year"] = axis.base_year;
  meta["base_month"] = axis.base_month;
  meta["epsilon"] = options.epsilon;
  meta["min_count"] = options.min_count;
  meta["train_end"] = options.train_end;
  meta["n_jd"] = raw_jd.size();
  meta["n_we"] = raw_we.size();
  meta["warnings"] = warnings;
  atomic_write_file(options.out_dir / "corpus_meta.json", meta.dump(2) + "\n");
  return warnings;
}

Mat CorpusData::fixed_adjacency() const {
  const int n = n_skills();
  Mat a = Mat::Zero(2 * n, 2 * n);
  a.topLeftCorner(n, n) = graph_supply.dense();
  a.bottomRightCorner(n, n) = graph_demand.dense();
  return a;
}

CorpusData load_corpus_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(dir)) throw UserError("data directory does not exist: " + dir.string());
  CorpusData data;
  data.vocab = read_vocabulary_csv(dir / "vocabulary.csv");
  data.demand = read_shares_csv(dir / "demand_shares.csv", data.vocab, View::Demand);
  data.supply = read_shares_csv(dir / "supply_shares.csv", data.vocab, View::Supply);
  if (data.demand.values.cols() != data.supply.values.cols())
    throw UserError("demand and supply shares disagree on the number of timesteps");
  data.gap = compute_skill_gap(data.demand, data.supply);

  double epsilon = 0.0;
  fs::path meta_path = dir / "corpus_meta.json";
  if (fs::exists(meta_path)) {
    json meta = json::parse(read_text_file(meta_path));
    epsilon = meta.value("epsilon", 0.0);
  }
  data.graph_demand =
      read_graph_tsv(dir / "demand_graph.tsv", data.vocab.size(), View::Demand, epsilon);
  data.graph_supply =
      read_graph_tsv(dir / "supply_graph.tsv", data.vocab.size(), View::Supply, epsilon);
  return data;
}

}  // namespace chgh
