#pragma once

// Directory-level orchestration: build-corpus output layout and its loader.

#include <filesystem>

#include "chgh/corpus.hpp"

namespace chgh {

struct BuildCorpusOptions {
  std::filesystem::path jd_path;
  std::filesystem::path we_path;
  std::filesystem::path out_dir;
  double epsilon = 0.1;
  int min_count = 50;
  int train_end = 0;  // graphs use documents with timestep < train_end
};

// Produces vocabulary.csv, demand_shares.csv, supply_shares.csv,
// demand_graph.tsv, supply_graph.tsv and corpus_meta.json under out_dir.
// Returns human-readable warnings (empty timesteps, etc).
std::vector<std::string> build_corpus(const BuildCorpusOptions& options);

struct CorpusData {
  SkillVocabulary vocab;
  ShareSeries demand;
  ShareSeries supply;
  GapSeries gap;
  SkillGraph graph_demand;
  SkillGraph graph_supply;

  int n_skills() const { return vocab.size(); }
  int n_steps() const { return static_cast<int>(demand.values.cols()); }

  // Block-diagonal fixed adjacency, supply block first: [[A_S, 0], [0, A_D]].
  Mat fixed_adjacency() const;
};

CorpusData load_corpus_dir(const std::filesystem::path& dir);

}  // namespace chgh
