#pragma once

// Synthetic labor-market generator: clusters of skills share latent trend
// curves, supply trails demand by a configurable lag, and documents sample
// skill sets with an intra-cluster co-occurrence boost. Also hosts the
// deliberately naive counting oracles used to cross-check the pipeline.

#include <filesystem>

#include "chgh/corpus.hpp"

namespace chgh {

struct MarketSpec {
  int n_skills = 32;
  int n_clusters_true = 4;
  int n_steps = 24;
  int docs_per_step = 300;       // per corpus kind
  int demand_supply_lag = 2;     // months supply trails demand
  double trend_amplitude = 0.04; // share-units swing of the cluster curves
  double noise_scale = 0.004;    // per-skill per-step jitter
  std::uint64_t seed = 1;

  void validate() const;
};

MarketSpec load_market_spec(const std::filesystem::path& path);
MarketSpec parse_market_spec(const std::string& text, const std::string& origin);

struct SyntheticMarket {
  std::vector<RawDocument> jd;
  std::vector<RawDocument> we;
  Mat truth_demand;  // expected inclusion probability, skills x steps
  Mat truth_supply;
  std::vector<int> true_cluster;        // per skill
  std::vector<std::string> skill_names; // id order
  long clipped_probabilities = 0;       // how often clipping to [0.01,0.99] hit
};

SyntheticMarket generate_market(const MarketSpec& spec);

// Writes jd.jsonl / we.jsonl (the ingestion format) plus truth CSVs and a
// JSON manifest into the directory.
void write_market(const std::filesystem::path& dir, const SyntheticMarket& market,
                  const MarketSpec& spec);

// --- brute-force oracles ---------------------------------------------------
// Straight per-definition counting with no shared code with the pipeline.

Mat oracle_shares(const std::vector<Document>& docs, int n_skills, int horizon);
Mat oracle_gap(const Mat& demand, const Mat& supply);
Mat oracle_graph(const std::vector<Document>& docs, int n_skills, double epsilon);

}  // namespace chgh
