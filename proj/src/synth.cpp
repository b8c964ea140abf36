#include "chgh/synth.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace chgh {

using nlohmann::json;

void MarketSpec::validate() const {
  if (n_skills < 1) throw UserError("market spec: n_skills must be positive");
  if (n_clusters_true < 1 || n_clusters_true > n_skills)
    throw UserError("market spec: n_clusters_true must be in 1..n_skills");
  if (n_steps < 2) throw UserError("market spec: n_steps must be at least 2");
  if (docs_per_step < 1) throw UserError("market spec: docs_per_step must be positive");
  if (demand_supply_lag < 0) throw UserError("market spec: lag must be >= 0");
  if (trend_amplitude < 0.0) throw UserError("market spec: trend_amplitude must be >= 0");
  if (noise_scale < 0.0) throw UserError("market spec: noise_scale must be >= 0");
}

MarketSpec parse_market_spec(const std::string& text, const std::string& origin) {
  MarketSpec spec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UserError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n_skills") spec.n_skills = std::stoi(value);
      else if (key == "n_clusters_true") spec.n_clusters_true = std::stoi(value);
      else if (key == "n_steps") spec.n_steps = std::stoi(value);
      else if (key == "docs_per_step") spec.docs_per_step = std::stoi(value);
      else if (key == "demand_supply_lag") spec.demand_supply_lag = std::stoi(value);
      else if (key == "trend_amplitude") spec.trend_amplitude = std::stod(value);
      else if (key == "noise_scale") spec.noise_scale = std::stod(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else throw UserError(origin + ": unknown market spec key \"" + key + "\"");
    } catch (const UserError&) {
      throw;
    } catch (const std::exception&) {
      throw UserError(origin + ":" + std::to_string(line_no) + ": bad value for \"" + key + "\"");
    }
  }
  spec.validate();
  return spec;
}

MarketSpec load_market_spec(const std::filesystem::path& path) {
  return parse_market_spec(read_text_file(path), path.string());
}

namespace {

constexpr int kBaseYear = 2015;
constexpr int kBaseMonth = 1;
constexpr double kClipLow = 0.01;
constexpr double kClipHigh = 0.99;
constexpr double kBoost = 3.0;  // intra-cluster inclusion multiplier
// Base inclusion rates are kept low so that conditional co-occurrence across
// clusters stays below typical graph thresholds while intra-cluster pairs
// survive them.
constexpr double kBaseLow = 0.06;
constexpr double kBaseHigh = 0.14;

std::string month_string(int step) {
  int total = (kBaseMonth - 1) + step;
  int year = kBaseYear + total / 12;
  int month = total % 12 + 1;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

// Piecewise-linear ramp with one change point plus a 12-month seasonal term,
// defined on all of R so the supply view can be evaluated at t - lag.
struct TrendCurve {
  double change_point = 0.0;
  double slope_before = 0.0;
  double slope_after = 0.0;
  double season_amp = 0.0;
  double season_phase = 0.0;

  double eval(double t) const {
    double ramp = t <= change_point ? slope_before * (t - change_point)
                                    : slope_after * (t - change_point);
    return ramp + season_amp * std::sin(2.0 * M_PI * (t + season_phase) / 12.0);
  }
};

double clip_prob(double p, long* clipped) {
  if (p < kClipLow) {
    ++*clipped;
    return kClipLow;
  }
  if (p > kClipHigh) {
    ++*clipped;
    return kClipHigh;
  }
  return p;
}

}  // namespace

SyntheticMarket generate_market(const MarketSpec& spec) {
  spec.validate();
  SyntheticMarket market;
  Rng master(spec.seed);

  const int n = spec.n_skills;
  const int steps = spec.n_steps;
  const int n_clusters = spec.n_clusters_true;

  market.skill_names.reserve(n);
  char buf[32];
  for (int k = 0; k < n; ++k) {
    std::snprintf(buf, sizeof(buf), "skill_%03d", k);
    market.skill_names.emplace_back(buf);
  }

  // Round-robin cluster membership keeps cluster sizes balanced.
  market.true_cluster.resize(n);
  for (int k = 0; k < n; ++k) market.true_cluster[k] = k % n_clusters;

  Rng structure = master.fork(1);
  std::vector<TrendCurve> curves(n_clusters);
  for (int c = 0; c < n_clusters; ++c) {
    TrendCurve& curve = curves[c];
    curve.change_point = structure.uniform(0.25 * steps, 0.75 * steps);
    double direction = structure.bernoulli(0.5) ? 1.0 : -1.0;
    // Sized so the ramp sweeps order-1 over half the horizon; the sign flip
    // at the change point produces rise-then-fall / fall-then-rise shapes.
    double unit = 2.0 / steps;
    curve.slope_before = direction * structure.uniform(0.5, 1.0) * unit;
    curve.slope_after = -direction * structure.uniform(0.5, 1.0) * unit;
    curve.season_amp = structure.uniform(0.1, 0.3);
    curve.season_phase = structure.uniform(0.0, 12.0);
  }
  std::vector<double> base_prob(n);
  for (int k = 0; k < n; ++k) base_prob[k] = structure.uniform(kBaseLow, kBaseHigh);

  // Per-skill marginal inclusion probabilities before document sampling.
  Mat prob_demand(n, steps), prob_supply(n, steps);
  Rng noise_rng = master.fork(2);
  for (int k = 0; k < n; ++k) {
    const TrendCurve& curve = curves[market.true_cluster[k]];
    for (int t = 0; t < steps; ++t) {
      double noise_d = spec.noise_scale > 0.0 ? noise_rng.normal(0.0, spec.noise_scale) : 0.0;
      double noise_s = spec.noise_scale > 0.0 ? noise_rng.normal(0.0, spec.noise_scale) : 0.0;
      prob_demand(k, t) =
          base_prob[k] + spec.trend_amplitude * curve.eval(t) + noise_d;
      prob_supply(k, t) = base_prob[k] +
                          spec.trend_amplitude * curve.eval(t - spec.demand_supply_lag) + noise_s;
    }
  }

  // The dominant-cluster scheme multiplies in-cluster inclusion by the boost
  // and damps the rest so the marginal stays at the planted probability. The
  // boost is capped for small cluster counts to keep the damp factor positive.
  const double boost = std::min(kBoost, std::max(1.0, n_clusters - 0.5));
  const double damp =
      n_clusters > 1 ? (static_cast<double>(n_clusters) - boost) / (n_clusters - 1) : 1.0;

  market.truth_demand = Mat::Zero(n, steps);
  market.truth_supply = Mat::Zero(n, steps);
  long clipped = 0;
  for (int k = 0; k < n; ++k) {
    for (int t = 0; t < steps; ++t) {
      auto expected = [&](double p) {
        double acc = 0.0;
        long dummy = 0;
        for (int c = 0; c < n_clusters; ++c) {
          double factor = market.true_cluster[k] == c ? boost : damp;
          acc += clip_prob(p * factor, &dummy);
        }
        return acc / n_clusters;
      };
      market.truth_demand(k, t) = expected(prob_demand(k, t));
      market.truth_supply(k, t) = expected(prob_supply(k, t));
    }
  }

  auto sample_documents = [&](View view, const Mat& probs, const char* prefix,
                              std::vector<RawDocument>* out) {
    for (int t = 0; t < steps; ++t) {
      Rng doc_rng = master.fork(100 + 2 * static_cast<std::uint64_t>(t) +
                                (view == View::Demand ? 0 : 1));
      for (int i = 0; i < spec.docs_per_step; ++i) {
        RawDocument doc;
        std::snprintf(buf, sizeof(buf), "%s-t%03d-%05d", prefix, t, i);
        doc.id = buf;
        doc.kind = view == View::Demand ? DocKind::JobDescription : DocKind::WorkExperience;
        std::string ts = month_string(t);
        doc.year = std::stoi(ts.substr(0, 4));
        doc.month = std::stoi(ts.substr(5, 2));
        int dominant = static_cast<int>(doc_rng.uniform_int(0, n_clusters - 1));
        for (int k = 0; k < n; ++k) {
          double factor = market.true_cluster[k] == dominant ? boost : damp;
          double p = clip_prob(probs(k, t) * factor, &clipped);
          if (doc_rng.bernoulli(p)) doc.skills.push_back(market.skill_names[k]);
        }
        out->push_back(std::move(doc));
      }
    }
  };
  sample_documents(View::Demand, prob_demand, "jd", &market.jd);
  sample_documents(View::Supply, prob_supply, "we", &market.we);
  market.clipped_probabilities = clipped;
  return market;
}

void write_market(const std::filesystem::path& dir, const SyntheticMarket& market,
                  const MarketSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  auto write_jsonl = [&](const fs::path& path, const std::vector<RawDocument>& docs) {
    std::ostringstream out;
    for (const auto& d : docs) {
      json rec;
      rec["id"] = d.id;
      char ts[16];
      std::snprintf(ts, sizeof(ts), "%04d-%02d", d.year, d.month);
      rec["timestamp"] = ts;
      rec["skills"] = d.skills;
      out << rec.dump() << '\n';
    }
    atomic_write_file(path, out.str());
  };
  write_jsonl(dir / "jd.jsonl", market.jd);
  write_jsonl(dir / "we.jsonl", market.we);

  auto write_truth = [&](const fs::path& path, const Mat& truth) {
    std::ostringstream out;
    out << "skill";
    for (int t = 0; t < truth.cols(); ++t) out << ",t" << t;
    out << '\n';
    for (int k = 0; k < truth.rows(); ++k) {
      out << market.skill_names[k];
      for (int t = 0; t < truth.cols(); ++t) out << ',' << format_double(truth(k, t));
      out << '\n';
    }
    atomic_write_file(path, out.str());
  };
  write_truth(dir / "truth_demand.csv", market.truth_demand);
  write_truth(dir / "truth_supply.csv", market.truth_supply);

  json meta;
  meta["n_skills"] = spec.n_skills;
  meta["n_clusters_true"] = spec.n_clusters_true;
  meta["n_steps"] = spec.n_steps;
  meta["docs_per_step"] = spec.docs_per_step;
  meta["demand_supply_lag"] = spec.demand_supply_lag;
  meta["trend_amplitude"] = spec.trend_amplitude;
  meta["noise_scale"] = spec.noise_scale;
  meta["seed"] = spec.seed;
  meta["true_cluster"] = market.true_cluster;
  meta["clipped_probabilities"] = market.clipped_probabilities;
  atomic_write_file(dir / "synth_meta.json", meta.dump(2) + "\n");
}

Mat oracle_shares(const std::vector<Document>& docs, int n_skills, int horizon) {
  Mat shares = Mat::Zero(n_skills, horizon);
  for (int t = 0; t < horizon; ++t) {
    long total = 0;
    for (const auto& d : docs)
      if (d.timestep == t) ++total;
    if (total == 0) continue;
    for (int k = 0; k < n_skills; ++k) {
      long hits = 0;
      for (const auto& d : docs)
        if (d.timestep == t && d.skills.count(k)) ++hits;
      shares(k, t) = static_cast<double>(hits) / static_cast<double>(total);
    }
  }
  return shares;
}

Mat oracle_gap(const Mat& demand, const Mat& supply) { return demand - supply; }

Mat oracle_graph(const std::vector<Document>& docs, int n_skills, double epsilon) {
  Mat adjacency = Mat::Zero(n_skills, n_skills);
  for (int i = 0; i < n_skills; ++i) {
    long occ_i = 0;
    for (const auto& d : docs)
      if (d.skills.count(i)) ++occ_i;
    if (occ_i == 0) continue;  // row stays zero
    for (int j = 0; j < n_skills; ++j) {
      long both = 0;
      for (const auto& d : docs)
        if (d.skills.count(i) && d.skills.count(j)) ++both;
      double r = static_cast<double>(both) / static_cast<double>(occ_i);
      if (r > epsilon) adjacency(i, j) = r;
    }
  }
  return adjacency;
}

}  // namespace chgh
