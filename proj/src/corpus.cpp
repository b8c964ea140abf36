#include "chgh/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace chgh {

using nlohmann::json;

const char* view_name(View v) { return v == View::Demand ? "demand" : "supply"; }

int SkillVocabulary::add(const std::string& name, long count) {
  if (index_.count(name)) throw InternalError("duplicate skill name: " + name);
  int id = static_cast<int>(names_.size());
  names_.push_back(name);
  counts_.push_back(count);
  index_[name] = id;
  return id;
}

std::optional<int> SkillVocabulary::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Mat SkillGraph::dense() const {
  Mat a = Mat::Zero(n_skills, n_skills);
  for (const auto& e : edges) a(e.src, e.dst) = e.weight;
  return a;
}

namespace {

// Accepts exactly "YYYY-MM". Years outside 1900..2999 are rejected as out of
// the supported range.
void parse_timestamp(const std::string& ts, int line_no, const std::string& file, int* year,
                     int* month) {
  auto fail = [&](const std::string& what) {
    throw UserError(file + ":" + std::to_string(line_no) + ": " + what + " (got \"" + ts + "\")");
  };
  if (ts.size() != 7 || ts[4] != '-') fail("timestamp must be YYYY-MM");
  for (int i : {0, 1, 2, 3, 5, 6})
    if (!std::isdigit(static_cast<unsigned char>(ts[i]))) fail("timestamp must be YYYY-MM");
  int y = std::stoi(ts.substr(0, 4));
  int m = std::stoi(ts.substr(5, 2));
  if (m < 1 || m > 12) fail("month out of range 01..12");
  if (y < 1900 || y > 2999) fail("year outside supported range 1900..2999");
  *year = y;
  *month = m;
}

int month_index(int year, int month, const MonthAxis& axis) {
  return (year - axis.base_year) * 12 + (month - axis.base_month);
}

}  // namespace

std::vector<RawDocument> ingest_file(const std::filesystem::path& path, DocKind kind) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open corpus file: " + path.string());
  std::vector<RawDocument> docs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw UserError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed record: " + e.what());
    }
    RawDocument doc;
    doc.kind = kind;
    try {
      doc.id = rec.at("id").get<std::string>();
      std::string ts = rec.at("timestamp").get<std::string>();
      parse_timestamp(ts, line_no, path.string(), &doc.year, &doc.month);
      for (const auto& s : rec.at("skills")) doc.skills.push_back(s.get<std::string>());
    } catch (const json::exception& e) {
      throw UserError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed record: " + e.what());
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

MonthAxis build_month_axis(const std::vector<RawDocument>& jd,
                           const std::vector<RawDocument>& we) {
  if (jd.empty() && we.empty()) throw UserError("both corpora are empty");
  MonthAxis axis;
  bool first = true;
  auto visit = [&](const std::vector<RawDocument>& docs) {
    for (const auto& d : docs) {
      if (first || d.year < axis.base_year ||
          (d.year == axis.base_year && d.month < axis.base_month)) {
        axis.base_year = d.year;
        axis.base_month = d.month;
        first = false;
      }
    }
  };
  visit(jd);
  visit(we);
  int max_step = 0;
  auto span = [&](const std::vector<RawDocument>& docs) {
    for (const auto& d : docs) max_step = std::max(max_step, month_index(d.year, d.month, axis));
  };
  span(jd);
  span(we);
  axis.n_steps = max_step + 1;
  return axis;
}

std::vector<Document> bind_documents(const std::vector<RawDocument>& raw,
                                     const SkillVocabulary& vocab, const MonthAxis& axis,
                                     bool strict) {
  std::vector<Document> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    Document d;
    d.id = r.id;
    d.kind = r.kind;
    d.timestep = month_index(r.year, r.month, axis);
    if (d.timestep < 0) throw InternalError("document precedes month axis base: " + r.id);
    for (const auto& name : r.skills) {
      auto id = vocab.find(name);
      if (id) {
        d.skills.insert(*id);
      } else if (strict) {
        throw UserError("unknown skill name \"" + name + "\" in document " + r.id);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

SkillVocabulary filter_sparse_skills(const std::vector<RawDocument>& docs, int min_count) {
  if (min_count < 1) throw UserError("min_count must be >= 1");
  std::unordered_map<std::string, long> counts;
  for (const auto& d : docs) {
    std::set<std::string> uniq(d.skills.begin(), d.skills.end());
    for (const auto& s : uniq) ++counts[s];
  }
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [name, c] : counts)
    if (c >= min_count) kept.emplace_back(name, c);
  if (kept.empty())
    throw UserError("no skill reaches min_count=" + std::to_string(min_count) +
                    "; vocabulary would be empty");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  SkillVocabulary vocab;
  for (const auto& [name, c] : kept) vocab.add(name, c);
  return vocab;
}

ShareSeries compute_share_series(const std::vector<Document>& docs, const SkillVocabulary& vocab,
                                 View view, int horizon, std::vector<std::string>* warnings) {
  const int n = vocab.size();
  ShareSeries shares;
  shares.view = view;
  shares.values = Mat::Zero(n, horizon);
  std::vector<long> totals(horizon, 0);
  Eigen::MatrixXd counts = Mat::Zero(n, horizon);
  for (const auto& d : docs) {
    if (d.timestep >= horizon)
      throw InternalError("document timestep " + std::to_string(d.timestep) +
                          " exceeds horizon " + std::to_string(horizon));
    ++totals[d.timestep];
    for (int k : d.skills) {
      if (k < 0 || k >= n) throw InternalError("skill id out of range: " + std::to_string(k));
      counts(k, d.timestep) += 1.0;
    }
  }
  for (int t = 0; t < horizon; ++t) {
    if (totals[t] == 0) {
      if (warnings)
        warnings->push_back("timestep " + std::to_string(t) + " has no " +
                            std::string(view_name(view)) + " documents; column set to zero");
      continue;
    }
    shares.values.col(t) = counts.col(t) / static_cast<double>(totals[t]);
  }
  return shares;
}

GapSeries compute_skill_gap(const ShareSeries& demand, const ShareSeries& supply) {
  if (demand.values.rows() != supply.values.rows() ||
      demand.values.cols() != supply.values.cols())
    throw InternalError("share series shape mismatch");
  GapSeries gap;
  gap.values = demand.values - supply.values;
  return gap;
}

SkillGraph build_cooccurrence_graph(const std::vector<Document>& docs,
                                    const SkillVocabulary& vocab, View view, double epsilon) {
  if (epsilon < 0.0 || epsilon >= 1.0) throw UserError("epsilon must satisfy 0 <= epsilon < 1");
  const int n = vocab.size();
  std::vector<long> occ(n, 0);
  // Pair counts keyed (i << 32) | j; stays exact and avoids an n x n buffer.
  std::unordered_map<std::uint64_t, long> pair_counts;
  for (const auto& d : docs) {
    for (int i : d.skills) ++occ[i];
    for (int i : d.skills)
      for (int j : d.skills)
        if (i != j) ++pair_counts[(static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j)];
  }
  SkillGraph graph;
  graph.view = view;
  graph.n_skills = n;
  graph.epsilon = epsilon;
  for (const auto& [key, both] : pair_counts) {
    int i = static_cast<int>(key >> 32);
    int j = static_cast<int>(key & 0xffffffffull);
    double r = static_cast<double>(both) / static_cast<double>(occ[i]);
    if (r > epsilon) graph.edges.push_back({i, j, r});
  }
  // Self co-occurrence is occ/occ = 1 for any occurring skill.
  for (int i = 0; i < n; ++i)
    if (occ[i] > 0 && 1.0 > epsilon) graph.edges.push_back({i, i, 1.0});
  std::sort(graph.edges.begin(), graph.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  return graph;
}

void write_vocabulary_csv(const std::filesystem::path& path, const SkillVocabulary& vocab) {
  std::ostringstream out;
  out << "skill_id,name,count\n";
  for (int i = 0; i < vocab.size(); ++i)
    out << i << ',' << vocab.name(i) << ',' << vocab.count(i) << '\n';
  atomic_write_file(path, out.str());
}

SkillVocabulary read_vocabulary_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "skill_id,name,count")
    throw UserError("bad vocabulary header in " + path.string());
  SkillVocabulary vocab;
  int expected = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto parts = split(trim(line), ',');
    if (parts.size() != 3) throw UserError("bad vocabulary row in " + path.string() + ": " + line);
    if (std::stoi(parts[0]) != expected)
      throw UserError("non-contiguous skill ids in " + path.string());
    vocab.add(parts[1], std::stol(parts[2]));
    ++expected;
  }
  return vocab;
}

void write_shares_csv(const std::filesystem::path& path, const ShareSeries& shares,
                      const SkillVocabulary& vocab) {
  if (shares.values.rows() != vocab.size()) throw InternalError("shares/vocabulary size mismatch");
  std::ostringstream out;
  out << "skill";
  for (int t = 0; t < shares.values.cols(); ++t) out << ",t" << t;
  out << '\n';
  for (int k = 0; k < shares.values.rows(); ++k) {
    out << vocab.name(k);
    for (int t = 0; t < shares.values.cols(); ++t) out << ',' << format_double(shares.values(k, t));
    out << '\n';
  }
  atomic_write_file(path, out.str());
}

ShareSeries read_shares_csv(const std::filesystem::path& path, const SkillVocabulary& vocab,
                            View view) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw UserError("empty shares file: " + path.string());
  auto header = split(trim(line), ',');
  if (header.empty() || header[0] != "skill")
    throw UserError("bad shares header in " + path.string());
  int n_steps = static_cast<int>(header.size()) - 1;
  ShareSeries shares;
  shares.view = view;
  shares.values = Mat::Zero(vocab.size(), n_steps);
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto parts = split(trim(line), ',');
    if (static_cast<int>(parts.size()) != n_steps + 1)
      throw UserError("bad shares row in " + path.string() + ": " + line);
    if (row >= vocab.size()) throw UserError("too many rows in " + path.string());
    if (parts[0] != vocab.name(row))
      throw UserError("shares row order does not match vocabulary in " + path.string());
    for (int t = 0; t < n_steps; ++t) shares.values(row, t) = std::stod(parts[t + 1]);
    ++row;
  }
  if (row != vocab.size()) throw UserError("missing rows in " + path.string());
  return shares;
}

void write_graph_tsv(const std::filesystem::path& path, const SkillGraph& graph) {
  std::ostringstream out;
  for (const auto& e : graph.edges)
    out << e.src << '\t' << e.dst << '\t' << format_double(e.weight) << '\n';
  atomic_write_file(path, out.str());
}

SkillGraph read_graph_tsv(const std::filesystem::path& path, int n_skills, View view,
                          double epsilon) {
  std::istringstream in(read_text_file(path));
  SkillGraph graph;
  graph.view = view;
  graph.n_skills = n_skills;
  graph.epsilon = epsilon;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto parts = split(trim(line), '\t');
    if (parts.size() != 3)
      throw UserError(path.string() + ":" + std::to_string(line_no) + ": bad triplet");
    GraphEdge e{std::stoi(parts[0]), std::stoi(parts[1]), std::stod(parts[2])};
    if (e.src < 0 || e.src >= n_skills || e.dst < 0 || e.dst >= n_skills)
      throw UserError(path.string() + ":" + std::to_string(line_no) + ": node id out of range");
    graph.edges.push_back(e);
  }
  std::sort(graph.edges.begin(), graph.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  return graph;
}

}  // namespace chgh
