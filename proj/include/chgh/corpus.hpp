#pragma once

// Corpus quantification: skill-tagged documents in, per-month demand/supply
// share series, gap series and co-occurrence graphs out.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chgh/common.hpp"

namespace chgh {

enum class View { Demand, Supply };
enum class DocKind { JobDescription, WorkExperience };

const char* view_name(View v);

// Skill id space: contiguous 0..n-1, unique names.
class SkillVocabulary {
 public:
  SkillVocabulary() = default;

  // Appends a skill; id is the current size. Duplicate names are an error.
  int add(const std::string& name, long count = 0);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int id) const { return names_.at(id); }
  long count(int id) const { return counts_.at(id); }
  std::optional<int> find(const std::string& name) const;

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::vector<long> counts_;
  std::map<std::string, int> index_;
};

// A record as parsed from disk, before skills are bound to vocabulary ids.
struct RawDocument {
  std::string id;
  DocKind kind = DocKind::JobDescription;
  int year = 0;
  int month = 0;  // 1..12
  std::vector<std::string> skills;
};

struct Document {
  std::string id;
  DocKind kind = DocKind::JobDescription;
  int timestep = 0;          // months since the earliest month across corpora
  std::set<int> skills;      // vocabulary ids, set semantics
};

struct ShareSeries {
  View view = View::Demand;
  Mat values;  // n_skills x n_steps, entries in [0, 1]
};

struct GapSeries {
  Mat values;  // demand minus supply, entries in [-1, 1]
};

struct GraphEdge {
  int src = 0;
  int dst = 0;
  double weight = 0.0;
};

// Thresholded, asymmetric co-occurrence graph. Edges are kept sorted by
// (src, dst); every stored weight w satisfies epsilon < w <= 1.
struct SkillGraph {
  View view = View::Demand;
  int n_skills = 0;
  double epsilon = 0.0;
  std::vector<GraphEdge> edges;

  Mat dense() const;
};

// One JSONL file parsed into raw documents. Schema per line:
//   {"id": string, "timestamp": "YYYY-MM", "skills": [string, ...]}
// Malformed lines raise UserError mentioning the 1-based line number.
std::vector<RawDocument> ingest_file(const std::filesystem::path& path, DocKind kind);

// Assigns month indices so the earliest month across both corpora is step 0.
// Returns the number of timesteps covered (max index + 1) and stores the base
// month for reporting.
struct MonthAxis {
  int base_year = 0;
  int base_month = 0;  // 1..12
  int n_steps = 0;
};

MonthAxis build_month_axis(const std::vector<RawDocument>& jd, const std::vector<RawDocument>& we);

// Binds skill names to vocabulary ids and stamps timesteps. In strict mode an
// unknown skill name is an error; otherwise unknown names are dropped (they
// were filtered out of the vocabulary).
std::vector<Document> bind_documents(const std::vector<RawDocument>& raw,
                                     const SkillVocabulary& vocab, const MonthAxis& axis,
                                     bool strict = false);

// Occurrence counting across all supplied documents (document presence, not
// token frequency). Skills with fewer than min_count occurrences are dropped;
// ids are reassigned by descending count, ties by name.
SkillVocabulary filter_sparse_skills(const std::vector<RawDocument>& docs, int min_count);

// Entry (k, t) = fraction of documents at timestep t that contain skill k.
// A timestep with zero documents yields a zero column and a warning.
ShareSeries compute_share_series(const std::vector<Document>& docs, const SkillVocabulary& vocab,
                                 View view, int horizon,
                                 std::vector<std::string>* warnings = nullptr);

GapSeries compute_skill_gap(const ShareSeries& demand, const ShareSeries& supply);

// R[i][j] = (#docs containing both i and j) / (#docs containing i); an edge is
// stored iff R > epsilon. Rows of skills that never occur are all zero.
SkillGraph build_cooccurrence_graph(const std::vector<Document>& docs,
                                    const SkillVocabulary& vocab, View view, double epsilon);

// --- serialization -------------------------------------------------------

void write_vocabulary_csv(const std::filesystem::path& path, const SkillVocabulary& vocab);
SkillVocabulary read_vocabulary_csv(const std::filesystem::path& path);

// Header "skill,t0,t1,...", one row per skill in id order, full precision.
void write_shares_csv(const std::filesystem::path& path, const ShareSeries& shares,
                      const SkillVocabulary& vocab);
ShareSeries read_shares_csv(const std::filesystem::path& path, const SkillVocabulary& vocab,
                            View view);

// TSV triplets: src_id <TAB> dst_id <TAB> weight.
void write_graph_tsv(const std::filesystem::path& path, const SkillGraph& graph);
SkillGraph read_graph_tsv(const std::filesystem::path& path, int n_skills, View view,
                          double epsilon);

}  // namespace chgh
