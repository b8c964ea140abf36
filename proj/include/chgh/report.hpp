#pragma once

// Report rendering: per-skill share-history panels with the predicted trend
// class for the final step, plus a per-variant metrics table.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chgh/train/trainer.hpp"

namespace chgh {

struct ReportRequest {
  std::filesystem::path checkpoint_dir;
  std::filesystem::path data_dir;
  std::vector<std::string> skills;         // empty = metrics table only
  std::filesystem::path image_path;        // .svg
  std::filesystem::path table_path;        // .csv
  std::optional<std::filesystem::path> ablation_csv;  // copied into the table when present
};

// Writes the CSV (and the image when skills were requested). Unknown skill
// names fail with near-match suggestions.
void render_report(const ReportRequest& request, std::ostream& log);

// Exposed for tests: Levenshtein-based suggestions.
std::vector<std::string> near_matches(const std::string& query,
                                      const std::vector<std::string>& names, size_t max_out = 5);

}  // namespace chgh
