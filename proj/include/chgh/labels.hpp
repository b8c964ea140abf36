#pragma once

// Trend labeling: next-step shares standardized per skill, ranked across
// skills and binned into equal-frequency classes; plus the evaluation
// metrics used by the harness.

#include <string>
#include <vector>

#include "chgh/corpus.hpp"

namespace chgh {

struct DiscretizationState {
  Vec mean_per_skill;
  Vec std_per_skill;        // population formula over the history window
  Vec normalized_target;    // 0 where std is 0
  std::vector<int> sorted_order;                  // ascending by normalized value
  std::vector<std::pair<int, int>> class_ranges;  // [begin, end) over sorted positions
};

struct LabelMatrix {
  View view = View::Demand;
  Mat onehot;  // n_skills x n_classes, each row sums to exactly 1

  std::vector<int> class_indices() const;
};

struct MetricsReport {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  double auc = 0.0;
  double joint_accuracy = 0.0;
};

// history: n_skills x n_steps (>= 2 steps), target: share vector at the next
// step. Standardizes the target by the per-skill history mean/std, sorts
// ascending (stable, ties by skill id) and splits into n classes whose sizes
// differ by at most one; the remainder goes to the lowest classes.
std::pair<LabelMatrix, DiscretizationState> discretize_shares(const Mat& history,
                                                              const Vec& target, int n_classes,
                                                              View view);

// Fraction of skills where both views' predicted classes match the truth.
double joint_accuracy(const std::vector<int>& pred_s, const std::vector<int>& pred_d,
                      const std::vector<int>& true_s, const std::vector<int>& true_d);

// Argmax with lowest-index tie-break.
std::vector<int> argmax_rows(const Mat& probs);

// ACC, weighted F1 and one-vs-rest AUC with class-frequency weights.
// Classes absent from the labels carry zero F1 weight and are skipped in the
// AUC average. Rows of pred_probs must sum to 1 within 1e-6.
MetricsReport classification_metrics(const Mat& pred_probs, const LabelMatrix& labels);

// Human-readable class name; for 5 classes the scale low..high.
std::string trend_class_name(int cls, int n_classes);

// CSV "skill_id,view,class", one row per (skill, view).
void write_labels_csv(const std::filesystem::path& path, const LabelMatrix& supply,
                      const LabelMatrix& demand);

}  // namespace chgh
