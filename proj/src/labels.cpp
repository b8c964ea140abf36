#include "chgh/labels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace chgh {

std::vector<int> LabelMatrix::class_indices() const {
  std::vector<int> out(onehot.rows());
  for (int i = 0; i < onehot.rows(); ++i) {
    int cls = -1;
    for (int j = 0; j < onehot.cols(); ++j)
      if (onehot(i, j) == 1.0) {
        cls = j;
        break;
      }
    if (cls < 0) throw InternalError("label row is not one-hot");
    out[i] = cls;
  }
  return out;
}

std::pair<LabelMatrix, DiscretizationState> discretize_shares(const Mat& history,
                                                              const Vec& target, int n_classes,
                                                              View view) {
  const int n = static_cast<int>(history.rows());
  if (history.cols() < 2) throw UserError("discretizer needs at least 2 history steps");
  if (n_classes < 2) throw UserError("discretizer needs at least 2 classes");
  if (n_classes > n)
    throw UserError("more classes (" + std::to_string(n_classes) + ") than skills (" +
                    std::to_string(n) + ")");
  if (target.size() != n) throw InternalError("target length does not match history rows");

  DiscretizationState state;
  state.mean_per_skill = history.rowwise().mean();
  state.std_per_skill = Vec::Zero(n);
  state.normalized_target = Vec::Zero(n);
  const double steps = static_cast<double>(history.cols());
  for (int k = 0; k < n; ++k) {
    double var = (history.row(k).array() - state.mean_per_skill(k)).square().sum() / steps;
    state.std_per_skill(k) = std::sqrt(var);
    // A constant history carries no trend signal; its standardized value is 0.
    state.normalized_target(k) =
        state.std_per_skill(k) > 0.0
            ? (target(k) - state.mean_per_skill(k)) / state.std_per_skill(k)
            : 0.0;
  }

  state.sorted_order.resize(n);
  std::iota(state.sorted_order.begin(), state.sorted_order.end(), 0);
  std::stable_sort(state.sorted_order.begin(), state.sorted_order.end(), [&](int a, int b) {
    return state.normalized_target(a) < state.normalized_target(b);
  });

  // Sizes differ by at most one; the remainder goes to the lowest classes.
  const int base = n / n_classes;
  const int rem = n % n_classes;
  int pos = 0;
  for (int c = 0; c < n_classes; ++c) {
    int size = base + (c < rem ? 1 : 0);
    state.class_ranges.emplace_back(pos, pos + size);
    pos += size;
  }

  LabelMatrix labels;
  labels.view = view;
  labels.onehot = Mat::Zero(n, n_classes);
  for (int c = 0; c < n_classes; ++c) {
    auto [b, e] = state.class_ranges[c];
    for (int p = b; p < e; ++p) labels.onehot(state.sorted_order[p], c) = 1.0;
  }
  return {labels, state};
}

double joint_accuracy(const std::vector<int>& pred_s, const std::vector<int>& pred_d,
                      const std::vector<int>& true_s, const std::vector<int>& true_d) {
  const size_t n = pred_s.size();
  if (pred_d.size() != n || true_s.size() != n || true_d.size() != n)
    throw InternalError("joint_accuracy: vector length mismatch");
  if (n == 0) throw InternalError("joint_accuracy: empty input");
  long hits = 0;
  for (size_t k = 0; k < n; ++k)
    if (pred_s[k] == true_s[k] && pred_d[k] == true_d[k]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n);
}

std::vector<int> argmax_rows(const Mat& probs) {
  std::vector<int> out(probs.rows());
  for (int i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < probs.cols(); ++j)
      if (probs(i, j) > probs(i, best)) best = j;
    out[i] = best;
  }
  return out;
}

namespace {

// Rank-based one-vs-rest AUC with average ranks for ties.
double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n, 0.0);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (int p = i; p <= j; ++p) rank[order[p]] = avg;
    i = j + 1;
  }
  long n_pos = 0;
  double rank_sum = 0.0;
  for (int k = 0; k < n; ++k)
    if (positive[k]) {
      ++n_pos;
      rank_sum += rank[k];
    }
  long n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return -1.0;  // undefined
  return (rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

MetricsReport classification_metrics(const Mat& pred_probs, const LabelMatrix& labels) {
  const int n = static_cast<int>(pred_probs.rows());
  const int m = static_cast<int>(pred_probs.cols());
  if (labels.onehot.rows() != n || labels.onehot.cols() != m)
    throw InternalError("metrics: prediction/label shape mismatch");
  for (int i = 0; i < n; ++i) {
    if (std::abs(pred_probs.row(i).sum() - 1.0) > 1e-6)
      throw InternalError("metrics: prediction row " + std::to_string(i) + " does not sum to 1");
  }

  auto pred = argmax_rows(pred_probs);
  auto truth = labels.class_indices();

  MetricsReport report;
  long correct = 0;
  for (int i = 0; i < n; ++i)
    if (pred[i] == truth[i]) ++correct;
  report.accuracy = static_cast<double>(correct) / n;

  // Weighted F1 over classes present in the labels.
  double f1_sum = 0.0;
  for (int c = 0; c < m; ++c) {
    long tp = 0, fp = 0, fn = 0, support = 0;
    for (int i = 0; i < n; ++i) {
      bool is_true = truth[i] == c;
      bool is_pred = pred[i] == c;
      if (is_true) ++support;
      if (is_true && is_pred) ++tp;
      if (!is_true && is_pred) ++fp;
      if (is_true && !is_pred) ++fn;
    }
    if (support == 0) continue;  // zero weight
    double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    double recall = static_cast<double>(tp) / (tp + fn);
    double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    f1_sum += f1 * (static_cast<double>(support) / n);
  }
  report.weighted_f1 = f1_sum;

  // Class-frequency weighted one-vs-rest AUC; undefined classes are skipped
  // and the weights renormalized over the rest.
  double auc_sum = 0.0, weight_sum = 0.0;
  for (int c = 0; c < m; ++c) {
    std::vector<double> scores(n);
    std::vector<bool> positive(n);
    long support = 0;
    for (int i = 0; i < n; ++i) {
      scores[i] = pred_probs(i, c);
      positive[i] = truth[i] == c;
      if (positive[i]) ++support;
    }
    if (support == 0) continue;
    double auc = binary_auc(scores, positive);
    if (auc < 0.0) continue;  // no negatives for this class
    double w = static_cast<double>(support) / n;
    auc_sum += auc * w;
    weight_sum += w;
  }
  report.auc = weight_sum > 0.0 ? auc_sum / weight_sum : 0.0;
  return report;
}

std::string trend_class_name(int cls, int n_classes) {
  if (n_classes == 5) {
    static const char* names[5] = {"low", "medium-low", "medium", "medium-high", "high"};
    if (cls >= 0 && cls < 5) return names[cls];
  }
  return "class_" + std::to_string(cls);
}

void write_labels_csv(const std::filesystem::path& path, const LabelMatrix& supply,
                      const LabelMatrix& demand) {
  auto s = supply.class_indices();
  auto d = demand.class_indices();
  std::ostringstream out;
  out << "skill_id,view,class\n";
  for (size_t k = 0; k < s.size(); ++k) out << k << ",supply," << s[k] << '\n';
  for (size_t k = 0; k < d.size(); ++k) out << k << ",demand," << d[k] << '\n';
  atomic_write_file(path, out.str());
}

}  // namespace chgh
