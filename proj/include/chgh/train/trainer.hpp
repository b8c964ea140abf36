#pragma once

// Training harness: sliding-window dataset construction, the optimization
// loop with step-decay scheduling and early stopping, pooled evaluation,
// finite-difference gradient checking and the ablation ladder.

#include <map>
#include <memory>
#include <ostream>

#include "chgh/model/network.hpp"
#include "chgh/pipeline.hpp"

namespace chgh {

// Prediction targets: every timestep with a full window of history before
// it. The temporal split assigns the earliest targets to training and the
// latest to test (forecasting must not leak future information).
struct WindowSet {
  int window_len = 0;
  std::vector<int> train_targets;
  std::vector<int> val_targets;
  std::vector<int> test_targets;
};

WindowSet make_windows(int n_steps, const ModelConfig& cfg);

// Contiguous skill-id ranges for the skill-wise split mode.
struct SkillSplit {
  int train_end = 0;
  int val_end = 0;
  int n = 0;
};

SkillSplit make_skill_split(int n_skills);

WindowBatch make_batch(const CorpusData& data, int target, int window_len);
std::pair<LabelMatrix, LabelMatrix> make_labels(const CorpusData& data, int target,
                                                int window_len, int n_classes);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_main = 0.0;
  double train_cluster = 0.0;
  double train_l2 = 0.0;
  double train_total = 0.0;
  double train_jacc = 0.0;
  double train_acc_supply = 0.0;
  double train_acc_demand = 0.0;
  double val_jacc = 0.0;
  double val_acc_supply = 0.0;
  double val_acc_demand = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_val_jacc = -1.0;
  int final_epoch = -1;
  bool diverged = false;
};

TrainResult train_model(Network& net, const CorpusData& data, std::ostream* log = nullptr);

struct EvalReport {
  MetricsReport supply;
  MetricsReport demand;
  double joint = 0.0;
  int n_windows = 0;
};

// Pools predictions over the given target steps and computes metrics once.
// Rows can be restricted (skill-split mode); row_count 0 means all skills.
EvalReport evaluate_model(const Network& net, const CorpusData& data,
                          const std::vector<int>& targets, int row_begin = 0, int row_count = 0);

EvalReport evaluate_split(const Network& net, const CorpusData& data, const std::string& split);

// --- checkpointing ---------------------------------------------------------

void save_checkpoint(const std::filesystem::path& dir, const Network& net,
                     const TrainResult& result, const std::string& data_dir = "");
std::string checkpoint_data_dir(const std::filesystem::path& dir);
ModelConfig read_checkpoint_config(const std::filesystem::path& dir);
std::unique_ptr<Network> load_checkpoint(const std::filesystem::path& dir,
                                         const CorpusData& data);

// --- gradient check ----------------------------------------------------------

struct GradCheckEntry {
  std::string param;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::vector<GradCheckEntry> per_param;
};

// Central differences with the given step against tape gradients, covering
// every parameter group. `corrupt_param` perturbs one analytic gradient to
// prove the check can fail.
GradCheckReport gradient_check(Network& net, const WindowBatch& batch,
                               const LabelMatrix& labels_supply,
                               const LabelMatrix& labels_demand, double fd_step = 1e-5,
                               const std::string& corrupt_param = "");

// --- ablation ----------------------------------------------------------------

struct AblationRow {
  Variant variant = Variant::Static;
  double acc = 0.0;   // mean of the two views, then over seeds
  double f1 = 0.0;
  double auc = 0.0;
  double jacc = 0.0;
  std::vector<double> seed_jacc;
};

// Trains every variant on the same data with the same seed set and reports
// seed-averaged test metrics in ladder order.
std::vector<AblationRow> run_ablation(const CorpusData& data, const ModelConfig& base_cfg,
                                      int n_seeds, std::ostream* log = nullptr);

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows);

}  // namespace chgh
