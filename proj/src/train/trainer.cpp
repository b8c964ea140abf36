#include "chgh/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace chgh {

WindowSet make_windows(int n_steps, const ModelConfig& cfg) {
  WindowSet ws;
  ws.window_len = cfg.min_seq_len;
  const int first_target = ws.window_len;  // needs window_len steps of history
  const int n_targets = n_steps - first_target;
  if (n_targets < 3)
    throw UserError("not enough timesteps (" + std::to_string(n_steps) +
                    ") for train/validation/test windows of length " +
                    std::to_string(ws.window_len));
  int n_test = std::max(1, (n_targets + 9) / 10);
  int n_val = std::max(1, (n_targets + 9) / 10);
  int n_train = n_targets - n_val - n_test;
  if (n_train < 1) throw UserError("split leaves no training windows");
  for (int i = 0; i < n_targets; ++i) {
    int target = first_target + i;
    if (i < n_train) ws.train_targets.push_back(target);
    else if (i < n_train + n_val) ws.val_targets.push_back(target);
    else ws.test_targets.push_back(target);
  }
  return ws;
}

SkillSplit make_skill_split(int n_skills) {
  if (n_skills < 3) throw UserError("skill split needs at least 3 skills");
  SkillSplit s;
  s.n = n_skills;
  int n_test = std::max(1, n_skills / 10);
  int n_val = std::max(1, n_skills / 10);
  s.train_end = n_skills - n_val - n_test;
  s.val_end = s.train_end + n_val;
  if (s.train_end < 1) throw UserError("skill split leaves no training skills");
  return s;
}

WindowBatch make_batch(const CorpusData& data, int target, int window_len) {
  if (target < window_len || target >= data.n_steps())
    throw InternalError("window target out of range");
  WindowBatch batch;
  batch.demand = data.demand.values.middleCols(target - window_len, window_len);
  batch.supply = data.supply.values.middleCols(target - window_len, window_len);
  batch.gap = data.gap.values.middleCols(target - window_len, window_len);
  return batch;
}

std::pair<LabelMatrix, LabelMatrix> make_labels(const CorpusData& data, int target,
                                                int window_len, int n_classes) {
  Mat hist_d = data.demand.values.middleCols(target - window_len, window_len);
  Mat hist_s = data.supply.values.middleCols(target - window_len, window_len);
  auto [labels_d, state_d] =
      discretize_shares(hist_d, data.demand.values.col(target), n_classes, View::Demand);
  auto [labels_s, state_s] =
      discretize_shares(hist_s, data.supply.values.col(target), n_classes, View::Supply);
  (void)state_d;
  (void)state_s;
  return {labels_s, labels_d};
}

namespace {

LabelMatrix slice_labels(const LabelMatrix& labels, int row_begin, int row_count) {
  LabelMatrix out;
  out.view = labels.view;
  out.onehot = labels.onehot.middleRows(row_begin, row_count);
  return out;
}

struct PreparedWindow {
  WindowBatch batch;
  LabelMatrix labels_supply;
  LabelMatrix labels_demand;
};

std::vector<PreparedWindow> prepare(const CorpusData& data, const std::vector<int>& targets,
                                    int window_len, int n_classes) {
  std::vector<PreparedWindow> out;
  out.reserve(targets.size());
  for (int t : targets) {
    PreparedWindow w;
    w.batch = make_batch(data, t, window_len);
    auto [ls, ld] = make_labels(data, t, window_len, n_classes);
    w.labels_supply = ls;
    w.labels_demand = ld;
    out.push_back(std::move(w));
  }
  return out;
}

std::map<std::string, Mat> snapshot_params(const nn::ParamStore& store) {
  std::map<std::string, Mat> snap;
  for (const auto& p : store.all()) snap[p->name] = p->value;
  return snap;
}

void restore_params(nn::ParamStore& store, const std::map<std::string, Mat>& snap) {
  for (const auto& p : store.all()) {
    auto it = snap.find(p->name);
    if (it == snap.end()) throw InternalError("snapshot missing parameter " + p->name);
    p->value = it->second;
  }
}

EvalReport eval_windows(const Network& net, const std::vector<PreparedWindow>& windows,
                        int row_begin, int row_count) {
  if (windows.empty()) throw UserError("evaluation split is empty");
  const int m = net.config().n_classes;
  const int rows_per_window = row_count;
  Mat pool_pred_s(rows_per_window * windows.size(), m);
  Mat pool_pred_d(rows_per_window * windows.size(), m);
  Mat pool_true_s = Mat::Zero(rows_per_window * windows.size(), m);
  Mat pool_true_d = Mat::Zero(rows_per_window * windows.size(), m);
  long row = 0;
  for (const auto& w : windows) {
    nn::Graph g;
    ForwardResult fwd = net.forward(g, w.batch, /*training=*/false, nullptr);
    pool_pred_s.middleRows(row, row_count) =
        fwd.pred_supply.value().middleRows(row_begin, row_count);
    pool_pred_d.middleRows(row, row_count) =
        fwd.pred_demand.value().middleRows(row_begin, row_count);
    pool_true_s.middleRows(row, row_count) =
        w.labels_supply.onehot.middleRows(row_begin, row_count);
    pool_true_d.middleRows(row, row_count) =
        w.labels_demand.onehot.middleRows(row_begin, row_count);
    row += row_count;
  }
  LabelMatrix pooled_s{View::Supply, pool_true_s};
  LabelMatrix pooled_d{View::Demand, pool_true_d};
  EvalReport report;
  report.n_windows = static_cast<int>(windows.size());
  report.supply = classification_metrics(pool_pred_s, pooled_s);
  report.demand = classification_metrics(pool_pred_d, pooled_d);
  report.joint = joint_accuracy(argmax_rows(pool_pred_s), argmax_rows(pool_pred_d),
                                pooled_s.class_indices(), pooled_d.class_indices());
  report.supply.joint_accuracy = report.joint;
  report.demand.joint_accuracy = report.joint;
  if (report.joint > std::min(report.supply.accuracy, report.demand.accuracy) + 1e-12)
    throw InternalError("joint accuracy exceeded a per-view accuracy");
  return report;
}

}  // namespace

TrainResult train_model(Network& net, const CorpusData& data, std::ostream* log) {
  const ModelConfig& cfg = net.config();
  WindowSet ws = make_windows(data.n_steps(), cfg);
  SkillSplit skill_split{net.n_skills(), net.n_skills(), net.n_skills()};
  bool skill_mode = cfg.split_mode == SplitMode::Skill;
  if (skill_mode) skill_split = make_skill_split(net.n_skills());

  // In skill mode every window is usable for every phase; the rows differ.
  std::vector<int> train_targets = ws.train_targets;
  std::vector<int> val_targets = ws.val_targets;
  if (skill_mode) {
    train_targets.insert(train_targets.end(), ws.val_targets.begin(), ws.val_targets.end());
    train_targets.insert(train_targets.end(), ws.test_targets.begin(), ws.test_targets.end());
    val_targets = train_targets;
  }
  auto train_windows = prepare(data, train_targets, ws.window_len, cfg.n_classes);
  auto val_windows = prepare(data, val_targets, ws.window_len, cfg.n_classes);

  const int train_row_count = skill_mode ? skill_split.train_end : net.n_skills();
  const int val_row_begin = skill_mode ? skill_split.train_end : 0;
  const int val_row_count =
      skill_mode ? skill_split.val_end - skill_split.train_end : net.n_skills();

  nn::AdamOptimizer adam;
  Rng dropout_rng = Rng(cfg.seed).fork(0xd0);

  TrainResult result;
  std::map<std::string, Mat> best((snapshot_params(net.params())));
  int best_epoch = -1;
  double best_jacc = -1.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = cfg.learning_rate *
                std::pow(cfg.scheduler_factor, static_cast<double>(epoch / cfg.scheduler_step));
    // Full-batch step: gradients accumulate over every training window and
    // the optimizer moves once per epoch.
    bool diverged = false;
    net.params().zero_grad();
    for (const auto& w : train_windows) {
      nn::Graph g;
      try {
        ForwardResult fwd = net.forward(g, w.batch, /*training=*/true, &dropout_rng);
        LabelMatrix ls = skill_mode ? slice_labels(w.labels_supply, 0, train_row_count)
                                    : w.labels_supply;
        LabelMatrix ld = skill_mode ? slice_labels(w.labels_demand, 0, train_row_count)
                                    : w.labels_demand;
        LossResult loss;
        if (skill_mode) {
          ForwardResult masked = fwd;
          masked.pred_supply = g.rows(fwd.pred_supply, 0, train_row_count);
          masked.pred_demand = g.rows(fwd.pred_demand, 0, train_row_count);
          loss = net.loss(g, masked, ls, ld);
        } else {
          loss = net.loss(g, fwd, ls, ld);
        }
        net.backward(g, loss);
      } catch (const InternalError& e) {
        if (log) *log << "training diverged at epoch " << epoch << ": " << e.what() << "\n";
        diverged = true;
        break;
      }
    }
    if (diverged) {
      result.diverged = true;
      break;
    }
    net.params().scale_gradients(1.0 / static_cast<double>(train_windows.size()));
    adam.step(net.params(), lr);

    // Deterministic logging pass without dropout; pools train predictions
    // for accuracy reporting alongside the losses.
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    const int m = cfg.n_classes;
    Mat pool_pred_s(train_row_count * train_windows.size(), m);
    Mat pool_pred_d(train_row_count * train_windows.size(), m);
    Mat pool_true_s(train_row_count * train_windows.size(), m);
    Mat pool_true_d(train_row_count * train_windows.size(), m);
    long pool_row = 0;
    for (const auto& w : train_windows) {
      nn::Graph g;
      ForwardResult fwd = net.forward(g, w.batch, /*training=*/false, nullptr);
      LossResult loss;
      if (skill_mode) {
        ForwardResult masked = fwd;
        masked.pred_supply = g.rows(fwd.pred_supply, 0, train_row_count);
        masked.pred_demand = g.rows(fwd.pred_demand, 0, train_row_count);
        loss = net.loss(g, masked, slice_labels(w.labels_supply, 0, train_row_count),
                        slice_labels(w.labels_demand, 0, train_row_count));
      } else {
        loss = net.loss(g, fwd, w.labels_supply, w.labels_demand);
      }
      rec.train_main += loss.main;
      rec.train_cluster += loss.cluster;
      rec.train_total += loss.total;
      rec.train_l2 = loss.l2;  // identical across windows within the pass
      pool_pred_s.middleRows(pool_row, train_row_count) =
          fwd.pred_supply.value().topRows(train_row_count);
      pool_pred_d.middleRows(pool_row, train_row_count) =
          fwd.pred_demand.value().topRows(train_row_count);
      pool_true_s.middleRows(pool_row, train_row_count) =
          w.labels_supply.onehot.topRows(train_row_count);
      pool_true_d.middleRows(pool_row, train_row_count) =
          w.labels_demand.onehot.topRows(train_row_count);
      pool_row += train_row_count;
    }
    const double nw = static_cast<double>(train_windows.size());
    rec.train_main /= nw;
    rec.train_cluster /= nw;
    rec.train_total /= nw;
    {
      LabelMatrix pooled_s{View::Supply, pool_true_s};
      LabelMatrix pooled_d{View::Demand, pool_true_d};
      auto pred_s = argmax_rows(pool_pred_s);
      auto pred_d = argmax_rows(pool_pred_d);
      auto true_s = pooled_s.class_indices();
      auto true_d = pooled_d.class_indices();
      rec.train_jacc = joint_accuracy(pred_s, pred_d, true_s, true_d);
      long hit_s = 0, hit_d = 0;
      for (size_t i = 0; i < pred_s.size(); ++i) {
        if (pred_s[i] == true_s[i]) ++hit_s;
        if (pred_d[i] == true_d[i]) ++hit_d;
      }
      rec.train_acc_supply = static_cast<double>(hit_s) / pred_s.size();
      rec.train_acc_demand = static_cast<double>(hit_d) / pred_d.size();
    }

    EvalReport val = eval_windows(net, val_windows, val_row_begin, val_row_count);
    rec.val_jacc = val.joint;
    rec.val_acc_supply = val.supply.accuracy;
    rec.val_acc_demand = val.demand.accuracy;
    result.history.push_back(rec);
    result.final_epoch = epoch;

    if (val.joint > best_jacc) {
      best_jacc = val.joint;
      best_epoch = epoch;
      best = snapshot_params(net.params());
    }
    if (log && (epoch % 25 == 0 || epoch + 1 == cfg.epochs)) {
      *log << "epoch " << std::setw(4) << epoch << "  lr " << lr << "  train_total "
           << rec.train_total << "  val_jacc " << rec.val_jacc << "\n";
    }
    if (cfg.patience > 0 && epoch - best_epoch >= cfg.patience) {
      if (log) *log << "early stop at epoch " << epoch << " (best " << best_epoch << ")\n";
      break;
    }
  }

  restore_params(net.params(), best);
  result.best_epoch = best_epoch;
  result.best_val_jacc = best_jacc;
  return result;
}

EvalReport evaluate_model(const Network& net, const CorpusData& data,
                          const std::vector<int>& targets, int row_begin, int row_count) {
  if (row_count <= 0) {
    row_begin = 0;
    row_count = net.n_skills();
  }
  auto windows = prepare(data, targets, net.config().min_seq_len, net.config().n_classes);
  return eval_windows(net, windows, row_begin, row_count);
}

EvalReport evaluate_split(const Network& net, const CorpusData& data, const std::string& split) {
  const ModelConfig& cfg = net.config();
  WindowSet ws = make_windows(data.n_steps(), cfg);
  if (cfg.split_mode == SplitMode::Skill) {
    SkillSplit s = make_skill_split(net.n_skills());
    std::vector<int> all = ws.train_targets;
    all.insert(all.end(), ws.val_targets.begin(), ws.val_targets.end());
    all.insert(all.end(), ws.test_targets.begin(), ws.test_targets.end());
    if (split == "train") return evaluate_model(net, data, all, 0, s.train_end);
    if (split == "val")
      return evaluate_model(net, data, all, s.train_end, s.val_end - s.train_end);
    if (split == "test") return evaluate_model(net, data, all, s.val_end, s.n - s.val_end);
  } else {
    if (split == "train") return evaluate_model(net, data, ws.train_targets);
    if (split == "val") return evaluate_model(net, data, ws.val_targets);
    if (split == "test") return evaluate_model(net, data, ws.test_targets);
  }
  throw UserError("unknown split \"" + split + "\" (expected train|val|test)");
}

GradCheckReport gradient_check(Network& net, const WindowBatch& batch,
                               const LabelMatrix& labels_supply,
                               const LabelMatrix& labels_demand, double fd_step,
                               const std::string& corrupt_param) {
  auto loss_value = [&]() {
    nn::Graph g;
    ForwardResult fwd = net.forward(g, batch, /*training=*/false, nullptr);
    return net.loss(g, fwd, labels_supply, labels_demand).total;
  };

  // Analytic pass.
  net.params().zero_grad();
  {
    nn::Graph g;
    ForwardResult fwd = net.forward(g, batch, /*training=*/false, nullptr);
    LossResult loss = net.loss(g, fwd, labels_supply, labels_demand);
    net.backward(g, loss);
  }
  std::map<std::string, Mat> analytic;
  for (const auto& p : net.params().all()) analytic[p->name] = p->grad;
  if (!corrupt_param.empty()) {
    auto it = analytic.find(corrupt_param);
    if (it == analytic.end())
      throw UserError("gradient_check: no parameter named \"" + corrupt_param + "\"");
    it->second.array() += 0.05;
  }

  GradCheckReport report;
  for (const auto& p : net.params().all()) {
    const Mat& a = analytic[p->name];
    double worst = 0.0;
    for (long c = 0; c < p->value.cols(); ++c) {
      for (long r = 0; r < p->value.rows(); ++r) {
        const double saved = p->value(r, c);
        p->value(r, c) = saved + fd_step;
        double up = loss_value();
        p->value(r, c) = saved - fd_step;
        double down = loss_value();
        p->value(r, c) = saved;
        double numeric = (up - down) / (2.0 * fd_step);
        double denom = std::max({std::abs(a(r, c)), std::abs(numeric), 1e-6});
        double rel = std::abs(a(r, c) - numeric) / denom;
        worst = std::max(worst, rel);
      }
    }
    report.per_param.push_back({p->name, worst});
    if (worst > report.max_rel_error) {
      report.max_rel_error = worst;
      report.worst_param = p->name;
    }
  }
  return report;
}

std::vector<AblationRow> run_ablation(const CorpusData& data, const ModelConfig& base_cfg,
                                      int n_seeds, std::ostream* log) {
  if (n_seeds < 1) throw UserError("ablation needs at least one seed");
  const Variant ladder[] = {Variant::Static, Variant::Adaptive, Variant::Cge, Variant::Hge,
                            Variant::Full};
  std::vector<AblationRow> rows;
  for (Variant v : ladder) {
    AblationRow row;
    row.variant = v;
    for (int s = 0; s < n_seeds; ++s) {
      ModelConfig cfg = base_cfg;
      cfg.variant = v;
      cfg.seed = base_cfg.seed + static_cast<std::uint64_t>(s);
      Network net(cfg, data.n_skills(), data.fixed_adjacency());
      TrainResult tr = train_model(net, data, nullptr);
      EvalReport eval = evaluate_split(net, data, "test");
      row.acc += 0.5 * (eval.supply.accuracy + eval.demand.accuracy);
      row.f1 += 0.5 * (eval.supply.weighted_f1 + eval.demand.weighted_f1);
      row.auc += 0.5 * (eval.supply.auc + eval.demand.auc);
      row.jacc += eval.joint;
      row.seed_jacc.push_back(eval.joint);
      if (log)
        *log << variant_name(v) << " seed " << cfg.seed << ": test jacc " << eval.joint
             << " (best epoch " << tr.best_epoch << ")\n";
    }
    row.acc /= n_seeds;
    row.f1 /= n_seeds;
    row.auc /= n_seeds;
    row.jacc /= n_seeds;
    if (log)
      *log << variant_name(v) << ": mean test jacc " << row.jacc << "\n";
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "variant,acc,f1,auc,jacc\n";
  for (const auto& r : rows)
    out << variant_name(r.variant) << ',' << format_double(r.acc) << ',' << format_double(r.f1)
        << ',' << format_double(r.auc) << ',' << format_double(r.jacc) << '\n';
  atomic_write_file(path, out.str());
}

}  // namespace chgh
