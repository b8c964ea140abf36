#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "chgh/train/trainer.hpp"

using namespace chgh;
namespace fs = std::filesystem;

namespace {

// A small in-memory corpus with planted structure worth fitting.
CorpusData in_memory_corpus(int n_skills, int n_steps, std::uint64_t seed) {
  Rng rng(seed);
  CorpusData data;
  for (int k = 0; k < n_skills; ++k) data.vocab.add("skill_" + std::to_string(k), 100);

  data.demand.view = View::Demand;
  data.supply.view = View::Supply;
  data.demand.values = Mat::Zero(n_skills, n_steps);
  data.supply.values = Mat::Zero(n_skills, n_steps);
  for (int k = 0; k < n_skills; ++k) {
    double base = rng.uniform(0.2, 0.5);
    double slope = rng.uniform(-0.01, 0.01);
    double phase = rng.uniform(0.0, 6.28);
    for (int t = 0; t < n_steps; ++t) {
      double v = base + slope * t + 0.05 * std::sin(0.5 * t + phase);
      data.demand.values(k, t) = std::min(0.95, std::max(0.05, v + rng.normal(0.0, 0.01)));
      data.supply.values(k, t) =
          std::min(0.95, std::max(0.05, v - 0.02 + rng.normal(0.0, 0.01)));
    }
  }
  data.gap = compute_skill_gap(data.demand, data.supply);

  auto random_graph = [&](View view) {
    SkillGraph g;
    g.view = view;
    g.n_skills = n_skills;
    g.epsilon = 0.1;
    for (int i = 0; i < n_skills; ++i) {
      g.edges.push_back({i, i, 1.0});
      for (int j = 0; j < n_skills; ++j)
        if (i != j && rng.bernoulli(0.25)) g.edges.push_back({i, j, rng.uniform(0.2, 0.9)});
    }
    return g;
  };
  data.graph_demand = random_graph(View::Demand);
  data.graph_supply = random_graph(View::Supply);
  return data;
}

ModelConfig tiny_train_config(std::uint64_t seed, int epochs) {
  ModelConfig cfg;
  cfg.d = 4;
  cfg.clusters = 3;
  cfg.heads = 2;
  cfg.recurrent_layers = 2;
  cfg.min_seq_len = 5;
  cfg.n_classes = 3;
  cfg.dropout = 0.3;
  cfg.epochs = epochs;
  cfg.patience = 0;  // run all epochs
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("window construction and temporal split") {
  ModelConfig cfg;
  cfg.min_seq_len = 5;
  WindowSet ws = make_windows(12, cfg);
  CHECK(ws.window_len == 5);
  // Targets 5..11; one validation and one test window at the end.
  CHECK(ws.train_targets == std::vector<int>({5, 6, 7, 8, 9}));
  CHECK(ws.val_targets == std::vector<int>({10}));
  CHECK(ws.test_targets == std::vector<int>({11}));

  WindowSet big = make_windows(24, cfg);
  CHECK(big.train_targets.size() == 15);
  CHECK(big.val_targets.size() == 2);
  CHECK(big.test_targets.size() == 2);
  CHECK(big.test_targets.back() == 23);

  CHECK_THROWS_AS(make_windows(7, cfg), UserError);
}

TEST_CASE("batch slices the right columns") {
  CorpusData data = in_memory_corpus(4, 12, 3);
  WindowBatch b = make_batch(data, 7, 5);
  CHECK(b.demand == data.demand.values.middleCols(2, 5));
  CHECK(b.gap == (data.demand.values.middleCols(2, 5) - data.supply.values.middleCols(2, 5)));
  auto [ls, ld] = make_labels(data, 7, 5, 3);
  CHECK(ls.onehot.rows() == 4);
  CHECK(ls.onehot.cols() == 3);
  for (int k = 0; k < 4; ++k) CHECK(ls.onehot.row(k).sum() == 1.0);
}

TEST_CASE("training is deterministic given the seed") {
  CorpusData data = in_memory_corpus(8, 12, 41);
  TrainResult r1, r2;
  {
    Network net(tiny_train_config(5, 6), 8, data.fixed_adjacency());
    r1 = train_model(net, data);
  }
  {
    Network net(tiny_train_config(5, 6), 8, data.fixed_adjacency());
    r2 = train_model(net, data);
  }
  REQUIRE(r1.history.size() == r2.history.size());
  for (size_t e = 0; e < r1.history.size(); ++e) {
    CHECK(r1.history[e].train_total == r2.history[e].train_total);
    CHECK(r1.history[e].val_jacc == r2.history[e].val_jacc);
  }

  Network net3(tiny_train_config(6, 6), 8, data.fixed_adjacency());
  TrainResult r3 = train_model(net3, data);
  bool differs = false;
  for (size_t e = 0; e < r1.history.size() && !differs; ++e)
    if (r1.history[e].train_total != r3.history[e].train_total) differs = true;
  CHECK(differs);
}

TEST_CASE("loss composition identity holds at every logged epoch") {
  CorpusData data = in_memory_corpus(6, 12, 7);
  ModelConfig cfg = tiny_train_config(2, 5);
  cfg.lambda1 = 0.03;
  cfg.lambda2 = 0.001;
  Network net(cfg, 6, data.fixed_adjacency());
  TrainResult r = train_model(net, data);
  REQUIRE(!r.history.empty());
  for (const auto& rec : r.history) {
    double recomposed =
        rec.train_main + cfg.lambda1 * rec.train_cluster + cfg.lambda2 * rec.train_l2;
    CHECK(rec.train_total == doctest::Approx(recomposed).epsilon(1e-12));
  }
}

TEST_CASE("zero learning rate is a no-op optimizer") {
  CorpusData data = in_memory_corpus(6, 12, 9);
  ModelConfig cfg = tiny_train_config(3, 3);
  cfg.learning_rate = 0.0;
  cfg.dropout = 0.0;
  Network net(cfg, 6, data.fixed_adjacency());
  std::map<std::string, Mat> before;
  for (const auto& p : net.params().all()) before[p->name] = p->value;
  train_model(net, data);
  for (const auto& p : net.params().all()) CHECK(p->value == before[p->name]);
}

TEST_CASE("evaluation reports are bounded and obey the joint-accuracy inequality") {
  CorpusData data = in_memory_corpus(8, 14, 11);
  ModelConfig cfg = tiny_train_config(4, 4);
  Network net(cfg, 8, data.fixed_adjacency());
  train_model(net, data);
  for (const char* split : {"train", "val", "test"}) {
    EvalReport eval = evaluate_split(net, data, split);
    for (double v : {eval.supply.accuracy, eval.supply.weighted_f1, eval.supply.auc,
                     eval.demand.accuracy, eval.demand.weighted_f1, eval.demand.auc,
                     eval.joint}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(eval.joint <= std::min(eval.supply.accuracy, eval.demand.accuracy) + 1e-12);
  }
  CHECK_THROWS_AS(evaluate_split(net, data, "bogus"), UserError);
}

TEST_CASE("checkpoint round-trip reproduces evaluation exactly") {
  fs::path dir = fs::temp_directory_path() / "chgh_ckpt_test";
  fs::remove_all(dir);
  CorpusData data = in_memory_corpus(8, 12, 13);
  ModelConfig cfg = tiny_train_config(7, 5);
  Network net(cfg, 8, data.fixed_adjacency());
  TrainResult result = train_model(net, data);
  EvalReport before = evaluate_split(net, data, "test");
  save_checkpoint(dir, net, result, "memory");

  auto loaded = load_checkpoint(dir, data);
  for (const auto& p : net.params().all())
    CHECK(p->value == loaded->params().find(p->name)->value);
  EvalReport after = evaluate_split(*loaded, data, "test");
  CHECK(before.supply.accuracy == after.supply.accuracy);
  CHECK(before.demand.accuracy == after.demand.accuracy);
  CHECK(before.supply.auc == after.supply.auc);
  CHECK(before.joint == after.joint);
  CHECK(checkpoint_data_dir(dir) == "memory");

  ModelConfig cfg_roundtrip = read_checkpoint_config(dir);
  CHECK(cfg_roundtrip.seed == cfg.seed);
  CHECK(cfg_roundtrip.learning_rate == cfg.learning_rate);
  CHECK(cfg_roundtrip.variant == cfg.variant);
}

TEST_CASE("gradient check passes on a tiny full model and fails when corrupted") {
  CorpusData data = in_memory_corpus(4, 11, 17);
  ModelConfig cfg = tiny_train_config(19, 1);
  cfg.dropout = 0.0;
  Network net(cfg, 4, data.fixed_adjacency());
  WindowBatch batch = make_batch(data, 6, 5);
  auto [ls, ld] = make_labels(data, 6, 5, cfg.n_classes);

  GradCheckReport report = gradient_check(net, batch, ls, ld);
  CAPTURE(report.worst_param);
  CHECK(report.max_rel_error < 1e-4);

  GradCheckReport corrupted = gradient_check(net, batch, ls, ld, 1e-5, "dec_s/w1");
  CHECK(corrupted.max_rel_error > 1e-2);
  CHECK_THROWS_AS(gradient_check(net, batch, ls, ld, 1e-5, "no/such/param"), UserError);
}

TEST_CASE("divergence aborts training and keeps the last good parameters") {
  CorpusData data = in_memory_corpus(6, 12, 23);
  ModelConfig cfg = tiny_train_config(29, 4);
  Network net(cfg, 6, data.fixed_adjacency());
  net.params().find("embed")->value(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainResult r = train_model(net, data);
  CHECK(r.diverged);
  // Restored snapshot is finite except for the injected entry's origin state.
  CHECK(r.history.empty());
}

TEST_CASE("skill-wise split mode trains and evaluates disjoint skill ranges") {
  CorpusData data = in_memory_corpus(10, 12, 27);
  ModelConfig cfg = tiny_train_config(31, 3);
  cfg.split_mode = SplitMode::Skill;
  Network net(cfg, 10, data.fixed_adjacency());
  TrainResult r = train_model(net, data);
  CHECK(!r.history.empty());
  EvalReport test = evaluate_split(net, data, "test");
  CHECK(test.joint >= 0.0);
  SkillSplit s = make_skill_split(10);
  CHECK(s.train_end == 8);
  CHECK(s.val_end == 9);
}

TEST_CASE("ablation runner covers the ladder and writes ordered CSV") {
  CorpusData data = in_memory_corpus(6, 12, 33);
  ModelConfig cfg = tiny_train_config(37, 2);
  auto rows = run_ablation(data, cfg, 1);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].variant == Variant::Static);
  CHECK(rows[4].variant == Variant::Full);
  for (const auto& r : rows) {
    CHECK(r.jacc >= 0.0);
    CHECK(r.jacc <= 1.0);
    CHECK(r.seed_jacc.size() == 1);
  }
  fs::path csv = fs::temp_directory_path() / "chgh_ablation_test.csv";
  write_ablation_csv(csv, rows);
  std::string text = read_text_file(csv);
  CHECK(text.find("variant,acc,f1,auc,jacc") == 0);
  CHECK(text.find("static,") != std::string::npos);
  CHECK(text.find("full,") != std::string::npos);
}
