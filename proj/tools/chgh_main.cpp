// chgh: one binary for the whole pipeline.
//
//   synth         generate a synthetic labor-market corpus
//   build-corpus  turn JSONL corpora into shares, gaps and graphs
//   train         fit the model on a built corpus directory
//   eval          score a checkpoint on a split
//   ablate        run the variant ladder over several seeds
//   report        render share panels and a metrics table

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <typeinfo>

#include "chgh/report.hpp"
#include "chgh/synth.hpp"
#include "chgh/train/trainer.hpp"

namespace {

using namespace chgh;
using nlohmann::json;

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  MarketSpec spec = load_market_spec(spec_path);
  SyntheticMarket market = generate_market(spec);
  if (market.clipped_probabilities > 0)
    std::cerr << "warning: " << market.clipped_probabilities
              << " inclusion probabilities clipped to [0.01, 0.99]\n";
  write_market(out_dir, market, spec);
  std::cout << "wrote " << market.jd.size() << " job descriptions and " << market.we.size()
            << " work experiences to " << out_dir << "\n";
  return 0;
}

int cmd_build_corpus(const BuildCorpusOptions& options) {
  auto warnings = build_corpus(options);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "corpus artifacts written to " << options.out_dir.string() << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir) {
  ModelConfig cfg = load_model_config(config_path);
  CorpusData data = load_corpus_dir(data_dir);
  Network net(cfg, data.n_skills(), data.fixed_adjacency());
  std::cout << "training variant " << variant_name(cfg.variant) << " on " << data.n_skills()
            << " skills, " << data.n_steps() << " steps (" << net.params().total_size()
            << " parameters)\n";
  TrainResult result = train_model(net, data, &std::cout);
  save_checkpoint(out_dir, net, result, data_dir);
  std::cout << "checkpoint written to " << out_dir << " (best epoch " << result.best_epoch
            << ", val joint accuracy " << result.best_val_jacc << ")\n";
  return 0;
}

json eval_to_json(const EvalReport& eval) {
  json out;
  out["supply"] = {{"accuracy", eval.supply.accuracy},
                   {"weighted_f1", eval.supply.weighted_f1},
                   {"auc", eval.supply.auc}};
  out["demand"] = {{"accuracy", eval.demand.accuracy},
                   {"weighted_f1", eval.demand.weighted_f1},
                   {"auc", eval.demand.auc}};
  out["joint_accuracy"] = eval.joint;
  out["n_windows"] = eval.n_windows;
  return out;
}

int cmd_eval(const std::string& ckpt_dir, const std::string& split, std::string data_dir) {
  if (data_dir.empty()) data_dir = checkpoint_data_dir(ckpt_dir);
  if (data_dir.empty())
    throw UserError("checkpoint does not record a data directory; pass --data");
  CorpusData data = load_corpus_dir(data_dir);
  auto net = load_checkpoint(ckpt_dir, data);
  EvalReport eval = evaluate_split(*net, data, split);
  json out = eval_to_json(eval);
  std::cout << out.dump(2) << "\n";
  atomic_write_file(std::filesystem::path(ckpt_dir) / ("metrics_" + split + ".json"),
                    out.dump(2) + "\n");

  // Ground-truth labels for the split's most recent window.
  WindowSet ws = make_windows(data.n_steps(), net->config());
  const std::vector<int>& targets = split == "train"   ? ws.train_targets
                                    : split == "val"   ? ws.val_targets
                                                       : ws.test_targets;
  if (!targets.empty()) {
    auto [ls, ld] =
        make_labels(data, targets.back(), ws.window_len, net->config().n_classes);
    write_labels_csv(std::filesystem::path(ckpt_dir) / ("labels_" + split + ".csv"), ls, ld);
  }
  return 0;
}

int cmd_ablate(const std::string& data_dir, const std::string& out_dir, int seeds,
               const std::string& config_path) {
  ModelConfig cfg = config_path.empty() ? ModelConfig{} : load_model_config(config_path);
  CorpusData data = load_corpus_dir(data_dir);
  auto rows = run_ablation(data, cfg, seeds, &std::cout);
  std::filesystem::create_directories(out_dir);
  write_ablation_csv(std::filesystem::path(out_dir) / "ablation.csv", rows);

  json detail = json::array();
  for (const auto& r : rows)
    detail.push_back({{"variant", variant_name(r.variant)},
                      {"acc", r.acc},
                      {"f1", r.f1},
                      {"auc", r.auc},
                      {"jacc", r.jacc},
                      {"seed_jacc", r.seed_jacc}});
  atomic_write_file(std::filesystem::path(out_dir) / "ablation.json", detail.dump(2) + "\n");
  std::cout << "ablation results written to " << out_dir << "\n";
  return 0;
}

int cmd_report(const ReportRequest& request) {
  render_report(request, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skill demand-supply trend forecasting"};
  app.require_subcommand(1);

  // synth
  std::string synth_spec, synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--spec", synth_spec, "market spec file")->required();
  synth->add_option("--out", synth_out, "output directory")->required();

  // build-corpus
  BuildCorpusOptions build;
  auto* bc = app.add_subcommand("build-corpus", "quantify corpora into model inputs");
  bc->add_option("--jd", build.jd_path, "job description JSONL")->required();
  bc->add_option("--we", build.we_path, "work experience JSONL")->required();
  bc->add_option("--out", build.out_dir, "output directory")->required();
  bc->add_option("--epsilon", build.epsilon, "co-occurrence threshold (default 0.1)");
  bc->add_option("--min-count", build.min_count, "minimum skill occurrences (default 50)");
  bc->add_option("--train-end", build.train_end, "graphs use timesteps < train-end")->required();

  // train
  std::string train_config, train_data, train_out;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", train_config, "model config file")->required();
  train->add_option("--data", train_data, "corpus directory")->required();
  train->add_option("--out", train_out, "checkpoint directory")->required();

  // eval
  std::string eval_ckpt, eval_split = "test", eval_data;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--ckpt", eval_ckpt, "checkpoint directory")->required();
  eval->add_option("--split", eval_split, "train|val|test (default test)");
  eval->add_option("--data", eval_data, "corpus directory (defaults to the one trained on)");

  // ablate
  std::string ablate_data, ablate_out, ablate_config;
  int ablate_seeds = 5;
  auto* ablate = app.add_subcommand("ablate", "run the variant ladder");
  ablate->add_option("--data", ablate_data, "corpus directory")->required();
  ablate->add_option("--out", ablate_out, "output directory")->required();
  ablate->add_option("--seeds", ablate_seeds, "number of seeds (default 5)");
  ablate->add_option("--config", ablate_config, "base model config file");

  // report
  ReportRequest request;
  std::string report_skills, report_ablation;
  auto* report = app.add_subcommand("report", "render panels and a metrics table");
  report->add_option("--ckpt", request.checkpoint_dir, "checkpoint directory")->required();
  report->add_option("--data", request.data_dir, "corpus directory")->required();
  report->add_option("--skills", report_skills, "comma-separated skill names to plot");
  report->add_option("--image", request.image_path, "output image (.svg)");
  report->add_option("--table", request.table_path, "output metrics CSV")->required();
  report->add_option("--ablation", report_ablation, "ablation.csv to tabulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (*synth) return cmd_synth(synth_spec, synth_out);
    if (*bc) return cmd_build_corpus(build);
    if (*train) return cmd_train(train_config, train_data, train_out);
    if (*eval) return cmd_eval(eval_ckpt, eval_split, eval_data);
    if (*ablate) return cmd_ablate(ablate_data, ablate_out, ablate_seeds, ablate_config);
    if (*report) {
      if (!report_skills.empty())
        for (const auto& s : chgh::split(report_skills, ','))
          if (!trim(s).empty()) request.skills.push_back(trim(s));
      if (!request.skills.empty() && request.image_path.empty())
        throw UserError("--image is required when --skills is given");
      if (!report_ablation.empty()) request.ablation_csv = report_ablation;
      return cmd_report(request);
    }
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error [" << typeid(e).name() << "]: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
