#include <nlohmann/json.hpp>

#include "chgh/train/trainer.hpp"

namespace chgh {

using nlohmann::json;

namespace {
constexpr int kManifestVersion = 1;
}

void save_checkpoint(const std::filesystem::path& dir, const Network& net,
                     const TrainResult& result, const std::string& data_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  net.params().save(dir / "params.bin");

  json manifest;
  manifest["format_version"] = kManifestVersion;
  manifest["config"] = config_to_map(net.config());
  manifest["data_dir"] = data_dir;
  manifest["n_skills"] = net.n_skills();
  manifest["epoch"] = result.final_epoch;
  manifest["best_epoch"] = result.best_epoch;
  manifest["best_val_jacc"] = result.best_val_jacc;
  manifest["diverged"] = result.diverged;
  json history = json::array();
  for (const auto& rec : result.history) {
    history.push_back({{"epoch", rec.epoch},
                       {"lr", rec.lr},
                       {"train_main", rec.train_main},
                       {"train_cluster", rec.train_cluster},
                       {"train_l2", rec.train_l2},
                       {"train_total", rec.train_total},
                       {"train_jacc", rec.train_jacc},
                       {"train_acc_supply", rec.train_acc_supply},
                       {"train_acc_demand", rec.train_acc_demand},
                       {"val_jacc", rec.val_jacc},
                       {"val_acc_supply", rec.val_acc_supply},
                       {"val_acc_demand", rec.val_acc_demand}});
  }
  manifest["history"] = std::move(history);
  atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

ModelConfig read_checkpoint_config(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path))
    throw UserError("checkpoint manifest not found: " + manifest_path.string());
  json manifest = json::parse(read_text_file(manifest_path));
  if (manifest.value("format_version", 0) != kManifestVersion)
    throw UserError("unsupported checkpoint format in " + manifest_path.string());
  std::map<std::string, std::string> kv =
      manifest.at("config").get<std::map<std::string, std::string>>();
  return config_from_map(kv, manifest_path.string());
}

std::string checkpoint_data_dir(const std::filesystem::path& dir) {
  json manifest = json::parse(read_text_file(dir / "manifest.json"));
  return manifest.value("data_dir", std::string());
}

std::unique_ptr<Network> load_checkpoint(const std::filesystem::path& dir,
                                         const CorpusData& data) {
  ModelConfig cfg = read_checkpoint_config(dir);
  json manifest = json::parse(read_text_file(dir / "manifest.json"));
  int n_skills = manifest.at("n_skills").get<int>();
  if (n_skills != data.n_skills())
    throw UserError("checkpoint was trained on " + std::to_string(n_skills) +
                    " skills but the data directory has " + std::to_string(data.n_skills()));
  auto net = std::make_unique<Network>(cfg, n_skills, data.fixed_adjacency());
  net->params().load(dir / "params.bin");
  return net;
}

}  // namespace chgh
