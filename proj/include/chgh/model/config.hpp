#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "chgh/common.hpp"

namespace chgh {

// Ablation ladder. Each step keeps everything the previous one had.
enum class Variant { Static, Adaptive, Cge, Hge, Full };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

enum class SplitMode { Temporal, Skill };

struct ModelConfig {
  int d = 32;                // embedding / hidden width
  int clusters = 0;          // 0 = auto: 100, or 8 when the vocabulary is small
  int heads = 4;             // attention heads; must divide d
  int recurrent_layers = 3;
  int min_seq_len = 5;       // also the training window length
  double learning_rate = 1e-3;
  double dropout = 0.3;
  int scheduler_step = 50;
  double scheduler_factor = 0.1;
  double lambda1 = 1e-5;     // cluster loss weight
  double lambda2 = 1e-5;     // L2 weight
  double delta = 0.01;       // adjacency saturation threshold
  double epsilon = 0.1;      // co-occurrence graph threshold
  int n_classes = 5;
  std::uint64_t seed = 1;
  Variant variant = Variant::Full;

  int epochs = 500;
  int patience = 30;              // early stopping on validation joint accuracy
  double phi_lr_multiplier = 1.0; // hypernetwork-specific learning-rate scale
  bool shared_embedding = true;   // one embedding table for both views
  SplitMode split_mode = SplitMode::Temporal;

  void validate() const;
  int resolve_clusters(int n_skills) const;
};

// Flat "key = value" file, '#' comments. Unknown keys are errors.
ModelConfig load_model_config(const std::filesystem::path& path);
ModelConfig parse_model_config(const std::string& text, const std::string& origin);

std::map<std::string, std::string> config_to_map(const ModelConfig& cfg);
ModelConfig config_from_map(const std::map<std::string, std::string>& kv,
                            const std::string& origin);

}  // namespace chgh
