#include "chgh/model/config.hpp"

#include <sstream>

namespace chgh {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Static: return "static";
    case Variant::Adaptive: return "adaptive";
    case Variant::Cge: return "cge";
    case Variant::Hge: return "hge";
    case Variant::Full: return "full";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "static") return Variant::Static;
  if (name == "adaptive") return Variant::Adaptive;
  if (name == "cge") return Variant::Cge;
  if (name == "hge") return Variant::Hge;
  if (name == "full") return Variant::Full;
  throw UserError("unknown variant \"" + name + "\" (expected static|adaptive|cge|hge|full)");
}

void ModelConfig::validate() const {
  if (d < 1) throw UserError("config: d must be positive");
  if (heads < 1 || d % heads != 0) throw UserError("config: heads must divide d");
  if (recurrent_layers < 1) throw UserError("config: recurrent_layers must be positive");
  if (min_seq_len < 2) throw UserError("config: min_seq_len must be at least 2");
  if (learning_rate < 0.0) throw UserError("config: learning_rate must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw UserError("config: dropout must be in [0, 1)");
  if (scheduler_step < 1) throw UserError("config: scheduler_step must be positive");
  if (scheduler_factor <= 0.0) throw UserError("config: scheduler_factor must be positive");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw UserError("config: lambda weights must be >= 0");
  if (delta < 0.0) throw UserError("config: delta must be >= 0");
  if (epsilon < 0.0 || epsilon >= 1.0) throw UserError("config: epsilon must be in [0, 1)");
  if (n_classes < 2) throw UserError("config: n_classes must be at least 2");
  if (epochs < 1) throw UserError("config: epochs must be positive");
  if (patience < 0) throw UserError("config: patience must be >= 0");
  if (phi_lr_multiplier <= 0.0) throw UserError("config: phi_lr_multiplier must be positive");
  if (clusters < 0) throw UserError("config: clusters must be >= 0 (0 = auto)");
}

int ModelConfig::resolve_clusters(int n_skills) const {
  if (clusters > 0) return clusters;
  return n_skills < 100 ? 8 : 100;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UserError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw UserError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    if (kv.count(key))
      throw UserError(origin + ":" + std::to_string(line_no) + ": duplicate key \"" + key + "\"");
    kv[key] = value;
  }
  return kv;
}

int to_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw UserError("config: key \"" + key + "\" expects an integer, got \"" + v + "\"");
  }
}

double to_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw UserError("config: key \"" + key + "\" expects a number, got \"" + v + "\"");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UserError("config: key \"" + key + "\" expects true/false, got \"" + v + "\"");
}

}  // namespace

ModelConfig config_from_map(const std::map<std::string, std::string>& kv,
                            const std::string& origin) {
  ModelConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "d") cfg.d = to_int(value, key);
    else if (key == "clusters") cfg.clusters = to_int(value, key);
    else if (key == "heads") cfg.heads = to_int(value, key);
    else if (key == "recurrent_layers") cfg.recurrent_layers = to_int(value, key);
    else if (key == "min_seq_len") cfg.min_seq_len = to_int(value, key);
    else if (key == "learning_rate") cfg.learning_rate = to_double(value, key);
    else if (key == "dropout") cfg.dropout = to_double(value, key);
    else if (key == "scheduler_step") cfg.scheduler_step = to_int(value, key);
    else if (key == "scheduler_factor") cfg.scheduler_factor = to_double(value, key);
    else if (key == "lambda1") cfg.lambda1 = to_double(value, key);
    else if (key == "lambda2") cfg.lambda2 = to_double(value, key);
    else if (key == "delta") cfg.delta = to_double(value, key);
    else if (key == "epsilon") cfg.epsilon = to_double(value, key);
    else if (key == "n_classes") cfg.n_classes = to_int(value, key);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "variant") cfg.variant = parse_variant(value);
    else if (key == "epochs") cfg.epochs = to_int(value, key);
    else if (key == "patience") cfg.patience = to_int(value, key);
    else if (key == "phi_lr_multiplier") cfg.phi_lr_multiplier = to_double(value, key);
    else if (key == "shared_embedding") cfg.shared_embedding = to_bool(value, key);
    else if (key == "split_mode") {
      if (value == "temporal") cfg.split_mode = SplitMode::Temporal;
      else if (value == "skill") cfg.split_mode = SplitMode::Skill;
      else throw UserError("config: split_mode expects temporal|skill, got \"" + value + "\"");
    } else {
      throw UserError(origin + ": unknown config key \"" + key + "\"");
    }
  }
  cfg.validate();
  return cfg;
}

ModelConfig parse_model_config(const std::string& text, const std::string& origin) {
  return config_from_map(parse_kv(text, origin), origin);
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  return parse_model_config(read_text_file(path), path.string());
}

std::map<std::string, std::string> config_to_map(const ModelConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["d"] = std::to_string(cfg.d);
  kv["clusters"] = std::to_string(cfg.clusters);
  kv["heads"] = std::to_string(cfg.heads);
  kv["recurrent_layers"] = std::to_string(cfg.recurrent_layers);
  kv["min_seq_len"] = std::to_string(cfg.min_seq_len);
  kv["learning_rate"] = format_double(cfg.learning_rate);
  kv["dropout"] = format_double(cfg.dropout);
  kv["scheduler_step"] = std::to_string(cfg.scheduler_step);
  kv["scheduler_factor"] = format_double(cfg.scheduler_factor);
  kv["lambda1"] = format_double(cfg.lambda1);
  kv["lambda2"] = format_double(cfg.lambda2);
  kv["delta"] = format_double(cfg.delta);
  kv["epsilon"] = format_double(cfg.epsilon);
  kv["n_classes"] = std::to_string(cfg.n_classes);
  kv["seed"] = std::to_string(cfg.seed);
  kv["variant"] = variant_name(cfg.variant);
  kv["epochs"] = std::to_string(cfg.epochs);
  kv["patience"] = std::to_string(cfg.patience);
  kv["phi_lr_multiplier"] = format_double(cfg.phi_lr_multiplier);
  kv["shared_embedding"] = cfg.shared_embedding ? "true" : "false";
  kv["split_mode"] = cfg.split_mode == SplitMode::Temporal ? "temporal" : "skill";
  return kv;
}

}  // namespace chgh
