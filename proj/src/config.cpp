#include "ndr/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace ndr {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <class T>
void read(const json& obj, const std::string& where, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string path = where.empty() ? std::string(key) : where + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError("config: '" + path + "' must be a boolean");
    dst = v.get<bool>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError("config: '" + path + "' must be a number");
    dst = v.get<T>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_unsigned()) throw ConfigError("config: '" + path + "' must be a non-negative integer");
    dst = v.get<T>();
  } else {
    if (!v.is_string()) throw ConfigError("config: '" + path + "' must be a string");
    dst = v.get<std::string>();
  }
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

RunConfig::RunConfig() {
  dataset.count = 256;
  dataset.size = 32;
  dataset.mixture = {1.0, 1.0, 1.0, 0.0};
  dataset.noise_sigmas = {25.0};
  set_seed(0);
}

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  train.model.seed = s;
  dataset.seed = s;
}

void RunConfig::validate() const {
  train.validate();
  dataset.validate();
  if (dataset_dir.empty() && train.crop_size > dataset.size) {
    throw ConfigError("config: train.crop_size exceeds dataset.size");
  }
}

json RunConfig::to_json() const {
  const auto& t = train;
  const auto& m = train.model;
  return {
      {"seed", seed},
      {"train",
       {{"lambda", t.lambda},
        {"lr", t.lr},
        {"batch_size", t.batch_size},
        {"crop_size", t.crop_size},
        {"steps", t.steps},
        {"weight_decay", t.weight_decay},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"eps", t.eps},
        {"alt_steps", t.alt_steps},
        {"detach_degradation", t.detach_degradation},
        {"eval_every", t.eval_every},
        {"eval_per_kind", t.eval_per_kind},
        {"checkpoint_every", t.checkpoint_every}}},
      {"model",
       {{"channels", m.channels},
        {"scales", m.scales},
        {"M", m.feature_dim},
        {"N", m.slots},
        {"K", m.rank},
        {"variant", to_string(m.variant)}}},
      {"dataset",
       {{"count", dataset.count},
        {"size", dataset.size},
        {"seed", dataset.seed},
        {"dir", dataset_dir.string()},
        {"noise_sigmas", dataset.noise_sigmas},
        {"mixture",
         {{"noise", dataset.mixture[0]},
          {"rain", dataset.mixture[1]},
          {"haze", dataset.mixture[2]},
          {"downsample", dataset.mixture[3]}}}}},
      {"output", {{"dir", output_dir.string()}}},
  };
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: malformed JSON at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  RunConfig cfg;
  reject_unknown(root, "", {"seed", "train", "model", "dataset", "output"});
  if (root.contains("seed")) {
    std::uint64_t s = 0;
    read(root, "", "seed", s);
    cfg.set_seed(s);
  }
  if (root.contains("train")) {
    const json& t = root.at("train");
    reject_unknown(t, "train",
                   {"lambda", "lr", "batch_size", "crop_size", "steps", "weight_decay", "beta1", "beta2", "eps",
                    "alt_steps", "detach_degradation", "eval_every", "eval_per_kind", "checkpoint_every"});
    auto& d = cfg.train;
    read(t, "train", "lambda", d.lambda);
    read(t, "train", "lr", d.lr);
    read(t, "train", "batch_size", d.batch_size);
    read(t, "train", "crop_size", d.crop_size);
    read(t, "train", "steps", d.steps);
    read(t, "train", "weight_decay", d.weight_decay);
    read(t, "train", "beta1", d.beta1);
    read(t, "train", "beta2", d.beta2);
    read(t, "train", "eps", d.eps);
    read(t, "train", "alt_steps", d.alt_steps);
    read(t, "train", "detach_degradation", d.detach_degradation);
    read(t, "train", "eval_every", d.eval_every);
    read(t, "train", "eval_per_kind", d.eval_per_kind);
    read(t, "train", "checkpoint_every", d.checkpoint_every);
  }
  if (root.contains("model")) {
    const json& m = root.at("model");
    reject_unknown(m, "model", {"channels", "scales", "M", "N", "K", "variant"});
    auto& d = cfg.train.model;
    read(m, "model", "channels", d.channels);
    read(m, "model", "scales", d.scales);
    read(m, "model", "M", d.feature_dim);
    read(m, "model", "N", d.slots);
    read(m, "model", "K", d.rank);
    std::string variant = to_string(d.variant);
    read(m, "model", "variant", variant);
    try {
      d.variant = parse_variant(variant);
    } catch (const Error& e) {
      throw ConfigError(std::string("config: 'model.variant': ") + e.what());
    }
  }
  if (root.contains("dataset")) {
    const json& s = root.at("dataset");
    reject_unknown(s, "dataset", {"count", "size", "seed", "dir", "noise_sigmas", "mixture"});
    auto& d = cfg.dataset;
    read(s, "dataset", "count", d.count);
    read(s, "dataset", "size", d.size);
    read(s, "dataset", "seed", d.seed);
    std::string dir;
    read(s, "dataset", "dir", dir);
    cfg.dataset_dir = dir;
    if (s.contains("noise_sigmas")) {
      const json& v = s.at("noise_sigmas");
      if (!v.is_array() || v.empty() || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
        throw ConfigError("config: 'dataset.noise_sigmas' must be a non-empty array of numbers");
      }
      d.noise_sigmas = v.get<std::vector<double>>();
    }
    if (s.contains("mixture")) {
      const json& mix = s.at("mixture");
      reject_unknown(mix, "dataset.mixture", {"noise", "rain", "haze", "downsample"});
      for (DegradationKind k : kAllKinds) {
        const std::string name = to_string(k);
        read(mix, "dataset.mixture", name.c_str(), d.mixture[static_cast<std::size_t>(k)]);
      }
    }
  }
  if (root.contains("output")) {
    const json& o = root.at("output");
    reject_unknown(o, "output", {"dir"});
    std::string dir = cfg.output_dir.string();
    read(o, "output", "dir", dir);
    cfg.output_dir = dir;
  }
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace ndr
