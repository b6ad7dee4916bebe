#include "swtex_cli/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "swtex/errors.hpp"

namespace swtex::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("config: bad value for " + key + ": '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_choice(const std::string& key, const std::string& value,
                  std::initializer_list<const char*> choices) {
  for (const char* c : choices) {
    if (value == c) return;
  }
  throw ConfigError("config: bad value for " + key + ": '" + value + "'");
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "ref") cfg.ref = value;
  else if (key == "out") cfg.out = value;
  else if (key == "scales") cfg.scales = parse_number<int>(key, value);
  else if (key == "iters") cfg.iterations = parse_number<int>(key, value);
  else if (key == "learning_rate") cfg.learning_rate = parse_number<double>(key, value);
  else if (key == "seed") {
    if (value.empty()) cfg.seed.reset();
    else cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "slices") {
    check_choice(key, value, {"16", "64", "256", "auto"});
    cfg.slices = value;
  } else if (key == "height_loss") cfg.height_loss = parse_bool(key, value);
  else if (key == "width_loss") cfg.width_loss = parse_bool(key, value);
  else if (key == "weights_path") cfg.weights_path = value;
  else if (key == "weights_checksum") cfg.weights_checksum = value;
  else if (key == "lbfgs_history") cfg.lbfgs_history = parse_number<int>(key, value);
  else if (key == "cache_reference") cfg.cache_reference = parse_bool(key, value);
  else if (key == "resample_directions") cfg.resample_directions = parse_bool(key, value);
  else if (key == "matching") {
    check_choice(key, value, {"strict", "quantile"});
    cfg.matching = value;
  } else if (key == "channel_layers") cfg.channel_layers = split_list(value);
  else if (key == "height_layers") cfg.height_layers = split_list(value);
  else if (key == "save_scales") cfg.save_scales = parse_bool(key, value);
  else if (key == "jobs") cfg.jobs = parse_number<int>(key, value);
  else if (key == "textures") cfg.textures = split_list(value);
  else if (key == "runs") cfg.runs = parse_number<int>(key, value);
  else if (key == "sweep_scales") {
    cfg.sweep_scales.clear();
    for (const auto& s : split_list(value)) cfg.sweep_scales.push_back(parse_number<int>(key, s));
  } else if (key == "dir") cfg.dir = value;
  else if (key == "crop_count") cfg.crop_count = parse_number<int>(key, value);
  else if (key == "crop_size") cfg.crop_size = parse_number<int>(key, value);
  else if (key == "metric_seed") cfg.metric_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "ground_truth") cfg.ground_truth = parse_bool(key, value);
  else if (key == "embedding") {
    check_choice(key, value, {"filterbank", "vgg"});
    cfg.embedding = value;
  } else if (key == "perceptual") {
    check_choice(key, value, {"vgg", "none"});
    cfg.perceptual = value;
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.starts_with("run.") || key.starts_with("output.") || key.starts_with("metric.")) {
      continue;
    }
    if (key.starts_with("config.")) key = key.substr(7);
    set_config_value(base, key, value);
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  kv("ref", cfg.ref);
  kv("out", cfg.out);
  kv("scales", std::to_string(cfg.scales));
  kv("iters", std::to_string(cfg.iterations));
  kv("learning_rate", format_double(cfg.learning_rate));
  kv("seed", cfg.seed ? std::to_string(*cfg.seed) : "");
  kv("slices", cfg.slices);
  kv("height_loss", b(cfg.height_loss));
  kv("width_loss", b(cfg.width_loss));
  kv("weights_path", cfg.weights_path);
  kv("weights_checksum", cfg.weights_checksum);
  kv("lbfgs_history", std::to_string(cfg.lbfgs_history));
  kv("cache_reference", b(cfg.cache_reference));
  kv("resample_directions", b(cfg.resample_directions));
  kv("matching", cfg.matching);
  kv("channel_layers", join(cfg.channel_layers));
  kv("height_layers", join(cfg.height_layers));
  kv("save_scales", b(cfg.save_scales));
  kv("jobs", std::to_string(cfg.jobs));
  kv("textures", join(cfg.textures));
  kv("runs", std::to_string(cfg.runs));
  std::vector<std::string> scales;
  for (int s : cfg.sweep_scales) scales.push_back(std::to_string(s));
  kv("sweep_scales", join(scales));
  kv("dir", cfg.dir);
  kv("crop_count", std::to_string(cfg.crop_count));
  kv("crop_size", std::to_string(cfg.crop_size));
  kv("metric_seed", std::to_string(cfg.metric_seed));
  kv("ground_truth", b(cfg.ground_truth));
  kv("embedding", cfg.embedding);
  kv("perceptual", cfg.perceptual);
  return os.str();
}

LayerSelection to_layer_selection(const RunConfig& cfg) {
  LayerSelection sel = LayerSelection::standard();
  if (!cfg.channel_layers.empty()) sel.channel_layers = cfg.channel_layers;
  if (!cfg.height_layers.empty()) sel.height_layers = cfg.height_layers;
  sel.validate();
  return sel;
}

SynthesisConfig to_synthesis_config(const RunConfig& cfg) {
  if (!cfg.seed) throw ConfigError("seed must be resolved before synthesis");
  const LayerSelection sel = to_layer_selection(cfg);
  SynthesisConfig s;
  s.scales = cfg.scales;
  s.iterations = cfg.iterations;
  s.learning_rate = cfg.learning_rate;
  s.weights = LossWeights::uniform(sel.channel_layers, sel.height_layers);
  if (cfg.slices != "auto") s.slices.height = std::stoi(cfg.slices);
  s.seed = *cfg.seed;
  s.width_term = cfg.width_loss;
  s.cache_reference_features = cfg.cache_reference;
  s.resample_directions = cfg.resample_directions;
  s.lbfgs_history = cfg.lbfgs_history;
  s.matching = cfg.matching == "quantile" ? SampleMatching::kQuantile : SampleMatching::kStrict;
  if (!cfg.height_loss) s.disable_height_term();
  return s;
}

std::filesystem::path resolve_weights_path(const RunConfig& cfg) {
  if (!cfg.weights_path.empty()) return cfg.weights_path;
  if (const char* dir = std::getenv(kWeightsDirEnv); dir != nullptr && *dir != '\0') {
    return std::filesystem::path(dir) / kWeightsFileName;
  }
  return {};
}

}  // namespace swtex::cli
