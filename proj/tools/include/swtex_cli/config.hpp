#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swtex/synthesis.hpp"

namespace swtex::cli {

/// Everything a command needs, as read from a flat `key = value` file and
/// then overridden by flags. Unset optionals mean "use the default".
struct RunConfig {
  std::string ref;
  std::string out;
  int scales = 1;
  int iterations = 100;
  double learning_rate = 1.0;
  std::optional<std::uint64_t> seed;
  std::string slices = "auto";  // 16 | 64 | 256 | auto
  bool height_loss = true;
  bool width_loss = false;
  std::string weights_path;
  std::string weights_checksum;
  int lbfgs_history = 20;
  bool cache_reference = true;
  bool resample_directions = true;
  std::string matching = "strict";  // strict | quantile
  std::vector<std::string> channel_layers;
  std::vector<std::string> height_layers;
  bool save_scales = false;
  int jobs = 1;

  // ablate-slices
  std::vector<std::string> textures;
  int runs = 5;

  // multiscale-sweep
  std::vector<int> sweep_scales{0, 1, 2};

  // report / metrics
  std::string dir;
  int crop_count = 64;
  int crop_size = 128;
  std::uint64_t metric_seed = 0;
  bool ground_truth = false;
  std::string embedding = "filterbank";  // filterbank | vgg
  std::string perceptual = "vgg";        // vgg | none

  bool operator==(const RunConfig&) const = default;
};

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped. Keys may carry a "config." prefix (manifest files); keys in the
/// "run.", "output." and "metric." namespaces are ignored so a manifest can be
/// replayed. Unknown keys and malformed values throw ConfigError.
RunConfig parse_config(std::string_view text, RunConfig base = {});

RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// One `key = value` line per field, in a fixed order.
std::string serialize_config(const RunConfig& cfg);

/// Applies one key to `cfg`; ConfigError on unknown key or bad value.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Core synthesis settings implied by `cfg` (seed must be resolved).
SynthesisConfig to_synthesis_config(const RunConfig& cfg);

/// Layer selection implied by `cfg` (standard lists when unset).
LayerSelection to_layer_selection(const RunConfig& cfg);

/// --weights-path, else $SWTEX_WEIGHTS_DIR/vgg19.swtw, else empty.
std::filesystem::path resolve_weights_path(const RunConfig& cfg);

inline constexpr const char* kWeightsDirEnv = "SWTEX_WEIGHTS_DIR";
inline constexpr const char* kWeightsFileName = "vgg19.swtw";

}  // namespace swtex::cli
