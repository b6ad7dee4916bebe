#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <iostream>
#include <map>

#include "swtex/errors.hpp"
#include "swtex/version.hpp"
#include "swtex_cli/commands.hpp"

namespace swtex::cli {
namespace {

// A flag bound to a config key. Value flags carry their text in `value`;
// switches set the key to a fixed value.
struct Binding {
  CLI::Option* option;
  std::string key;
  std::string fixed;
  std::vector<std::string> values;
  bool is_list = false;
};

class Bindings {
 public:
  void value(CLI::App* app, const std::string& flag, const std::string& key,
             const std::string& help) {
    auto& b = add(key);
    b.option = app->add_option(flag, b.values.emplace_back(), help);
  }
  void list(CLI::App* app, const std::string& flag, const std::string& key,
            const std::string& help) {
    auto& b = add(key);
    b.is_list = true;
    b.option = app->add_option(flag, b.values, help)->delimiter(',');
  }
  void toggle(CLI::App* app, const std::string& flag, const std::string& key,
              const std::string& fixed, const std::string& help) {
    auto& b = add(key);
    b.fixed = fixed;
    b.option = app->add_flag(flag, help);
  }

  void apply(RunConfig& cfg) const {
    for (const auto& ptr : bindings_) {
      const Binding& b = *ptr;
      if (b.option->count() == 0) continue;
      if (!b.fixed.empty()) {
        set_config_value(cfg, b.key, b.fixed);
      } else if (b.is_list) {
        std::string joined;
        for (std::size_t i = 0; i < b.values.size(); ++i) joined += (i ? "," : "") + b.values[i];
        set_config_value(cfg, b.key, joined);
      } else {
        set_config_value(cfg, b.key, b.values.front());
      }
    }
  }

 private:
  Binding& add(const std::string& key) {
    bindings_.push_back(std::make_unique<Binding>());
    bindings_.back()->key = key;
    return *bindings_.back();
  }

  std::vector<std::unique_ptr<Binding>> bindings_;
};

void add_synthesis_flags(CLI::App* app, Bindings& b) {
  b.value(app, "--scales", "scales", "number of coarse scales K (default 1)");
  b.value(app, "--iters", "iters", "optimizer steps per scale (default 100)");
  b.value(app, "--lr", "learning_rate", "L-BFGS learning rate (default 1)");
  b.value(app, "--seed", "seed", "master seed (default: random, recorded in the manifest)");
  b.value(app, "--slices", "slices", "height-term directions: 16, 64, 256 or auto (H_l)");
  b.toggle(app, "--no-height-loss", "height_loss", "false", "drop the height term (SW baseline)");
  b.toggle(app, "--width-loss", "width_loss", "true", "add the experimental width term");
  b.value(app, "--lbfgs-history", "lbfgs_history", "L-BFGS memory (default 20)");
  b.value(app, "--matching", "matching", "strict or quantile sample matching");
  b.list(app, "--channel-layers", "channel_layers", "layers of the channel term");
  b.list(app, "--height-layers", "height_layers", "layers of the height term");
}

void add_backbone_flags(CLI::App* app, Bindings& b) {
  b.value(app, "--weights-path", "weights_path",
          std::string("backbone checkpoint (default $") + kWeightsDirEnv + "/" +
              kWeightsFileName + ")");
  b.value(app, "--weights-checksum", "weights_checksum", "expected checkpoint checksum");
}

void add_metric_flags(CLI::App* app, Bindings& b) {
  b.value(app, "--crop-count", "crop_count", "crops per image (default 64)");
  b.value(app, "--crop-size", "crop_size", "crop side in pixels (default 128)");
  b.value(app, "--metric-seed", "metric_seed", "crop offset seed (default 0)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Texture synthesis with sliced-Wasserstein feature losses"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, Bindings> bindings;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "flat key = value config or run manifest");
    return s;
  };

  CLI::App* synth = sub("synth", "synthesize one texture");
  {
    auto& b = bindings["synth"];
    b.value(synth, "--ref", "ref", "reference image (PNG/JPEG)");
    b.value(synth, "--out", "out", "output PNG");
    add_synthesis_flags(synth, b);
    add_backbone_flags(synth, b);
    b.toggle(synth, "--save-scales", "save_scales", "true", "also write every scale's result");
  }
  CLI::App* ablate = sub("ablate-slices", "runtime ablation over height slice counts");
  {
    auto& b = bindings["ablate-slices"];
    b.list(ablate, "--textures", "textures", "reference images");
    b.value(ablate, "--ref", "ref", "single reference image");
    b.value(ablate, "--out", "out", "output directory");
    b.value(ablate, "--runs", "runs", "runs per arm (default 5)");
    b.value(ablate, "--jobs", "jobs", "concurrent runs (default 1)");
    add_synthesis_flags(ablate, b);
    add_backbone_flags(ablate, b);
  }
  CLI::App* report = sub("report", "metric table and comparison grid");
  {
    auto& b = bindings["report"];
    b.value(report, "--dir", "dir", "directory with ref/, syn/ and optional baseline/");
    b.value(report, "--out", "out", "output directory (default <dir>/report)");
    b.toggle(report, "--ground-truth", "ground_truth", "true",
             "score the references against themselves with disjoint crops");
    b.value(report, "--embedding", "embedding", "filterbank or vgg");
    b.value(report, "--perceptual", "perceptual", "vgg or none");
    add_metric_flags(report, b);
    add_backbone_flags(report, b);
  }
  CLI::App* sweep = sub("multiscale-sweep", "synthesize at several K and compare");
  {
    auto& b = bindings["multiscale-sweep"];
    b.value(sweep, "--ref", "ref", "reference image");
    b.value(sweep, "--out", "out", "output directory");
    b.list(sweep, "--sweep-scales", "sweep_scales", "values of K (default 0,1,2)");
    b.value(sweep, "--jobs", "jobs", "concurrent runs (default 1)");
    add_synthesis_flags(sweep, b);
    add_backbone_flags(sweep, b);
    add_metric_flags(sweep, b);
  }
  std::string weights_out;
  std::uint64_t weights_seed = 0;
  CLI::App* make_weights = app.add_subcommand("make-weights", "write a random-weight backbone");
  make_weights->add_option("--out", weights_out, "checkpoint path")->required();
  make_weights->add_option("--seed", weights_seed, "weight seed (default 0)");

  std::vector<const char*> argv{"swtex"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (make_weights->parsed()) return cmd_make_weights(weights_out, weights_seed, out);
    for (auto& [name, b] : bindings) {
      CLI::App* s = app.get_subcommand(name);
      if (!s->parsed()) continue;
      RunConfig cfg;
      try {
        if (!config_path.empty()) cfg = load_config(config_path);
        b.apply(cfg);
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      if (name == "synth") return cmd_synth(cfg, out, err);
      if (name == "ablate-slices") return cmd_ablate_slices(cfg, out, err);
      if (name == "report") return cmd_report(cfg, out, err);
      return cmd_multiscale_sweep(cfg, out, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace swtex::cli
