#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "swtex_cli/config.hpp"

namespace swtex::cli {

/// Bad invocation: reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Synthesizes `cfg.out` from `cfg.ref`; also writes <stem>.trace.txt and
/// <stem>.manifest.txt next to the output image.
int cmd_synth(RunConfig cfg, std::ostream& out, std::ostream& err);

/// Slice-count ablation over cfg.textures: arms 16, 64, 256, auto (H_l) and
/// none, cfg.runs runs each. Writes ablation.txt, ablation.csv and a manifest
/// into cfg.out.
int cmd_ablate_slices(RunConfig cfg, std::ostream& out, std::ostream& err);

/// Scores cfg.dir/{ref,syn[,baseline]} pairs matched by file stem. Writes
/// metrics.txt, metrics.csv, grid.png and a manifest into cfg.out.
int cmd_report(RunConfig cfg, std::ostream& out, std::ostream& err);

/// One synthesis per K in cfg.sweep_scales, with crop metrics and the
/// periodicity diagnostic. Writes sweep.txt, sweep.csv, images and a manifest
/// into cfg.out.
int cmd_multiscale_sweep(RunConfig cfg, std::ostream& out, std::ostream& err);

/// Writes a seeded random (He-initialized) backbone checkpoint.
int cmd_make_weights(const std::string& path, std::uint64_t seed, std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swtex::cli
