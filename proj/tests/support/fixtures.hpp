#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "swtex/features.hpp"
#include "swtex/vgg.hpp"

namespace swtex::testing {

inline constexpr std::uint64_t kBackboneSeed = 2024;

/// Seeded random-weight VGG19 shared by every test in the process.
std::shared_ptr<const Vgg19> test_backbone();

/// The same backbone written to a checkpoint file in a per-process temp dir.
const std::filesystem::path& test_weights_file();

/// Cheap selection for tests that only need a few shallow layers.
LayerSelection shallow_selection();

FeatureExtractor standard_extractor();
FeatureExtractor shallow_extractor();

/// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "swtex-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace swtex::testing
