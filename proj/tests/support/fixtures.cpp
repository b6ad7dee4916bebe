#include "fixtures.hpp"

#include <atomic>
#include <mutex>
#include <random>
#include <unistd.h>

namespace swtex::testing {

std::shared_ptr<const Vgg19> test_backbone() {
  static const std::shared_ptr<const Vgg19> net =
      std::make_shared<const Vgg19>(Vgg19::random_he(kBackboneSeed));
  return net;
}

const std::filesystem::path& test_weights_file() {
  static TempDir dir("swtex-weights");
  static const std::filesystem::path path = [] {
    const auto p = dir / "vgg19.swtw";
    test_backbone()->write(p);
    return p;
  }();
  return path;
}

LayerSelection shallow_selection() {
  return LayerSelection{{"conv1_1", "conv2_1"}, {"conv1_1", "conv2_1"}};
}

FeatureExtractor standard_extractor() {
  return FeatureExtractor(test_backbone(), LayerSelection::standard());
}

FeatureExtractor shallow_extractor() {
  return FeatureExtractor(test_backbone(), shallow_selection());
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
           std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace swtex::testing
