#include <benchmark/benchmark.h>

#include <random>

#include "swtex/features.hpp"
#include "swtex/sw_loss.hpp"
#include "swtex/vgg.hpp"

using namespace swtex;

namespace {

template <typename T>
Tensor3<T> noise_tensor(int h, int w, int c, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<T> nd;
  Tensor3<T> t(h, w, c);
  for (T& v : t.values()) v = nd(rng);
  return t;
}

Image noise_image(int size, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(size, size);
  for (float& v : img.tensor().values()) v = u(rng);
  return img;
}

const FeatureExtractor& extractor() {
  static const FeatureExtractor ex(std::make_shared<const Vgg19>(Vgg19::random_he(1)),
                                   LayerSelection::standard());
  return ex;
}

}  // namespace

static void BM_Sw1d(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  std::normal_distribution<float> nd;
  std::vector<float> p(n), q(n);
  for (int i = 0; i < n; ++i) p[i] = nd(rng), q[i] = nd(rng);
  for (auto _ : state) benchmark::DoNotOptimize(sw1d<float>(p, q));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Sw1d)->RangeMultiplier(8)->Range(64, 1 << 18);

static void BM_ProjectChannelwise(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0)), channels = static_cast<int>(state.range(1));
  const auto f = noise_tensor<float>(size, size, channels, 2);
  Rng rng(3);
  const auto dirs = sample_directions<float>(channels, channels, rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_channelwise(f, dirs));
}
BENCHMARK(BM_ProjectChannelwise)->Args({128, 64})->Args({64, 128})->Args({32, 256});

static void BM_ProjectHeightwise(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0)), channels = static_cast<int>(state.range(1));
  const auto f = noise_tensor<float>(size, size, channels, 2);
  Rng rng(3);
  const auto dirs = sample_directions<float>(size, size, rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_heightwise(f, dirs));
}
BENCHMARK(BM_ProjectHeightwise)->Args({128, 64})->Args({64, 128})->Args({32, 256});

static void BM_VggForward(benchmark::State& state) {
  const Image img = noise_image(static_cast<int>(state.range(0)), 4);
  const FeatureExtractor& ex = extractor();
  for (auto _ : state) benchmark::DoNotOptimize(ex.extract(img));
}
BENCHMARK(BM_VggForward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_SlicingLoss(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto ref = extractor().extract(noise_image(size, 5));
  const auto cand = extractor().extract(noise_image(size, 6));
  const auto sel = LayerSelection::standard();
  Rng rng(7);
  const auto dirs = draw_directions(ref, LossWeights::uniform(sel.channel_layers, sel.height_layers),
                                    SliceCounts{}, rng);
  const SortedTarget<float> target(ref, dirs);
  FeatureStack<float> grad;
  for (auto _ : state) benchmark::DoNotOptimize(target.evaluate(cand, &grad));
}
BENCHMARK(BM_SlicingLoss)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
