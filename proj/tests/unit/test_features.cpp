#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "swtex/errors.hpp"
#include "swtex/features.hpp"

using namespace swtex;
using swtex::testing::TempDir;

namespace {

// VGG19 "E" configuration: conv widths with 'M' marking 2x2 max-pools.
const std::vector<int> kVgg19Config = {64,  64,  -1,  128, 128, -1,  256, 256, 256, 256, -1,
                                       512, 512, 512, 512, -1,  512, 512, 512, 512};

struct ConvShape {
  std::string tag;
  int block;
  int index;
  int width;
};

std::vector<ConvShape> oracle_convs() {
  std::vector<ConvShape> out;
  int block = 1, index = 0;
  for (int c : kVgg19Config) {
    if (c < 0) {
      ++block;
      index = 0;
      continue;
    }
    ++index;
    out.push_back({"conv" + std::to_string(block) + "_" + std::to_string(index), block, index, c});
  }
  return out;
}

Image random_image(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(h, w);
  for (auto& v : img.tensor().values()) v = u(rng);
  return img;
}

}  // namespace

TEST(LayerSelection, StandardCountsFollowPolicy) {
  int first_twelve = 0, first_two = 0;
  for (const auto& c : oracle_convs()) {
    if (first_twelve < 12) ++first_twelve;
    if (c.index <= 2) ++first_two;
  }
  const auto sel = LayerSelection::standard();
  EXPECT_EQ(static_cast<int>(sel.channel_layers.size()), first_twelve);
  EXPECT_EQ(static_cast<int>(sel.height_layers.size()), first_two);
  const auto convs = oracle_convs();
  for (int i = 0; i < 12; ++i) EXPECT_EQ(sel.channel_layers[i], convs[i].tag);
  EXPECT_EQ(sel.channel_layers.back(), "conv4_4");
  EXPECT_EQ(sel.height_layers.back(), "conv5_2");
}

TEST(LayerSelection, AllLayersIsDepthOrderedUnion) {
  const auto all = LayerSelection::standard().all_layers();
  EXPECT_EQ(all.size(), 14u);  // 12 channel layers + conv5_1, conv5_2
  EXPECT_EQ(all.front(), "conv1_1");
  EXPECT_EQ(all.back(), "conv5_2");
}

TEST(Vgg19, TopologyMatchesConfiguration) {
  const auto convs = oracle_convs();
  const auto& topo = vgg19_topology();
  ASSERT_EQ(topo.size(), convs.size());
  int in = 3;
  for (std::size_t i = 0; i < topo.size(); ++i) {
    EXPECT_EQ(topo[i].tag, convs[i].tag);
    EXPECT_EQ(topo[i].block, convs[i].block);
    EXPECT_EQ(topo[i].out_channels, convs[i].width);
    EXPECT_EQ(topo[i].in_channels, in);
    in = convs[i].width;
  }
}

TEST(LoadExtractor, ValidWeightsDefaultSelection) {
  const auto ex = load_extractor(swtex::testing::test_weights_file());
  EXPECT_EQ(ex.selection().channel_layers.size(), 12u);
  EXPECT_EQ(ex.selection().height_layers.size(), 10u);
  EXPECT_EQ(ex.weights_checksum().size(), 16u);
  EXPECT_EQ(ex.weights_checksum(), Vgg19::read(swtex::testing::test_weights_file()).checksum());
  EXPECT_EQ(ex.backbone_id(), "vgg19-random-he-seed" + std::to_string(swtex::testing::kBackboneSeed));
}

TEST(LoadExtractor, MissingFileIsIoError) {
  EXPECT_THROW(load_extractor("/nonexistent/vgg19.swtw"), IoError);
}

TEST(LoadExtractor, UnknownLayerIsConfigError) {
  LayerSelection sel = LayerSelection::standard();
  sel.height_layers.push_back("conv6_1");
  EXPECT_THROW(load_extractor(swtex::testing::test_weights_file(), sel), ConfigError);
  EXPECT_THROW(load_extractor(swtex::testing::test_weights_file(), LayerSelection{{}, {"conv1_1"}}),
               ConfigError);
}

TEST(LoadExtractor, ChecksumMismatchIsConfigError) {
  EXPECT_THROW(load_extractor(swtex::testing::test_weights_file(), LayerSelection::standard(),
                              std::string("0000000000000000")),
               ConfigError);
  EXPECT_NO_THROW(load_extractor(swtex::testing::test_weights_file(), LayerSelection::standard(),
                                 swtex::testing::test_backbone()->checksum()));
}

TEST(LoadExtractor, CorruptFilesAreConfigErrors) {
  TempDir dir;
  std::ifstream in(swtex::testing::test_weights_file(), std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const auto truncated = dir / "truncated.swtw";
  std::ofstream(truncated, std::ios::binary).write(bytes.data(), bytes.size() / 2);
  EXPECT_THROW(load_extractor(truncated), ConfigError);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  const auto magic = dir / "magic.swtw";
  std::ofstream(magic, std::ios::binary).write(bad_magic.data(), bad_magic.size());
  EXPECT_THROW(load_extractor(magic), ConfigError);

  auto trailing = bytes;
  trailing.push_back(0);
  const auto extra = dir / "extra.swtw";
  std::ofstream(extra, std::ios::binary).write(trailing.data(), trailing.size());
  EXPECT_THROW(load_extractor(extra), ConfigError);
}

TEST(Vgg19, WriteReadRoundTrip) {
  TempDir dir;
  const auto net = Vgg19::random_he(77);
  const std::string sum = net.write(dir / "a.swtw");
  const auto back = Vgg19::read(dir / "a.swtw");
  EXPECT_EQ(back.checksum(), sum);
  EXPECT_EQ(back.id(), net.id());
  EXPECT_EQ(back.write(dir / "b.swtw"), sum);
}

TEST(Extract, SpatialSizesFollowStrideSchedule) {
  const auto ex = swtex::testing::standard_extractor();
  const auto stack = ex.extract(random_image(256, 256, 1));
  for (const auto& c : oracle_convs()) {
    const auto* layer = stack.find(c.tag);
    if (layer == nullptr) continue;
    const int stride = 1 << (c.block - 1);
    EXPECT_EQ(layer->tensor.height(), 256 / stride) << c.tag;
    EXPECT_EQ(layer->tensor.width(), 256 / stride) << c.tag;
    EXPECT_EQ(layer->tensor.channels(), c.width) << c.tag;
  }
  EXPECT_EQ(stack.find("conv1_1")->tensor.shape_string(), "256x256x64");
  EXPECT_EQ(stack.find("conv4_1")->tensor.shape_string(), "32x32x512");
}

TEST(Extract, TagsEqualSelectionExactly) {
  const auto ex = swtex::testing::standard_extractor();
  const auto stack = ex.extract(random_image(64, 48, 2));
  std::vector<std::string> tags;
  for (const auto& l : stack.layers) tags.push_back(l.tag);
  EXPECT_EQ(tags, ex.selection().all_layers());
}

TEST(Extract, DeterministicAndPostRelu) {
  const auto ex = swtex::testing::standard_extractor();
  const Image img = random_image(40, 40, 3);
  const auto a = ex.extract(img);
  const auto b = ex.extract(img);
  ASSERT_EQ(a.layers.size(), b.layers.size());
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    EXPECT_TRUE(a.layers[i].tensor == b.layers[i].tensor);
    for (float v : a.layers[i].tensor.values()) ASSERT_GE(v, 0.0f);
  }
}

TEST(Extract, TooSmallNamesOffendingLayer) {
  const auto ex = swtex::testing::standard_extractor();
  try {
    ex.extract(random_image(24, 64, 4));
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("conv5_1"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(ex.extract(random_image(32, 32, 4)));
}

TEST(Preprocess, MeanImageMapsToZero) {
  const Normalization norm;
  Image img(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = norm.mean[c];
  const Tensor3f t = preprocess(img, norm);
  for (float v : t.values()) EXPECT_NEAR(v, 0.0f, 1e-6f);
}

TEST(Preprocess, InverseRoundTrip) {
  const Normalization norm;
  const Image img = random_image(8, 5, 5);
  const Image back = inverse_preprocess(preprocess(img, norm), norm);
  const auto a = img.tensor().values();
  const auto b = back.tensor().values();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-6f);
}

TEST(Preprocess, OutOfRangeIsClampedAndCounted) {
  const Normalization norm;
  Image img(2, 2, 0.5f);
  img.at(0, 0, 0) = 2.0f;
  img.at(1, 1, 2) = -0.5f;
  std::size_t clamped = 0;
  const Tensor3f t = preprocess(img, norm, &clamped);
  EXPECT_EQ(clamped, 2u);
  EXPECT_NEAR(t(0, 0, 0), (1.0f - norm.mean[0]) / norm.stddev[0], 1e-6f);
  EXPECT_NEAR(t(1, 1, 2), (0.0f - norm.mean[2]) / norm.stddev[2], 1e-6f);

  const auto ex = swtex::testing::shallow_extractor();
  Image big(16, 16, 0.5f);
  big.at(3, 3, 1) = 2.0f;
  ex.extract(big);
  EXPECT_EQ(ex.clamp_warnings(), 1u);
}

TEST(FeatureExtractor, BackwardMatchesFiniteDifferences) {
  // Linear functional of the features: L = sum_l <R_l, F_l(x)>.
  const auto ex = swtex::testing::shallow_extractor();
  std::mt19937_64 rng(6);
  std::normal_distribution<float> g(0.0f, 1.0f);
  Tensor3f x(8, 8, 3);
  for (auto& v : x.values()) v = g(rng);
  FeatureExtractor::Tape tape;
  const auto feats = ex.extract_normalized(x, &tape);
  FeatureStack<float> r = feats.zeros_like();
  for (auto& l : r.layers)
    for (auto& v : l.tensor.values()) v = g(rng);
  auto loss = [&](const Tensor3f& input) {
    const auto f = ex.extract_normalized(input);
    double s = 0.0;
    for (std::size_t l = 0; l < f.layers.size(); ++l) {
      const auto a = f.layers[l].tensor.values();
      const auto b = r.layers[l].tensor.values();
      for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    }
    return s;
  };
  const Tensor3f grad = ex.backward(tape, r, 8, 8);
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  const float h = 1e-2f;
  for (std::size_t i = 0; i < x.values().size(); i += 3) {
    Tensor3f p = x, m = x;
    p.values()[i] += h;
    m.values()[i] -= h;
    const double fd = (loss(p) - loss(m)) / (2.0 * h);
    const double an = grad.values()[i];
    dot += fd * an;
    n1 += fd * fd;
    n2 += an * an;
  }
  EXPECT_GT(dot / std::sqrt(n1 * n2), 0.999);
  EXPECT_NEAR(std::sqrt(n1), std::sqrt(n2), 0.02 * std::sqrt(n2));
}
