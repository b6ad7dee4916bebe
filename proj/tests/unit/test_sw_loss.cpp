#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "swtex/errors.hpp"
#include "swtex/sw_loss.hpp"

using namespace swtex;
using swtex::testing::brute_force_w2;
using swtex::testing::sorting_w2;

namespace {

Tensor3d random_tensor(int h, int w, int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor3d t(h, w, n);
  for (double& v : t.values()) v = g(rng);
  return t;
}

FeatureStack<double> single(const std::string& tag, Tensor3d t) {
  FeatureStack<double> s;
  s.layers.push_back({tag, std::move(t)});
  return s;
}

double row_norm(const DirectionSet<double>& d, int r) {
  double s = 0.0;
  for (double v : d.row(r)) s += v * v;
  return std::sqrt(s);
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(SampleDirections, OneDimensionalIsPlusOrMinusOne) {
  Rng rng(5);
  const auto d = sample_directions<double>(1, 1, rng);
  ASSERT_EQ(d.vectors.size(), 1u);
  EXPECT_NEAR(std::abs(d.vectors[0]), 1.0, 1e-15);
}

TEST(SampleDirections, RowsAreUnitLength) {
  Rng rng(0);
  const auto d = sample_directions<double>(64, 64, rng);
  for (int r = 0; r < 64; ++r) EXPECT_NEAR(row_norm(d, r), 1.0, 1e-6);
}

TEST(SampleDirections, IsotropicMean) {
  Rng rng(1);
  const auto d = sample_directions<double>(10000, 2, rng);
  double mx = 0.0, my = 0.0;
  for (int r = 0; r < d.count; ++r) {
    mx += d.row(r)[0];
    my += d.row(r)[1];
  }
  EXPECT_LT(std::hypot(mx / d.count, my / d.count), 0.05);
}

TEST(SampleDirections, DeterministicForSeed) {
  Rng a(9), b(9);
  EXPECT_EQ(sample_directions<double>(8, 5, a).vectors, sample_directions<double>(8, 5, b).vectors);
}

TEST(SampleDirections, RejectsZeroSizes) {
  Rng rng(0);
  EXPECT_THROW(sample_directions<double>(0, 3, rng), InvalidArgument);
  EXPECT_THROW(sample_directions<double>(3, 0, rng), InvalidArgument);
}

TEST(ProjectChannelwise, ZerosProjectToZero) {
  Rng rng(2);
  const auto dirs = sample_directions<double>(4, 3, rng);
  const auto p = project_channelwise(Tensor3d(2, 2, 3), dirs);
  for (double v : p.values) EXPECT_EQ(v, 0.0);
}

TEST(ProjectChannelwise, HandDotProduct) {
  Tensor3d f(1, 1, 2);
  f(0, 0, 0) = 3.0;
  f(0, 0, 1) = 4.0;
  DirectionSet<double> dirs{2, 1, {0.6, 0.8}};
  const auto p = project_channelwise(f, dirs);
  ASSERT_EQ(p.samples, 1);
  EXPECT_NEAR(p.values[0], 5.0, 1e-12);
}

TEST(ProjectChannelwise, BasisReproducesChannels) {
  Rng rng(3);
  const Tensor3d f = random_tensor(4, 4, 8, rng);
  DirectionSet<double> basis{8, 8, std::vector<double>(64, 0.0)};
  for (int i = 0; i < 8; ++i) basis.vectors[i * 8 + i] = 1.0;
  const auto p = project_channelwise(f, basis);
  for (int c = 0; c < 8; ++c) {
    for (int m = 0; m < 16; ++m) EXPECT_EQ(p.row(c)[m], f(m / 4, m % 4, c));
  }
}

TEST(ProjectChannelwise, MatchesLoopOracle) {
  Rng rng(4);
  const Tensor3d f = random_tensor(3, 5, 6, rng);
  const auto dirs = sample_directions<double>(7, 6, rng);
  const auto p = project_channelwise(f, dirs);
  for (int d = 0; d < dirs.count; ++d) {
    const auto expected = swtex::testing::loop_project_channels(f, to_vec(dirs.row(d)));
    for (int m = 0; m < p.samples; ++m) EXPECT_NEAR(p.row(d)[m], expected[m], 1e-12);
  }
}

TEST(ProjectChannelwise, DimensionMismatchThrows) {
  Rng rng(0);
  EXPECT_THROW(project_channelwise(Tensor3d(2, 2, 3), sample_directions<double>(2, 4, rng)),
               InvalidArgument);
}

TEST(ProjectHeightwise, ZerosProjectToZero) {
  Rng rng(2);
  const auto p = project_heightwise(Tensor3d(3, 2, 2), sample_directions<double>(3, 3, rng));
  EXPECT_EQ(p.samples, 4);
  for (double v : p.values) EXPECT_EQ(v, 0.0);
}

TEST(ProjectHeightwise, BasisPicksFirstRow) {
  Tensor3d f(2, 1, 1);
  f(0, 0, 0) = 1.25;
  f(1, 0, 0) = -7.0;
  DirectionSet<double> dirs{2, 1, {1.0, 0.0}};
  const auto p = project_heightwise(f, dirs);
  ASSERT_EQ(p.values.size(), 1u);
  EXPECT_EQ(p.values[0], 1.25);
}

TEST(ProjectHeightwise, EqualsChannelProjectionOfPermutedTensor) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor3d f = random_tensor(4, 3, 2, rng);
    const auto dirs = sample_directions<double>(5, 4, rng);
    const auto ph = project_heightwise(f, dirs);
    const auto pc = project_channelwise(swtex::testing::height_last(f), dirs);
    ASSERT_EQ(ph.samples, pc.samples);
    for (std::size_t i = 0; i < ph.values.size(); ++i) {
      EXPECT_NEAR(ph.values[i], pc.values[i], 1e-14);
    }
  }
}

TEST(ProjectHeightwise, DimensionMismatchThrows) {
  Rng rng(0);
  EXPECT_THROW(project_heightwise(Tensor3d(3, 2, 2), sample_directions<double>(2, 2, rng)),
               InvalidArgument);
}

TEST(ProjectWidthwise, EqualsChannelProjectionOfWidthLastTensor) {
  Rng rng(7);
  const Tensor3d f = random_tensor(3, 4, 2, rng);
  const auto dirs = sample_directions<double>(3, 4, rng);
  Tensor3d t(3, 2, 4);
  for (int h = 0; h < 3; ++h)
    for (int w = 0; w < 4; ++w)
      for (int n = 0; n < 2; ++n) t(h, n, w) = f(h, w, n);
  const auto pw = project_widthwise(f, dirs);
  const auto pc = project_channelwise(t, dirs);
  for (std::size_t i = 0; i < pw.values.size(); ++i) EXPECT_NEAR(pw.values[i], pc.values[i], 1e-14);
}

TEST(Sw1d, IdenticalVectorsGiveZero) {
  const std::vector<double> p{3.0, -1.0, 2.0, 2.0};
  EXPECT_EQ(sw1d<double>(p, p), 0.0);
}

TEST(Sw1d, HandCase) {
  const std::vector<double> p{0.0, 1.0}, q{1.0, 2.0};
  EXPECT_DOUBLE_EQ(sw1d<double>(p, q), 1.0);
}

TEST(Sw1d, MatchesPermutationOracle) {
  Rng rng(11);
  std::uniform_int_distribution<int> len(1, 7);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = len(rng);
    std::vector<double> p(n), q(n);
    for (auto& v : p) v = g(rng);
    for (auto& v : q) v = g(rng);
    EXPECT_NEAR(sw1d<double>(p, q), brute_force_w2(p, q), 1e-10);
  }
}

TEST(Sw1d, MatchesSortingOracle) {
  Rng rng(12);
  std::uniform_int_distribution<int> len(1, 64);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = len(rng);
    std::vector<double> p(n), q(n);
    for (auto& v : p) v = u(rng);
    for (auto& v : q) v = u(rng);
    EXPECT_NEAR(sw1d<double>(p, q), sorting_w2(p, q), 1e-10);
    EXPECT_EQ(sw1d<double>(p, q), sw1d<double>(q, p));
  }
}

TEST(Sw1d, ZeroExactlyForPermutedMultiset) {
  std::vector<double> p{1.0, 5.0, -2.0, 5.0, 0.5};
  std::vector<double> q{5.0, 0.5, 1.0, -2.0, 5.0};
  EXPECT_EQ(sw1d<double>(p, q), 0.0);
  q[0] = 5.0000001;
  EXPECT_GT(sw1d<double>(p, q), 0.0);
}

TEST(Sw1d, LengthMismatchThrowsInStrictMode) {
  const std::vector<double> p{1.0, 2.0}, q{1.0, 2.0, 3.0};
  EXPECT_THROW(sw1d<double>(p, q), InvalidArgument);
  EXPECT_THROW(sw1d<double>(std::vector<double>{}, std::vector<double>{}), InvalidArgument);
}

TEST(Sw1d, QuantileModeResamplesShorterVector) {
  // {0, 1} linearly resampled to three points is {0, 0.5, 1}.
  const std::vector<double> p{1.0, 0.0}, q{0.0, 0.5, 1.0};
  EXPECT_NEAR(sw1d<double>(p, q, SampleMatching::kQuantile), 0.0, 1e-15);
  const std::vector<double> r{0.0, 0.5, 2.0};
  EXPECT_NEAR(sw1d<double>(p, r, SampleMatching::kQuantile), 1.0 / 3.0, 1e-15);
  const std::vector<double> a{3.0, 1.0}, b{2.0, 0.0};
  EXPECT_EQ(sw1d<double>(a, b, SampleMatching::kQuantile), sw1d<double>(a, b));
}

TEST(LayerLoss, IdentityAndSingleDirection) {
  Rng rng(13);
  const Tensor3d f = random_tensor(3, 3, 4, rng);
  const Tensor3d g = random_tensor(3, 3, 4, rng);
  const auto dirs = sample_directions<double>(1, 4, rng);
  const auto pf = project_channelwise(f, dirs);
  const auto pg = project_channelwise(g, dirs);
  EXPECT_EQ(layer_loss(pf, pf), 0.0);
  EXPECT_DOUBLE_EQ(layer_loss(pf, pg), sw1d<double>(pf.row(0), pg.row(0)));
}

TEST(LayerLoss, ShapeMismatchThrows) {
  ProjectionBatch<double> a{2, 3, std::vector<double>(6)};
  ProjectionBatch<double> b{3, 3, std::vector<double>(9)};
  ProjectionBatch<double> c{2, 4, std::vector<double>(8)};
  EXPECT_THROW(layer_loss(a, b), InvalidArgument);
  EXPECT_THROW(layer_loss(a, c), InvalidArgument);
}

TEST(LayerLoss, DenseSlicingAgreesWithAngleSweep) {
  // Oracle: midpoint rule over evenly spaced angles on the half circle.
  Rng rng(14);
  const Tensor3d a = random_tensor(6, 6, 2, rng);
  Tensor3d b = random_tensor(6, 6, 2, rng);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) b(y, x, 0) = 2.0 * b(y, x, 0) + 1.0;
  const int sweep = 20000;
  double oracle = 0.0;
  for (int k = 0; k < sweep; ++k) {
    const double t = std::numbers::pi * (k + 0.5) / sweep;
    const std::vector<double> dir{std::cos(t), std::sin(t)};
    oracle += sorting_w2(swtex::testing::loop_project_channels(a, dir),
                         swtex::testing::loop_project_channels(b, dir));
  }
  oracle /= sweep;
  const auto dirs = sample_directions<double>(16384, 2, rng);
  const double mc = layer_loss(project_channelwise(a, dirs), project_channelwise(b, dirs));
  EXPECT_LT(std::abs(mc - oracle) / oracle, 0.01);
}

TEST(LayerLoss, StandardErrorShrinksAsInverseSqrtCount) {
  Rng rng(15);
  const Tensor3d a = random_tensor(4, 4, 6, rng);
  const Tensor3d b = random_tensor(4, 4, 6, rng);
  std::vector<double> log_count, log_sd;
  for (int count : {16, 64, 256, 1024}) {
    std::vector<double> xs;
    for (int rep = 0; rep < 200; ++rep) {
      const auto dirs = sample_directions<double>(count, 6, rng);
      xs.push_back(layer_loss(project_channelwise(a, dirs), project_channelwise(b, dirs)));
    }
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    log_count.push_back(std::log(count));
    log_sd.push_back(0.5 * std::log(ss / (xs.size() - 1)));
  }
  const double mx = std::accumulate(log_count.begin(), log_count.end(), 0.0) / 4;
  const double my = std::accumulate(log_sd.begin(), log_sd.end(), 0.0) / 4;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 4; ++i) {
    sxy += (log_count[i] - mx) * (log_sd[i] - my);
    sxx += (log_count[i] - mx) * (log_count[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, -0.5, 0.1);
}

TEST(SliceLosses, IdentityIsZero) {
  Rng rng(16);
  const auto s = single("a", random_tensor(4, 3, 5, rng));
  const auto w = LossWeights::uniform({"a"}, {"a"});
  EXPECT_EQ(channel_slice_loss(s, s, w, rng), 0.0);
  EXPECT_EQ(height_slice_loss(s, s, w, rng), 0.0);
  EXPECT_EQ(slicing_loss(s, s, w, rng), 0.0);
}

TEST(SliceLosses, ZeroWeightsGiveZero) {
  Rng rng(17);
  const auto a = single("a", random_tensor(4, 3, 5, rng));
  const auto b = single("a", random_tensor(4, 3, 5, rng));
  LossWeights w;
  w.channel_weights["a"] = 0.0;
  w.height_weights["a"] = 0.0;
  EXPECT_EQ(channel_slice_loss(a, b, w, rng), 0.0);
  EXPECT_EQ(height_slice_loss(a, b, w, rng), 0.0);
  EXPECT_EQ(slicing_loss(a, b, w, rng), 0.0);
}

TEST(SliceLosses, SingleLayerChannelTermIsLayerLoss) {
  Rng rng(18);
  const auto a = single("a", random_tensor(4, 3, 5, rng));
  const auto b = single("a", random_tensor(4, 3, 5, rng));
  Rng r1 = rng, r2 = rng;
  const double got = channel_slice_loss(a, b, LossWeights::uniform({"a"}, {}), r1);
  const auto dirs = sample_directions<double>(5, 5, r2);
  const double expected = layer_loss(project_channelwise(a.layers[0].tensor, dirs),
                                     project_channelwise(b.layers[0].tensor, dirs));
  EXPECT_NEAR(got, expected, 1e-12);
}

TEST(SliceLosses, HandComputedHeightTerm) {
  Tensor3d ta(2, 1, 1), tb(2, 1, 1);
  ta(0, 0, 0) = 1.0;
  ta(1, 0, 0) = 3.0;
  tb(0, 0, 0) = -2.0;
  tb(1, 0, 0) = 0.5;
  Rng rng(19);
  Rng copy = rng;
  const double got = height_slice_loss(single("a", ta), single("a", tb),
                                       LossWeights::uniform({}, {"a"}), rng);
  // Two directions in R^2, one sample each: mean of (v.a - v.b)^2.
  const auto dirs = sample_directions<double>(2, 2, copy);
  double expected = 0.0;
  for (int d = 0; d < 2; ++d) {
    const double v0 = dirs.row(d)[0], v1 = dirs.row(d)[1];
    const double diff = (v0 * 1.0 + v1 * 3.0) - (v0 * -2.0 + v1 * 0.5);
    expected += diff * diff;
  }
  expected /= 2.0;
  EXPECT_NEAR(got, expected, 1e-14);
}

TEST(SliceLosses, HeightMismatchThrows) {
  Rng rng(20);
  const auto a = single("a", random_tensor(4, 3, 2, rng));
  const auto b = single("a", random_tensor(3, 4, 2, rng));
  EXPECT_THROW(height_slice_loss(a, b, LossWeights::uniform({}, {"a"}), rng), InvalidArgument);
}

TEST(SliceLosses, TagMismatchThrows) {
  Rng rng(21);
  const auto a = single("a", random_tensor(3, 3, 2, rng));
  const auto b = single("b", random_tensor(3, 3, 2, rng));
  EXPECT_THROW(channel_slice_loss(a, b, LossWeights::uniform({"a"}, {}), rng), InvalidArgument);
}

TEST(SliceLosses, TermRemoval) {
  Rng rng(22);
  FeatureStack<double> a, b;
  for (const char* tag : {"l1", "l2"}) {
    a.layers.push_back({tag, random_tensor(4, 4, 3, rng)});
    b.layers.push_back({tag, random_tensor(4, 4, 3, rng)});
  }
  LossWeights channel_only = LossWeights::uniform({"l1", "l2"}, {"l1", "l2"});
  for (auto& [t, v] : channel_only.height_weights) v = 0.0;
  Rng r1 = rng, r2 = rng;
  EXPECT_EQ(slicing_loss(a, b, channel_only, r1), channel_slice_loss(a, b, channel_only, r2));

  LossWeights height_only = LossWeights::uniform({"l1", "l2"}, {"l1", "l2"});
  for (auto& [t, v] : height_only.channel_weights) v = 0.0;
  Rng r3 = rng, r4 = rng;
  EXPECT_EQ(slicing_loss(a, b, height_only, r3), height_slice_loss(a, b, height_only, r4));
}

TEST(SliceLosses, ChannelTermIgnoresPixelOrder) {
  Rng rng(23);
  const Tensor3d fa = random_tensor(4, 4, 3, rng);
  const Tensor3d fb = random_tensor(4, 4, 3, rng);
  std::vector<int> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto permute = [&](const Tensor3d& f) {
    Tensor3d out(4, 4, 3);
    for (int m = 0; m < 16; ++m)
      for (int c = 0; c < 3; ++c) out(m / 4, m % 4, c) = f(perm[m] / 4, perm[m] % 4, c);
    return out;
  };
  const auto w = LossWeights::uniform({"a"}, {});
  const auto dirs = draw_directions(single("a", fa), w, {}, rng);
  const double base = slicing_loss(single("a", fa), single("a", fb), dirs);
  EXPECT_NEAR(slicing_loss(single("a", permute(fa)), single("a", permute(fb)), dirs), base, 1e-12);
  EXPECT_NEAR(slicing_loss(single("a", permute(fa)), single("a", fb), dirs), base, 1e-12);
}

TEST(SliceLosses, HeightTermSeesRowSwapChannelTermDoesNot) {
  Rng rng(24);
  const Tensor3d fa = random_tensor(4, 3, 2, rng);
  Tensor3d fb = fa;
  for (int x = 0; x < 3; ++x)
    for (int c = 0; c < 2; ++c) std::swap(fb(0, x, c), fb(2, x, c));
  const auto a = single("a", fa), b = single("a", fb);
  const auto dirs = draw_directions(a, LossWeights::uniform({"a"}, {"a"}), {}, rng);
  SliceDirections<double> channel, height;
  for (const auto& t : dirs.terms) (t.term == SliceTerm::kChannel ? channel : height).terms.push_back(t);
  EXPECT_EQ(slicing_loss(a, b, channel), 0.0);
  EXPECT_GT(slicing_loss(a, b, height), 1e-3);
}

TEST(SortedTarget, MatchesFreeFunctionAndBreakdown) {
  Rng rng(25);
  FeatureStack<double> a, b;
  a.layers.push_back({"l1", random_tensor(5, 4, 3, rng)});
  b.layers.push_back({"l1", random_tensor(5, 4, 3, rng)});
  const auto dirs = draw_directions(a, LossWeights::uniform({"l1"}, {"l1"}), {}, rng);
  const SortedTarget<double> target(b, dirs);
  const double loss = target.evaluate(a);
  EXPECT_NEAR(loss, slicing_loss(a, b, dirs), 1e-12);
  const auto parts = target.evaluate_terms(a);
  EXPECT_NEAR(parts.channel + parts.height + parts.width, loss, 1e-12);
  EXPECT_GT(parts.channel, 0.0);
  EXPECT_GT(parts.height, 0.0);
  EXPECT_EQ(parts.width, 0.0);
}

TEST(SortedTarget, FloatRadixPathMatchesDoubleWithTies) {
  // Quantized values create many ties; both precisions must pick the same
  // tie order (original index), hence identical gradients.
  Rng rng(26);
  std::uniform_int_distribution<int> q(-3, 3);
  Tensor3d fa(16, 16, 2), fb(16, 16, 2);
  for (double& v : fa.values()) v = q(rng) * 0.5;
  for (double& v : fb.values()) v = q(rng) * 0.5;
  fa(0, 0, 0) = -0.0;
  FeatureStack<double> a = single("l", fa), b = single("l", fb);
  SliceDirections<double> dirs;
  dirs.terms.push_back({"l", SliceTerm::kChannel, 1.0, DirectionSet<double>{2, 2, {1.0, 0.0, 0.0, 1.0}}});
  SliceDirections<float> dirs_f;
  dirs_f.terms.push_back({"l", SliceTerm::kChannel, 1.0, DirectionSet<float>{2, 2, {1.0f, 0.0f, 0.0f, 1.0f}}});
  FeatureStack<double> gd;
  FeatureStack<float> gf;
  const double ld = SortedTarget<double>(b, dirs).evaluate(a, &gd);
  const double lf = SortedTarget<float>(b.cast<float>(), dirs_f).evaluate(a.cast<float>(), &gf);
  EXPECT_NEAR(ld, lf, 1e-6);
  const auto vd = gd.layers[0].tensor.values();
  const auto vf = gf.layers[0].tensor.values();
  for (std::size_t i = 0; i < vd.size(); ++i) EXPECT_NEAR(vd[i], vf[i], 1e-6) << i;
}

TEST(FeatureStack, ValidateRejectsDuplicatesAndNonFinite) {
  FeatureStack<double> s;
  s.layers.push_back({"a", Tensor3d(1, 1, 1)});
  s.layers.push_back({"a", Tensor3d(1, 1, 1)});
  EXPECT_THROW(s.validate(), InvalidArgument);
  s.layers[1].tag = "b";
  s.validate();
  s.layers[1].tensor(0, 0, 0) = std::nan("");
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(SlicingLossGradient, MatchesCentralDifferences) {
  Rng rng(27);
  for (int trial = 0; trial < 10; ++trial) {
    FeatureStack<double> a, b;
    a.layers.push_back({"l1", random_tensor(3, 4, 5, rng)});
    a.layers.push_back({"l2", random_tensor(2, 2, 8, rng)});
    b.layers.push_back({"l1", random_tensor(3, 4, 5, rng)});
    b.layers.push_back({"l2", random_tensor(2, 2, 8, rng)});
    LossWeights w = LossWeights::uniform({"l1", "l2"}, {"l1", "l2"});
    w.width_weights["l1"] = 0.5;
    const auto dirs = draw_directions(a, w, {}, rng);
    const auto r = swtex::testing::check_slicing_gradient(a, b, dirs);
    EXPECT_GT(r.checked, 0);
    EXPECT_LT(r.max_relative_error, 1e-4);
  }
}

TEST(SlicingLossGradient, QuantileModeMatchesCentralDifferences) {
  Rng rng(28);
  FeatureStack<double> a = single("l", random_tensor(3, 3, 2, rng));
  FeatureStack<double> b = single("l", random_tensor(4, 5, 2, rng));
  const auto dirs = draw_directions(a, LossWeights::uniform({"l"}, {}), {}, rng);
  FeatureStack<double> grad;
  slicing_loss(a, b, dirs, SampleMatching::kQuantile, &grad);
  const double h = 1e-4;
  for (std::size_t i = 0; i < a.layers[0].tensor.values().size(); ++i) {
    FeatureStack<double> p = a, m = a;
    p.layers[0].tensor.values()[i] += h;
    m.layers[0].tensor.values()[i] -= h;
    const double fd = (slicing_loss(p, b, dirs, SampleMatching::kQuantile) -
                       slicing_loss(m, b, dirs, SampleMatching::kQuantile)) / (2 * h);
    EXPECT_NEAR(grad.layers[0].tensor.values()[i], fd, 1e-6);
  }
}

TEST(ProjectionUniqueness, ZeroLossOverManyDirectionsImpliesEqualMultisets) {
  Rng rng(29);
  std::uniform_int_distribution<int> npts(2, 8), ndim(1, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = npts(rng), d = ndim(rng);
    const Tensor3d a = random_tensor(1, n, d, rng);
    // Same multiset in shuffled order, and a copy with one point nudged.
    Tensor3d same(1, n, d), nudged;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c) same(0, i, c) = a(0, perm[i], c);
    nudged = same;
    nudged(0, 0, 0) += 0.05;
    const auto dirs = sample_directions<double>(1000, d, rng);
    EXPECT_LT(layer_loss(project_channelwise(a, dirs), project_channelwise(same, dirs)), 1e-24);
    EXPECT_GT(layer_loss(project_channelwise(a, dirs), project_channelwise(nudged, dirs)), 1e-8);
  }
}
