#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "swtex/image_io.hpp"
#include "swtex/errors.hpp"
#include "swtex_cli/commands.hpp"
#include "swtex_cli/config.hpp"
#include "swtex_cli/grid.hpp"
#include "swtex_cli/manifest.hpp"
#include "textures.hpp"

using namespace swtex;
using namespace swtex::cli;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
  return parts;
}

std::vector<std::string> shallow_flags() {
  return {"--channel-layers", "conv1_1,conv2_1", "--height-layers", "conv1_1,conv2_1",
          "--weights-path", swtex::testing::test_weights_file().string()};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Config, RoundTrip) {
  RunConfig cfg;
  cfg.ref = "a.png";
  cfg.scales = 3;
  cfg.seed = 17;
  cfg.slices = "64";
  cfg.height_loss = false;
  cfg.channel_layers = {"conv1_1", "conv3_1"};
  cfg.sweep_scales = {1, 4};
  cfg.textures = {"x.png", "y.png"};
  cfg.learning_rate = 0.1;
  EXPECT_EQ(parse_config(serialize_config(cfg)), cfg);
  EXPECT_EQ(parse_config(serialize_config(RunConfig{})), RunConfig{});
}

TEST(Config, CommentsPrefixesAndIgnoredNamespaces) {
  const RunConfig cfg = parse_config(
      "# comment\n\nconfig.scales = 2\niters=7\nrun.seconds = 3.5\nmetric.c_kid = 0.1\n"
      "output.image = x.png\n");
  EXPECT_EQ(cfg.scales, 2);
  EXPECT_EQ(cfg.iterations, 7);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("scales = two\n"), ConfigError);
  EXPECT_THROW(parse_config("slices = 32\n"), ConfigError);
  EXPECT_THROW(parse_config("matching = loose\n"), ConfigError);
  EXPECT_THROW(parse_config("scales\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/swtex.cfg"), std::runtime_error);
}

TEST(Config, SynthesisMapping) {
  RunConfig cfg;
  cfg.seed = 5;
  cfg.slices = "16";
  cfg.height_loss = false;
  const SynthesisConfig s = to_synthesis_config(cfg);
  EXPECT_EQ(s.seed, 5u);
  for (const auto& [tag, w] : s.effective_weights().height_weights) EXPECT_EQ(w, 0.0);
  EXPECT_EQ(to_layer_selection(RunConfig{}), LayerSelection::standard());
}

TEST(Config, WeightsPathResolution) {
  RunConfig cfg;
  cfg.weights_path = "/x/y.swtw";
  EXPECT_EQ(resolve_weights_path(cfg), fs::path("/x/y.swtw"));
  cfg.weights_path.clear();
  ::setenv(kWeightsDirEnv, "/opt/w", 1);
  EXPECT_EQ(resolve_weights_path(cfg), fs::path("/opt/w/vgg19.swtw"));
  ::unsetenv(kWeightsDirEnv);
  EXPECT_TRUE(resolve_weights_path(cfg).empty());
}

TEST(Manifest, RoundTrip) {
  swtex::testing::TempDir dir;
  Manifest m;
  m.set("run.seconds", 1.5);
  m.set("run.note", "free text = with equals");
  RunConfig cfg;
  cfg.seed = 9;
  m.add_config(cfg);
  m.write(dir / "m.txt");
  const Manifest back = Manifest::read(dir / "m.txt");
  EXPECT_EQ(back.entries(), m.entries());
  EXPECT_EQ(back.get("run.note"), "free text = with equals");
  EXPECT_EQ(load_config(dir / "m.txt"), cfg);
}

TEST(Grid, LayoutAndBackground) {
  const Image a(128, 128, 0.0f);
  const Image grid = compose_grid({{a, std::nullopt, a}, {a, a, a}}, 64, 4);
  EXPECT_EQ(grid.height(), 2 * 68);
  EXPECT_EQ(grid.width(), 3 * 68);
  EXPECT_EQ(grid.at(10, 10, 0), 0.0f);
  EXPECT_EQ(grid.at(10, 68 + 10, 0), 1.0f);
  EXPECT_EQ(thumbnail(a, 32).height(), 32);
}

TEST(ExitCodes, UsageAndFailures) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"synth", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"synth", "--ref", "x.png"}).code, kExitUsage);
  EXPECT_EQ(run({"synth", "--ref", "x.png", "--out", "y.png", "--scales", "abc"}).code,
            kExitUsage);
  EXPECT_EQ(run({"synth", "--ref", "/nonexistent.png", "--out", "/tmp/swtex-y.png", "--weights-path",
                 swtex::testing::test_weights_file().string()})
                .code,
            kExitFailure);
  EXPECT_EQ(run({"report", "--dir", "/nonexistent-dir"}).code, kExitUsage);
  EXPECT_EQ(run({"version"}).code, kExitUsage);
}

TEST(ExitCodes, MissingWeightsIsAFailure) {
  swtex::testing::TempDir dir;
  write_png(dir / "ref.png", swtex::testing::bricks(32, 32, 1));
  const auto r = run({"synth", "--ref", (dir / "ref.png").string(), "--out",
                      (dir / "o.png").string(), "--weights-path", (dir / "none.swtw").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_FALSE(r.err.empty());
}

TEST(Synth, OutputsAndManifestReplay) {
  swtex::testing::TempDir dir;
  write_png(dir / "ref.png", swtex::testing::bricks(32, 32, 1));
  const auto first = run(cat({"synth", "--ref", (dir / "ref.png").string(), "--out",
                              (dir / "a.png").string(), "--scales", "1", "--iters", "3",
                              "--seed", "11", "--save-scales"},
                             shallow_flags()));
  ASSERT_EQ(first.code, kExitOk) << first.err;
  EXPECT_TRUE(fs::exists(dir / "a.png"));
  EXPECT_TRUE(fs::exists(dir / "a.scale1.png"));
  EXPECT_TRUE(fs::exists(dir / "a.scale0.png"));
  const auto trace = read_lines(dir / "a.trace.txt");
  EXPECT_EQ(trace.size(), 1u + 2 * 3);

  const Manifest m = Manifest::read(dir / "a.manifest.txt");
  EXPECT_EQ(m.get("config.seed"), "11");
  EXPECT_TRUE(m.get("run.seconds").has_value());
  EXPECT_TRUE(m.get("run.weights_checksum").has_value());
  EXPECT_TRUE(m.get("metric.periodicity.replica_suspected").has_value());

  const auto replay = run({"synth", "--config", (dir / "a.manifest.txt").string(), "--out",
                           (dir / "b.png").string()});
  ASSERT_EQ(replay.code, kExitOk) << replay.err;
  EXPECT_EQ(slurp(dir / "a.png"), slurp(dir / "b.png"));
  EXPECT_EQ(read_image(dir / "b.png").height(), 32);
}

TEST(Synth, ChecksumMismatchIsAFailure) {
  swtex::testing::TempDir dir;
  write_png(dir / "ref.png", swtex::testing::bricks(32, 32, 1));
  const auto r = run(cat({"synth", "--ref", (dir / "ref.png").string(), "--out",
                          (dir / "a.png").string(), "--iters", "1", "--seed", "1",
                          "--weights-checksum", "0000000000000000"},
                         shallow_flags()));
  EXPECT_EQ(r.code, kExitFailure);
}

TEST(Report, GroundTruthSelfScores) {
  swtex::testing::TempDir dir;
  fs::create_directories(dir / "ref");
  fs::create_directories(dir / "syn");
  for (const auto& t : swtex::testing::long_range_textures(96, 96, 1)) {
    if (t.name == "weave" || t.name == "tiles" || t.name == "plaid") {
      write_png(dir / "ref" / (t.name + ".png"), t.image);
      write_png(dir / "syn" / (t.name + ".png"), t.image);
    }
  }
  const auto r = run({"report", "--dir", dir.path().string(), "--ground-truth", "--crop-size",
                      "64", "--crop-count", "16", "--weights-path",
                      swtex::testing::test_weights_file().string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = read_lines(dir / "report" / "metrics.csv");
  ASSERT_EQ(rows.front(), "texture,method,lpips,fid,c_fid,kid,c_kid");
  int per_texture = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    ASSERT_EQ(f.size(), 7u) << rows[i];
    if (f[0] == "all") {
      EXPECT_NEAR(std::stod(f[3]), 0.0, 1e-6);
      continue;
    }
    ++per_texture;
    EXPECT_EQ(std::stod(f[2]), 0.0);
    EXPECT_LT(std::abs(std::stod(f[6])), 0.05);
  }
  EXPECT_EQ(per_texture, 3);
  const Image grid = read_image(dir / "report" / "grid.png");
  EXPECT_EQ(grid.height(), 3 * (128 + 4));
  EXPECT_EQ(grid.width(), 2 * (128 + 4));
  EXPECT_TRUE(fs::exists(dir / "report" / "manifest.txt"));
}

TEST(Report, UnmatchedAndUndersizedPairsAreSkipped) {
  swtex::testing::TempDir dir;
  fs::create_directories(dir / "ref");
  fs::create_directories(dir / "syn");
  write_png(dir / "ref" / "a.png", swtex::testing::weave(64, 64, 1));
  write_png(dir / "syn" / "b.png", swtex::testing::weave(64, 64, 2));
  const auto r = run({"report", "--dir", dir.path().string(), "--perceptual", "none"});
  EXPECT_EQ(r.code, kExitFailure);

  write_png(dir / "syn" / "a.png", swtex::testing::weave(64, 64, 2));
  const auto ok = run({"report", "--dir", dir.path().string(), "--perceptual", "none", "--out",
                       (dir / "rep").string()});
  ASSERT_EQ(ok.code, kExitOk) << ok.err;
  const std::string txt = slurp(dir / "rep" / "metrics.txt");
  EXPECT_NE(txt.find("n/a"), std::string::npos);
  EXPECT_NE(txt.find("b"), std::string::npos);
}

TEST(AblateSlices, TableShape) {
  swtex::testing::TempDir dir;
  write_png(dir / "t1.png", swtex::testing::plaid(32, 32, 1));
  const auto r = run(cat({"ablate-slices", "--textures", (dir / "t1.png").string(), "--out",
                          (dir / "abl").string(), "--runs", "2", "--iters", "2", "--scales", "0",
                          "--jobs", "2", "--seed", "3"},
                         shallow_flags()));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = read_lines(dir / "abl" / "ablation.csv");
  ASSERT_EQ(rows.size(), 1u + 5 * 2);
  EXPECT_EQ(rows.front(), "texture,slices,run,seed,seconds,initial_loss,final_loss");
  std::set<std::string> arms;
  for (std::size_t i = 1; i < rows.size(); ++i) arms.insert(split(rows[i], ',')[1]);
  EXPECT_EQ(arms, (std::set<std::string>{"16", "64", "256", "H_l", "none"}));
  const std::string table = slurp(dir / "abl" / "ablation.txt");
  EXPECT_NE(table.find("±"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "abl" / "manifest.txt"));
}

TEST(MultiscaleSweep, WritesOneRowPerK) {
  swtex::testing::TempDir dir;
  write_png(dir / "ref.png", swtex::testing::dot_lattice(64, 64, 1));
  const auto r = run(cat({"multiscale-sweep", "--ref", (dir / "ref.png").string(), "--out",
                          (dir / "sw").string(), "--sweep-scales", "0,1", "--iters", "2",
                          "--seed", "1", "--crop-size", "64", "--crop-count", "4"},
                         shallow_flags()));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_lines(dir / "sw" / "sweep.csv").size(), 3u);
  EXPECT_TRUE(fs::exists(dir / "sw" / "ref_K0.png"));
  EXPECT_TRUE(fs::exists(dir / "sw" / "ref_K1.png"));
}

TEST(MakeWeights, WritesLoadableCheckpoint) {
  swtex::testing::TempDir dir;
  const auto r = run({"make-weights", "--out", (dir / "w.swtw").string(), "--seed", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NO_THROW(load_extractor((dir / "w.swtw").string(), LayerSelection::standard()));
}
