#include "swtex_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "swtex/embedding.hpp"
#include "swtex/errors.hpp"
#include "swtex/image_io.hpp"
#include "swtex/metrics.hpp"
#include "swtex/periodicity.hpp"
#include "swtex/synthesis.hpp"
#include "swtex/version.hpp"
#include "swtex_cli/grid.hpp"
#include "swtex_cli/manifest.hpp"
#include "swtex_cli/parallel.hpp"

namespace swtex::cli {
namespace fs = std::filesystem;

namespace {

void resolve_seed(RunConfig& cfg) {
  if (cfg.seed) return;
  std::random_device rd;
  cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

FeatureExtractor load_backbone(RunConfig& cfg) {
  const fs::path path = resolve_weights_path(cfg);
  if (path.empty()) {
    throw UsageError(std::string("no backbone weights: pass --weights-path or set ") +
                     kWeightsDirEnv + " (see README for converting or generating weights)");
  }
  std::optional<std::string> expected;
  if (!cfg.weights_checksum.empty()) expected = cfg.weights_checksum;
  FeatureExtractor ex = load_extractor(path, to_layer_selection(cfg), expected);
  cfg.weights_path = path.string();
  cfg.weights_checksum = ex.weights_checksum();
  return ex;
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix);
}

std::string fmt(double v, int precision = 4) {
  if (!std::isfinite(v)) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
}

void write_trace(const fs::path& path, const SynthesisTrace& trace) {
  std::ostringstream os;
  trace.write_table(os);
  write_text(path, os.str());
}

void record_run(Manifest& m, const FeatureExtractor& ex, const std::string& command) {
  m.set("run.command", command);
  m.set("run.version", std::string(kVersion));
  m.set("run.backbone_id", ex.backbone_id());
  m.set("run.weights_checksum", ex.weights_checksum());
}

void record_trace(Manifest& m, const std::string& prefix, const SynthesisTrace& trace) {
  for (std::size_t i = 0; i < trace.scales.size(); ++i) {
    const ScaleTrace& s = trace.scales[i];
    const std::string p = prefix + "scale." + std::to_string(i) + ".";
    m.set(p + "level", std::to_string(s.level));
    m.set(p + "size", std::to_string(s.height) + "x" + std::to_string(s.width));
    m.set(p + "initial_loss", s.initial_loss);
    m.set(p + "final_loss", s.final_loss);
    m.set(p + "evaluations", std::to_string(s.evaluations));
    m.set(p + "seconds", s.seconds);
  }
  m.set(prefix + "seconds", trace.total_seconds());
}

void record_periodicity(Manifest& m, const std::string& prefix, const PeriodicityReport& rep) {
  m.set(prefix + "periodicity.degenerate", rep.degenerate ? "true" : "false");
  m.set(prefix + "periodicity.peaks", std::to_string(rep.peaks.size()));
  m.set(prefix + "periodicity.replica_suspected", rep.replica_suspected() ? "true" : "false");
  if (!rep.peaks.empty()) {
    const auto& p = rep.peaks.front();
    m.set(prefix + "periodicity.top_offset", std::to_string(p.dy) + "," + std::to_string(p.dx));
    m.set(prefix + "periodicity.top_correlation", p.correlation);
  }
}

constexpr const char* kReplicaNote =
    "K >= 2 can produce repeated copies of the exemplar; see metric.periodicity.*";

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::map<std::string, fs::path> list_images(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) out[e.path().stem().string()] = e.path();
  }
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {NAN, NAN};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

double mean_finite(const std::vector<double>& v) {
  double s = 0.0;
  int n = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  }
  return n ? s / n : NAN;
}

std::unique_ptr<EmbeddingBackend> make_embedding(const RunConfig& cfg,
                                                 const std::optional<FeatureExtractor>& ex) {
  if (cfg.embedding == "vgg") {
    if (!ex) throw UsageError("embedding 'vgg' needs backbone weights");
    return std::make_unique<ExtractorEmbedding>(*ex, "conv5_4");
  }
  return std::make_unique<FilterBankEmbedding>();
}

CropProtocol crop_protocol(const RunConfig& cfg) {
  CropProtocol p;
  p.crop_count = cfg.crop_count;
  p.crop_size = cfg.crop_size;
  p.seed = cfg.metric_seed;
  p.ground_truth = cfg.ground_truth;
  return p;
}

bool admits_crops(const Image& img, const CropProtocol& p) {
  return img.height() >= p.crop_size && img.width() >= p.crop_size;
}

}  // namespace

int cmd_synth(RunConfig cfg, std::ostream& out, std::ostream& err) {
  if (cfg.ref.empty()) throw UsageError("synth: --ref is required");
  if (cfg.out.empty()) throw UsageError("synth: --out is required");
  resolve_seed(cfg);
  const FeatureExtractor ex = load_backbone(cfg);
  const Image ref = read_image(cfg.ref);
  const SynthesisConfig sc = to_synthesis_config(cfg);

  auto [img, trace] = synthesize_multiscale(ref, ex, sc);

  const fs::path out_path = cfg.out;
  write_png(out_path, img);
  const fs::path trace_path = sibling(out_path, ".trace.txt");
  write_trace(trace_path, trace);

  Manifest m;
  m.add_config(cfg);
  record_run(m, ex, "synth");
  m.set("run.seed", std::to_string(*cfg.seed));
  m.set("run.clamped_input_values", std::to_string(ex.clamp_warnings()));
  record_trace(m, "run.", trace);
  m.set("output.image", out_path.string());
  m.set("output.trace", trace_path.string());
  if (cfg.save_scales) {
    for (const auto& s : trace.scales) {
      const fs::path p = sibling(out_path, ".scale" + std::to_string(s.level) + ".png");
      write_png(p, s.result);
      m.set("output.scale." + std::to_string(s.level), p.string());
    }
  }
  const PeriodicityReport rep = periodicity_diagnostic(img);
  record_periodicity(m, "metric.", rep);
  if (cfg.scales >= 2) {
    m.set("run.note", kReplicaNote);
    err << "note: " << kReplicaNote << '\n';
  }
  const fs::path manifest_path = sibling(out_path, ".manifest.txt");
  m.set("output.manifest", manifest_path.string());
  m.write(manifest_path);

  const ScaleTrace& last = trace.scales.back();
  out << "wrote " << out_path.string() << " (" << img.height() << "x" << img.width()
      << ", seed " << *cfg.seed << ", " << trace.scales.size() << " scale(s), final loss "
      << last.final_loss << ", " << fmt(trace.total_seconds(), 2) << " s)\n";
  if (rep.replica_suspected()) {
    out << "periodicity: " << rep.peaks.size() << " strong off-origin peak(s), top at ("
        << rep.peaks.front().dy << "," << rep.peaks.front().dx << ")\n";
  }
  return kExitOk;
}

int cmd_ablate_slices(RunConfig cfg, std::ostream& out, std::ostream& err) {
  if (cfg.textures.empty() && !cfg.ref.empty()) cfg.textures.push_back(cfg.ref);
  if (cfg.textures.empty()) throw UsageError("ablate-slices: no textures given");
  if (cfg.out.empty()) throw UsageError("ablate-slices: --out directory is required");
  if (cfg.runs < 1) throw UsageError("ablate-slices: --runs must be at least 1");
  resolve_seed(cfg);
  const FeatureExtractor ex = load_backbone(cfg);

  struct Arm {
    std::string label;
    std::string slices;
    bool height;
  };
  const std::vector<Arm> arms = {
      {"16", "16", true}, {"64", "64", true}, {"256", "256", true},
      {"H_l", "auto", true}, {"none", "auto", false}};

  std::vector<Image> refs;
  std::vector<std::string> names;
  for (const auto& t : cfg.textures) {
    refs.push_back(read_image(t));
    names.push_back(fs::path(t).stem().string());
  }

  struct Result {
    std::uint64_t seed = 0;
    double seconds = NAN;
    double initial_loss = NAN;
    double final_loss = NAN;
  };
  const int n_tex = static_cast<int>(refs.size());
  const int n_arm = static_cast<int>(arms.size());
  std::vector<Result> results(static_cast<std::size_t>(n_tex) * n_arm * cfg.runs);
  const fs::path out_dir = cfg.out;
  fs::create_directories(out_dir / "images");
  if (cfg.jobs > 1) err << "note: runs execute concurrently; runtimes include contention\n";

  std::mutex log_mutex;
  parallel_for(static_cast<int>(results.size()), cfg.jobs, [&](int task) {
    const int run = task % cfg.runs;
    const int arm = (task / cfg.runs) % n_arm;
    const int tex = task / (cfg.runs * n_arm);
    RunConfig c = cfg;
    c.slices = arms[arm].slices;
    c.height_loss = arms[arm].height;
    c.seed = *cfg.seed + static_cast<std::uint64_t>(run);
    auto [img, trace] = synthesize_multiscale(refs[tex], ex, to_synthesis_config(c));
    Result& r = results[task];
    r.seed = *c.seed;
    r.seconds = trace.total_seconds();
    r.initial_loss = trace.scales.front().initial_loss;
    r.final_loss = trace.scales.back().final_loss;
    if (run == 0) write_png(out_dir / "images" / (names[tex] + "_" + arms[arm].label + ".png"), img);
    std::lock_guard lock(log_mutex);
    out << names[tex] << " slices=" << arms[arm].label << " run " << run << ": "
        << fmt(r.seconds, 2) << " s\n";
  });

  std::ostringstream table, csv;
  table << "# runtime in seconds by number of height slices, mean ± std over " << cfg.runs
        << " runs\n";
  table << std::left << std::setw(8) << "slices";
  for (const auto& n : names) table << std::setw(24) << n;
  table << '\n';
  csv << "texture,slices,run,seed,seconds,initial_loss,final_loss\n";
  Manifest m;
  m.add_config(cfg);
  record_run(m, ex, "ablate-slices");
  for (int a = 0; a < n_arm; ++a) {
    table << std::setw(8) << arms[a].label;
    for (int t = 0; t < n_tex; ++t) {
      std::vector<double> secs;
      for (int r = 0; r < cfg.runs; ++r) {
        const Result& res = results[(static_cast<std::size_t>(t) * n_arm + a) * cfg.runs + r];
        secs.push_back(res.seconds);
        csv << names[t] << ',' << arms[a].label << ',' << r << ',' << res.seed << ','
            << res.seconds << ',' << res.initial_loss << ',' << res.final_loss << '\n';
      }
      const auto [mu, sd] = mean_std(secs);
      table << std::setw(24) << (fmt(mu, 2) + " ± " + fmt(sd, 2));
      m.set("metric." + names[t] + "." + arms[a].label + ".mean_seconds", mu);
      m.set("metric." + names[t] + "." + arms[a].label + ".std_seconds", sd);
    }
    table << '\n';
  }
  write_text(out_dir / "ablation.txt", table.str());
  write_text(out_dir / "ablation.csv", csv.str());
  m.set("output.table", (out_dir / "ablation.txt").string());
  m.set("output.csv", (out_dir / "ablation.csv").string());
  m.set("output.images", (out_dir / "images").string());
  m.write(out_dir / "manifest.txt");
  out << table.str();
  return kExitOk;
}

int cmd_report(RunConfig cfg, std::ostream& out, std::ostream& err) {
  if (cfg.dir.empty()) throw UsageError("report: --dir is required");
  const fs::path dir = cfg.dir;
  if (!fs::is_directory(dir)) throw UsageError("report: not a directory: " + dir.string());
  const auto refs = list_images(dir / "ref");
  if (refs.empty()) throw UsageError("report: no reference images in " + (dir / "ref").string());
  const auto syns = list_images(dir / "syn");
  const auto bases = list_images(dir / "baseline");
  const std::string method = cfg.ground_truth ? "GT" : "ours";

  struct Pair {
    std::string name;
    Image ref;
    Image syn;
    std::optional<Image> baseline;
  };
  std::vector<Pair> pairs;
  std::vector<std::string> skipped;
  for (const auto& [stem, path] : refs) {
    if (cfg.ground_truth) {
      Image r = read_image(path);
      pairs.push_back({stem, r, r, std::nullopt});
      continue;
    }
    auto it = syns.find(stem);
    if (it == syns.end()) {
      skipped.push_back(stem + " (no synthesis)");
      continue;
    }
    Pair p{stem, read_image(path), read_image(it->second), std::nullopt};
    if (!p.ref.same_size(p.syn)) {
      skipped.push_back(stem + " (size mismatch)");
      continue;
    }
    if (auto b = bases.find(stem); b != bases.end()) {
      Image bi = read_image(b->second);
      if (bi.same_size(p.ref)) p.baseline = std::move(bi);
      else skipped.push_back(stem + " baseline (size mismatch)");
    }
    pairs.push_back(std::move(p));
  }
  if (!cfg.ground_truth) {
    for (const auto& [stem, path] : syns) {
      if (!refs.count(stem)) skipped.push_back(stem + " (no reference)");
    }
  }
  for (const auto& s : skipped) err << "skipped: " << s << '\n';
  if (pairs.empty()) {
    err << "report: every pair was skipped\n";
    return kExitFailure;
  }

  std::optional<FeatureExtractor> ex;
  const fs::path weights = resolve_weights_path(cfg);
  if (!weights.empty() && (cfg.perceptual == "vgg" || cfg.embedding == "vgg")) {
    ex = load_backbone(cfg);
  }
  std::unique_ptr<PerceptualBackend> perceptual;
  if (cfg.perceptual == "vgg" && ex) perceptual = std::make_unique<ExtractorPerceptual>(*ex);
  const auto embedding = make_embedding(cfg, ex);
  const CropProtocol proto = crop_protocol(cfg);

  struct Row {
    std::string texture;
    std::string method;
    double lpips = NAN, c_fid = NAN, c_kid = NAN;
  };
  std::vector<std::string> methods = {method};
  bool any_baseline = false;
  for (const auto& p : pairs) any_baseline |= p.baseline.has_value();
  if (any_baseline) methods.insert(methods.begin(), "baseline");

  std::vector<Row> rows;
  bool lpips_disabled = false;
  bool crops_skipped = false;
  for (const auto& p : pairs) {
    for (const auto& meth : methods) {
      const Image* img = meth == "baseline" ? (p.baseline ? &*p.baseline : nullptr) : &p.syn;
      if (img == nullptr) continue;
      Row r{p.name, meth};
      try {
        r.lpips = perceptual_score(p.ref, *img, perceptual.get());
      } catch (const FeatureDisabled&) {
        lpips_disabled = true;
      }
      if (admits_crops(p.ref, proto) && admits_crops(*img, proto)) {
        r.c_fid = crop_metric(p.ref, *img, proto, CropMetric::kFid, *embedding);
        r.c_kid = crop_metric(p.ref, *img, proto, CropMetric::kKid, *embedding);
      } else {
        crops_skipped = true;
      }
      rows.push_back(r);
    }
  }
  if (lpips_disabled) err << "note: LPIPS disabled (no perceptual backend configured)\n";
  if (crops_skipped) {
    err << "note: crop metrics skipped for images smaller than " << proto.crop_size << "px\n";
  }

  struct Aggregate {
    double lpips, fid = NAN, c_fid, kid = NAN, c_kid;
  };
  std::map<std::string, Aggregate> agg;
  for (const auto& meth : methods) {
    std::vector<double> l, cf, ck;
    std::vector<Image> a, b;
    for (const auto& r : rows) {
      if (r.method != meth) continue;
      l.push_back(r.lpips);
      cf.push_back(r.c_fid);
      ck.push_back(r.c_kid);
    }
    for (const auto& p : pairs) {
      const Image* img = meth == "baseline" ? (p.baseline ? &*p.baseline : nullptr) : &p.syn;
      if (img == nullptr) continue;
      a.push_back(p.ref);
      b.push_back(*img);
    }
    Aggregate g{mean_finite(l), NAN, mean_finite(cf), NAN, mean_finite(ck)};
    if (a.size() >= 2) {
      try {
        const EmbeddingSet ea = embedding->embed_all(a);
        const EmbeddingSet eb = embedding->embed_all(b);
        g.fid = frechet_distance(ea, eb);
        g.kid = kid(ea, eb);
      } catch (const InvalidArgument& e) {
        err << "note: image-level FID/KID unavailable for " << meth << ": " << e.what() << '\n';
      }
    }
    agg[meth] = g;
  }

  const fs::path out_dir = cfg.out.empty() ? dir / "report" : fs::path(cfg.out);
  std::ostringstream table, csv;
  table << "# embedding " << embedding->id() << ", perceptual "
        << (perceptual ? perceptual->id() : std::string("disabled")) << ", crops "
        << proto.crop_count << "x" << proto.crop_size << "px seed " << proto.seed
        << (proto.ground_truth ? " (ground-truth mode)" : "") << '\n';
  table << std::left << std::setw(10) << "method" << std::setw(12) << "LPIPS" << std::setw(12)
        << "FID" << std::setw(12) << "c-FID" << std::setw(12) << "KID" << std::setw(12)
        << "c-KID" << '\n';
  csv << "texture,method,lpips,fid,c_fid,kid,c_kid\n";
  auto csv_num = [](double v) {
    std::ostringstream os;
    if (std::isfinite(v)) os << std::setprecision(10) << v;
    return os.str();
  };
  for (const auto& meth : methods) {
    const Aggregate& g = agg[meth];
    table << std::setw(10) << meth << std::setw(12) << fmt(g.lpips) << std::setw(12) << fmt(g.fid)
          << std::setw(12) << fmt(g.c_fid) << std::setw(12) << fmt(g.kid) << std::setw(12)
          << fmt(g.c_kid) << '\n';
    csv << "all," << meth << ',' << csv_num(g.lpips) << ',' << csv_num(g.fid) << ','
        << csv_num(g.c_fid) << ',' << csv_num(g.kid) << ',' << csv_num(g.c_kid) << '\n';
  }
  table << "\n# per texture\n"
        << std::setw(20) << "texture" << std::setw(10) << "method" << std::setw(12) << "LPIPS"
        << std::setw(12) << "c-FID" << std::setw(12) << "c-KID" << '\n';
  for (const auto& r : rows) {
    table << std::setw(20) << r.texture << std::setw(10) << r.method << std::setw(12)
          << fmt(r.lpips) << std::setw(12) << fmt(r.c_fid) << std::setw(12) << fmt(r.c_kid)
          << '\n';
    csv << r.texture << ',' << r.method << ',' << csv_num(r.lpips) << ",," << csv_num(r.c_fid)
        << ",," << csv_num(r.c_kid) << '\n';
  }

  std::vector<std::vector<std::optional<Image>>> grid_rows;
  for (const auto& p : pairs) {
    std::vector<std::optional<Image>> row{p.ref};
    if (any_baseline) row.push_back(p.baseline);
    row.push_back(p.syn);
    grid_rows.push_back(std::move(row));
  }
  const Image grid = compose_grid(grid_rows);

  write_text(out_dir / "metrics.txt", table.str());
  write_text(out_dir / "metrics.csv", csv.str());
  write_png(out_dir / "grid.png", grid);
  Manifest m;
  m.add_config(cfg);
  m.set("run.command", "report");
  m.set("run.version", std::string(kVersion));
  m.set("run.embedding", embedding->id());
  m.set("run.perceptual", perceptual ? perceptual->id() : std::string("disabled"));
  if (ex) m.set("run.weights_checksum", ex->weights_checksum());
  m.set("run.pairs", std::to_string(pairs.size()));
  m.set("run.skipped", std::to_string(skipped.size()));
  for (const auto& meth : methods) {
    const Aggregate& g = agg[meth];
    m.set("metric." + meth + ".lpips", g.lpips);
    m.set("metric." + meth + ".fid", g.fid);
    m.set("metric." + meth + ".c_fid", g.c_fid);
    m.set("metric." + meth + ".kid", g.kid);
    m.set("metric." + meth + ".c_kid", g.c_kid);
  }
  m.set("output.table", (out_dir / "metrics.txt").string());
  m.set("output.csv", (out_dir / "metrics.csv").string());
  m.set("output.grid", (out_dir / "grid.png").string());
  m.write(out_dir / "manifest.txt");
  out << table.str();
  return kExitOk;
}

int cmd_multiscale_sweep(RunConfig cfg, std::ostream& out, std::ostream& err) {
  if (cfg.ref.empty()) throw UsageError("multiscale-sweep: --ref is required");
  if (cfg.out.empty()) throw UsageError("multiscale-sweep: --out directory is required");
  if (cfg.sweep_scales.empty()) throw UsageError("multiscale-sweep: no scales to sweep");
  resolve_seed(cfg);
  const FeatureExtractor ex = load_backbone(cfg);
  const Image ref = read_image(cfg.ref);
  const std::string name = fs::path(cfg.ref).stem().string();
  const fs::path out_dir = cfg.out;
  fs::create_directories(out_dir);
  const FilterBankEmbedding embedding;
  const CropProtocol proto = crop_protocol(cfg);
  const bool crops = admits_crops(ref, proto);
  if (!crops) err << "note: reference smaller than crop size; crop metrics skipped\n";
  if (cfg.jobs > 1) err << "note: runs execute concurrently; runtimes include contention\n";
  for (int k : cfg.sweep_scales) {
    if (k >= 2) {
      err << "note: " << kReplicaNote << '\n';
      break;
    }
  }

  struct Result {
    SynthesisTrace trace;
    double c_fid = NAN, c_kid = NAN;
    PeriodicityReport periodicity;
    fs::path image;
  };
  std::vector<Result> results(cfg.sweep_scales.size());
  parallel_for(static_cast<int>(results.size()), cfg.jobs, [&](int i) {
    RunConfig c = cfg;
    c.scales = cfg.sweep_scales[i];
    auto [img, trace] = synthesize_multiscale(ref, ex, to_synthesis_config(c));
    Result& r = results[i];
    r.image = out_dir / (name + "_K" + std::to_string(c.scales) + ".png");
    write_png(r.image, img);
    write_trace(out_dir / (name + "_K" + std::to_string(c.scales) + ".trace.txt"), trace);
    if (crops) {
      r.c_fid = crop_metric(ref, img, proto, CropMetric::kFid, embedding);
      r.c_kid = crop_metric(ref, img, proto, CropMetric::kKid, embedding);
    }
    r.periodicity = periodicity_diagnostic(img);
    r.trace = std::move(trace);
  });

  std::ostringstream table, csv;
  table << "# multi-scale sweep of " << name << ", seed " << *cfg.seed << ", embedding "
        << embedding.id() << '\n';
  table << std::left << std::setw(4) << "K" << std::setw(12) << "seconds" << std::setw(14)
        << "final_loss" << std::setw(12) << "c-FID" << std::setw(12) << "c-KID" << std::setw(8)
        << "peaks" << "replica" << '\n';
  csv << "scales,seconds,final_loss,c_fid,c_kid,periodicity_peaks,replica_suspected\n";
  Manifest m;
  m.add_config(cfg);
  record_run(m, ex, "multiscale-sweep");
  for (std::size_t i = 0; i < results.size(); ++i) {
    const Result& r = results[i];
    const int k = cfg.sweep_scales[i];
    const double loss = r.trace.scales.back().final_loss;
    const bool replica = r.periodicity.replica_suspected();
    table << std::setw(4) << k << std::setw(12) << fmt(r.trace.total_seconds(), 2)
          << std::setw(14) << fmt(loss, 5) << std::setw(12) << fmt(r.c_fid) << std::setw(12)
          << fmt(r.c_kid) << std::setw(8) << r.periodicity.peaks.size()
          << (replica ? "suspected" : "no") << '\n';
    csv << k << ',' << r.trace.total_seconds() << ',' << loss << ',' << r.c_fid << ','
        << r.c_kid << ',' << r.periodicity.peaks.size() << ',' << (replica ? 1 : 0) << '\n';
    const std::string p = "K" + std::to_string(k) + ".";
    record_trace(m, "run." + p, r.trace);
    m.set("metric." + p + "c_fid", r.c_fid);
    m.set("metric." + p + "c_kid", r.c_kid);
    record_periodicity(m, "metric." + p, r.periodicity);
    m.set("output." + p + "image", r.image.string());
  }
  write_text(out_dir / "sweep.txt", table.str());
  write_text(out_dir / "sweep.csv", csv.str());
  m.set("output.table", (out_dir / "sweep.txt").string());
  m.set("output.csv", (out_dir / "sweep.csv").string());
  m.write(out_dir / "manifest.txt");
  out << table.str();
  return kExitOk;
}

int cmd_make_weights(const std::string& path, std::uint64_t seed, std::ostream& out) {
  if (path.empty()) throw UsageError("make-weights: --out is required");
  const Vgg19 net = Vgg19::random_he(seed);
  const fs::path p = path;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string checksum = net.write(p);
  out << "wrote " << p.string() << " (" << net.id() << ", checksum " << checksum << ")\n";
  return kExitOk;
}

}  // namespace swtex::cli
