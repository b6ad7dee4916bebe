#include "swtex/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "swtex/errors.hpp"
#include "swtex/lbfgs.hpp"
#include "swtex/resample.hpp"

namespace swtex {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class SlicingObjective final : public SteppedObjective {
 public:
  SlicingObjective(const FeatureExtractor& extractor, const Image& ref, const SynthesisConfig& cfg,
                   Rng rng, int height, int width)
      : extractor_(extractor),
        ref_(ref),
        cfg_(cfg),
        weights_(cfg.effective_weights()),
        rng_(std::move(rng)),
        height_(height),
        width_(width) {
    if (cfg_.cache_reference_features) ref_features_ = extractor_.extract(ref_);
  }

  bool begin_step(int iteration) override {
    if (iteration > 0 && !cfg_.resample_directions) return false;
    if (!cfg_.cache_reference_features || ref_features_.layers.empty()) {
      ref_features_ = extractor_.extract(ref_);
    }
    auto dirs = draw_directions(ref_features_, weights_, cfg_.slices, rng_);
    target_.emplace(ref_features_, std::move(dirs), cfg_.matching);
    return true;
  }

  double evaluate(std::span<const double> x, std::span<double> grad) override {
    Tensor3f input(height_, width_, 3);
    auto in = input.values();
    for (std::size_t i = 0; i < x.size(); ++i) in[i] = static_cast<float>(x[i]);
    FeatureExtractor::Tape tape;
    FeatureStack<float> feats = extractor_.extract_normalized(input, &tape);
    FeatureStack<float> dfeats;
    const double loss = target_->evaluate(feats, &dfeats);
    if (!std::isfinite(loss)) return loss;
    Tensor3f g = extractor_.backward(tape, dfeats, height_, width_);
    auto gv = g.values();
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = gv[i];
    return loss;
  }

 private:
  const FeatureExtractor& extractor_;
  const Image& ref_;
  const SynthesisConfig& cfg_;
  LossWeights weights_;
  Rng rng_;
  int height_;
  int width_;
  FeatureStack<float> ref_features_;
  std::optional<SortedTarget<float>> target_;
};

}  // namespace

LossWeights SynthesisConfig::effective_weights() const {
  LossWeights w = weights;
  if (width_term) w.width_weights = w.height_weights;
  return w;
}

void SynthesisConfig::disable_height_term() {
  for (auto& [tag, value] : weights.height_weights) value = 0.0;
}

void SynthesisConfig::validate(int height, int width, const FeatureExtractor& extractor) const {
  if (scales < 0 || scales > 16) throw_invalid("scales must be in [0, 16]");
  if (iterations < 0) throw_invalid("iterations must be nonnegative");
  if (!(learning_rate > 0.0)) throw_invalid("learning rate must be positive");
  const int factor = 1 << scales;
  if (height % factor != 0 || width % factor != 0) {
    throw_invalid("2^" + std::to_string(scales) + " does not divide reference size " +
                  std::to_string(height) + "x" + std::to_string(width));
  }
  extractor.check_input_size(height / factor, width / factor);
  for (const auto& [tag, value] : weights.channel_weights) {
    if (value < 0.0) throw_invalid("negative channel weight for " + tag);
  }
  for (const auto& [tag, value] : weights.height_weights) {
    if (value < 0.0) throw_invalid("negative height weight for " + tag);
  }
}

double SynthesisTrace::total_seconds() const {
  double s = 0.0;
  for (const auto& sc : scales) s += sc.seconds;
  return s;
}

void SynthesisTrace::write_table(std::ostream& out) const {
  out << "# iteration scale loss elapsed_seconds\n";
  for (const auto& sc : scales) {
    for (std::size_t i = 0; i < sc.losses.size(); ++i) {
      out << i << ' ' << sc.level << ' ' << std::setprecision(9) << sc.losses[i] << ' '
          << std::setprecision(6) << sc.elapsed[i] << '\n';
    }
  }
}

Image init_noise(const Image& ref, Rng& rng) {
  const auto mean = ref.channel_means();
  const auto sd = ref.channel_stddevs();
  std::normal_distribution<double> normal(0.0, 1.0);
  Image out(ref.height(), ref.width());
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = static_cast<float>(mean[c] + sd[c] * normal(rng));
      }
    }
  }
  out.clamp_unit();
  return out;
}

std::pair<Image, SynthesisTrace> synthesize_single_scale(const Image& ref, const Image& init,
                                                         const FeatureExtractor& extractor,
                                                         const SynthesisConfig& cfg,
                                                         int stream_index) {
  if (cfg.matching == SampleMatching::kStrict && !ref.same_size(init)) {
    throw_invalid("synthesize_single_scale: init is " + std::to_string(init.height()) + "x" +
                  std::to_string(init.width()) + " but reference is " +
                  std::to_string(ref.height()) + "x" + std::to_string(ref.width()));
  }
  extractor.check_input_size(ref.height(), ref.width());
  extractor.check_input_size(init.height(), init.width());

  const auto t0 = Clock::now();
  ScaleTrace trace;
  trace.height = init.height();
  trace.width = init.width();

  Image result = init;
  if (cfg.iterations > 0) {
    SlicingObjective objective(extractor, ref, cfg,
                               make_rng(cfg.seed, Stream::kDirections, stream_index),
                               init.height(), init.width());
    Tensor3f start = preprocess(init, extractor.normalization());
    std::vector<double> x(start.values().begin(), start.values().end());

    LbfgsOptions opts;
    opts.max_iterations = cfg.iterations;
    opts.learning_rate = cfg.learning_rate;
    opts.history = cfg.lbfgs_history;

    LbfgsResult res;
    try {
      res = minimize_lbfgs(objective, x, opts, [&](const LbfgsStep& s) {
        trace.losses.push_back(s.loss);
        trace.elapsed.push_back(seconds_since(t0));
      });
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << e.what() << "\nloss trace so far:\n";
      SynthesisTrace partial;
      partial.scales.push_back(trace);
      partial.write_table(msg);
      throw NumericalError(msg.str());
    }
    trace.evaluations = res.evaluations;
    if (!res.steps.empty()) {
      trace.initial_loss = res.steps.front().loss;
      trace.final_loss = res.steps.back().accepted;
    }
    if (res.moved) {
      Tensor3f out(init.height(), init.width(), 3);
      auto ov = out.values();
      for (std::size_t i = 0; i < x.size(); ++i) ov[i] = static_cast<float>(x[i]);
      result = inverse_preprocess(out, extractor.normalization());
      result.clamp_unit();
    }
  }
  trace.seconds = seconds_since(t0);
  trace.result = result;

  SynthesisTrace out;
  out.scales.push_back(std::move(trace));
  return {std::move(result), std::move(out)};
}

std::pair<Image, SynthesisTrace> synthesize_multiscale(const Image& ref,
                                                       const FeatureExtractor& extractor,
                                                       const SynthesisConfig& cfg) {
  cfg.validate(ref.height(), ref.width(), extractor);
  const int k = cfg.scales;
  std::vector<Image> pyramid;
  pyramid.reserve(k + 1);
  for (int i = 0; i <= k; ++i) pyramid.push_back(downsample(ref, 1 << i));

  Rng noise_rng = make_rng(cfg.seed, Stream::kNoise);
  Image current = init_noise(pyramid[k], noise_rng);
  SynthesisTrace trace;
  for (int i = 0; i <= k; ++i) {
    const int level = k - i;
    auto [img, scale_trace] = synthesize_single_scale(pyramid[level], current, extractor, cfg, i);
    scale_trace.scales.front().level = level;
    trace.scales.push_back(std::move(scale_trace.scales.front()));
    current = i < k ? upsample2x(img) : std::move(img);
  }
  return {std::move(current), std::move(trace)};
}

}  // namespace swtex
