#include "swtex/sw_loss.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <utility>

namespace swtex {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

template <typename T>
bool all_finite(std::span<const T> v) {
  for (T x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

template <typename T>
int term_dim(SliceTerm term, const Tensor3<T>& f) {
  switch (term) {
    case SliceTerm::kChannel: return f.channels();
    case SliceTerm::kHeight: return f.height();
    case SliceTerm::kWidth: return f.width();
  }
  return 0;
}

template <typename T>
ProjectionBatch<T> project(SliceTerm term, const Tensor3<T>& f, const DirectionSet<T>& dirs) {
  switch (term) {
    case SliceTerm::kChannel: return project_channelwise(f, dirs);
    case SliceTerm::kHeight: return project_heightwise(f, dirs);
    case SliceTerm::kWidth: return project_widthwise(f, dirs);
  }
  return {};
}

// Adds the pullback of `dproj` (count x samples) onto `grad` (same shape as
// the projected tensor).
template <typename T>
void backproject(SliceTerm term, const DirectionSet<T>& dirs, const ProjectionBatch<T>& dproj,
                 Tensor3<T>& grad) {
  const int h = grad.height(), w = grad.width(), n = grad.channels();
  ConstMap<T> v(dirs.vectors.data(), dirs.count, dirs.dim);
  ConstMap<T> dp(dproj.values.data(), dproj.count, dproj.samples);
  switch (term) {
    case SliceTerm::kChannel: {
      MutMap<T> g(grad.data(), h * w, n);
      g.noalias() += dp.transpose() * v;
      break;
    }
    case SliceTerm::kHeight: {
      MutMap<T> g(grad.data(), h, w * n);
      g.noalias() += v.transpose() * dp;
      break;
    }
    case SliceTerm::kWidth: {
      for (int y = 0; y < h; ++y) {
        MutMap<T> g(grad.data() + static_cast<std::size_t>(y) * w * n, w, n);
        ConstStridedMap<T> dpy(dproj.values.data() + static_cast<std::size_t>(y) * n,
                               dproj.count, n, Eigen::OuterStride<>(dproj.samples));
        g.noalias() += v.transpose() * dpy;
      }
      break;
    }
  }
}

// Value of the sorted vector `s` resampled to `len` points by linear
// interpolation between order statistics.
struct QuantilePos {
  std::size_t lo;
  double frac;
};

QuantilePos quantile_pos(std::size_t i, std::size_t n, std::size_t len) {
  if (n == 1 || len == 1) return {0, 0.0};
  const double pos = static_cast<double>(i) * static_cast<double>(n - 1) /
                     static_cast<double>(len - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  if (lo >= n - 1) return {n - 1, 0.0};
  return {lo, pos - static_cast<double>(lo)};
}

template <typename T>
double interp(std::span<const T> s, QuantilePos q) {
  if (q.frac == 0.0) return s[q.lo];
  return (1.0 - q.frac) * s[q.lo] + q.frac * s[q.lo + 1];
}

// (1/L) * sum_i (a_i - b_i)^2 for sorted `sa`, `sb`, resampled to a common
// length L when allowed. Writes d loss / d sa into `dsa` when non-empty.
template <typename T>
double sorted_distance(std::span<const T> sa, std::span<const T> sb, SampleMatching matching,
                       std::span<T> dsa) {
  const std::size_t na = sa.size(), nb = sb.size();
  if (na == 0 || nb == 0) throw_invalid("sw1d: empty input");
  if (na != nb && matching == SampleMatching::kStrict) {
    throw_invalid("sw1d: length mismatch " + std::to_string(na) + " vs " +
                  std::to_string(nb));
  }
  double acc = 0.0;
  if (na == nb) {
    const double scale = 2.0 / static_cast<double>(na);
    for (std::size_t i = 0; i < na; ++i) {
      const double d = static_cast<double>(sa[i]) - static_cast<double>(sb[i]);
      acc += d * d;
      if (!dsa.empty()) dsa[i] = static_cast<T>(scale * d);
    }
    return acc / static_cast<double>(na);
  }
  const std::size_t len = std::max(na, nb);
  const double scale = 2.0 / static_cast<double>(len);
  if (!dsa.empty()) std::fill(dsa.begin(), dsa.end(), T{0});
  if (na > nb) {
    for (std::size_t i = 0; i < len; ++i) {
      const double d = sa[i] - interp(sb, quantile_pos(i, nb, len));
      acc += d * d;
      if (!dsa.empty()) dsa[i] = static_cast<T>(scale * d);
    }
  } else {
    for (std::size_t i = 0; i < len; ++i) {
      const QuantilePos q = quantile_pos(i, na, len);
      const double d = interp(sa, q) - static_cast<double>(sb[i]);
      acc += d * d;
      if (!dsa.empty()) {
        dsa[q.lo] += static_cast<T>(scale * d * (1.0 - q.frac));
        if (q.frac != 0.0) dsa[q.lo + 1] += static_cast<T>(scale * d * q.frac);
      }
    }
  }
  return acc / static_cast<double>(len);
}

struct SortScratch {
  std::vector<std::uint32_t> keys, keys_tmp;
  std::vector<int> idx, idx_tmp;
};

// Order-preserving map from float to unsigned; -0 and +0 share a key.
inline std::uint32_t float_key(float v) {
  const auto u = std::bit_cast<std::uint32_t>(v == 0.0f ? 0.0f : v);
  return (u & 0x80000000u) ? ~u : (u | 0x80000000u);
}

// Stable LSD radix sort over 11/11/10-bit digits.
void radix_sort(std::span<const float> row, SortScratch& s, std::span<float> sorted,
                std::vector<int>* order) {
  const std::size_t n = row.size();
  s.keys.resize(n);
  s.keys_tmp.resize(n);
  s.idx.resize(n);
  s.idx_tmp.resize(n);
  std::array<std::array<std::uint32_t, 2048>, 3> hist{};
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t k = float_key(row[i]);
    s.keys[i] = k;
    s.idx[i] = static_cast<int>(i);
    ++hist[0][k & 2047u];
    ++hist[1][(k >> 11) & 2047u];
    ++hist[2][k >> 22];
  }
  for (int pass = 0; pass < 3; ++pass) {
    auto& h = hist[pass];
    if (std::find(h.begin(), h.end(), n) != h.end()) continue;
    std::uint32_t sum = 0;
    for (auto& c : h) {
      const std::uint32_t t = c;
      c = sum;
      sum += t;
    }
    const int shift = 11 * pass;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t k = s.keys[i];
      const std::uint32_t dst = h[(k >> shift) & 2047u]++;
      s.keys_tmp[dst] = k;
      s.idx_tmp[dst] = s.idx[i];
    }
    s.keys.swap(s.keys_tmp);
    s.idx.swap(s.idx_tmp);
  }
  for (std::size_t i = 0; i < n; ++i) sorted[i] = row[s.idx[i]];
  if (order != nullptr) order->assign(s.idx.begin(), s.idx.end());
}

// Sorts `row` ascending; ties are ordered by original index, i.e. the result
// matches a stable sort. `order[i]` is the source index of sorted element i.
template <typename T>
void sort_with_order(std::span<const T> row, SortScratch& scratch, std::vector<T>& sorted,
                     std::vector<int>* order) {
  const std::size_t n = row.size();
  sorted.resize(n);
  if constexpr (std::is_same_v<T, float>) {
    if (n >= 64) {
      radix_sort(row, scratch, sorted, order);
      return;
    }
  }
  std::vector<int>& idx = scratch.idx;
  idx.resize(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return row[a] < row[b]; });
  for (std::size_t i = 0; i < n; ++i) sorted[i] = row[idx[i]];
  if (order != nullptr) order->assign(idx.begin(), idx.end());
}

void check_dims(const char* what, int expected, int got) {
  if (expected != got) {
    throw_invalid(std::string(what) + ": direction dim " + std::to_string(got) +
                  " does not match tensor dim " + std::to_string(expected));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FeatureStack

template <typename T>
const FeatureLayer<T>* FeatureStack<T>::find(std::string_view tag) const {
  for (const auto& l : layers) {
    if (l.tag == tag) return &l;
  }
  return nullptr;
}

template <typename T>
FeatureLayer<T>* FeatureStack<T>::find(std::string_view tag) {
  for (auto& l : layers) {
    if (l.tag == tag) return &l;
  }
  return nullptr;
}

template <typename T>
void FeatureStack<T>::validate() const {
  std::set<std::string> seen;
  for (const auto& l : layers) {
    if (!seen.insert(l.tag).second) throw_invalid("FeatureStack: duplicate tag " + l.tag);
    if (!all_finite(l.tensor.values())) {
      throw_invalid("FeatureStack: non-finite activation in layer " + l.tag);
    }
  }
}

template <typename T>
FeatureStack<T> FeatureStack<T>::zeros_like() const {
  FeatureStack out;
  out.layers.reserve(layers.size());
  for (const auto& l : layers) {
    out.layers.push_back(
        {l.tag, Tensor3<T>(l.tensor.height(), l.tensor.width(), l.tensor.channels())});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Directions and projections

template <typename T>
DirectionSet<T> sample_directions(int count, int dim, Rng& rng) {
  if (count <= 0 || dim <= 0) {
    throw_invalid("sample_directions: count and dim must be positive (count=" +
                  std::to_string(count) + ", dim=" + std::to_string(dim) + ")");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  DirectionSet<T> out{dim, count, std::vector<T>(static_cast<std::size_t>(count) * dim)};
  std::vector<double> v(dim);
  for (int d = 0; d < count; ++d) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (double& x : v) {
        x = normal(rng);
        norm2 += x * x;
      }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < dim; ++i) {
      out.vectors[static_cast<std::size_t>(d) * dim + i] = static_cast<T>(v[i] * inv);
    }
  }
  return out;
}

template <typename T>
ProjectionBatch<T> project_channelwise(const Tensor3<T>& f, const DirectionSet<T>& dirs) {
  check_dims("project_channelwise", f.channels(), dirs.dim);
  const int m = f.pixels();
  ProjectionBatch<T> out{dirs.count, m, std::vector<T>(static_cast<std::size_t>(dirs.count) * m)};
  if (m == 0) return out;
  ConstMap<T> feat(f.data(), m, f.channels());
  ConstMap<T> v(dirs.vectors.data(), dirs.count, dirs.dim);
  MutMap<T> p(out.values.data(), dirs.count, m);
  p.noalias() = v * feat.transpose();
  return out;
}

template <typename T>
ProjectionBatch<T> project_heightwise(const Tensor3<T>& f, const DirectionSet<T>& dirs) {
  check_dims("project_heightwise", f.height(), dirs.dim);
  const int samples = f.width() * f.channels();
  ProjectionBatch<T> out{dirs.count, samples,
                         std::vector<T>(static_cast<std::size_t>(dirs.count) * samples)};
  if (samples == 0) return out;
  ConstMap<T> feat(f.data(), f.height(), samples);
  ConstMap<T> v(dirs.vectors.data(), dirs.count, dirs.dim);
  MutMap<T> p(out.values.data(), dirs.count, samples);
  p.noalias() = v * feat;
  return out;
}

template <typename T>
ProjectionBatch<T> project_widthwise(const Tensor3<T>& f, const DirectionSet<T>& dirs) {
  check_dims("project_widthwise", f.width(), dirs.dim);
  const int h = f.height(), w = f.width(), n = f.channels();
  const int samples = h * n;
  ProjectionBatch<T> out{dirs.count, samples,
                         std::vector<T>(static_cast<std::size_t>(dirs.count) * samples)};
  ConstMap<T> v(dirs.vectors.data(), dirs.count, dirs.dim);
  for (int y = 0; y < h; ++y) {
    ConstMap<T> slice(f.data() + static_cast<std::size_t>(y) * w * n, w, n);
    StridedMap<T> p(out.values.data() + static_cast<std::size_t>(y) * n, dirs.count, n,
                    Eigen::OuterStride<>(samples));
    p.noalias() = v * slice;
  }
  return out;
}

// ---------------------------------------------------------------------------
// 1D and per-layer losses

template <typename T>
double sw1d(std::span<const T> p, std::span<const T> q, SampleMatching matching) {
  if (matching == SampleMatching::kStrict && p.size() != q.size()) {
    throw_invalid("sw1d: length mismatch " + std::to_string(p.size()) + " vs " +
                  std::to_string(q.size()));
  }
  if (p.empty() || q.empty()) throw_invalid("sw1d: empty input");
  std::vector<T> sp(p.begin(), p.end()), sq(q.begin(), q.end());
  std::sort(sp.begin(), sp.end());
  std::sort(sq.begin(), sq.end());
  return sorted_distance<T>(sp, sq, matching, {});
}

template <typename T>
double layer_loss(const ProjectionBatch<T>& a, const ProjectionBatch<T>& b,
                  SampleMatching matching) {
  if (a.count != b.count || a.count <= 0) {
    throw_invalid("layer_loss: direction counts differ (" + std::to_string(a.count) + " vs " +
                  std::to_string(b.count) + ")");
  }
  if (matching == SampleMatching::kStrict && a.samples != b.samples) {
    throw_invalid("layer_loss: sample counts differ (" + std::to_string(a.samples) + " vs " +
                  std::to_string(b.samples) + ")");
  }
  double acc = 0.0;
  for (int d = 0; d < a.count; ++d) acc += sw1d<T>(a.row(d), b.row(d), matching);
  return acc / a.count;
}

// ---------------------------------------------------------------------------
// Weights and direction draws

const char* to_string(SliceTerm term) {
  switch (term) {
    case SliceTerm::kChannel: return "channel";
    case SliceTerm::kHeight: return "height";
    case SliceTerm::kWidth: return "width";
  }
  return "?";
}

const std::map<std::string, double>& LossWeights::map(SliceTerm term) const {
  switch (term) {
    case SliceTerm::kChannel: return channel_weights;
    case SliceTerm::kHeight: return height_weights;
    case SliceTerm::kWidth: return width_weights;
  }
  return channel_weights;
}

std::map<std::string, double>& LossWeights::map(SliceTerm term) {
  return const_cast<std::map<std::string, double>&>(std::as_const(*this).map(term));
}

double LossWeights::weight(SliceTerm term, const std::string& tag) const {
  const auto& m = map(term);
  auto it = m.find(tag);
  return it == m.end() ? 0.0 : it->second;
}

LossWeights LossWeights::uniform(const std::vector<std::string>& channel_layers,
                                 const std::vector<std::string>& height_layers) {
  LossWeights w;
  for (const auto& t : channel_layers) w.channel_weights[t] = 1.0;
  for (const auto& t : height_layers) w.height_weights[t] = 1.0;
  return w;
}

template <typename T>
SliceDirections<T> draw_directions(const FeatureStack<T>& shapes, const LossWeights& weights,
                                   const SliceCounts& counts, Rng& rng,
                                   std::span<const SliceTerm> terms) {
  SliceDirections<T> out;
  for (SliceTerm term : terms) {
    const std::optional<int>& fixed = term == SliceTerm::kChannel  ? counts.channel
                                      : term == SliceTerm::kHeight ? counts.height
                                                                   : counts.width;
    if (fixed && *fixed <= 0) throw_invalid("draw_directions: slice count must be positive");
    for (const auto& layer : shapes.layers) {
      const double w = weights.weight(term, layer.tag);
      if (w < 0.0) throw_invalid("draw_directions: negative weight for " + layer.tag);
      if (w == 0.0) continue;
      const int dim = term_dim(term, layer.tensor);
      const int count = fixed ? *fixed : dim;
      out.terms.push_back({layer.tag, term, w, sample_directions<T>(count, dim, rng)});
    }
  }
  return out;
}

template <typename T>
SliceDirections<T> draw_directions(const FeatureStack<T>& shapes, const LossWeights& weights,
                                   const SliceCounts& counts, Rng& rng) {
  static constexpr SliceTerm kAll[] = {SliceTerm::kChannel, SliceTerm::kHeight,
                                       SliceTerm::kWidth};
  return draw_directions(shapes, weights, counts, rng, std::span<const SliceTerm>(kAll));
}

// ---------------------------------------------------------------------------
// SortedTarget

template <typename T>
SortedTarget<T>::SortedTarget(const FeatureStack<T>& reference, SliceDirections<T> directions,
                              SampleMatching matching)
    : directions_(std::move(directions)), matching_(matching) {
  reference.validate();
  tags_.reserve(reference.layers.size());
  for (const auto& l : reference.layers) tags_.push_back(l.tag);

  SortScratch scratch;
  std::vector<T> sorted;
  for (const auto& td : directions_.terms) {
    std::size_t index = reference.layers.size();
    for (std::size_t i = 0; i < reference.layers.size(); ++i) {
      if (reference.layers[i].tag == td.tag) index = i;
    }
    if (index == reference.layers.size()) {
      throw_invalid("SortedTarget: no layer " + td.tag + " in reference stack");
    }
    const Tensor3<T>& f = reference.layers[index].tensor;
    ProjectionBatch<T> proj = project(td.term, f, td.dirs);
    for (int d = 0; d < proj.count; ++d) {
      auto row = proj.row(d);
      sort_with_order<T>(row, scratch, sorted, nullptr);
      std::copy(sorted.begin(), sorted.end(), row.begin());
    }
    terms_.push_back(
        {index, f.height(), f.width(), f.channels(), std::move(proj.values), proj.samples});
  }
}

template <typename T>
double SortedTarget<T>::evaluate(const FeatureStack<T>& candidate, FeatureStack<T>* grad) const {
  return evaluate_impl(candidate, grad, nullptr);
}

template <typename T>
typename SortedTarget<T>::Breakdown SortedTarget<T>::evaluate_terms(
    const FeatureStack<T>& candidate) const {
  Breakdown b;
  evaluate_impl(candidate, nullptr, &b);
  return b;
}

template <typename T>
double SortedTarget<T>::evaluate_impl(const FeatureStack<T>& candidate, FeatureStack<T>* grad,
                                      Breakdown* breakdown) const {
  if (candidate.layers.size() != tags_.size()) {
    throw_invalid("slicing loss: candidate has " + std::to_string(candidate.layers.size()) +
                  " layers, reference has " + std::to_string(tags_.size()));
  }
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (candidate.layers[i].tag != tags_[i]) {
      throw_invalid("slicing loss: layer tag mismatch (" + candidate.layers[i].tag + " vs " +
                    tags_[i] + ")");
    }
  }
  if (grad != nullptr) *grad = candidate.zeros_like();

  SortScratch scratch;
  std::vector<T> sorted;
  std::vector<int> order;
  std::vector<T> dsorted;
  double total = 0.0;

  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const Term& ref = terms_[t];
    const TermDirections<T>& td = directions_.terms[t];
    const Tensor3<T>& f = candidate.layers[ref.layer_index].tensor;
    if (f.channels() != ref.channels) {
      throw_invalid("slicing loss: channel count mismatch in layer " + td.tag);
    }
    if (td.term == SliceTerm::kHeight && f.height() != ref.height) {
      throw_invalid("height_slice_loss: height mismatch in layer " + td.tag + " (" +
                    std::to_string(f.height()) + " vs " + std::to_string(ref.height) + ")");
    }
    if (td.term == SliceTerm::kWidth && f.width() != ref.width) {
      throw_invalid("width slice loss: width mismatch in layer " + td.tag);
    }
    if (matching_ == SampleMatching::kStrict &&
        (f.height() != ref.height || f.width() != ref.width)) {
      throw_invalid("slicing loss: shape mismatch in layer " + td.tag + " (" +
                    f.shape_string() + " vs " + std::to_string(ref.height) + "x" +
                    std::to_string(ref.width) + "x" + std::to_string(ref.channels) + ")");
    }
    if (!all_finite(f.values())) {
      throw NumericalError("slicing loss: non-finite activation in layer " + td.tag);
    }

    ProjectionBatch<T> proj = project(td.term, f, td.dirs);
    ProjectionBatch<T> dproj;
    if (grad != nullptr) {
      dproj = {proj.count, proj.samples, std::vector<T>(proj.values.size())};
      dsorted.resize(proj.samples);
    }
    const double row_scale = td.weight / proj.count;
    double term_loss = 0.0;
    for (int d = 0; d < proj.count; ++d) {
      sort_with_order<T>(proj.row(d), scratch, sorted, &order);
      std::span<const T> target(ref.sorted.data() + static_cast<std::size_t>(d) * ref.samples,
                                ref.samples);
      term_loss += sorted_distance<T>(sorted, target, matching_,
                                      grad ? std::span<T>(dsorted) : std::span<T>());
      if (grad != nullptr) {
        auto drow = dproj.row(d);
        for (int i = 0; i < proj.samples; ++i) {
          drow[order[i]] = static_cast<T>(row_scale * dsorted[i]);
        }
      }
    }
    const double weighted = row_scale * term_loss;
    total += weighted;
    if (breakdown != nullptr) {
      (td.term == SliceTerm::kChannel  ? breakdown->channel
       : td.term == SliceTerm::kHeight ? breakdown->height
                                       : breakdown->width) += weighted;
    }
    if (grad != nullptr) {
      backproject(td.term, td.dirs, dproj, grad->layers[ref.layer_index].tensor);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Convenience entry points

template <typename T>
double slicing_loss(const FeatureStack<T>& a, const FeatureStack<T>& b,
                    const SliceDirections<T>& directions, SampleMatching matching,
                    FeatureStack<T>* grad_a) {
  SortedTarget<T> target(b, directions, matching);
  return target.evaluate(a, grad_a);
}

namespace {

template <typename T>
void check_stacks(const FeatureStack<T>& a, const FeatureStack<T>& b) {
  a.validate();
  b.validate();
  if (a.layers.size() != b.layers.size()) throw_invalid("slicing loss: layer count mismatch");
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].tag != b.layers[i].tag) {
      throw_invalid("slicing loss: layer tag mismatch (" + a.layers[i].tag + " vs " +
                    b.layers[i].tag + ")");
    }
  }
}

template <typename T>
double loss_for_terms(const FeatureStack<T>& a, const FeatureStack<T>& b,
                      const LossWeights& weights, Rng& rng, const SliceCounts& counts,
                      SampleMatching matching, std::span<const SliceTerm> terms) {
  check_stacks(a, b);
  for (SliceTerm term : terms) {
    if (term == SliceTerm::kChannel) continue;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
      if (weights.weight(term, a.layers[i].tag) == 0.0) continue;
      const auto& fa = a.layers[i].tensor;
      const auto& fb = b.layers[i].tensor;
      if (term == SliceTerm::kHeight && fa.height() != fb.height()) {
        throw_invalid("height_slice_loss: height mismatch in layer " + a.layers[i].tag);
      }
    }
  }
  SliceDirections<T> dirs = draw_directions(b, weights, counts, rng, terms);
  return slicing_loss(a, b, dirs, matching);
}

}  // namespace

template <typename T>
double channel_slice_loss(const FeatureStack<T>& a, const FeatureStack<T>& b,
                          const LossWeights& weights, Rng& rng, const SliceCounts& counts,
                          SampleMatching matching) {
  static constexpr SliceTerm kTerms[] = {SliceTerm::kChannel};
  return loss_for_terms(a, b, weights, rng, counts, matching, std::span<const SliceTerm>(kTerms));
}

template <typename T>
double height_slice_loss(const FeatureStack<T>& a, const FeatureStack<T>& b,
                         const LossWeights& weights, Rng& rng, const SliceCounts& counts,
                         SampleMatching matching) {
  static constexpr SliceTerm kTerms[] = {SliceTerm::kHeight};
  return loss_for_terms(a, b, weights, rng, counts, matching, std::span<const SliceTerm>(kTerms));
}

template <typename T>
double slicing_loss(const FeatureStack<T>& a, const FeatureStack<T>& b,
                    const LossWeights& weights, Rng& rng, const SliceCounts& counts,
                    SampleMatching matching) {
  static constexpr SliceTerm kTerms[] = {SliceTerm::kChannel, SliceTerm::kHeight,
                                         SliceTerm::kWidth};
  return loss_for_terms(a, b, weights, rng, counts, matching, std::span<const SliceTerm>(kTerms));
}

#define SWTEX_INSTANTIATE(T)                                                                    \
  template class FeatureStack<T>;                                                               \
  template class SortedTarget<T>;                                                               \
  template DirectionSet<T> sample_directions<T>(int, int, Rng&);                                \
  template ProjectionBatch<T> project_channelwise<T>(const Tensor3<T>&, const DirectionSet<T>&); \
  template ProjectionBatch<T> project_heightwise<T>(const Tensor3<T>&, const DirectionSet<T>&);  \
  template ProjectionBatch<T> project_widthwise<T>(const Tensor3<T>&, const DirectionSet<T>&);   \
  template double sw1d<T>(std::span<const T>, std::span<const T>, SampleMatching);              \
  template double layer_loss<T>(const ProjectionBatch<T>&, const ProjectionBatch<T>&,           \
                                SampleMatching);                                                \
  template SliceDirections<T> draw_directions<T>(const FeatureStack<T>&, const LossWeights&,    \
                                                 const SliceCounts&, Rng&,                      \
                                                 std::span<const SliceTerm>);                   \
  template SliceDirections<T> draw_directions<T>(const FeatureStack<T>&, const LossWeights&,    \
                                                 const SliceCounts&, Rng&);                     \
  template double slicing_loss<T>(const FeatureStack<T>&, const FeatureStack<T>&,               \
                                  const SliceDirections<T>&, SampleMatching, FeatureStack<T>*); \
  template double channel_slice_loss<T>(const FeatureStack<T>&, const FeatureStack<T>&,         \
                                        const LossWeights&, Rng&, const SliceCounts&,           \
                                        SampleMatching);                                        \
  template double height_slice_loss<T>(const FeatureStack<T>&, const FeatureStack<T>&,          \
                                       const LossWeights&, Rng&, const SliceCounts&,            \
                                       SampleMatching);                                         \
  template double slicing_loss<T>(const FeatureStack<T>&, const FeatureStack<T>&,               \
                                  const LossWeights&, Rng&, const SliceCounts&, SampleMatching);

SWTEX_INSTANTIATE(float)
SWTEX_INSTANTIATE(double)

#undef SWTEX_INSTANTIATE

}  // namespace swtex
