#include "swtex/metrics.hpp"

#include <cmath>
#include <sstream>

#include "swtex/errors.hpp"
#include "swtex/rng.hpp"

namespace swtex {
namespace {

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean) {
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

void check_pair(const EmbeddingSet& a, const EmbeddingSet& b, const char* what) {
  if (a.size() == 0 || b.size() == 0) throw_invalid(std::string(what) + ": empty embedding set");
  if (a.dim() != b.dim()) {
    throw_invalid(std::string(what) + ": dimension mismatch " + std::to_string(a.dim()) + " vs " +
                  std::to_string(b.dim()));
  }
  if (!a.vectors.allFinite() || !b.vectors.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite embedding");
  }
}

}  // namespace

std::vector<Image> extract_crops(const Image& img, int count, int size, Rng& rng) {
  if (count <= 0 || size <= 0) throw_invalid("extract_crops: count and size must be positive");
  if (img.height() < size || img.width() < size) {
    throw_invalid("extract_crops: image " + std::to_string(img.height()) + "x" +
                  std::to_string(img.width()) + " smaller than crop size " +
                  std::to_string(size));
  }
  std::uniform_int_distribution<int> oy(0, img.height() - size);
  std::uniform_int_distribution<int> ox(0, img.width() - size);
  std::vector<Image> crops;
  crops.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int y = oy(rng);
    const int x = ox(rng);
    crops.push_back(img.crop(y, x, size, size));
  }
  return crops;
}

std::vector<Image> extract_crops(const Image& img, const CropProtocol& proto) {
  Rng rng = make_rng(proto.seed, Stream::kCrops);
  return extract_crops(img, proto.crop_count, proto.crop_size, rng);
}

double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b) {
  check_pair(a, b, "frechet_distance");
  if (a.size() < 2 || b.size() < 2) throw_invalid("frechet_distance: need at least 2 samples");
  const Eigen::VectorXd mu_a = a.vectors.colwise().mean();
  const Eigen::VectorXd mu_b = b.vectors.colwise().mean();
  const Eigen::MatrixXd cov_a = sample_covariance(a.vectors, mu_a);
  const Eigen::MatrixXd cov_b = sample_covariance(b.vectors, mu_b);

  constexpr double kFloor = 1e-10;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_a(cov_a);
  Eigen::VectorXd la = eig_a.eigenvalues().cwiseMax(kFloor);
  const Eigen::MatrixXd sqrt_a =
      eig_a.eigenvectors() * la.cwiseSqrt().asDiagonal() * eig_a.eigenvectors().transpose();
  Eigen::MatrixXd middle = sqrt_a * cov_b * sqrt_a;
  middle = 0.5 * (middle + middle.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_m(middle, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lm = eig_m.eigenvalues().cwiseMax(kFloor);
  const double cross = lm.cwiseSqrt().sum();

  const double value = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * cross;
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "frechet_distance: non-finite result (cov_a eigenvalues in ["
        << eig_a.eigenvalues().minCoeff() << ", " << eig_a.eigenvalues().maxCoeff()
        << "], product eigenvalues in [" << eig_m.eigenvalues().minCoeff() << ", "
        << eig_m.eigenvalues().maxCoeff() << "])";
    throw NumericalError(msg.str());
  }
  // Flooring can leave a tiny negative residue for identical inputs.
  return std::max(0.0, value);
}

double kid(const EmbeddingSet& a, const EmbeddingSet& b) {
  check_pair(a, b, "kid");
  const Eigen::Index m = a.size(), n = b.size();
  if (m < 2 || n < 2) throw_invalid("kid: need at least 2 samples per set");
  const double d = a.dim();
  auto kernel = [d](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    Eigen::MatrixXd k = (x * y.transpose()).array() / d + 1.0;
    return Eigen::MatrixXd(k.array().cube());
  };
  const Eigen::MatrixXd kaa = kernel(a.vectors, a.vectors);
  const Eigen::MatrixXd kbb = kernel(b.vectors, b.vectors);
  const Eigen::MatrixXd kab = kernel(a.vectors, b.vectors);
  const double saa = (kaa.sum() - kaa.trace()) / static_cast<double>(m * (m - 1));
  const double sbb = (kbb.sum() - kbb.trace()) / static_cast<double>(n * (n - 1));
  const double sab = kab.sum() / static_cast<double>(m * n);
  return saa + sbb - 2.0 * sab;
}

double crop_metric(const Image& ref, const Image& syn, const CropProtocol& proto, CropMetric which,
                   const EmbeddingBackend& backend) {
  const auto ref_crops = extract_crops(ref, proto);
  std::vector<Image> other;
  if (proto.ground_truth) {
    Rng rng = make_rng(proto.seed, Stream::kGroundTruthCrops);
    other = extract_crops(ref, proto.crop_count, proto.crop_size, rng);
  } else {
    other = extract_crops(syn, proto);
  }
  const EmbeddingSet ea = backend.embed_all(ref_crops);
  const EmbeddingSet eb = backend.embed_all(other);
  return which == CropMetric::kFid ? frechet_distance(ea, eb) : kid(ea, eb);
}

double perceptual_score(const Image& ref, const Image& syn, const PerceptualBackend* backend) {
  if (backend == nullptr) throw FeatureDisabled("perceptual score: no perceptual backend configured");
  if (!ref.same_size(syn)) throw_invalid("perceptual score: images differ in size");
  return backend->distance(ref, syn);
}

}  // namespace swtex
