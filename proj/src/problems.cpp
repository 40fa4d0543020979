#include "lsemink/problems.hpp"

#include "lsemink/rng.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace lsemink {

GpInstance make_gp_instance(Eigen::Index m, Eigen::Index n, double eta, std::uint64_t seed) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::InvalidEta, "eta must be > 0");
  if (m < 1 || n < 1) throw Error(ErrorCode::InvalidArgument, "m and n must be >= 1");
  Rng rng(seed);
  GpInstance gp;
  gp.J = rng.normal_matrix(m, n);
  gp.b = rng.normal_vector(m);
  gp.eta = eta;
  gp.seed = seed;
  return gp;
}

LseObjective gp_objective(const GpInstance& gp) {
  if (!(gp.eta > 0.0) || !std::isfinite(gp.eta)) {
    throw Error(ErrorCode::InvalidEta, "eta must be > 0");
  }
  auto dense = std::make_shared<DenseOperator>(gp.J);
  LinearTerm term;
  term.op = std::make_shared<ScaledOperator>(std::move(dense), 1.0 / gp.eta);
  term.offset = gp.b / gp.eta;
  term.target = Vector::Zero(gp.b.size());
  term.weight = gp.eta;
  std::vector<LinearTerm> terms;
  terms.push_back(std::move(term));
  return LseObjective(std::move(terms));
}

LseObjective make_gp(Eigen::Index m, Eigen::Index n, double eta, std::uint64_t seed) {
  return gp_objective(make_gp_instance(m, n, eta, seed));
}

void MlrDataset::validate() const {
  if (features.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no samples");
  if (features.size() != labels.size()) {
    throw Error(ErrorCode::CountMismatch, "feature and label counts differ");
  }
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (features[k].size() != feature_dim || labels[k].size() != num_classes) {
      throw Error(ErrorCode::DimensionMismatch, "sample " + std::to_string(k) + " has wrong shape");
    }
    int ones = 0;
    for (Eigen::Index j = 0; j < labels[k].size(); ++j) {
      const double c = labels[k][j];
      if (c == 1.0) {
        ++ones;
      } else if (c != 0.0) {
        ones = -1;
        break;
      }
    }
    if (ones != 1) {
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(k) + " is not one-hot");
    }
  }
}

RfmExtractor RfmExtractor::random(Eigen::Index n_f, Eigen::Index n_p, std::uint64_t seed) {
  Rng rng(seed);
  RfmExtractor ext;
  ext.Z = rng.normal_matrix(n_p, n_f) / std::sqrt(static_cast<double>(n_f));
  ext.bias = rng.normal_vector(n_p);
  return ext;
}

Vector RfmExtractor::apply(const Vector& y) const {
  if (y.size() != Z.cols()) throw Error(ErrorCode::DimensionMismatch, "rfm input has wrong length");
  return (Z * y + bias).cwiseMax(0.0);
}

MlrDataset RfmExtractor::transform(const MlrDataset& raw) const {
  MlrDataset out;
  out.num_classes = raw.num_classes;
  out.feature_dim = Z.rows();
  out.labels = raw.labels;
  out.features.reserve(raw.features.size());
  for (const Vector& y : raw.features) out.features.push_back(apply(y));
  return out;
}

LseObjective make_mlr(const MlrDataset& data, double alpha) {
  data.validate();
  const double weight = 1.0 / static_cast<double>(data.size());
  std::vector<LinearTerm> terms;
  terms.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    LinearTerm t;
    t.op = std::make_shared<KroneckerLeftOperator>(data.features[k], data.num_classes);
    t.offset = Vector::Zero(data.num_classes);
    t.target = data.labels[k];
    t.weight = weight;
    terms.push_back(std::move(t));
  }
  return LseObjective(std::move(terms), alpha);
}

MlrDataset make_synthetic_classification(std::size_t num_samples, Eigen::Index n_f,
                                         Eigen::Index n_c, Eigen::Index n_p, std::uint64_t seed) {
  if (num_samples < 1 || n_f < 1 || n_p < 1 || n_c < 2) {
    throw Error(ErrorCode::InvalidArgument, "synthetic data needs counts >= 1 and n_c >= 2");
  }
  Rng rng(seed);
  const Matrix means = 3.0 * rng.normal_matrix(n_c, n_f);

  MlrDataset raw;
  raw.num_classes = n_c;
  raw.feature_dim = n_f;
  raw.features.reserve(num_samples);
  raw.labels.reserve(num_samples);
  for (std::size_t k = 0; k < num_samples; ++k) {
    const auto label = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n_c)));
    raw.features.push_back(means.row(label).transpose() + rng.normal_vector(n_f));
    raw.labels.push_back(Vector::Unit(n_c, label));
  }
  // the extractor gets its own stream so changing N leaves it unchanged
  const RfmExtractor ext = RfmExtractor::random(n_f, n_p, seed ^ 0x9e3779b97f4a7c15ULL);
  return ext.transform(raw);
}

double classification_accuracy(const MlrDataset& data, const Vector& x) {
  data.validate();
  if (x.size() != data.num_classes * data.feature_dim) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector does not match dataset");
  }
  Eigen::Map<const Matrix> X(x.data(), data.num_classes, data.feature_dim);
  std::size_t correct = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    Eigen::Index predicted = 0;
    Eigen::Index truth = 0;
    (X * data.features[k]).maxCoeff(&predicted);
    data.labels[k].maxCoeff(&truth);
    if (predicted == truth) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset,
                        const std::filesystem::path& path) {
  if (buf.size() < offset + 4) throw Error(ErrorCode::TruncatedFile, path.string() + ": short header");
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

}  // namespace

MlrDataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                          std::size_t limit) {
  constexpr std::uint32_t kImageMagic = 0x00000803;
  constexpr std::uint32_t kLabelMagic = 0x00000801;
  constexpr Eigen::Index kClasses = 10;

  const auto img = read_all(images);
  const auto lbl = read_all(labels);

  if (read_be32(img, 0, images) != kImageMagic) throw Error(ErrorCode::BadMagic, images.string());
  if (read_be32(lbl, 0, labels) != kLabelMagic) throw Error(ErrorCode::BadMagic, labels.string());

  const std::uint32_t n_images = read_be32(img, 4, images);
  const std::uint32_t rows = read_be32(img, 8, images);
  const std::uint32_t cols = read_be32(img, 12, images);
  const std::uint32_t n_labels = read_be32(lbl, 4, labels);
  if (n_images != n_labels) {
    throw Error(ErrorCode::CountMismatch, std::to_string(n_images) + " images vs " +
                                              std::to_string(n_labels) + " labels");
  }

  const std::size_t pixels = std::size_t{rows} * cols;
  if (img.size() < 16 + pixels * n_images) throw Error(ErrorCode::TruncatedFile, images.string());
  if (lbl.size() < 8 + std::size_t{n_labels}) throw Error(ErrorCode::TruncatedFile, labels.string());

  const std::size_t count = limit == 0 ? n_images : std::min<std::size_t>(limit, n_images);
  MlrDataset out;
  out.num_classes = kClasses;
  out.feature_dim = static_cast<Eigen::Index>(pixels);
  out.features.reserve(count);
  out.labels.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vector y(static_cast<Eigen::Index>(pixels));
    const unsigned char* src = img.data() + 16 + k * pixels;
    for (std::size_t j = 0; j < pixels; ++j) y[static_cast<Eigen::Index>(j)] = src[j] / 255.0;
    const unsigned label = lbl[8 + k];
    if (label >= kClasses) {
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(label) + " out of range");
    }
    out.features.push_back(std::move(y));
    out.labels.push_back(Vector::Unit(kClasses, label));
  }
  return out;
}

}  // namespace lsemink
