#ifndef LSEMINK_PROBLEMS_HPP
#define LSEMINK_PROBLEMS_HPP

#include "lsemink/objective.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lsemink {

// Geometric-programming test problem: min_x eta * lse((J x + b) / eta).
struct GpInstance {
  Matrix J;
  Vector b;
  double eta = 1.0;
  std::uint64_t seed = 0;
};

// J and b with i.i.d. standard normal entries drawn from Rng(seed); J is
// drawn row by row before b.
GpInstance make_gp_instance(Eigen::Index m, Eigen::Index n, double eta, std::uint64_t seed);

// Single term {J / eta, b / eta, c = 0, w = eta}.
LseObjective gp_objective(const GpInstance& gp);
LseObjective make_gp(Eigen::Index m, Eigen::Index n, double eta, std::uint64_t seed);

struct MlrDataset {
  std::vector<Vector> features;  // a^(k)
  std::vector<Vector> labels;    // one-hot c^(k)
  Eigen::Index num_classes = 0;
  Eigen::Index feature_dim = 0;

  std::size_t size() const noexcept { return features.size(); }
  void validate() const;
};

// a(y) = max(0, Z y + bias).
struct RfmExtractor {
  Matrix Z;  // n_p x n_f
  Vector bias;

  static RfmExtractor random(Eigen::Index n_f, Eigen::Index n_p, std::uint64_t seed);
  Vector apply(const Vector& y) const;
  MlrDataset transform(const MlrDataset& raw) const;
};

inline Vector apply_rfm(const RfmExtractor& ext, const Vector& y) { return ext.apply(y); }

// f(x) = 1/N sum_k [lse(J_k x) - c_k'J_k x], J_k = a_k' (x) I_{n_c}, x = vec(X).
LseObjective make_mlr(const MlrDataset& data, double alpha = 0.0);

// Gaussian classes (means ~ 3 N(0, I)) in R^{n_f}, uniform labels, lifted to
// R^{n_p} by a fresh random-feature extractor. Deterministic per seed.
MlrDataset make_synthetic_classification(std::size_t num_samples, Eigen::Index n_f,
                                         Eigen::Index n_c, Eigen::Index n_p, std::uint64_t seed);

// Fraction of samples with argmax(X a_k) equal to the label.
double classification_accuracy(const MlrDataset& data, const Vector& x);

// MNIST IDX pair: images (magic 0x00000803) and labels (magic 0x00000801).
// Pixels scaled to [0, 1], labels one-hot over 10 classes; at most `limit`
// samples (0 = all).
MlrDataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                          std::size_t limit);

}  // namespace lsemink

#endif  // LSEMINK_PROBLEMS_HPP
