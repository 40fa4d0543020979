#include "doctest.h"

#include "fixtures.hpp"
#include "oracles.hpp"

#include "lsemink/problems.hpp"
#include "lsemink/rng.hpp"
#include "lsemink/solvers.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

using namespace lsemink;
namespace fs = std::filesystem;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::IoError;
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_images(const fs::path& p, std::uint32_t magic, const std::vector<std::vector<std::uint8_t>>& imgs,
                  std::uint32_t rows, std::uint32_t cols, std::size_t drop_tail = 0) {
  std::ofstream out(p, std::ios::binary);
  put_be32(out, magic);
  put_be32(out, static_cast<std::uint32_t>(imgs.size()));
  put_be32(out, rows);
  put_be32(out, cols);
  std::vector<char> bytes;
  for (const auto& img : imgs) bytes.insert(bytes.end(), img.begin(), img.end());
  bytes.resize(bytes.size() - drop_tail);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_labels(const fs::path& p, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(p, std::ios::binary);
  put_be32(out, 0x00000801);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "lsemink_problem_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("gp instance construction") {
  CHECK(code_of([] { make_gp(5, 3, 0.0, 1); }) == ErrorCode::InvalidEta);
  CHECK(code_of([] { make_gp(5, 3, -1.0, 1); }) == ErrorCode::InvalidEta);
  const GpInstance a = make_gp_instance(5, 3, 0.5, 42);
  const GpInstance b = make_gp_instance(5, 3, 0.5, 42);
  CHECK(a.J == b.J);
  CHECK(a.b == b.b);
  const LseObjective obj = gp_objective(a);
  CHECK(obj.num_terms() == 1);
  CHECK(obj.dim() == 3);
  CHECK(obj.terms()[0].weight == 0.5);
  CHECK(obj.terms()[0].target.norm() == 0.0);
}

TEST_CASE("gp smoothing sandwich tightens as eta shrinks") {
  Rng rng(1);
  const double m = 100;
  for (std::uint64_t seed : {0u, 1u}) {
    std::vector<double> prev_gap(100, std::numeric_limits<double>::infinity());
    for (double eta : {1e-1, 1e-3, 1e-5}) {
      const GpInstance gp = make_gp_instance(100, 20, eta, seed);
      const LseObjective obj = gp_objective(gp);
      Rng xs(seed + 10);
      for (int i = 0; i < 100; ++i) {
        const Vector x = xs.normal_vector(20);
        const double top = (gp.J * x + gp.b).maxCoeff();
        const double f = obj.evaluate(x).f();
        CHECK(f >= top - 1e-12 * std::abs(top));
        CHECK(f <= top + eta * std::log(m) + 1e-12 * std::abs(top));
        const double gap = f - top;
        CHECK(gap <= prev_gap[i] + 1e-12);
        prev_gap[i] = gap;
      }
    }
  }
}

TEST_CASE("random feature map") {
  RfmExtractor zero{Matrix::Zero(2, 3), vec({-1, 2})};
  CHECK(apply_rfm(zero, vec({5, -7, 1})) == vec({0, 2}));
  RfmExtractor eye{Matrix::Identity(2, 2), Vector::Zero(2)};
  CHECK(apply_rfm(eye, vec({3, -4})) == vec({3, 0}));
  CHECK(code_of([&] { apply_rfm(eye, vec({1, 2, 3})); }) == ErrorCode::DimensionMismatch);

  const RfmExtractor r = RfmExtractor::random(10, 50, 3);
  CHECK(r.Z.rows() == 50);
  CHECK(r.Z.cols() == 10);
  Rng rng(4);
  const Vector y = rng.normal_vector(10);
  const Vector got = apply_rfm(r, y);
  for (Eigen::Index i = 0; i < 50; ++i) {
    long double acc = r.bias[i];
    for (Eigen::Index j = 0; j < 10; ++j) acc += static_cast<long double>(r.Z(i, j)) * y[j];
    const double ref = acc > 0 ? static_cast<double>(acc) : 0.0;
    CHECK(std::abs(got[i] - ref) <= 1e-14 * (1 + std::abs(ref)));
  }
}

TEST_CASE("mlr objective") {
  CHECK(code_of([] { make_mlr(MlrDataset{}); }) == ErrorCode::EmptyDataset);

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const MlrDataset data = make_synthetic_classification(12, 5, 4, 9, seed);
    const LseObjective obj = make_mlr(data);
    CHECK(obj.num_terms() == 12);
    CHECK(obj.dim() == 36);
    CHECK(std::abs(obj.evaluate(Vector::Zero(36)).f() - std::log(4.0)) <= 1e-14);
  }

  MlrDataset one;
  one.features = {Vector::Ones(1)};
  one.labels = {Vector::Unit(2, 0)};
  one.num_classes = 2;
  one.feature_dim = 1;
  const LseObjective scalar = make_mlr(one);
  const Vector x = vec({0.3, -1.1});
  CHECK(scalar.evaluate(x).f() ==
        doctest::Approx(std::log(std::exp(0.3) + std::exp(-1.1)) - 0.3).epsilon(1e-15));
}

TEST_CASE("kronecker mlr gradient equals the dense expansion") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index nc = 2 + static_cast<Eigen::Index>(rng.below(2));
    const Eigen::Index np = 1 + static_cast<Eigen::Index>(rng.below(4));
    const std::size_t n = 1 + rng.below(5);
    MlrDataset data;
    data.num_classes = nc;
    data.feature_dim = np;
    std::vector<LinearTerm> dense_terms;
    for (std::size_t k = 0; k < n; ++k) {
      data.features.push_back(rng.normal_vector(np));
      data.labels.push_back(Vector::Unit(nc, static_cast<Eigen::Index>(rng.below(nc))));
      Matrix j = Matrix::Zero(nc, nc * np);
      for (Eigen::Index c = 0; c < np; ++c)
        for (Eigen::Index r = 0; r < nc; ++r) j(r, c * nc + r) = data.features.back()[c];
      dense_terms.push_back({std::make_shared<DenseOperator>(j), Vector::Zero(nc), data.labels.back(),
                             1.0 / static_cast<double>(n)});
    }
    const LseObjective kron = make_mlr(data);
    const LseObjective dense(dense_terms);
    const Vector x = rng.normal_vector(nc * np);
    const Vector gk = kron.gradient(kron.evaluate(x));
    const Vector gd = dense.gradient(dense.evaluate(x));
    CHECK((gk - gd).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("synthetic classification is deterministic and portable") {
  const MlrDataset a = make_synthetic_classification(4, 3, 2, 8, 17);
  const MlrDataset b = make_synthetic_classification(4, 3, 2, 8, 17);
  REQUIRE(a.size() == 4);
  CHECK(a.num_classes == 2);
  CHECK(a.feature_dim == 8);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a.features[k] == b.features[k]);
    CHECK(a.labels[k] == b.labels[k]);
    CHECK(a.labels[k].sum() == 1.0);
    CHECK(a.features[k].minCoeff() >= 0.0);
  }
  CHECK_NOTHROW(a.validate());
  const MlrDataset c = make_synthetic_classification(4, 3, 2, 8, 18);
  CHECK(c.features[0] != a.features[0]);
}

TEST_CASE("synthetic labels are close to uniform") {
  const MlrDataset data = make_synthetic_classification(10000, 2, 10, 2, 123);
  std::vector<double> counts(10, 0.0);
  for (const Vector& c : data.labels) {
    Eigen::Index k;
    c.maxCoeff(&k);
    counts[static_cast<std::size_t>(k)] += 1.0;
  }
  double chi2 = 0.0;
  for (double n : counts) chi2 += (n - 1000.0) * (n - 1000.0) / 1000.0;
  // 99.9% quantile of chi-square with 9 degrees of freedom
  CHECK(chi2 < 27.877);
}

TEST_CASE("fitting a small separable set gives full training accuracy") {
  const MlrDataset data = make_synthetic_classification(20, 6, 3, 40, 4);
  const LseObjective obj = make_mlr(data);
  const SolveTrace t = lsemink::lsemink(obj, Vector::Zero(obj.dim()), SolverConfig{});
  CHECK(t.records.back().f <= 1e-6);
  CHECK(classification_accuracy(data, t.final_x) == 1.0);
  CHECK(classification_accuracy(data, Vector::Zero(obj.dim())) < 1.0);
}

TEST_CASE("IDX round trip") {
  const std::vector<std::vector<std::uint8_t>> imgs = {
      {0, 255, 10, 20, 30, 40}, {1, 2, 3, 4, 5, 6}, {255, 255, 0, 0, 128, 64}, {9, 8, 7, 6, 5, 4}};
  const std::vector<std::uint8_t> labels = {3, 0, 9, 3};
  const fs::path ip = scratch("imgs.idx");
  const fs::path lp = scratch("labels.idx");
  write_images(ip, 0x00000803, imgs, 2, 3);
  write_labels(lp, labels);

  const MlrDataset all = load_mnist_idx(ip, lp, 0);
  REQUIRE(all.size() == 4);
  CHECK(all.num_classes == 10);
  CHECK(all.feature_dim == 6);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(all.features[k][static_cast<Eigen::Index>(j)] == imgs[k][j] / 255.0);
    }
    CHECK(all.labels[k] == Vector::Unit(10, labels[k]));
  }
  CHECK(load_mnist_idx(ip, lp, 2).size() == 2);
  CHECK(load_mnist_idx(ip, lp, 100).size() == 4);
}

TEST_CASE("IDX errors") {
  const std::vector<std::vector<std::uint8_t>> imgs = {{1, 2, 3, 4}, {5, 6, 7, 8}};
  const fs::path ip = scratch("bad_imgs.idx");
  const fs::path lp = scratch("bad_labels.idx");
  write_labels(lp, {1, 2});

  write_images(ip, 0x00000801, imgs, 2, 2);
  CHECK(code_of([&] { load_mnist_idx(ip, lp, 0); }) == ErrorCode::BadMagic);

  write_images(ip, 0x00000803, imgs, 2, 2, 3);
  CHECK(code_of([&] { load_mnist_idx(ip, lp, 0); }) == ErrorCode::TruncatedFile);

  write_images(ip, 0x00000803, imgs, 2, 2);
  write_labels(lp, {1, 2, 3});
  CHECK(code_of([&] { load_mnist_idx(ip, lp, 0); }) == ErrorCode::CountMismatch);

  write_labels(lp, {1, 2});
  CHECK(code_of([&] { load_mnist_idx(scratch("missing.idx"), lp, 0); }) == ErrorCode::IoError);
}
