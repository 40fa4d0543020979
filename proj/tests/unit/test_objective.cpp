#include "doctest.h"

#include "fixtures.hpp"
#include "oracles.hpp"

#include "lsemink/objective.hpp"
#include "lsemink/problems.hpp"
#include "lsemink/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

using namespace lsemink;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

LinearTerm dense_term(const Matrix& j, const Vector& b, const Vector& c, double w = 1.0) {
  return {std::make_shared<DenseOperator>(j), b, c, w};
}

double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("logsumexp_stable basic values") {
  const LseValue four = logsumexp_stable(Vector::Zero(4));
  CHECK(four.value == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK((four.p - Vector::Constant(4, 0.25)).cwiseAbs().maxCoeff() <= 1e-16);

  for (double t : {-3.5, 0.0, 1e308, -1e308}) {
    const LseValue one = logsumexp_stable(vec({t}));
    CHECK(one.value == t);
    CHECK(one.p[0] == 1.0);
  }

  const LseValue big = logsumexp_stable(vec({1000, 0}));
  const long double ref = oracle::lse(vec({1000, 0}));
  CHECK(std::abs(big.value - static_cast<double>(ref)) <= 1e-12 * 1000);
  CHECK(big.p[0] == 1.0);
  CHECK(big.p[1] >= 0.0);
  CHECK(big.p[1] < 1e-300);
}

TEST_CASE("logsumexp_stable rejects empty and non-finite input") {
  CHECK(code_of([] { logsumexp_stable(Vector{}); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { logsumexp_stable(vec({1, std::numeric_limits<double>::infinity()})); }) ==
        ErrorCode::NonFiniteInput);
}

TEST_CASE("logsumexp_stable matches extended precision for entries up to +-700") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(30));
    Vector z(m);
    for (Eigen::Index i = 0; i < m; ++i) z[i] = 1400.0 * rng.uniform() - 700.0;
    const LseValue got = logsumexp_stable(z);
    const double ref = static_cast<double>(oracle::lse(z));
    CHECK(std::isfinite(got.value));
    CHECK(std::abs(got.value - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    CHECK(std::abs(got.p.sum() - 1.0) <= 1e-12);
    CHECK(got.p.minCoeff() >= 0.0);
    CHECK(got.value >= z.maxCoeff());
    CHECK(got.value <= z.maxCoeff() + std::log(static_cast<double>(m)) + 1e-12);
  }
}

TEST_CASE("objective construction is validated") {
  const Matrix eye = Matrix::Identity(2, 2);
  CHECK(code_of([] { LseObjective(std::vector<LinearTerm>{}); }) == ErrorCode::EmptyInput);
  CHECK(code_of([&] {
          LseObjective({dense_term(eye, Vector::Zero(3), Vector::Zero(2))});
        }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] {
          LseObjective({dense_term(eye, Vector::Zero(2), Vector::Zero(2)),
                        dense_term(Matrix::Ones(2, 3), Vector::Zero(2), Vector::Zero(2))});
        }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] {
          LseObjective({dense_term(eye, Vector::Zero(2), Vector::Zero(2), 0.0)});
        }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] {
          LseObjective({dense_term(eye, Vector::Zero(2), Vector::Zero(2))}, -1.0);
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("evaluate on hand-checkable instances") {
  const LseObjective obj({dense_term(Matrix::Identity(2, 2), Vector::Zero(2), vec({0.5, 0.5}))});
  CHECK(obj.evaluate(Vector::Zero(2)).f() == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const LseObjective reg({dense_term(Matrix::Identity(2, 2), Vector::Zero(2), vec({0.5, 0.5}))},
                         2.0);
  // log(e + 1) - 1/2 + 1, frozen from the long-double oracle
  const double expected = 1.8132616875182228;
  CHECK(static_cast<double>(oracle::value(reg, vec({1, 0}))) ==
        doctest::Approx(expected).epsilon(1e-15));
  CHECK(reg.evaluate(vec({1, 0})).f() == doctest::Approx(expected).epsilon(1e-15));

  const GpInstance gp = make_gp_instance(7, 3, 1.0, 5);
  const double lse_b = static_cast<double>(oracle::lse(gp.b));
  CHECK(gp_objective(gp).evaluate(Vector::Zero(3)).f() == doctest::Approx(lse_b).epsilon(1e-14));
}

TEST_CASE("evaluate matches the oracle and fills the term states") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const LseObjective obj = testing::random_objective(rng, 6, 4, 2, trial % 2 ? 1e-3 : 0.0);
    const Vector x = rng.normal_vector(4);
    const EvaluationState s = obj.evaluate(x);
    const double ref = static_cast<double>(oracle::value(obj, x));
    CHECK(std::abs(s.f() - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
    REQUIRE(s.terms().size() == 2);
    for (const TermState& t : s.terms()) {
      CHECK(std::abs(t.p.sum() - 1.0) <= 1e-12);
      CHECK(t.g_value >= t.z.maxCoeff());
      CHECK(t.g_value <= t.z.maxCoeff() + std::log(6.0));
    }
  }
}

TEST_CASE("gradient examples") {
  Rng rng(2);
  const Vector x = rng.normal_vector(3);
  const Vector c = oracle::softmax(x);
  for (double alpha : {0.0, 0.3}) {
    const LseObjective obj({dense_term(Matrix::Identity(3, 3), Vector::Zero(3), c)}, alpha);
    const EvaluationState s = obj.evaluate(x);
    CHECK((obj.gradient(s) - alpha * x).norm() <= 1e-15);
  }

  const Matrix j = rng.normal_matrix(5, 3);
  const Vector b = rng.normal_vector(5);
  const Vector target = Vector::Constant(5, 0.2);
  const LseObjective single({dense_term(j, b, target, 0.4)});
  const LseObjective pair({dense_term(j, b, target, 0.4), dense_term(j, b, target, 0.8)});
  const Vector y = rng.normal_vector(3);
  const Vector g1 = single.gradient(single.evaluate(y));
  const Vector g3 = pair.gradient(pair.evaluate(y));
  CHECK((g3 - 3.0 * g1).norm() <= 1e-14 * g3.norm());

  const auto f = [&single](const Vector& v) { return single.evaluate(v).f(); };
  CHECK(rel_err(g1, oracle::finite_diff_gradient(f, y, 1e-6)) <= 1e-6);
}

TEST_CASE("gradient matches finite differences on random instances") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.below(49));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(30));
    const std::size_t terms = 1 + rng.below(3);
    const LseObjective obj = testing::random_objective(rng, m, n, terms, trial % 2 ? 1e-3 : 0.0);
    const Vector x = rng.normal_vector(n);
    const Vector g = obj.gradient(obj.evaluate(x));
    const auto f = [&obj](const Vector& v) { return obj.evaluate(v).f(); };
    CHECK(rel_err(g, oracle::finite_diff_gradient(f, x, 1e-5)) <= 1e-6);
    CHECK(rel_err(g, oracle::gradient(obj, x)) <= 1e-12);
  }
}

TEST_CASE("stale state is refused") {
  Rng rng(4);
  const LseObjective a = testing::random_objective(rng, 4, 3, 1, 0.0);
  const LseObjective b = testing::random_objective(rng, 4, 3, 1, 0.0);
  const Vector x = rng.normal_vector(3);
  const EvaluationState s = a.evaluate(x);
  CHECK(code_of([&] { a.gradient(s, x + Vector::Constant(3, 1e-3)); }) == ErrorCode::StaleCache);
  CHECK(code_of([&] { b.gradient(s); }) == ErrorCode::StaleCache);
  CHECK(code_of([&] { b.hessian_vec(s, x); }) == ErrorCode::StaleCache);
  CHECK(code_of([&] { a.hessian_vec(s, Vector::Ones(4)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("hessian_vec examples") {
  Rng rng(5);
  const Vector c = oracle::softmax(rng.normal_vector(4));
  const LseObjective obj({dense_term(Matrix::Identity(4, 4), rng.normal_vector(4), c)});
  const EvaluationState s = obj.evaluate(rng.normal_vector(4));
  CHECK(obj.hessian_vec(s, Vector::Ones(4)).norm() <= 1e-15);

  for (double alpha : {0.0, 1e-3}) {
    const LseObjective r = testing::random_objective(rng, 6, 4, 1, alpha);
    const Vector x = rng.normal_vector(4);
    const Vector v = rng.normal_vector(4);
    const EvaluationState rs = r.evaluate(x);
    const Matrix h = oracle::dense_hessian(r, x);
    CHECK((r.hessian_vec(rs, v) - h * v).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((r.shifted_hessian_vec(rs, v, 0.0) - r.hessian_vec(rs, v)).norm() == 0.0);
    CHECK(r.shifted_hessian_vec(rs, Vector::Zero(4), 0.7).norm() == 0.0);
    const Matrix shifted = h + 0.7 * (oracle::dense_metric(r) - alpha * Matrix::Identity(4, 4));
    CHECK((r.shifted_hessian_vec(rs, v, 0.7) - shifted * v).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((r.metric_vec(v) - oracle::dense_metric(r) * v).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("one-hot softmax: Hessian numerically zero, everything finite") {
  Rng rng(6);
  for (double spread : {40.0, 400.0, 1e6}) {
    Vector b = Vector::Zero(5);
    b[0] = spread;
    const Matrix j = rng.normal_matrix(5, 3);
    for (double alpha : {0.0, 0.5}) {
      const LseObjective obj({dense_term(j, b, Vector::Unit(5, 1))}, alpha);
      const EvaluationState s = obj.evaluate(Vector::Zero(3));
      const Vector v = rng.normal_vector(3);
      const Vector g = obj.gradient(s);
      const Vector hv = obj.hessian_vec(s, v);
      CHECK(std::isfinite(s.f()));
      CHECK(g.allFinite());
      CHECK(hv.allFinite());
      CHECK((hv - alpha * v).norm() <= 1e-12 * v.norm());
      CHECK(obj.shifted_hessian_vec(s, v, 1.0).allFinite());
    }
  }
}

TEST_CASE("Hessian products are symmetric and PSD; the shift is PD on the row space") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index m = 3 + static_cast<Eigen::Index>(rng.below(6));
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(10));
    const LseObjective obj = testing::random_objective(rng, m, n, 1, 0.0);
    const EvaluationState s = obj.evaluate(rng.normal_vector(n));
    const Vector u = rng.normal_vector(n);
    const Vector v = rng.normal_vector(n);
    CHECK(std::abs(v.dot(obj.hessian_vec(s, u)) - u.dot(obj.hessian_vec(s, v))) <= 1e-11);
    CHECK(v.dot(obj.hessian_vec(s, v)) >= -1e-12 * v.squaredNorm());

    const Matrix j = oracle::materialize(*obj.terms()[0].op);
    const double w = obj.terms()[0].weight;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(w * j.transpose() * j);
    const double top = eig.eigenvalues().maxCoeff();
    double min_pos = top;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (eig.eigenvalues()[i] > 1e-10 * top) min_pos = std::min(min_pos, eig.eigenvalues()[i]);
    }
    const Vector row = j.transpose() * rng.normal_vector(m);
    for (double beta : {1e-8, 1e-2, 1.0}) {
      CHECK(row.dot(obj.shifted_hessian_vec(s, row, beta)) >=
            beta * min_pos * row.squaredNorm() - 1e-10);
    }
  }
}

TEST_CASE("cost accounting: N applies per evaluate and gradient, 2N per product") {
  Rng rng(9);
  const LseObjective obj = testing::random_objective(rng, 4, 3, 3, 0.1);
  obj.reset_matvec_count();
  const EvaluationState s = obj.evaluate(rng.normal_vector(3));
  CHECK(obj.matvec_count() == 3);
  obj.gradient(s);
  CHECK(obj.matvec_count() == 6);
  obj.hessian_vec(s, rng.normal_vector(3));
  CHECK(obj.matvec_count() == 12);
  obj.shifted_hessian_vec(s, rng.normal_vector(3), 0.5);
  CHECK(obj.matvec_count() == 18);
  obj.metric_vec(rng.normal_vector(3));
  CHECK(obj.matvec_count() == 24);
  CHECK(obj.evaluate_cost() == 3);
  CHECK(obj.gradient_cost() == 3);
  CHECK(obj.hessian_vec_cost() == 6);
}
