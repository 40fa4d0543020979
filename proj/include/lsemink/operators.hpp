#ifndef LSEMINK_OPERATORS_HPP
#define LSEMINK_OPERATORS_HPP

#include "lsemink/types.hpp"

#include <atomic>
#include <cstdint>
#include <memory>

namespace lsemink {

// Matrix-free linear map J : R^cols -> R^rows.
//
// apply/apply_transpose validate their input, count one work unit each and
// then dispatch to the concrete kernel. The counter is the only mutable state
// and may be bumped from several threads sharing the operator.
class LinearOperator {
 public:
  LinearOperator(Eigen::Index rows, Eigen::Index cols);
  virtual ~LinearOperator() = default;

  LinearOperator(const LinearOperator&) = delete;
  LinearOperator& operator=(const LinearOperator&) = delete;

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }

  Vector apply(const Vector& x) const;
  Vector apply_transpose(const Vector& v) const;

  std::uint64_t matvec_count() const noexcept { return counter_.load(std::memory_order_relaxed); }
  void reset_matvec_count() const noexcept { counter_.store(0, std::memory_order_relaxed); }

 protected:
  virtual Vector do_apply(const Vector& x) const = 0;
  virtual Vector do_apply_transpose(const Vector& v) const = 0;

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  mutable std::atomic<std::uint64_t> counter_{0};
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Eigen::Index n) : LinearOperator(n, n) {}

 protected:
  Vector do_apply(const Vector& x) const override { return x; }
  Vector do_apply_transpose(const Vector& v) const override { return v; }
};

// Explicit m x n matrix. Row-major is the interchange order (see io.hpp).
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Matrix entries);

  const Matrix& entries() const noexcept { return entries_; }

 protected:
  Vector do_apply(const Vector& x) const override;
  Vector do_apply_transpose(const Vector& v) const override;

 private:
  Matrix entries_;
};

// J = a^T (x) I_{nc}, acting on x = vec(X) with X of shape nc x np stored
// column-major. J x = X a and J^T v = vec(v a^T); never materialized.
class KroneckerLeftOperator final : public LinearOperator {
 public:
  KroneckerLeftOperator(Vector feature, Eigen::Index block_dim);

  const Vector& feature() const noexcept { return feature_; }
  Eigen::Index block_dim() const noexcept { return rows(); }

 protected:
  Vector do_apply(const Vector& x) const override;
  Vector do_apply_transpose(const Vector& v) const override;

 private:
  Vector feature_;
};

// s * J. The inner operator's own counter also advances when this one is
// applied; work accounting reads the outer counter only.
class ScaledOperator final : public LinearOperator {
 public:
  ScaledOperator(OperatorPtr inner, double scale);

  const LinearOperator& inner() const noexcept { return *inner_; }
  const OperatorPtr& inner_ptr() const noexcept { return inner_; }
  double scale() const noexcept { return scale_; }

 protected:
  Vector do_apply(const Vector& x) const override;
  Vector do_apply_transpose(const Vector& v) const override;

 private:
  OperatorPtr inner_;
  double scale_;
};

// Max over `trials` random pairs (u, v) of |v'Ju - (J'v)'u| / (1 + |v'Ju|).
double adjoint_check(const LinearOperator& op, int trials, std::uint64_t rng_seed);

}  // namespace lsemink

#endif  // LSEMINK_OPERATORS_HPP
