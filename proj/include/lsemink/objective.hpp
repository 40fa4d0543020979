#ifndef LSEMINK_OBJECTIVE_HPP
#define LSEMINK_OBJECTIVE_HPP

#include "lsemink/operators.hpp"

#include <cstdint>
#include <vector>

namespace lsemink {

struct LseValue {
  double value = 0.0;
  Vector p;  // softmax(z)
  // value = max + excess, excess = log1p(sum over the non-argmax entries of
  // exp(z_j - max)). Kept apart so value - z_max keeps full relative
  // precision when the softmax is one-hot.
  double max = 0.0;
  double excess = 0.0;
  double tail = 0.0;  // the sum inside the log1p
  Eigen::Index argmax = 0;
};

// log(sum(exp(z))) and softmax(z) with the max shifted out, so any finite z
// is safe.
LseValue logsumexp_stable(const Vector& z);

// One (J, b, c, w) block of f(x) = sum_k w_k [lse(J_k x + b_k) - c_k' J_k x].
struct LinearTerm {
  OperatorPtr op;
  Vector offset;
  Vector target;
  double weight = 1.0;
};

struct TermState {
  Vector z;         // J x + b
  Vector p;         // softmax(z)
  Vector residual;  // p - c, argmax entry formed without cancellation
  double g_value = 0.0;
};

class LseObjective;

// Everything evaluate() learned at x. Gradient and Hessian products reuse it
// and refuse to run against a different point or objective.
class EvaluationState {
 public:
  const Vector& x() const noexcept { return x_; }
  double f() const noexcept { return f_; }
  const std::vector<TermState>& terms() const noexcept { return terms_; }

 private:
  friend class LseObjective;
  const LseObjective* owner_ = nullptr;
  Vector x_;
  double f_ = 0.0;
  std::vector<TermState> terms_;
};

class LseObjective {
 public:
  explicit LseObjective(std::vector<LinearTerm> terms, double tikhonov_alpha = 0.0);

  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t num_terms() const noexcept { return terms_.size(); }
  double alpha() const noexcept { return alpha_; }
  const std::vector<LinearTerm>& terms() const noexcept { return terms_; }

  // f = sum_k w_k (lse(z_k) - c_k'(J_k x)) + alpha/2 |x|^2, with the
  // x-independent constant c_k'b_k left out. N operator applications.
  EvaluationState evaluate(const Vector& x) const;

  // sum_k w_k J_k'(p_k - c_k) + alpha x. N transpose applications.
  Vector gradient(const EvaluationState& state, const Vector& x) const;
  Vector gradient(const EvaluationState& state) const { return gradient(state, state.x()); }

  // sum_k w_k J_k' H_k J_k v + alpha v, H_k = diag(p_k) - p_k p_k'. 2N applications.
  Vector hessian_vec(const EvaluationState& state, const Vector& v) const;

  // sum_k w_k J_k'(H_k + beta I) J_k v + alpha v, fused: still 2N applications.
  Vector shifted_hessian_vec(const EvaluationState& state, const Vector& v, double beta) const;

  // sum_k w_k J_k' J_k v + alpha v (the natural-gradient metric). 2N applications.
  Vector metric_vec(const Vector& v) const;

  // Operator applications charged by each call above.
  std::uint64_t evaluate_cost() const noexcept { return terms_.size(); }
  std::uint64_t gradient_cost() const noexcept { return terms_.size(); }
  std::uint64_t hessian_vec_cost() const noexcept { return 2 * terms_.size(); }

  // Total counter over the distinct operators referenced by the terms.
  std::uint64_t matvec_count() const;
  void reset_matvec_count() const;

 private:
  void check_state(const EvaluationState& state) const;
  Vector shifted_product(const EvaluationState& state, const Vector& v, double beta) const;

  std::vector<LinearTerm> terms_;
  std::vector<const LinearOperator*> distinct_ops_;
  Eigen::Index dim_ = 0;
  double alpha_ = 0.0;
};

}  // namespace lsemink

#endif  // LSEMINK_OBJECTIVE_HPP
