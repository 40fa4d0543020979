#include "lsemink/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lsemink {

LseValue logsumexp_stable(const Vector& z) {
  if (z.size() == 0) throw Error(ErrorCode::EmptyInput, "logsumexp of an empty vector");
  if (!z.allFinite()) throw Error(ErrorCode::NonFiniteInput, "logsumexp input");

  LseValue out;
  out.max = z.maxCoeff(&out.argmax);
  out.p.resize(z.size());
  double tail = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (j == out.argmax) {
      out.p[j] = 1.0;
      continue;
    }
    out.p[j] = std::exp(z[j] - out.max);
    tail += out.p[j];
  }
  out.tail = tail;
  out.excess = std::log1p(tail);
  out.value = out.max + out.excess;
  out.p /= 1.0 + tail;
  return out;
}

LseObjective::LseObjective(std::vector<LinearTerm> terms, double tikhonov_alpha)
    : terms_(std::move(terms)), alpha_(tikhonov_alpha) {
  if (terms_.empty()) throw Error(ErrorCode::EmptyInput, "objective needs at least one term");
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw Error(ErrorCode::InvalidArgument, "tikhonov alpha must be finite and >= 0");
  }
  dim_ = terms_.front().op ? terms_.front().op->cols() : 0;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const LinearTerm& t = terms_[k];
    const std::string where = "term " + std::to_string(k);
    if (!t.op) throw Error(ErrorCode::InvalidArgument, where + " has no operator");
    if (t.op->cols() != dim_) {
      throw Error(ErrorCode::DimensionMismatch, where + ": operators disagree on cols");
    }
    if (t.offset.size() != t.op->rows() || t.target.size() != t.op->rows()) {
      throw Error(ErrorCode::DimensionMismatch, where + ": offset/target length != rows");
    }
    if (!(t.weight > 0.0) || !std::isfinite(t.weight)) {
      throw Error(ErrorCode::InvalidArgument, where + ": weight must be finite and > 0");
    }
    if (!t.offset.allFinite() || !t.target.allFinite()) {
      throw Error(ErrorCode::NonFiniteInput, where + ": offset/target");
    }
    if (std::find(distinct_ops_.begin(), distinct_ops_.end(), t.op.get()) == distinct_ops_.end()) {
      distinct_ops_.push_back(t.op.get());
    }
  }
}

EvaluationState LseObjective::evaluate(const Vector& x) const {
  if (x.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "evaluate: wrong length of x");

  EvaluationState state;
  state.owner_ = this;
  state.x_ = x;
  state.terms_.reserve(terms_.size());

  double f = 0.0;
  for (const LinearTerm& t : terms_) {
    TermState ts;
    ts.z = t.op->apply(x) + t.offset;
    LseValue lse = logsumexp_stable(ts.z);
    ts.g_value = lse.value;

    // lse(z) - c'z regrouped as excess + (max - c'z); both pieces are exact
    // zero in the separable limit instead of a difference of large numbers.
    const double cz = t.target.dot(ts.z);
    f += t.weight * (lse.excess + (lse.max - cz) + t.target.dot(t.offset));

    ts.residual = lse.p - t.target;
    const Eigen::Index a = lse.argmax;
    ts.residual[a] = (1.0 - t.target[a]) - lse.tail / (1.0 + lse.tail);
    ts.p = std::move(lse.p);
    state.terms_.push_back(std::move(ts));
  }
  if (alpha_ > 0.0) f += 0.5 * alpha_ * x.squaredNorm();
  if (!std::isfinite(f)) throw Error(ErrorCode::NonFiniteValue, "objective value is not finite");
  state.f_ = f;
  return state;
}

void LseObjective::check_state(const EvaluationState& state) const {
  if (state.owner_ != this || state.terms_.size() != terms_.size()) {
    throw Error(ErrorCode::StaleCache, "state was produced by a different objective");
  }
}

Vector LseObjective::gradient(const EvaluationState& state, const Vector& x) const {
  check_state(state);
  if (x.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "gradient: wrong length of x");
  if (&x != &state.x_ && x != state.x_) {
    throw Error(ErrorCode::StaleCache, "gradient requested at a point other than the cached one");
  }
  Vector g = alpha_ * x;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    g += terms_[k].weight * terms_[k].op->apply_transpose(state.terms_[k].residual);
  }
  if (!g.allFinite()) throw Error(ErrorCode::NonFiniteValue, "gradient is not finite");
  return g;
}

Vector LseObjective::shifted_product(const EvaluationState& state, const Vector& v,
                                     double beta) const {
  check_state(state);
  if (v.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "hessian product: wrong length");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::InvalidArgument, "shift must be finite and >= 0");
  }
  Vector out = alpha_ * v;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const Vector& p = state.terms_[k].p;
    const Vector u = terms_[k].op->apply(v);
    Vector hu = p.cwiseProduct(u) - p * p.dot(u);
    if (beta != 0.0) hu += beta * u;
    out += terms_[k].weight * terms_[k].op->apply_transpose(hu);
  }
  return out;
}

Vector LseObjective::hessian_vec(const EvaluationState& state, const Vector& v) const {
  return shifted_product(state, v, 0.0);
}

Vector LseObjective::shifted_hessian_vec(const EvaluationState& state, const Vector& v,
                                         double beta) const {
  return shifted_product(state, v, beta);
}

Vector LseObjective::metric_vec(const Vector& v) const {
  if (v.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "metric product: wrong length");
  Vector out = alpha_ * v;
  for (const LinearTerm& t : terms_) out += t.weight * t.op->apply_transpose(t.op->apply(v));
  return out;
}

std::uint64_t LseObjective::matvec_count() const {
  std::uint64_t total = 0;
  for (const LinearOperator* op : distinct_ops_) total += op->matvec_count();
  return total;
}

void LseObjective::reset_matvec_count() const {
  for (const LinearOperator* op : distinct_ops_) op->reset_matvec_count();
}

}  // namespace lsemink
