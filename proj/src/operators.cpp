#include "lsemink/operators.hpp"

#include "lsemink/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lsemink {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::ZeroRhs: return "ZeroRhs";
    case ErrorCode::SingularTridiagonal: return "SingularTridiagonal";
    case ErrorCode::InvalidEta: return "InvalidEta";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::ScaleLimit: return "ScaleLimit";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

void check_input(const Vector& x, Eigen::Index expected, const char* what) {
  if (x.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": expected length " +
                                                  std::to_string(expected) + ", got " +
                                                  std::to_string(x.size()));
  }
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, what);
}

}  // namespace

LinearOperator::LinearOperator(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCode::InvalidArgument, "operator dimensions must be positive");
  }
}

Vector LinearOperator::apply(const Vector& x) const {
  check_input(x, cols_, "apply");
  counter_.fetch_add(1, std::memory_order_relaxed);
  return do_apply(x);
}

Vector LinearOperator::apply_transpose(const Vector& v) const {
  check_input(v, rows_, "apply_transpose");
  counter_.fetch_add(1, std::memory_order_relaxed);
  return do_apply_transpose(v);
}

DenseOperator::DenseOperator(Matrix entries)
    : LinearOperator(entries.rows(), entries.cols()), entries_(std::move(entries)) {
  if (!entries_.allFinite()) throw Error(ErrorCode::NonFiniteInput, "dense operator entries");
}

Vector DenseOperator::do_apply(const Vector& x) const { return entries_ * x; }

Vector DenseOperator::do_apply_transpose(const Vector& v) const {
  return entries_.transpose() * v;
}

KroneckerLeftOperator::KroneckerLeftOperator(Vector feature, Eigen::Index block_dim)
    : LinearOperator(block_dim, block_dim * feature.size()), feature_(std::move(feature)) {
  if (!feature_.allFinite()) throw Error(ErrorCode::NonFiniteInput, "kronecker feature");
}

Vector KroneckerLeftOperator::do_apply(const Vector& x) const {
  Eigen::Map<const Matrix> X(x.data(), rows(), feature_.size());
  return X * feature_;
}

Vector KroneckerLeftOperator::do_apply_transpose(const Vector& v) const {
  Vector out(cols());
  Eigen::Map<Matrix> X(out.data(), rows(), feature_.size());
  X.noalias() = v * feature_.transpose();
  return out;
}

namespace {

const LinearOperator& require(const OperatorPtr& op) {
  if (!op) throw Error(ErrorCode::InvalidArgument, "null inner operator");
  return *op;
}

}  // namespace

ScaledOperator::ScaledOperator(OperatorPtr inner, double scale)
    : LinearOperator(require(inner).rows(), require(inner).cols()),
      inner_(std::move(inner)),
      scale_(scale) {
  if (scale_ == 0.0 || !std::isfinite(scale_)) {
    throw Error(ErrorCode::InvalidArgument, "scale must be finite and nonzero");
  }
}

Vector ScaledOperator::do_apply(const Vector& x) const { return scale_ * inner_->apply(x); }

Vector ScaledOperator::do_apply_transpose(const Vector& v) const {
  return scale_ * inner_->apply_transpose(v);
}

double adjoint_check(const LinearOperator& op, int trials, std::uint64_t rng_seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "adjoint_check needs trials >= 1");
  Rng rng(rng_seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector u = rng.normal_vector(op.cols());
    const Vector v = rng.normal_vector(op.rows());
    const double forward = v.dot(op.apply(u));
    const double backward = op.apply_transpose(v).dot(u);
    worst = std::max(worst, std::abs(forward - backward) / (1.0 + std::abs(forward)));
  }
  return worst;
}

}  // namespace lsemink
