#include "lsemink/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace lsemink {

void KrylovConfig::validate() const {
  if (!(ktol > 0.0 && ktol < 1.0)) throw Error(ErrorCode::ConfigError, "ktol must lie in (0, 1)");
  if (kmaxiter < 1) throw Error(ErrorCode::ConfigError, "kmaxiter must be >= 1");
  if (!(curvature_floor >= 0.0)) throw Error(ErrorCode::ConfigError, "curvature_floor must be >= 0");
}

std::string_view to_string(KrylovTermination t) {
  switch (t) {
    case KrylovTermination::ToleranceMet: return "ToleranceMet";
    case KrylovTermination::MaxIter: return "MaxIter";
    case KrylovTermination::CurvatureBreakdown: return "CurvatureBreakdown";
    case KrylovTermination::ZeroRhs: return "ZeroRhs";
    case KrylovTermination::Interrupted: return "Interrupted";
  }
  return "Unknown";
}

KrylovOutcome cg_solve(const MatVec& apply, const Vector& rhs, const KrylovConfig& cfg,
                       const StopPredicate& stop) {
  cfg.validate();
  if (!rhs.allFinite()) throw Error(ErrorCode::NonFiniteInput, "cg_solve rhs");

  KrylovOutcome out;
  out.solution = Vector::Zero(rhs.size());
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    out.termination = KrylovTermination::ZeroRhs;
    return out;
  }

  Vector r = rhs;
  Vector p = r;
  double rr = r.squaredNorm();
  out.rel_residual = 1.0;

  for (int k = 0; k < cfg.kmaxiter; ++k) {
    if (stop && stop()) {
      out.termination = KrylovTermination::Interrupted;
      return out;
    }
    const Vector Ap = apply(p);
    const double pAp = p.dot(Ap);
    if (!std::isfinite(pAp)) throw Error(ErrorCode::NonFiniteValue, "cg_solve curvature");

    if (pAp <= cfg.curvature_floor * p.squaredNorm()) {
      if (k == 0) {
        // p == rhs here, so Ap gives the residual of the fallback for free
        out.solution = rhs;
        out.rel_residual = (Ap - rhs).norm() / rhs_norm;
      }
      out.termination = KrylovTermination::CurvatureBreakdown;
      return out;
    }

    const double step = rr / pAp;
    out.solution += step * p;
    r -= step * Ap;
    const double rr_next = r.squaredNorm();
    if (!std::isfinite(rr_next)) throw Error(ErrorCode::NonFiniteValue, "cg_solve residual");
    out.iterations = k + 1;
    out.rel_residual = std::sqrt(rr_next) / rhs_norm;
    if (out.rel_residual <= cfg.ktol) {
      out.termination = KrylovTermination::ToleranceMet;
      return out;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  out.termination = KrylovTermination::MaxIter;
  return out;
}

namespace {

// Solves (T + shift I) y = rhs_norm e_1 by the Thomas recurrence. Empty
// optional when a pivot falls below 1e-14 of the matrix scale.
std::optional<Vector> solve_tridiagonal(const Vector& diag, const Vector& offdiag, double shift,
                                        double rhs_norm) {
  const Eigen::Index r = diag.size();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) scale = std::max(scale, std::abs(diag[i] + shift));
  for (Eigen::Index i = 0; i + 1 < r; ++i) scale = std::max(scale, std::abs(offdiag[i]));
  const double pivot_floor = 1e-14 * scale;

  Vector c_prime(r);
  Vector d_prime(r);
  double pivot = diag[0] + shift;
  if (!(std::abs(pivot) > pivot_floor)) return std::nullopt;
  c_prime[0] = r > 1 ? offdiag[0] / pivot : 0.0;
  d_prime[0] = rhs_norm / pivot;
  for (Eigen::Index i = 1; i < r; ++i) {
    pivot = diag[i] + shift - offdiag[i - 1] * c_prime[i - 1];
    if (!(std::abs(pivot) > pivot_floor)) return std::nullopt;
    c_prime[i] = i + 1 < r ? offdiag[i] / pivot : 0.0;
    d_prime[i] = -offdiag[i - 1] * d_prime[i - 1] / pivot;
  }
  Vector y(r);
  y[r - 1] = d_prime[r - 1];
  for (Eigen::Index i = r - 2; i >= 0; --i) y[i] = d_prime[i] - c_prime[i] * y[i + 1];
  return y;
}

}  // namespace

Matrix LanczosFactors::basis_matrix() const {
  if (basis.empty()) return {};
  Matrix V(basis.front().size(), rank());
  for (int j = 0; j < rank(); ++j) V.col(j) = basis[static_cast<std::size_t>(j)];
  return V;
}

Matrix LanczosFactors::tridiagonal() const {
  const Eigen::Index r = diag.size();
  Matrix T = Matrix::Zero(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    T(i, i) = diag[i];
    if (i + 1 < r) T(i, i + 1) = T(i + 1, i) = offdiag[i];
  }
  return T;
}

LanczosFactors lanczos_factorize(const MatVec& apply, const Vector& rhs, const KrylovConfig& cfg,
                                 const StopPredicate& stop) {
  cfg.validate();
  if (!rhs.allFinite()) throw Error(ErrorCode::NonFiniteInput, "lanczos rhs");
  LanczosFactors out;
  out.rhs_norm = rhs.norm();
  if (out.rhs_norm == 0.0) throw Error(ErrorCode::ZeroRhs, "lanczos needs a nonzero rhs");

  std::vector<double> alphas;
  std::vector<double> betas;
  out.basis.push_back(rhs / out.rhs_norm);
  double t_scale = 0.0;

  for (int j = 0; j < cfg.kmaxiter; ++j) {
    if (stop && stop()) {
      out.basis.pop_back();
      out.interrupted = true;
      break;
    }
    const Vector& v = out.basis.back();
    Vector w = apply(v);
    const double alpha = v.dot(w);
    if (!std::isfinite(alpha)) throw Error(ErrorCode::NonFiniteValue, "lanczos diagonal");
    alphas.push_back(alpha);
    w -= alpha * v;
    if (j > 0) w -= betas.back() * out.basis[out.basis.size() - 2];
    // two passes of classical Gram-Schmidt against the whole basis
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : out.basis) w -= q.dot(w) * q;
    }
    const double beta_next = w.norm();
    if (!std::isfinite(beta_next)) throw Error(ErrorCode::NonFiniteValue, "lanczos residual");
    t_scale = std::max({t_scale, std::abs(alpha), betas.empty() ? 0.0 : betas.back()});

    if (beta_next <= 1e-14 * std::max(out.rhs_norm, t_scale)) break;

    const Vector d = Eigen::Map<const Vector>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
    const Vector e = Eigen::Map<const Vector>(betas.data(), static_cast<Eigen::Index>(betas.size()));
    if (auto y = solve_tridiagonal(d, e, 0.0, out.rhs_norm)) {
      const double implied = beta_next * std::abs((*y)[y->size() - 1]) / out.rhs_norm;
      if (implied <= cfg.ktol) break;
    }
    if (j + 1 == cfg.kmaxiter) break;
    betas.push_back(beta_next);
    out.basis.push_back(w / beta_next);
  }

  out.diag = Eigen::Map<const Vector>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
  out.offdiag = Eigen::Map<const Vector>(betas.data(), static_cast<Eigen::Index>(betas.size()));
  // an interruption can leave one more off-diagonal than retained vectors
  if (out.offdiag.size() >= out.diag.size() && out.diag.size() > 0) {
    out.offdiag.conservativeResize(out.diag.size() - 1);
  } else if (out.diag.size() == 0) {
    out.offdiag.resize(0);
  }
  return out;
}

Vector lanczos_shifted_solve(const LanczosFactors& factors, double beta) {
  if (factors.rank() == 0 || factors.diag.size() != factors.rank()) {
    throw Error(ErrorCode::InvalidArgument, "lanczos factors are empty");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::InvalidArgument, "shift must be finite and >= 0");
  }
  auto y = solve_tridiagonal(factors.diag, factors.offdiag, beta, factors.rhs_norm);
  if (!y) throw Error(ErrorCode::SingularTridiagonal, "T + beta I is numerically singular");
  Vector out = Vector::Zero(factors.basis.front().size());
  for (int j = 0; j < factors.rank(); ++j) out += (*y)[j] * factors.basis[static_cast<std::size_t>(j)];
  return out;
}

}  // namespace lsemink
