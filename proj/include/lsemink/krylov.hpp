#ifndef LSEMINK_KRYLOV_HPP
#define LSEMINK_KRYLOV_HPP

#include "lsemink/types.hpp"

#include <functional>
#include <vector>

namespace lsemink {

using MatVec = std::function<Vector(const Vector&)>;

// Polled before every operator application; returning true ends the solve
// early with the iterate built so far (used to enforce work budgets).
using StopPredicate = std::function<bool()>;

struct KrylovConfig {
  double ktol = 1e-3;
  int kmaxiter = 20;
  double curvature_floor = 1e-14;

  void validate() const;
};

enum class KrylovTermination { ToleranceMet, MaxIter, CurvatureBreakdown, ZeroRhs, Interrupted };

std::string_view to_string(KrylovTermination t);

struct KrylovOutcome {
  Vector solution;
  double rel_residual = 0.0;
  int iterations = 0;
  KrylovTermination termination = KrylovTermination::MaxIter;
};

// Conjugate gradient for A d = rhs with A symmetric positive semidefinite,
// always started from d = 0 so that d stays in the Krylov space of rhs.
//
// Stops at |A d - rhs| <= ktol |rhs| or after kmaxiter iterations. When a
// search direction has p'Ap <= curvature_floor |p|^2 the current iterate is
// returned; if that happens before any step, rhs itself is returned (the
// steepest-descent direction when rhs is a negative gradient).
KrylovOutcome cg_solve(const MatVec& apply, const Vector& rhs, const KrylovConfig& cfg,
                       const StopPredicate& stop = {});

// A V = V T + residual, V orthonormal (full reorthogonalization), T
// symmetric tridiagonal, first column of V = rhs / |rhs|.
struct LanczosFactors {
  std::vector<Vector> basis;
  Vector diag;
  Vector offdiag;  // size r - 1
  double rhs_norm = 0.0;
  bool interrupted = false;

  int rank() const noexcept { return static_cast<int>(basis.size()); }
  Matrix basis_matrix() const;
  Matrix tridiagonal() const;
};

// Builds at most kmaxiter Lanczos vectors. Ends early on happy breakdown
// (next residual norm <= 1e-14 |rhs|) or once the CG iterate implied by the
// current T has relative residual <= ktol.
LanczosFactors lanczos_factorize(const MatVec& apply, const Vector& rhs, const KrylovConfig& cfg,
                                 const StopPredicate& stop = {});

// V (T + beta I)^{-1} |rhs| e_1, the approximate solution of (A + beta I) d = rhs
// from the stored factors. No operator applications.
Vector lanczos_shifted_solve(const LanczosFactors& factors, double beta);

}  // namespace lsemink

#endif  // LSEMINK_KRYLOV_HPP
