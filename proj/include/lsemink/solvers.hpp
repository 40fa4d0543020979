#ifndef LSEMINK_SOLVERS_HPP
#define LSEMINK_SOLVERS_HPP

#include "lsemink/krylov.hpp"
#include "lsemink/objective.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lsemink {

struct IterationRecord;

struct SolverConfig {
  double gtol = 1e-14;
  double xtol = 1e-10;
  // Budget in work units, one unit = one application of every linear model
  // (N operator applications for an N-term objective).
  std::uint64_t max_work_units = 3000;
  double gamma = 1e-4;
  double beta0 = 1.0;
  int max_linesearch = 40;
  KrylovConfig krylov;
  // Store every accepted iterate in the trace (tests only; O(n) per iteration).
  bool keep_iterates = false;
  // Called after each record is appended (progress output, accounting checks).
  std::function<void(const IterationRecord&)> on_record;

  void validate() const;
};

enum class SolveStatus {
  GradToleranceMet,
  StepToleranceMet,
  WorkBudgetExhausted,
  LineSearchFailure,
  NumericalFailure,
};

std::string_view to_string(SolveStatus status);

struct IterationRecord {
  int index = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  std::uint64_t work_units = 0;  // cumulative, matvecs / N
  std::uint64_t matvecs = 0;     // cumulative operator applications
  double shift_or_step = 0.0;    // beta (LSEMINK, SMNK), step t (NCG), lambda (NGD)
  int linesearch_trials = 0;
  int krylov_iters = 0;
  double wall_seconds = 0.0;
  // grad f(x_prev)'(x - x_prev) for the accepted step; 0 on the initial record
  double slope = 0.0;
  double step_norm = 0.0;
  KrylovTermination krylov_termination = KrylovTermination::ZeroRhs;
};

struct SolveTrace {
  std::string method;
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::NumericalFailure;
  std::string message;
  Vector final_x;
  int curvature_breakdowns = 0;
  std::vector<Vector> iterates;  // filled when keep_iterates is set
};

// Modified Newton-Krylov with the row-space shift beta * sum_k w_k J_k'J_k.
// Each line-search trial re-solves the shifted Newton system by CG; beta
// doubles on rejection and halves after a first-trial acceptance.
SolveTrace lsemink(const LseObjective& obj, const Vector& x0, const SolverConfig& cfg);

// Newton-CG on the unshifted Hessian with step-halving Armijo backtracking.
SolveTrace newton_cg(const LseObjective& obj, const Vector& x0, const SolverConfig& cfg);

// Identity-shift modified Newton: one Lanczos factorization of the Hessian per
// iteration, reused for every trial beta.
SolveTrace smnk(const LseObjective& obj, const Vector& x0, const SolverConfig& cfg);

// L2 natural gradient: CG on the metric sum_k w_k J_k'J_k + alpha I, step
// scaled by 1/lambda with lambda chosen by the same doubling/halving rule.
SolveTrace ngd(const LseObjective& obj, const Vector& x0, const SolverConfig& cfg);

enum class Method { Lsemink, NewtonCg, Smnk, Ngd };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);
SolveTrace solve(Method m, const LseObjective& obj, const Vector& x0, const SolverConfig& cfg);

}  // namespace lsemink

#endif  // LSEMINK_SOLVERS_HPP
