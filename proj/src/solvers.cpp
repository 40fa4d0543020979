#include "lsemink/solvers.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <string>

namespace lsemink {

void SolverConfig::validate() const {
  if (!(gtol > 0.0)) throw Error(ErrorCode::ConfigError, "gtol must be positive");
  if (!(xtol > 0.0)) throw Error(ErrorCode::ConfigError, "xtol must be positive");
  if (max_work_units < 1) throw Error(ErrorCode::ConfigError, "work budget must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::ConfigError, "gamma must lie in (0, 1)");
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) {
    throw Error(ErrorCode::ConfigError, "beta0 must be finite and positive");
  }
  if (max_linesearch < 0) throw Error(ErrorCode::ConfigError, "max_linesearch must be >= 0");
  krylov.validate();
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::GradToleranceMet: return "GradToleranceMet";
    case SolveStatus::StepToleranceMet: return "StepToleranceMet";
    case SolveStatus::WorkBudgetExhausted: return "WorkBudgetExhausted";
    case SolveStatus::LineSearchFailure: return "LineSearchFailure";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Lsemink: return "lsemink";
    case Method::NewtonCg: return "ncg";
    case Method::Smnk: return "smnk";
    case Method::Ngd: return "ngd";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "lsemink") return Method::Lsemink;
  if (name == "ncg") return Method::NewtonCg;
  if (name == "smnk") return Method::Smnk;
  if (name == "ngd") return Method::Ngd;
  throw Error(ErrorCode::ConfigError, "unknown solver '" + std::string(name) + "'");
}

namespace {

// Thrown inside a run to stop it with a final status.
struct Halt {
  SolveStatus status;
  std::string message;
};

// State shared by all four methods: current iterate, cached evaluation,
// work metering and trace bookkeeping.
class Run {
 public:
  Run(const LseObjective& obj, const SolverConfig& cfg, std::string method)
      : obj_(obj), cfg_(cfg), terms_(obj.num_terms()), start_(std::chrono::steady_clock::now()) {
    cfg_.validate();
    trace_.method = std::move(method);
  }

  const LseObjective& obj() const { return obj_; }
  const SolverConfig& cfg() const { return cfg_; }
  const EvaluationState& state() const { return *state_; }
  const Vector& x() const { return state_->x(); }
  const Vector& grad() const { return grad_; }
  double f() const { return state_->f(); }
  SolveTrace& trace() { return trace_; }

  bool exhausted() const { return matvecs_ >= cfg_.max_work_units * terms_; }

  void require_budget() const {
    if (exhausted()) throw Halt{SolveStatus::WorkBudgetExhausted, "work budget exhausted"};
  }

  StopPredicate stop_predicate() const {
    return [this] { return exhausted(); };
  }

  EvaluationState evaluate(const Vector& x) {
    matvecs_ += obj_.evaluate_cost();
    return obj_.evaluate(x);
  }

  Vector gradient(const EvaluationState& s) {
    matvecs_ += obj_.gradient_cost();
    return obj_.gradient(s);
  }

  Vector shifted_hessian_vec(const Vector& v, double beta) {
    matvecs_ += obj_.hessian_vec_cost();
    return obj_.shifted_hessian_vec(*state_, v, beta);
  }

  Vector hessian_vec(const Vector& v) {
    matvecs_ += obj_.hessian_vec_cost();
    return obj_.hessian_vec(*state_, v);
  }

  Vector metric_vec(const Vector& v) {
    matvecs_ += obj_.hessian_vec_cost();
    return obj_.metric_vec(v);
  }

  // Evaluates x + d for a line-search trial; nullopt means "reject" (the trial
  // point overflowed before any operator was touched).
  std::optional<EvaluationState> trial(const Vector& d) {
    require_budget();
    Vector candidate = x() + d;
    if (!candidate.allFinite()) return std::nullopt;
    return evaluate(candidate);
  }

  // Records the starting point; halts right away if it is already stationary.
  void start(const Vector& x0) {
    if (x0.size() != obj_.dim()) throw Error(ErrorCode::DimensionMismatch, "x0 has wrong length");
    if (!x0.allFinite()) throw Error(ErrorCode::NonFiniteInput, "x0");
    state_ = evaluate(x0);
    grad_ = gradient(*state_);
    IterationRecord rec;
    rec.index = 0;
    fill_common(rec);
    push(rec);
    if (rec.grad_norm < cfg_.gtol) {
      throw Halt{SolveStatus::GradToleranceMet, "gradient below tolerance at start"};
    }
  }

  // Moves to an accepted trial point and applies the stopping tests.
  void accept(EvaluationState next, const Vector& step, double slope, double shift_or_step,
              int trials, int krylov_iters, KrylovTermination kt) {
    const double prev_norm = x().norm();
    state_ = std::move(next);
    grad_ = gradient(*state_);

    IterationRecord rec;
    rec.index = static_cast<int>(trace_.records.size());
    fill_common(rec);
    rec.shift_or_step = shift_or_step;
    rec.linesearch_trials = trials;
    rec.krylov_iters = krylov_iters;
    rec.slope = slope;
    rec.step_norm = step.norm();
    rec.krylov_termination = kt;
    push(rec);

    if (!grad_.allFinite()) throw Halt{SolveStatus::NumericalFailure, "gradient not finite"};
    if (rec.grad_norm < cfg_.gtol) throw Halt{SolveStatus::GradToleranceMet, ""};
    // relative step test is undefined at x = 0; skipped there
    if (prev_norm > 0.0 && rec.step_norm / prev_norm < cfg_.xtol) {
      throw Halt{SolveStatus::StepToleranceMet, ""};
    }
  }

  // Non-strict, evaluated in floating point: once gamma * slope drops below
  // ulp(f) a step is still accepted as long as f does not go up.
  bool armijo(const EvaluationState& trial_state, double slope) const {
    return trial_state.f() <= f() + cfg_.gamma * slope;
  }

  SolveTrace finish(SolveStatus status, std::string message) {
    trace_.status = status;
    trace_.message = std::move(message);
    trace_.final_x = state_ ? state_->x() : Vector{};
    return std::move(trace_);
  }

 private:
  void fill_common(IterationRecord& rec) const {
    rec.f = state_->f();
    rec.grad_norm = grad_.norm();
    rec.matvecs = matvecs_;
    rec.work_units = matvecs_ / terms_;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void push(const IterationRecord& rec) {
    trace_.records.push_back(rec);
    if (cfg_.keep_iterates) trace_.iterates.push_back(state_->x());
    if (cfg_.on_record) cfg_.on_record(rec);
  }

  const LseObjective& obj_;
  SolverConfig cfg_;
  std::uint64_t terms_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t matvecs_ = 0;
  std::optional<EvaluationState> state_;
  Vector grad_;
  SolveTrace trace_;
};

template <typename Body>
SolveTrace drive(const LseObjective& obj, const Vector& x0, const SolverConfig& cfg,
                 std::string method, Body body) {
  Run run(obj, cfg, std::move(method));
  try {
    run.start(x0);
    body(run);
  } catch (const Halt& halt) {
    return run.finish(halt.status, halt.message);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonFiniteValue || e.code() == ErrorCode::NonFiniteInput) {
      return run.finish(SolveStatus::NumericalFailure, e.what());
    }
    throw;
  }
  return run.finish(SolveStatus::NumericalFailure, "solver loop ended unexpectedly");
}

Halt line_search_failure(int trials) {
  return Halt{SolveStatus::LineSearchFailure,
              "no Armijo step after " + std::to_string(trials) + " trials"};
}

}  // namespace

SolveTrace lsemink(const LseObjective& obj, const Vector& x0, const SolverConfig& cfg) {
  return drive(obj, x0, cfg, "lsemink", [](Run& run) {
    double beta = run.cfg().beta0;
    for (;;) {
      const Vector rhs = -run.grad();
      int krylov_iters = 0;
      bool accepted = false;
      int j = 0;
      for (; j <= run.cfg().max_linesearch; ++j) {
        run.require_budget();
        const KrylovOutcome cg = cg_solve(
            [&run, beta](const Vector& v) { return run.shifted_hessian_vec(v, beta); }, rhs,
            run.cfg().krylov, run.stop_predicate());
        krylov_iters += cg.iterations;
        if (cg.termination == KrylovTermination::Interrupted) run.require_budget();
        const double slope = run.grad().dot(cg.solution);
        if (slope < 0.0) {
          if (auto next = run.trial(cg.solution); next && run.armijo(*next, slope)) {
            run.accept(std::move(*next), cg.solution, slope, beta, j + 1, krylov_iters,
                       cg.termination);
            accepted = true;
            break;
          }
        }
        beta *= 2.0;
      }
      if (!accepted) throw line_search_failure(j);
      if (j == 0) beta *= 0.5;
    }
  });
}

SolveTrace newton_cg(const LseObjective& obj, const Vector& x0, const SolverConfig& cfg) {
  return drive(obj, x0, cfg, "ncg", [](Run& run) {
    for (;;) {
      run.require_budget();
      const KrylovOutcome cg =
          cg_solve([&run](const Vector& v) { return run.hessian_vec(v); }, -run.grad(),
                   run.cfg().krylov, run.stop_predicate());
      if (cg.termination == KrylovTermination::Interrupted) run.require_budget();
      if (cg.termination == KrylovTermination::CurvatureBreakdown) ++run.trace().curvature_breakdowns;

      Vector direction = cg.solution;
      double slope = run.grad().dot(direction);
      if (!(slope < 0.0)) {
        direction = -run.grad();
        slope = -run.grad().squaredNorm();
      }

      double t = 1.0;
      bool accepted = false;
      int j = 0;
      for (; j <= run.cfg().max_linesearch; ++j) {
        const Vector step = t * direction;
        if (auto next = run.trial(step); next && run.armijo(*next, t * slope)) {
          run.accept(std::move(*next), step, t * slope, t, j + 1, cg.iterations, cg.termination);
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) throw line_search_failure(j);
    }
  });
}

SolveTrace smnk(const LseObjective& obj, const Vector& x0, const SolverConfig& cfg) {
  return drive(obj, x0, cfg, "smnk", [](Run& run) {
    double beta = run.cfg().beta0;
    for (;;) {
      run.require_budget();
      const LanczosFactors factors =
          lanczos_factorize([&run](const Vector& v) { return run.hessian_vec(v); }, -run.grad(),
                            run.cfg().krylov, run.stop_predicate());
      if (factors.interrupted) run.require_budget();
      if (factors.rank() == 0) throw Halt{SolveStatus::WorkBudgetExhausted, "work budget exhausted"};

      bool accepted = false;
      int j = 0;
      for (; j <= run.cfg().max_linesearch; ++j) {
        std::optional<Vector> direction;
        try {
          direction = lanczos_shifted_solve(factors, beta);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SingularTridiagonal) throw;
        }
        if (direction) {
          const double slope = run.grad().dot(*direction);
          if (slope < 0.0) {
            if (auto next = run.trial(*direction); next && run.armijo(*next, slope)) {
              run.accept(std::move(*next), *direction, slope, beta, j + 1, factors.rank(),
                         factors.interrupted ? KrylovTermination::Interrupted
                                             : KrylovTermination::ToleranceMet);
              accepted = true;
              break;
            }
          }
        }
        beta *= 2.0;
      }
      if (!accepted) throw line_search_failure(j);
      if (j == 0) beta *= 0.5;
    }
  });
}

SolveTrace ngd(const LseObjective& obj, const Vector& x0, const SolverConfig& cfg) {
  return drive(obj, x0, cfg, "ngd", [](Run& run) {
    double lambda = run.cfg().beta0;
    for (;;) {
      run.require_budget();
      const KrylovOutcome cg =
          cg_solve([&run](const Vector& v) { return run.metric_vec(v); }, -run.grad(),
                   run.cfg().krylov, run.stop_predicate());
      if (cg.termination == KrylovTermination::Interrupted) run.require_budget();
      const double base_slope = run.grad().dot(cg.solution);

      bool accepted = false;
      int j = 0;
      if (base_slope < 0.0) {
        for (; j <= run.cfg().max_linesearch; ++j) {
          const Vector step = cg.solution / lambda;
          const double slope = base_slope / lambda;
          if (auto next = run.trial(step); next && run.armijo(*next, slope)) {
            run.accept(std::move(*next), step, slope, lambda, j + 1, cg.iterations,
                       cg.termination);
            accepted = true;
            break;
          }
          lambda *= 2.0;
        }
      }
      if (!accepted) throw line_search_failure(j);
      if (j == 0) lambda *= 0.5;
    }
  });
}

SolveTrace solve(Method m, const LseObjective& obj, const Vector& x0, const SolverConfig& cfg) {
  switch (m) {
    case Method::Lsemink: return lsemink(obj, x0, cfg);
    case Method::NewtonCg: return newton_cg(obj, x0, cfg);
    case Method::Smnk: return smnk(obj, x0, cfg);
    case Method::Ngd: return ngd(obj, x0, cfg);
  }
  throw Error(ErrorCode::ConfigError, "unknown method");
}

}  // namespace lsemink
