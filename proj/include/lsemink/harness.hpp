#ifndef LSEMINK_HARNESS_HPP
#define LSEMINK_HARNESS_HPP

#include "lsemink/problems.hpp"
#include "lsemink/solvers.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lsemink {

enum class ProblemKind { Gp, MlrSynthetic, MlrMnist, Manifest };

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem(std::string_view name);

struct ExperimentSpec {
  ProblemKind problem = ProblemKind::Gp;

  // geometric programming
  double eta = 1e-1;
  Eigen::Index m = 100;
  Eigen::Index n = 20;

  // multinomial logistic regression
  std::size_t num_data = 100;
  Eigen::Index classes = 10;
  Eigen::Index feat_dim = 784;  // raw input dimension of the synthetic data
  Eigen::Index rfm_dim = 1000;  // dimension after the random-feature model
  double alpha = 0.0;
  std::filesystem::path mnist_images;
  std::filesystem::path mnist_labels;

  std::filesystem::path manifest;

  std::vector<Method> solvers;
  SolverConfig config;
  // unset: 10000 for gp, 3000 otherwise
  std::optional<std::uint64_t> max_work_units;
  std::uint64_t seed = 0;
  bool parallel = false;
  std::filesystem::path out_dir;

  void validate() const;
  std::string describe() const;
};

struct SolverSummary {
  std::string solver;
  bool ran = false;
  SolveStatus status = SolveStatus::NumericalFailure;
  std::string message;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
  std::uint64_t work_units = 0;
  std::uint64_t matvecs = 0;
  double wall_seconds = 0.0;
  int iterations = 0;
  int curvature_breakdowns = 0;
};

struct RunSummary {
  std::string label;
  std::uint64_t seed = 0;
  std::string git_revision;
  std::string config_json;  // echo of the spec, serialized
  std::vector<SolverSummary> solvers;
};

SolverSummary summarize(const SolveTrace& trace);

// Builds the objective described by the spec (exposed for tests/bindings).
LseObjective build_objective(const ExperimentSpec& spec);
SolverConfig effective_config(const ExperimentSpec& spec);

// Runs every requested solver from x0 = 0 and writes <out>/<solver>.csv and
// <out>/summary.json. A solver that throws is recorded as not run; only
// configuration and I/O problems propagate.
RunSummary run_experiment(const ExperimentSpec& spec);

void write_summary_json(const std::filesystem::path& path, const RunSummary& summary);
RunSummary read_summary_json(const std::filesystem::path& path);

// Markdown table: one column per solver, rows f / |grad f| / time per
// summary. Failed or missing runs are rendered "--".
std::string compare_report(const std::vector<RunSummary>& summaries);

}  // namespace lsemink

#endif  // LSEMINK_HARNESS_HPP
