// Command-line front end: build a problem, run solvers, write traces.
//
//   lsemink run --problem gp --eta 1e-3 --solver lsemink --solver ngd --out runs/gp
//   lsemink report runs/gp/summary.json runs/mlr/summary.json
//   lsemink dump-problem --problem gp --eta 1e-1 --out runs/gp_instance

#include "lsemink/harness.hpp"
#include "lsemink/io.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

struct CliOptions {
  lsemink::ExperimentSpec spec;
  std::string problem = "gp";
  std::vector<std::string> solvers;
  std::uint64_t max_work = 0;
  std::vector<std::string> summaries;
};

void add_problem_flags(CLI::App& cmd, CliOptions& o) {
  auto& s = o.spec;
  cmd.add_option("--problem", o.problem, "gp | mlr_synthetic | mlr_mnist | manifest")
      ->check(CLI::IsMember({"gp", "mlr_synthetic", "mlr_mnist", "manifest"}));
  cmd.add_option("--eta", s.eta, "GP smoothing parameter")->capture_default_str();
  cmd.add_option("--m", s.m, "GP rows")->capture_default_str();
  cmd.add_option("--n", s.n, "GP unknowns")->capture_default_str();
  cmd.add_option("--num-data", s.num_data, "MLR training samples")->capture_default_str();
  cmd.add_option("--classes", s.classes, "MLR classes (synthetic)")->capture_default_str();
  cmd.add_option("--feat-dim", s.feat_dim, "raw feature dimension (synthetic)")->capture_default_str();
  cmd.add_option("--rfm-dim", s.rfm_dim, "random-feature dimension")->capture_default_str();
  cmd.add_option("--alpha", s.alpha, "Tikhonov coefficient")->capture_default_str();
  cmd.add_option("--mnist-images", s.mnist_images, "MNIST IDX image file");
  cmd.add_option("--mnist-labels", s.mnist_labels, "MNIST IDX label file");
  cmd.add_option("--manifest", s.manifest, "problem manifest (JSON)");
  cmd.add_option("--seed", s.seed, "random seed")->capture_default_str();
  cmd.add_option("--out", s.out_dir, "output directory")->required();
}

int run_command(CliOptions& o) {
  auto& s = o.spec;
  s.problem = lsemink::parse_problem(o.problem);
  if (o.solvers.empty()) o.solvers = {"ncg", "ngd", "smnk", "lsemink"};
  for (const std::string& name : o.solvers) s.solvers.push_back(lsemink::parse_method(name));
  if (o.max_work > 0) s.max_work_units = o.max_work;

  const lsemink::RunSummary summary = lsemink::run_experiment(s);
  for (const auto& r : summary.solvers) {
    if (r.ran) {
      std::cout << r.solver << ": status=" << lsemink::to_string(r.status) << " f=" << r.final_f
                << " gnorm=" << r.final_grad_norm << " work=" << r.work_units << '\n';
    } else {
      std::cout << r.solver << ": failed to run (" << r.message << ")\n";
    }
  }
  std::cout << lsemink::compare_report({summary});
  return 0;
}

int dump_command(CliOptions& o) {
  auto& s = o.spec;
  s.problem = lsemink::parse_problem(o.problem);
  s.solvers = {lsemink::Method::Lsemink};
  s.validate();
  std::filesystem::create_directories(s.out_dir);
  const lsemink::LseObjective obj = lsemink::build_objective(s);
  const auto path = s.out_dir / "problem.json";
  lsemink::save_problem_manifest(path, obj, s.describe() + " seed=" + std::to_string(s.seed));
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-sum-exp minimization experiments (LSEMINK and baselines)"};
  app.require_subcommand(1);
  CliOptions o;

  auto* run = app.add_subcommand("run", "run solvers on a problem and write traces");
  add_problem_flags(*run, o);
  auto& cfg = o.spec.config;
  run->add_option("--solver", o.solvers, "lsemink | ncg | smnk | ngd (repeatable; default all)")
      ->check(CLI::IsMember({"lsemink", "ncg", "smnk", "ngd"}));
  run->add_option("--gtol", cfg.gtol, "gradient-norm tolerance")->capture_default_str();
  run->add_option("--xtol", cfg.xtol, "relative step tolerance")->capture_default_str();
  run->add_option("--max-work", o.max_work, "work-unit budget (default 10000 gp, 3000 mlr)");
  run->add_option("--ktol", cfg.krylov.ktol, "Krylov relative residual tolerance")
      ->capture_default_str();
  run->add_option("--kmaxiter", cfg.krylov.kmaxiter, "Krylov iteration cap")->capture_default_str();
  run->add_option("--gamma", cfg.gamma, "Armijo parameter")->capture_default_str();
  run->add_option("--beta0", cfg.beta0, "initial shift / step parameter")->capture_default_str();
  run->add_flag("--parallel", o.spec.parallel, "run the solvers concurrently");

  auto* dump = app.add_subcommand("dump-problem", "write a problem manifest (+ LSOP operators)");
  add_problem_flags(*dump, o);

  auto* report = app.add_subcommand("report", "markdown comparison of summary.json files");
  report->add_option("summaries", o.summaries, "summary.json files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(o);
    if (dump->parsed()) return dump_command(o);
    if (report->parsed()) {
      std::vector<lsemink::RunSummary> summaries;
      for (const std::string& path : o.summaries) {
        summaries.push_back(lsemink::read_summary_json(path));
      }
      std::cout << lsemink::compare_report(summaries);
      return 0;
    }
  } catch (const lsemink::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
