#include "lsemink/harness.hpp"

#include "lsemink/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#ifndef LSEMINK_GIT_REVISION
#define LSEMINK_GIT_REVISION "unknown"
#endif

namespace lsemink {

using json = nlohmann::json;

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Gp: return "gp";
    case ProblemKind::MlrSynthetic: return "mlr_synthetic";
    case ProblemKind::MlrMnist: return "mlr_mnist";
    case ProblemKind::Manifest: return "manifest";
  }
  return "unknown";
}

ProblemKind parse_problem(std::string_view name) {
  if (name == "gp") return ProblemKind::Gp;
  if (name == "mlr_synthetic") return ProblemKind::MlrSynthetic;
  if (name == "mlr_mnist") return ProblemKind::MlrMnist;
  if (name == "manifest") return ProblemKind::Manifest;
  throw Error(ErrorCode::ConfigError, "unknown problem '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
  if (solvers.empty()) throw Error(ErrorCode::ConfigError, "no solver requested");
  switch (problem) {
    case ProblemKind::Gp:
      if (!(eta > 0.0)) throw Error(ErrorCode::ConfigError, "gp needs eta > 0");
      if (m < 1 || n < 1) throw Error(ErrorCode::ConfigError, "gp needs m, n >= 1");
      break;
    case ProblemKind::MlrSynthetic:
      if (num_data < 1 || classes < 2 || feat_dim < 1 || rfm_dim < 1) {
        throw Error(ErrorCode::ConfigError, "mlr_synthetic needs N, n_f, n_p >= 1 and n_c >= 2");
      }
      break;
    case ProblemKind::MlrMnist:
      if (mnist_images.empty() || mnist_labels.empty()) {
        throw Error(ErrorCode::ConfigError, "mlr_mnist needs --mnist-images and --mnist-labels");
      }
      if (rfm_dim < 1) throw Error(ErrorCode::ConfigError, "mlr_mnist needs rfm_dim >= 1");
      break;
    case ProblemKind::Manifest:
      if (manifest.empty()) throw Error(ErrorCode::ConfigError, "manifest problem needs --manifest");
      break;
  }
  if (!(alpha >= 0.0)) throw Error(ErrorCode::ConfigError, "alpha must be >= 0");
  effective_config(*this).validate();
}

std::string ExperimentSpec::describe() const {
  char buf[160];
  switch (problem) {
    case ProblemKind::Gp:
      std::snprintf(buf, sizeof(buf), "gp eta=%g m=%lld n=%lld", eta, static_cast<long long>(m),
                    static_cast<long long>(n));
      break;
    case ProblemKind::MlrSynthetic:
      std::snprintf(buf, sizeof(buf), "mlr_synthetic N=%zu n_c=%lld n_p=%lld alpha=%g", num_data,
                    static_cast<long long>(classes), static_cast<long long>(rfm_dim), alpha);
      break;
    case ProblemKind::MlrMnist:
      std::snprintf(buf, sizeof(buf), "mlr_mnist N=%zu n_p=%lld alpha=%g", num_data,
                    static_cast<long long>(rfm_dim), alpha);
      break;
    case ProblemKind::Manifest:
      std::snprintf(buf, sizeof(buf), "manifest %s", manifest.filename().string().c_str());
      break;
  }
  return buf;
}

SolverConfig effective_config(const ExperimentSpec& spec) {
  SolverConfig cfg = spec.config;
  cfg.max_work_units =
      spec.max_work_units.value_or(spec.problem == ProblemKind::Gp ? 10000 : 3000);
  return cfg;
}

LseObjective build_objective(const ExperimentSpec& spec) {
  switch (spec.problem) {
    case ProblemKind::Gp:
      return make_gp(spec.m, spec.n, spec.eta, spec.seed);
    case ProblemKind::MlrSynthetic:
      return make_mlr(make_synthetic_classification(spec.num_data, spec.feat_dim, spec.classes,
                                                    spec.rfm_dim, spec.seed),
                      spec.alpha);
    case ProblemKind::MlrMnist: {
      const MlrDataset raw = load_mnist_idx(spec.mnist_images, spec.mnist_labels, spec.num_data);
      const RfmExtractor ext = RfmExtractor::random(raw.feature_dim, spec.rfm_dim, spec.seed);
      return make_mlr(ext.transform(raw), spec.alpha);
    }
    case ProblemKind::Manifest:
      return load_problem_manifest(spec.manifest);
  }
  throw Error(ErrorCode::ConfigError, "unknown problem kind");
}

SolverSummary summarize(const SolveTrace& trace) {
  SolverSummary s;
  s.solver = trace.method;
  s.ran = true;
  s.status = trace.status;
  s.message = trace.message;
  s.curvature_breakdowns = trace.curvature_breakdowns;
  if (!trace.records.empty()) {
    const IterationRecord& last = trace.records.back();
    s.final_f = last.f;
    s.final_grad_norm = last.grad_norm;
    s.work_units = last.work_units;
    s.matvecs = last.matvecs;
    s.wall_seconds = last.wall_seconds;
    s.iterations = last.index;
  }
  return s;
}

namespace {

json spec_to_json(const ExperimentSpec& spec, const SolverConfig& cfg) {
  json solvers = json::array();
  for (Method m : spec.solvers) solvers.push_back(std::string(to_string(m)));
  json j = {{"problem", std::string(to_string(spec.problem))},
            {"solvers", solvers},
            {"seed", spec.seed},
            {"gtol", cfg.gtol},
            {"xtol", cfg.xtol},
            {"max_work", cfg.max_work_units},
            {"ktol", cfg.krylov.ktol},
            {"kmaxiter", cfg.krylov.kmaxiter},
            {"gamma", cfg.gamma},
            {"beta0", cfg.beta0},
            {"max_linesearch", cfg.max_linesearch},
            {"x0", "zero"},
            {"objective_constants", "x-independent terms c'b omitted"}};
  switch (spec.problem) {
    case ProblemKind::Gp:
      j["eta"] = spec.eta;
      j["m"] = spec.m;
      j["n"] = spec.n;
      break;
    case ProblemKind::MlrSynthetic:
      j["num_data"] = spec.num_data;
      j["classes"] = spec.classes;
      j["feat_dim"] = spec.feat_dim;
      j["rfm_dim"] = spec.rfm_dim;
      j["alpha"] = spec.alpha;
      break;
    case ProblemKind::MlrMnist:
      j["num_data"] = spec.num_data;
      j["rfm_dim"] = spec.rfm_dim;
      j["alpha"] = spec.alpha;
      j["mnist_images"] = spec.mnist_images.string();
      j["mnist_labels"] = spec.mnist_labels.string();
      break;
    case ProblemKind::Manifest:
      j["manifest"] = spec.manifest.string();
      break;
  }
  return j;
}

SolverSummary run_one(Method method, const LseObjective& obj, const SolverConfig& cfg,
                      const std::filesystem::path& out_dir) {
  SolverSummary summary;
  try {
    const SolveTrace trace = solve(method, obj, Vector::Zero(obj.dim()), cfg);
    write_trace_csv(out_dir / (std::string(to_string(method)) + ".csv"), trace);
    summary = summarize(trace);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    summary.ran = false;
    summary.message = e.what();
  }
  summary.solver = std::string(to_string(method));
  return summary;
}

}  // namespace

RunSummary run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const SolverConfig cfg = effective_config(spec);
  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec || !std::filesystem::is_directory(spec.out_dir)) {
    throw Error(ErrorCode::IoError, "cannot create output directory " + spec.out_dir.string());
  }

  const LseObjective obj = build_objective(spec);

  RunSummary summary;
  summary.label = spec.describe();
  summary.seed = spec.seed;
  summary.git_revision = LSEMINK_GIT_REVISION;
  summary.config_json = spec_to_json(spec, cfg).dump();

  if (spec.parallel && spec.solvers.size() > 1) {
    std::vector<std::future<SolverSummary>> jobs;
    for (Method m : spec.solvers) {
      jobs.push_back(std::async(std::launch::async, run_one, m, std::cref(obj), std::cref(cfg),
                                std::cref(spec.out_dir)));
    }
    for (auto& job : jobs) summary.solvers.push_back(job.get());
  } else {
    for (Method m : spec.solvers) summary.solvers.push_back(run_one(m, obj, cfg, spec.out_dir));
  }

  write_summary_json(spec.out_dir / "summary.json", summary);
  return summary;
}

void write_summary_json(const std::filesystem::path& path, const RunSummary& summary) {
  json solvers = json::array();
  for (const SolverSummary& s : summary.solvers) {
    json entry = {{"solver", s.solver}, {"ran", s.ran}, {"message", s.message}};
    if (s.ran) {
      entry["status"] = std::string(to_string(s.status));
      entry["final_f"] = s.final_f;
      entry["final_grad_norm"] = s.final_grad_norm;
      entry["work_units"] = s.work_units;
      entry["matvecs"] = s.matvecs;
      entry["wall_seconds"] = s.wall_seconds;
      entry["iterations"] = s.iterations;
      entry["curvature_breakdowns"] = s.curvature_breakdowns;
    }
    solvers.push_back(entry);
  }
  const json doc = {{"label", summary.label},
                    {"solvers", solvers},
                    {"metadata",
                     {{"seed", summary.seed},
                      {"git_revision", summary.git_revision},
                      {"config", json::parse(summary.config_json.empty() ? "{}" : summary.config_json)}}}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

RunSummary read_summary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    const json doc = json::parse(in);
    RunSummary summary;
    summary.label = doc.value("label", "");
    const json& meta = doc.at("metadata");
    summary.seed = meta.value("seed", std::uint64_t{0});
    summary.git_revision = meta.value("git_revision", "");
    summary.config_json = meta.contains("config") ? meta.at("config").dump() : "{}";
    for (const json& entry : doc.at("solvers")) {
      SolverSummary s;
      s.solver = entry.at("solver").get<std::string>();
      s.ran = entry.value("ran", false);
      s.message = entry.value("message", "");
      if (s.ran) {
        const std::string status = entry.at("status").get<std::string>();
        for (SolveStatus candidate :
             {SolveStatus::GradToleranceMet, SolveStatus::StepToleranceMet,
              SolveStatus::WorkBudgetExhausted, SolveStatus::LineSearchFailure,
              SolveStatus::NumericalFailure}) {
          if (to_string(candidate) == status) s.status = candidate;
        }
        s.final_f = entry.at("final_f").get<double>();
        s.final_grad_norm = entry.at("final_grad_norm").get<double>();
        s.work_units = entry.at("work_units").get<std::uint64_t>();
        s.matvecs = entry.value("matvecs", std::uint64_t{0});
        s.wall_seconds = entry.at("wall_seconds").get<double>();
        s.iterations = entry.value("iterations", 0);
        s.curvature_breakdowns = entry.value("curvature_breakdowns", 0);
      }
      summary.solvers.push_back(std::move(s));
    }
    return summary;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

namespace {

bool failed(const SolverSummary& s) {
  return !s.ran || s.status == SolveStatus::LineSearchFailure ||
         s.status == SolveStatus::NumericalFailure;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::string seconds(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2fs", v);
  return buf;
}

}  // namespace

std::string compare_report(const std::vector<RunSummary>& summaries) {
  if (summaries.empty()) throw Error(ErrorCode::InvalidArgument, "compare_report needs a summary");

  // columns in the usual order first, anything else after
  std::vector<std::string> columns;
  for (const char* known : {"ncg", "ngd", "smnk", "lsemink"}) {
    for (const RunSummary& rs : summaries) {
      const bool present = std::any_of(rs.solvers.begin(), rs.solvers.end(),
                                       [&](const SolverSummary& s) { return s.solver == known; });
      if (present && std::find(columns.begin(), columns.end(), known) == columns.end()) {
        columns.emplace_back(known);
      }
    }
  }
  for (const RunSummary& rs : summaries)
    for (const SolverSummary& s : rs.solvers)
      if (std::find(columns.begin(), columns.end(), s.solver) == columns.end()) {
        columns.push_back(s.solver);
      }

  std::ostringstream out;
  out << "| problem | |";
  for (const std::string& c : columns) {
    std::string upper = c;
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    out << ' ' << upper << " |";
  }
  out << "\n|---|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out << "---|";
  out << '\n';

  for (const RunSummary& rs : summaries) {
    const char* row_names[] = {"f", "‖∇f‖", "Time"};
    for (int row = 0; row < 3; ++row) {
      out << "| " << (row == 0 ? rs.label : "") << " | " << row_names[row] << " |";
      for (const std::string& c : columns) {
        auto it = std::find_if(rs.solvers.begin(), rs.solvers.end(),
                               [&](const SolverSummary& s) { return s.solver == c; });
        std::string cell = "--";
        if (it != rs.solvers.end() && !failed(*it)) {
          cell = row == 0 ? sci(it->final_f)
                          : row == 1 ? sci(it->final_grad_norm) : seconds(it->wall_seconds);
        }
        out << ' ' << cell << " |";
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace lsemink
