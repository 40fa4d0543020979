#include "lsemink/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace lsemink {

using json = nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  std::array<char, sizeof(T)> bytes{};
  if (!in.read(bytes.data(), bytes.size())) {
    throw Error(ErrorCode::TruncatedFile, path.string());
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_to_vector(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void save_lsop(const std::filesystem::path& path, const Matrix& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write("LSOP", 4);
  put_le(out, static_cast<std::uint32_t>(entries.rows()));
  put_le(out, static_cast<std::uint32_t>(entries.cols()));
  for (Eigen::Index i = 0; i < entries.rows(); ++i)
    for (Eigen::Index j = 0; j < entries.cols(); ++j) put_le(out, entries(i, j));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Matrix load_lsop(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[4] = {};
  if (!in.read(magic, 4)) throw Error(ErrorCode::TruncatedFile, path.string());
  if (std::memcmp(magic, "LSOP", 4) != 0) throw Error(ErrorCode::BadMagic, path.string());
  const auto rows = get_le<std::uint32_t>(in, path);
  const auto cols = get_le<std::uint32_t>(in, path);
  Matrix entries(rows, cols);
  for (Eigen::Index i = 0; i < entries.rows(); ++i)
    for (Eigen::Index j = 0; j < entries.cols(); ++j) entries(i, j) = get_le<double>(in, path);
  return entries;
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::IoError, path.string() + ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::DimensionMismatch, path.string() + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, path.string());
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

namespace {

class ManifestWriter {
 public:
  explicit ManifestWriter(const std::filesystem::path& manifest) : manifest_(manifest) {}

  json describe(const LinearOperator& op) {
    if (const auto* dense = dynamic_cast<const DenseOperator*>(&op)) {
      auto it = files_.find(dense);
      if (it == files_.end()) {
        const std::string name =
            manifest_.stem().string() + "_op" + std::to_string(files_.size()) + ".lsop";
        save_lsop(manifest_.parent_path() / name, dense->entries());
        it = files_.emplace(dense, name).first;
      }
      return {{"type", "dense"}, {"file", it->second}};
    }
    if (const auto* kron = dynamic_cast<const KroneckerLeftOperator*>(&op)) {
      return {{"type", "kronecker"},
              {"feature", vector_to_json(kron->feature())},
              {"block_dim", kron->block_dim()}};
    }
    if (const auto* scaled = dynamic_cast<const ScaledOperator*>(&op)) {
      return {{"type", "scaled"}, {"scale", scaled->scale()}, {"inner", describe(scaled->inner())}};
    }
    if (dynamic_cast<const IdentityOperator*>(&op) != nullptr) {
      return {{"type", "identity"}, {"n", op.cols()}};
    }
    throw Error(ErrorCode::IoError, "operator type cannot be serialized");
  }

 private:
  std::filesystem::path manifest_;
  std::map<const DenseOperator*, std::string> files_;
};

OperatorPtr build_operator(const json& spec, const std::filesystem::path& base) {
  const std::string type = spec.at("type").get<std::string>();
  if (type == "dense") {
    const std::filesystem::path file = spec.at("file").get<std::string>();
    const std::filesystem::path resolved = file.is_absolute() ? file : base / file;
    if (resolved.extension() == ".csv") {
      return std::make_shared<DenseOperator>(load_matrix_csv(resolved));
    }
    return std::make_shared<DenseOperator>(load_lsop(resolved));
  }
  if (type == "kronecker") {
    return std::make_shared<KroneckerLeftOperator>(json_to_vector(spec.at("feature")),
                                                   spec.at("block_dim").get<Eigen::Index>());
  }
  if (type == "scaled") {
    return std::make_shared<ScaledOperator>(build_operator(spec.at("inner"), base),
                                            spec.at("scale").get<double>());
  }
  if (type == "identity") return std::make_shared<IdentityOperator>(spec.at("n").get<Eigen::Index>());
  throw Error(ErrorCode::ConfigError, "unknown operator type '" + type + "'");
}

}  // namespace

void save_problem_manifest(const std::filesystem::path& path, const LseObjective& obj,
                           const std::string& note) {
  ManifestWriter writer(path);
  json terms = json::array();
  for (const LinearTerm& t : obj.terms()) {
    terms.push_back({{"operator", writer.describe(*t.op)},
                     {"b", vector_to_json(t.offset)},
                     {"c", vector_to_json(t.target)},
                     {"w", t.weight}});
  }
  json doc = {{"n", obj.dim()}, {"N", obj.num_terms()}, {"alpha", obj.alpha()}, {"terms", terms}};
  if (!note.empty()) doc["note"] = note;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

LseObjective load_problem_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    const json doc = json::parse(in);
    std::vector<LinearTerm> terms;
    for (const json& t : doc.at("terms")) {
      LinearTerm term;
      term.op = build_operator(t.at("operator"), path.parent_path());
      term.offset = json_to_vector(t.at("b"));
      term.target = json_to_vector(t.at("c"));
      term.weight = t.at("w").get<double>();
      terms.push_back(std::move(term));
    }
    if (doc.contains("N") && doc.at("N").get<std::size_t>() != terms.size()) {
      throw Error(ErrorCode::ConfigError, "manifest N does not match the term list");
    }
    LseObjective obj(std::move(terms), doc.value("alpha", 0.0));
    if (doc.contains("n") && doc.at("n").get<Eigen::Index>() != obj.dim()) {
      throw Error(ErrorCode::ConfigError, "manifest n does not match the operators");
    }
    return obj;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const IterationRecord& r : trace.records) {
    out << r.index << ',' << format_double(r.f) << ',' << format_double(r.grad_norm) << ','
        << r.work_units << ',' << format_double(r.shift_or_step) << ',' << r.linesearch_trials
        << ',' << r.krylov_iters << ',' << format_double(r.wall_seconds) << '\n';
  }
  out << "# status=" << to_string(trace.status) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_trace_csv(out, trace);
}

SolveTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw Error(ErrorCode::IoError, path.string() + ": unexpected header");
  }
  SolveTrace trace;
  bool have_status = false;
  while (std::getline(in, line)) {
    if (line.rfind("# status=", 0) == 0) {
      const std::string status = line.substr(9);
      for (SolveStatus s : {SolveStatus::GradToleranceMet, SolveStatus::StepToleranceMet,
                            SolveStatus::WorkBudgetExhausted, SolveStatus::LineSearchFailure,
                            SolveStatus::NumericalFailure}) {
        if (to_string(s) == status) {
          trace.status = s;
          have_status = true;
        }
      }
      continue;
    }
    IterationRecord r;
    char comma = 0;
    std::stringstream ss(line);
    ss >> r.index >> comma >> r.f >> comma >> r.grad_norm >> comma >> r.work_units >> comma >>
        r.shift_or_step >> comma >> r.linesearch_trials >> comma >> r.krylov_iters >> comma >>
        r.wall_seconds;
    if (!ss) throw Error(ErrorCode::IoError, path.string() + ": bad row '" + line + "'");
    trace.records.push_back(r);
  }
  if (!have_status) throw Error(ErrorCode::IoError, path.string() + ": missing status line");
  return trace;
}

}  // namespace lsemink
