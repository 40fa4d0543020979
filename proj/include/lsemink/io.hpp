#ifndef LSEMINK_IO_HPP
#define LSEMINK_IO_HPP

#include "lsemink/objective.hpp"
#include "lsemink/solvers.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace lsemink {

// LSOP container: "LSOP", u32 rows, u32 cols (little endian), then
// rows * cols little-endian f64 in row-major order.
void save_lsop(const std::filesystem::path& path, const Matrix& entries);
Matrix load_lsop(const std::filesystem::path& path);

// Comma-separated rows of numbers; blank lines and '#' comments skipped.
Matrix load_matrix_csv(const std::filesystem::path& path);

// JSON manifest {n, N, alpha, terms: [{operator, b, c, w}]}. Dense operators
// are written next to the manifest as LSOP files and referenced by relative
// path; Kronecker, identity and scaled operators are described inline.
void save_problem_manifest(const std::filesystem::path& path, const LseObjective& obj,
                           const std::string& note = {});
LseObjective load_problem_manifest(const std::filesystem::path& path);

inline constexpr const char* kTraceCsvHeader =
    "iter,f,gnorm,work_units,shift_or_step,ls_trials,krylov_iters,wall_seconds";

// One row per record, doubles at round-trip precision, then "# status=<...>".
void write_trace_csv(std::ostream& out, const SolveTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace);

// Parses a file produced by write_trace_csv (fields not in the CSV stay default).
SolveTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace lsemink

#endif  // LSEMINK_IO_HPP
