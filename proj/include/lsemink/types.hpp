#ifndef LSEMINK_TYPES_HPP
#define LSEMINK_TYPES_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace lsemink {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ErrorCode {
  DimensionMismatch,
  NonFiniteInput,
  NonFiniteValue,
  EmptyInput,
  InvalidArgument,
  StaleCache,
  ZeroRhs,
  SingularTridiagonal,
  InvalidEta,
  EmptyDataset,
  BadMagic,
  TruncatedFile,
  CountMismatch,
  ScaleLimit,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace lsemink

#endif  // LSEMINK_TYPES_HPP
