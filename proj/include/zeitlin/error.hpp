#pragma once

#include <stdexcept>
#include <string>

namespace zeitlin {

/// Coarse error classes. The numeric values double as C API status codes.
enum class ErrorKind : int {
  InvalidArgument = 1,  // bad N, dimension mismatch, broken symmetry, ...
  Config = 2,
  Numeric = 3,          // convergence, degeneracy, eigensolver failure
  Io = 4,               // I/O and file-format failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidTruncation : Error {
  explicit InvalidTruncation(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct NotInRange : Error {
  explicit NotInRange(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct TruncationOverflow : Error {
  explicit TruncationOverflow(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct SymmetryError : Error {
  explicit SymmetryError(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct ResolutionError : Error {
  explicit ResolutionError(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct InsufficientData : Error {
  explicit InsufficientData(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::Config, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};

/// Picard iteration failed to reach the requested tolerance.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& w, double residual)
      : Error(ErrorKind::Numeric, w), last_residual(residual) {}
  double last_residual;
};

/// Two eigenvalues closer than the degeneracy threshold where a division by
/// their difference is required.
struct DegeneracyError : Error {
  DegeneracyError(const std::string& w, int k_, int l_)
      : Error(ErrorKind::Numeric, w), k(k_), l(l_) {}
  int k;
  int l;
};

struct FormatError : Error {
  FormatError(const std::string& w, std::size_t off)
      : Error(ErrorKind::Io, w), offset(off) {}
  std::size_t offset;
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};

}  // namespace zeitlin
