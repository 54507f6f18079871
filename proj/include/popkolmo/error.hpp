#ifndef POPKOLMO_ERROR_HPP
#define POPKOLMO_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace popkolmo {

enum class ErrorCode {
  NonSquare,
  NegativeOffDiagonal,
  ColumnSumNonZero,
  Overflow,
  NoConvergence,
  GridMismatch,
  NonFiniteState,
  EmptyPopulation,
  DimensionMismatch,
  SampleMismatch,
  InvalidInput,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case ErrorCode::ColumnSumNonZero: return "ColumnSumNonZero";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EmptyPopulation: return "EmptyPopulation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SampleMismatch: return "SampleMismatch";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Exit-code class of an error: 2 for bad input, 3 for runtime divergence,
/// 1 for I/O and numerical non-convergence.
constexpr int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSquare:
    case ErrorCode::NegativeOffDiagonal:
    case ErrorCode::ColumnSumNonZero:
    case ErrorCode::GridMismatch:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::SampleMismatch:
    case ErrorCode::InvalidInput:
      return 2;
    case ErrorCode::NonFiniteState:
      return 3;
    case ErrorCode::Overflow:
    case ErrorCode::NoConvergence:
    case ErrorCode::EmptyPopulation:
    case ErrorCode::Io:
      return 1;
  }
  return 1;
}

/// Library error. `index()` carries the offending row/column/step when the
/// failure is localized.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace popkolmo

#endif  // POPKOLMO_ERROR_HPP
