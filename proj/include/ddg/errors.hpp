#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace ddg {

using Index = std::int64_t;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Arguments violate a documented precondition (unsorted index set, bad count, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A Cholesky factorization hit a non-positive pivot.
///
/// `pivot` is the row of the (unpermuted) input at which elimination failed.
/// `block` is set when the failure can be attributed to one subdomain/part.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(Index pivot, std::optional<Index> block = std::nullopt)
      : Error(make_message(pivot, block)), pivot_(pivot), block_(block) {}
  /// Same failure with `context` prepended to the message.
  NotPositiveDefinite(const std::string& context, const NotPositiveDefinite& inner)
      : Error(context + ": " + inner.what()), pivot_(inner.pivot_), block_(inner.block_) {}

  Index pivot() const noexcept { return pivot_; }
  std::optional<Index> block() const noexcept { return block_; }

 private:
  static std::string make_message(Index pivot, std::optional<Index> block) {
    std::string msg = "matrix is not positive definite (pivot " + std::to_string(pivot) + ")";
    if (block) msg += " in block " + std::to_string(*block);
    return msg;
  }

  Index pivot_;
  std::optional<Index> block_;
};

/// The preconditioner produced <Mr, r> <= 0 inside CG.
class PreconditionerNotSpd : public Error {
 public:
  using Error::Error;
};

/// Three-level construction requested on a problem whose second-level
/// partition would have fewer than two parts.
class TooSmallForThreeLevels : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddg
