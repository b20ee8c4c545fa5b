#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace polsar {

/// Raised when input data is malformed, inconsistent, or insufficient for the
/// requested operation. Argument contract violations use std::invalid_argument.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be decoded. `offset()` is the byte position at which the
/// problem was detected.
class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : DataError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  [[nodiscard]] std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(int epoch)
      : std::runtime_error("diverged: non-finite training loss at epoch " +
                           std::to_string(epoch)),
        epoch_(epoch) {}

  [[nodiscard]] int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace polsar
