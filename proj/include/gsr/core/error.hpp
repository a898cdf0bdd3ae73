#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsr {

// Base of every error the toolkit throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or inconsistent inputs to an operation.
class InputError : public Error {
 public:
  using Error::Error;
};

// Quantized or numeric value outside the representable range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Numerical estimation failed on degenerate data.
class EstimationError : public Error {
 public:
  using Error::Error;
};

// A file on disk violates its documented format. Carries the file and the
// byte offset at which the violation was detected.
class FormatError : public Error {
 public:
  FormatError(std::string file, std::size_t offset, const std::string& what)
      : Error(file + ":" + std::to_string(offset) + ": " + what),
        file_(std::move(file)),
        offset_(offset) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string file_;
  std::size_t offset_;
};

// A loaded value violates a domain invariant (e.g. non-orthonormal pose).
class InvariantError : public Error {
 public:
  InvariantError(std::string file, const std::string& what)
      : Error(file + ": " + what), file_(std::move(file)) {}

  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

}  // namespace gsr
