#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lspline {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Grid dimensions or domain bounds that cannot form a tensor-product mesh.
class InvalidGrid : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

class ShapeMismatch : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

/// A point lies outside the closed rectangular domain.
class OutOfDomain : public Error {
public:
  OutOfDomain(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

/// No observation survives the inclusion mask.
class EmptyData : public Error {
public:
  using Error::Error;
};

/// Conjugate gradient stopped at max_iter before reaching the tolerance.
class IterationLimit : public Error {
public:
  IterationLimit(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

private:
  int iterations_;
  double residual_;
};

/// CG met a direction p with p^T H p <= 0.
class NotPositiveDefinite : public Error {
public:
  using Error::Error;
};

/// Dense oracle refused a problem above its size guard.
class SizeGuard : public Error {
public:
  using Error::Error;
};

/// GCV denominator N - trace(S) is not positive.
class DegenerateGcv : public Error {
public:
  using Error::Error;
};

class SelectionFailure : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class UnsupportedFormat : public IoError {
public:
  using IoError::IoError;
};

class ColorImage : public IoError {
public:
  using IoError::IoError;
};

class CorruptHeader : public IoError {
public:
  using IoError::IoError;
};

/// Malformed CSV content; line() is 1-based and counts the header.
class CsvError : public IoError {
public:
  CsvError(const std::string& what, std::size_t line)
      : IoError(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace lspline
