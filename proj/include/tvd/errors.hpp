#pragma once

#include <stdexcept>
#include <string>

namespace tvd {

// Raised when an image or field is too small for the requested operator, or
// when two operands disagree in shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised for arguments outside their mathematical domain (negative tuning
// parameters, out-of-range atom indices, non-centered inputs, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// No rectangular tessellation exists for the given active set under the
// guillotine construction.
class TessellationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense reference paths refuse grids above their size cap.
class SizeCapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Malformed image or configuration files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tvd
