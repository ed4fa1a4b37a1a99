#pragma once

#include <stdexcept>
#include <string>

namespace replume {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Tensor shape or rank violations (dimension mismatches, non-scalar loss, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required (NaN gradients, inf logits).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Out-of-range ids or positions (token ids, masked positions, row indices).
class IndexError : public Error {
 public:
  using Error::Error;
};

// Class labels outside the expected set.
class LabelError : public Error {
 public:
  using Error::Error;
};

// Unsupported language tags.
class LanguageError : public Error {
 public:
  using Error::Error;
};

// Malformed input files (TSV, vocabulary, JSON configs); carries line/field context.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that cannot be used (empty corpus, zero-count class,
// empty language partition for a required slot).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration (missing checkpoints, bad mode layout).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Checkpoint load failures, one subclass per failure mode so callers can
// distinguish them.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

class CheckpointFormatError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointShapeError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

}  // namespace replume
