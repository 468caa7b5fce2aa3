#pragma once

#include <stdexcept>
#include <string>

namespace dfn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A config or argument violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A value that must be finite is NaN/Inf (loss blow-up, corrupt input).
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Zero vector reached a normalization.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

class ShardError : public Error {
 public:
  enum class Kind { kIo, kBadMagic, kVersionMismatch, kTruncated, kDimensionMismatch };

  ShardError(Kind kind, std::string shard, const std::string& detail)
      : Error(describe(kind) + " in shard '" + shard + "'" +
              (detail.empty() ? "" : ": " + detail)),
        kind_(kind),
        shard_(std::move(shard)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& shard() const noexcept { return shard_; }

  static std::string describe(Kind kind) {
    switch (kind) {
      case Kind::kIo: return "i/o error";
      case Kind::kBadMagic: return "bad magic";
      case Kind::kVersionMismatch: return "version mismatch";
      case Kind::kTruncated: return "truncated file";
      case Kind::kDimensionMismatch: return "dimension mismatch";
    }
    return "shard error";
  }

 private:
  Kind kind_;
  std::string shard_;
};

}  // namespace dfn
