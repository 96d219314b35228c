#pragma once

#include <stdexcept>
#include <string>

namespace artic {

/// Base for every error raised by the library. `kind()` is the stable
/// machine-readable name (e.g. "DegenerateGeometry").
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

  /// Validation errors map to CLI exit code 1, I/O errors to 2.
  virtual bool is_io() const noexcept { return false; }

 protected:
  struct Verbatim {};
  Error(std::string kind, const std::string& full, Verbatim)
      : std::runtime_error(full), kind_(std::move(kind)) {}

 private:
  std::string kind_;
};

#define ARTIC_DEFINE_ERROR(Name)                                            \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(#Name, what) {}          \
  };

ARTIC_DEFINE_ERROR(DegenerateGeometry)
ARTIC_DEFINE_ERROR(NoConsensus)
ARTIC_DEFINE_ERROR(SchemaError)
ARTIC_DEFINE_ERROR(InsufficientOverlap)
ARTIC_DEFINE_ERROR(GapTooLarge)
ARTIC_DEFINE_ERROR(DegenerateMotion)
ARTIC_DEFINE_ERROR(InvalidCount)
ARTIC_DEFINE_ERROR(UnknownSymbol)
ARTIC_DEFINE_ERROR(DisconnectedGraph)
ARTIC_DEFINE_ERROR(ZeroVector)
ARTIC_DEFINE_ERROR(UnmatchablePartition)
ARTIC_DEFINE_ERROR(SpecError)
ARTIC_DEFINE_ERROR(ConfigError)

#undef ARTIC_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("ParseError", "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("IoError", what) {}
  bool is_io() const noexcept override { return true; }
};

/// Wraps an error raised inside a pipeline stage, keeping the original kind
/// and exit-code class but prefixing the stage tag.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& inner)
      : Error(inner.kind(), stage + ": " + inner.what(), Verbatim{}),
        stage_(stage),
        io_(inner.is_io()) {}
  const std::string& stage() const noexcept { return stage_; }
  bool is_io() const noexcept override { return io_; }

 private:
  std::string stage_;
  bool io_;
};

}  // namespace artic
