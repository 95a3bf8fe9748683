#pragma once

#include <stdexcept>
#include <string>

namespace pmd {

enum class ErrorKind {
  Parse,
  Data,
  Mode,
  Shape,
  Numerical,
  Graph,
  Extrapolation,
  Io,
  Checksum,
  Version,
  Config,
};

const char* to_string(ErrorKind kind);

/// Base of every error raised by the library. `kind()` identifies the
/// failure class; `detail()` carries an integer payload for the kinds that
/// have one (component count for Graph, failing step for Extrapolation).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, long detail = -1)
      : std::runtime_error(message), kind_(kind), detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  long detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  long detail_;
};

#define PMD_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message, long detail = -1)       \
        : Error(ErrorKind::Kind, message, detail) {}                  \
  };

PMD_DEFINE_ERROR(ParseError, Parse)
PMD_DEFINE_ERROR(DataError, Data)
PMD_DEFINE_ERROR(ModeError, Mode)
PMD_DEFINE_ERROR(ShapeError, Shape)
PMD_DEFINE_ERROR(NumericalError, Numerical)
PMD_DEFINE_ERROR(GraphError, Graph)
PMD_DEFINE_ERROR(ExtrapolationError, Extrapolation)
PMD_DEFINE_ERROR(IoError, Io)
PMD_DEFINE_ERROR(ChecksumError, Checksum)
PMD_DEFINE_ERROR(VersionError, Version)
PMD_DEFINE_ERROR(ConfigError, Config)

#undef PMD_DEFINE_ERROR

/// Throws the concrete subclass matching `kind`.
[[noreturn]] void throw_error(ErrorKind kind, const std::string& message,
                              long detail = -1);

/// Runs `fn`, prefixing any library error with `stage` while keeping its type.
template <class Fn>
decltype(auto) staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw_error(e.kind(), std::string(stage) + ": " + e.what(), e.detail());
  }
}

}  // namespace pmd
