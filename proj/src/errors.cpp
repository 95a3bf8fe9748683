#include "pmd/errors.hpp"

namespace pmd {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Data: return "DataError";
    case ErrorKind::Mode: return "ModeError";
    case ErrorKind::Shape: return "ShapeError";
    case ErrorKind::Numerical: return "NumericalError";
    case ErrorKind::Graph: return "GraphError";
    case ErrorKind::Extrapolation: return "ExtrapolationError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Checksum: return "ChecksumError";
    case ErrorKind::Version: return "VersionError";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

void throw_error(ErrorKind kind, const std::string& message, long detail) {
  switch (kind) {
    case ErrorKind::Parse: throw ParseError(message, detail);
    case ErrorKind::Data: throw DataError(message, detail);
    case ErrorKind::Mode: throw ModeError(message, detail);
    case ErrorKind::Shape: throw ShapeError(message, detail);
    case ErrorKind::Numerical: throw NumericalError(message, detail);
    case ErrorKind::Graph: throw GraphError(message, detail);
    case ErrorKind::Extrapolation: throw ExtrapolationError(message, detail);
    case ErrorKind::Io: throw IoError(message, detail);
    case ErrorKind::Checksum: throw ChecksumError(message, detail);
    case ErrorKind::Version: throw VersionError(message, detail);
    case ErrorKind::Config: throw ConfigError(message, detail);
  }
  throw Error(kind, message, detail);
}

}  // namespace pmd
