#pragma once

#include <stdexcept>
#include <string>

namespace cns {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File could not be opened / read / written.
struct IoError : Error {
  using Error::Error;
};

// File content does not match the expected format. The message carries the
// byte offset (binary) or line number (text) of the offending record.
struct FormatError : Error {
  using Error::Error;
};

// Input cloud has fewer than 4 points or affine rank < 3; a 3D convex hull
// is undefined for it.
struct DegenerateInput : Error {
  using Error::Error;
};

// Change-ratio computation failed for a pair of sessions.
struct TcrError : Error {
  enum class Kind {
    DegenerateHull,  // one of the voxelized sessions has no 3D hull
    EmptyDomain,     // both hull-restricted sets are empty; ratio undefined
  };

  TcrError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
  Kind kind;
};

// Scene / trajectory config file could not be parsed; `line` is 1-based.
struct ConfigError : Error {
  ConfigError(int line_no, const std::string& msg)
      : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  int line;
};

// Place-recognition evaluation has no query with a true match in the
// database; recall is undefined.
struct NoTrueMatchError : Error {
  using Error::Error;
};

}  // namespace cns
