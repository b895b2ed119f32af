#pragma once

#include <stdexcept>
#include <string>

namespace kgsynth {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unreadable files, failed writes.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed content: unknown ids, duplicates, forbidden characters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// No derangement / perfect matching satisfies the constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Random-string generation ran out of retries or hit a degenerate model.
class SamplingError : public Error {
 public:
  using Error::Error;
};

class UniquenessError : public SamplingError {
 public:
  using SamplingError::SamplingError;
};

// Training produced non-finite parameters.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgsynth
