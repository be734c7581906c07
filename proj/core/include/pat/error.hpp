#pragma once

#include <stdexcept>
#include <string>

namespace pat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor or image shapes. The message names the op and the
// offending dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Poster behind the camera or seen edge-on.
class DegenerateViewError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

}  // namespace pat
