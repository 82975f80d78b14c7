#pragma once

#include <stdexcept>
#include <string>

namespace layoutlab {

// Invalid argument to a pure function (out-of-range orientation, room outside
// the dataset bounds, degenerate geometry).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A token sequence that cannot be decoded into a layout.
class MalformedSequence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Interchange / config file violations. `path` is a JSON-pointer-like location.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class GenerationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss during training.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace layoutlab
