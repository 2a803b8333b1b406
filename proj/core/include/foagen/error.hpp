#pragma once

#include <stdexcept>
#include <string>

namespace foagen {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, argument or input shape. The CLI maps this to exit
// code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures: missing files, unwritable paths, short reads.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file exists but its contents are malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The input carries no energy, so a direction cannot be estimated.
class NoSignalError : public Error {
 public:
  NoSignalError() : Error("no signal") {}
};

}  // namespace foagen
