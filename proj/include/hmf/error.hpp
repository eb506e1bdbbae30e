#pragma once

#include <stdexcept>
#include <string>

namespace hmf {

// Error classes double as CLI exit-code categories:
// config -> 2, data -> 3, numerical -> 4. ParameterError is a programming
// error on a sampler argument and maps to numerical as well.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* category() const noexcept = 0;
  virtual int exit_code() const noexcept = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "config"; }
  int exit_code() const noexcept override { return 2; }
};

class DataError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "data"; }
  int exit_code() const noexcept override { return 3; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "numerical"; }
  int exit_code() const noexcept override { return 4; }
};

class ParameterError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "parameter"; }
  int exit_code() const noexcept override { return 4; }
};

}  // namespace hmf
