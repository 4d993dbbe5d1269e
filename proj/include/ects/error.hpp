#pragma once

#include <stdexcept>
#include <string>

namespace ects {

// Every failure raised by the library derives from Error; the category drives
// the CLI exit code.
enum class ErrorKind {
  Input,     // caller passed something out of contract
  Parse,     // malformed text input
  Data,      // well-formed input with inconsistent content
  Fit,       // a model could not be fitted
  Training,  // RL training produced nothing usable
  Io,        // filesystem
  Config,    // configuration keys or values
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define ECTS_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

ECTS_DEFINE_ERROR(InputError, Input)
ECTS_DEFINE_ERROR(ParseError, Parse)
ECTS_DEFINE_ERROR(DataError, Data)
ECTS_DEFINE_ERROR(FitError, Fit)
ECTS_DEFINE_ERROR(TrainingError, Training)
ECTS_DEFINE_ERROR(IoError, Io)
ECTS_DEFINE_ERROR(ConfigError, Config)

#undef ECTS_DEFINE_ERROR

const char* error_kind_name(ErrorKind kind) noexcept;

}  // namespace ects
