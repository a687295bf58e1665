#pragma once

#include <stdexcept>
#include <string>

namespace rowplan {

// Base for every error raised by the library. The CLI maps `ConfigError`
// to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

// Invalid user-supplied configuration or field spec. `field()` names the
// offending key (dotted path, e.g. "species_mix[1].fraction").
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }
  const char* kind() const noexcept override { return "validation"; }

 private:
  std::string field_;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
  const char* kind() const noexcept override { return "config"; }
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parse"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

// An edge or timing query points upstream (target behind the source).
class OrderingError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ordering"; }
};

// A plant lies behind the tool line or the committed frontier.
class AlreadyPassedError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "already_passed"; }
};

class AssignmentError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "assignment"; }
};

class WindowOverflowError : public Error {
 public:
  WindowOverflowError(std::size_t count, std::size_t cap)
      : Error("window holds " + std::to_string(count) + " targets, exhaustive search cap is " +
              std::to_string(cap) + "; shrink window_length or raise max_window_targets"),
        count_(count),
        cap_(cap) {}
  std::size_t count() const noexcept { return count_; }
  std::size_t cap() const noexcept { return cap_; }
  const char* kind() const noexcept override { return "window_overflow"; }

 private:
  std::size_t count_;
  std::size_t cap_;
};

// Raised by the simulator when a plan asks an axis to outrun its speed
// limit. Valid plans never trigger it.
class KinematicViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "kinematic_violation"; }
};

class SizeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "size"; }
};

class NotImplementedError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "not_implemented"; }
};

}  // namespace rowplan
