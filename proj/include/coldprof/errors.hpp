#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coldprof {

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Malformed wire-format line. `byte_offset` is relative to the start of the line.
class ParseError : public Error {
  public:
    ParseError(const std::string& message, std::size_t byte_offset, const std::string& context = "")
        : Error((context.empty() ? "" : context + ": ") + "parse error at byte " +
                std::to_string(byte_offset) + ": " + message),
          detail_(message),
          byte_offset_(byte_offset) {}

    const std::string& detail() const noexcept { return detail_; }

    std::size_t byte_offset() const noexcept { return byte_offset_; }

  private:
    std::string detail_;
    std::size_t byte_offset_;
};

/// A required field is missing or has the wrong type.
class SchemaError : public Error {
  public:
    explicit SchemaError(const std::string& field, const std::string& detail = "missing required field",
                         const std::string& context = "")
        : Error((context.empty() ? "" : context + ": ") + "schema error: \"" + field + "\": " + detail),
          field_(field),
          detail_(detail) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& detail() const noexcept { return detail_; }

  private:
    std::string field_;
    std::string detail_;
};

/// A record (or record sequence) violates a type invariant.
/// `position` is the 1-based index of the offending record, 0 when not tied to one.
class ValidationError : public Error {
  public:
    ValidationError(const std::string& message, std::size_t position = 0, const std::string& context = "")
        : Error((context.empty() ? "" : context + ": ") +
                (position ? "record " + std::to_string(position) + ": " + message : message)),
          detail_(message),
          position_(position) {}

    const std::string& detail() const noexcept { return detail_; }
    std::size_t position() const noexcept { return position_; }

  private:
    std::string detail_;
    std::size_t position_;
};

class LookupError : public Error {
  public:
    using Error::Error;
};

class IntegrityError : public Error {
  public:
    using Error::Error;
};

class MergeError : public Error {
  public:
    using Error::Error;
};

class InsufficientDataError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace coldprof
