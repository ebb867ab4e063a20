#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rethinker {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid RunConfig / CurationConfig value. `field` names the first violation.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Malformed input file; line is 1-based (0 when not line-oriented).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Retriable: network failure, 5xx, rate limiting.
class TransportError : public Error {
public:
    using Error::Error;
};

// Not retriable: the request itself is malformed.
class RequestError : public Error {
public:
    using Error::Error;
};

class RefusalError : public Error {
public:
    using Error::Error;
};

class LogprobsUnsupported : public Error {
public:
    using Error::Error;
};

class FixtureMiss : public Error {
public:
    using Error::Error;
};

class QuotaExceeded : public TransportError {
public:
    using TransportError::TransportError;
};

class SandboxError : public Error {
public:
    using Error::Error;
};

// A single reasoning path could not produce a candidate.
class PathError : public Error {
public:
    using Error::Error;
};

class SelectionError : public Error {
public:
    using Error::Error;
};

} // namespace rethinker
