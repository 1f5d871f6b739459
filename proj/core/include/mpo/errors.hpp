#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mpo {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument is outside the domain of the operation (unknown state,
/// unknown label, mismatched dimensions, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A configuration value is missing, unknown, or out of range.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Structured text could not be parsed. Carries the byte offset of the
/// first offending position when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}
    explicit ParseError(const std::string& what) : Error(what), byte_offset_(0) {}

    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

/// Parsed data violates a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of the operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// The judge backend could not be reached after exhausting retries.
class TransportError : public Error {
public:
    using Error::Error;
};

/// The judge produced output the protocol cannot accept (empty completion,
/// missing verdict line, ...).
class JudgeFormatError : public Error {
public:
    using Error::Error;
};

/// A score could not be extracted from the judge text after all retries.
/// Carries the raw completion for postmortems.
class ScoringError : public Error {
public:
    ScoringError(const std::string& what, std::string raw)
        : Error(what), raw_(std::move(raw)) {}

    const std::string& raw_text() const { return raw_; }

private:
    std::string raw_;
};

/// A meta-refinement or meta-merge completion never parsed as a rubric.
class RefinementError : public Error {
public:
    RefinementError(const std::string& what, std::string raw)
        : Error(what), raw_(std::move(raw)) {}

    const std::string& raw_text() const { return raw_; }

private:
    std::string raw_;
};

/// The partition has no splittable cell left for the requested rule.
class RefinementExhausted : public Error {
public:
    using Error::Error;
};

}  // namespace mpo
