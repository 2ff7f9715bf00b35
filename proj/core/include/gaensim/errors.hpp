#pragma once

#include <stdexcept>
#include <string>

namespace gaensim {

/// Bad scenario/server configuration. `field` names the offending entry
/// as a "section.key" path when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what),
          field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Caller lacks the required authorization (consent token, PIN, device
/// compromise flag).
class AuthorizationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Signature verification failed; the bytes are not what was signed.
class IntegrityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input that could not be decoded (framing, hex, capture lines).
class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An argument violates a protocol validity rule (interval outside a key's
/// window, misaligned day start).
class ValidityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Not enough input to compute the requested statistic.
class InsufficientDataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gaensim
