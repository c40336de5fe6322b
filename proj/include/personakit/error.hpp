#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace personakit {

// Base of every error the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed document; `location` is a file path plus JSON pointer or byte offset.
class ParseError : public Error {
public:
    ParseError(std::string location, const std::string& message)
        : Error(location + ": " + message), location_(std::move(location)) {}
    const std::string& location() const { return location_; }

private:
    std::string location_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Argument outside its mathematical or scale domain.
class DomainError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// A response set does not answer every item of its instrument.
class IncompleteResponses : public Error {
public:
    IncompleteResponses(std::string instrument, std::vector<std::string> missing);
    const std::vector<std::string>& missing_items() const { return missing_; }

private:
    std::vector<std::string> missing_;
};

// Inputs were read fine but break a schema rule; the CLI exits with 2.
class ValidationFailure : public Error {
public:
    using Error::Error;
};

class CassetteMiss : public Error {
public:
    using Error::Error;
};

// Network or provider failure; retried by the gateway before it escapes.
class TransportError : public Error {
public:
    using Error::Error;
};

// The model answered, but the answer is unusable (empty, not JSON, wrong shape).
class ContentError : public Error {
public:
    using Error::Error;
};

class UndefinedCorrelation : public Error {
public:
    using Error::Error;
};

class InvalidTable : public Error {
public:
    using Error::Error;
};

} // namespace personakit
