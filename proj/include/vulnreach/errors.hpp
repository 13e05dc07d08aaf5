#pragma once

#include <stdexcept>
#include <string>

namespace vulnreach {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::string file, int line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }

private:
    std::string file_;
    int line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class EmptyProject : public Error {
public:
    EmptyProject() : Error("no source files") {}
};

class EmptyText : public Error {
public:
    EmptyText() : Error("text is empty after trimming") {}
};

/// Failure reported by a remote (or scripted) provider. `status` is the HTTP
/// status when there is one, 0 for transport errors, -1 for local failures.
class ProviderError : public Error {
public:
    ProviderError(int status, const std::string& message, bool retryable = false)
        : Error("provider error (" + std::to_string(status) + "): " + message),
          status_(status), retryable_(retryable) {}

    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return retryable_; }

private:
    int status_;
    bool retryable_;
};

class MalformedResponse : public Error {
public:
    using Error::Error;
};

class DimsMismatch : public Error {
public:
    DimsMismatch(long expected, long actual)
        : Error("dimension mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(actual)) {}
};

class DuplicateIdConflict : public Error {
public:
    explicit DuplicateIdConflict(const std::string& id)
        : Error("block id " + id + " already stored with a different vector") {}
};

class FormatError : public Error {
public:
    using Error::Error;
};

class EmptyIndex : public Error {
public:
    EmptyIndex() : Error("index contains no entries") {}
};

class MissingPrediction : public Error {
public:
    explicit MissingPrediction(const std::string& project_id)
        : Error("no prediction for project " + project_id) {}
};

class ManifestError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace vulnreach
