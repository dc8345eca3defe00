#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

/// Base class for every failure the engine reports. `kind()` is a short
/// machine-readable tag used by the CLI's structured error line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error("parse", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& message) : Error("input", message) {}
};

class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& message) : Error("integrity", message) {}
};

}  // namespace collapse
