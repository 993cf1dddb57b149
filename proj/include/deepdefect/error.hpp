#ifndef DEEPDEFECT_ERROR_HPP
#define DEEPDEFECT_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deepdefect {

/// Base of every error thrown by the library. `kind()` is a stable,
/// machine-parseable tag used by the CLI error line.
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
    /// `line` is 1-based; 0 means no line information.
    ParseError(const std::string& message, std::size_t line = 0, std::size_t column = 0)
        : Error("parse", format(message, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& message, std::size_t line, std::size_t column) {
        if (line == 0) return message;
        std::string out = "line " + std::to_string(line);
        if (column != 0) out += ", column " + std::to_string(column);
        return out + ": " + message;
    }

    std::size_t line_;
    std::size_t column_;
};

class EmptyDatasetError : public Error {
public:
    explicit EmptyDatasetError(const std::string& message) : Error("empty-dataset", message) {}
};

class UnsupportedLabelError : public Error {
public:
    explicit UnsupportedLabelError(const std::string& message) : Error("unsupported-label", message) {}
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& message) : Error("dimension", message) {}
};

class InvalidArgumentError : public Error {
public:
    explicit InvalidArgumentError(const std::string& message) : Error("invalid-argument", message) {}
};

class NumericOverflowError : public Error {
public:
    explicit NumericOverflowError(const std::string& message) : Error("numeric-overflow", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace deepdefect

#endif  // DEEPDEFECT_ERROR_HPP
