#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace cfx {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed dataset text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : Error(what) {}

    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    std::optional<std::size_t> line_;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// The Sakoe-Chiba band admits no warping path.
class BandError : public Error {
public:
    using Error::Error;
};

class TrainError : public Error {
public:
    explicit TrainError(const std::string& what) : Error(what) {}
    TrainError(std::size_t epoch, const std::string& what)
        : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

    std::optional<std::size_t> epoch() const noexcept { return epoch_; }

private:
    std::optional<std::size_t> epoch_;
};

/// A gradient was requested from a model that cannot provide one.
class CapabilityError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NoNeighborError : public Error {
public:
    using Error::Error;
};

/// A metric cannot be computed for this input; reported as absent, not zero.
class MetricUnavailable : public Error {
public:
    using Error::Error;
};

}  // namespace cfx
