#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace noneguard {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad layer composition, out-of-range rates, unknown keys.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Caller handed in data of the wrong shape or an out-of-range index.
class InputError : public Error {
public:
    using Error::Error;
};

/// Malformed file content. `offset` is the byte position where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Non-finite value produced during training.
class NumericError : public Error {
public:
    NumericError(const std::string& what, std::size_t layer)
        : Error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}

    std::size_t layer() const noexcept { return layer_; }

private:
    std::size_t layer_;
};

class IoError : public Error {
public:
    IoError(const std::string& what, std::string path)
        : Error(what + ": " + path), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Operation requested on an input it does not support (e.g. rasterizing a non-2D net).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// The defended training loop stopped because it filtered away too much data.
class OverFilteringError : public Error {
public:
    using Error::Error;
};

}  // namespace noneguard
