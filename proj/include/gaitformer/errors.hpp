#pragma once

#include <stdexcept>
#include <string>

namespace gaitformer {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ModelFileError : public Error {
public:
    enum class Kind { io, version, corrupt, shape_mismatch, variant_mismatch };

    ModelFileError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace gaitformer
