#ifndef LOADRANK_ERRORS_HPP
#define LOADRANK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace loadrank {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed input: ragged rows, duplicate headers, bad numeric cells.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structural contract violated (bad dimensions, bad parameter ranges).
class ValidationError : public Error {
public:
    using Error::Error;
};

class UnmappedRating : public Error {
public:
    explicit UnmappedRating(const std::string& rating)
        : Error("unmapped rating string: \"" + rating + "\""), rating_(rating) {}
    const std::string& rating() const { return rating_; }

private:
    std::string rating_;
};

class MissingTarget : public Error {
public:
    using Error::Error;
};

/// Raised when no usable feature column survives ingestion.
class DegenerateData : public Error {
public:
    using Error::Error;
};

class StratificationError : public Error {
public:
    using Error::Error;
};

/// An iterative numerical routine failed to converge or produced
/// out-of-contract values.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// A filtering step retained nothing.
class EmptySelection : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace loadrank

#endif
