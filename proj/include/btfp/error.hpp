#pragma once

#include <stdexcept>
#include <string>

namespace btfp {

// Base of every error raised by the library. The CLI maps these to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Malformed file contents (wrong length, bad CSV/JSON).
class FormatError : public Error {
public:
    using Error::Error;
};

// A precondition on an argument or configuration value does not hold.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Burst whose frequency trace cannot produce a fingerprint (one-signed or too short).
class DegenerateBurstError : public Error {
public:
    using Error::Error;
};

} // namespace btfp
