#pragma once

#include <stdexcept>
#include <string>

namespace pe {

// Bad input or configuration. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An enumeration or DP would exceed its configured size. CLI exit code 3.
class ResourceCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Arithmetic decoder saw a stream that no encoder run could have produced.
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pe
