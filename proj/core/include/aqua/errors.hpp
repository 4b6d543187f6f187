#pragma once

#include <stdexcept>
#include <string>

namespace aqua {

/// File could not be parsed or decoded (corrupt PNG/EXR/PFM, malformed JSON/CSV).
class DecodeError : public std::runtime_error {
public:
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

/// Two inputs that must agree (dimensions, stems, counts) do not.
class PairingError : public std::runtime_error {
public:
    explicit PairingError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data violates a documented precondition (non-finite depth, bad config value).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace aqua
