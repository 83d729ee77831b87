#pragma once

#include <stdexcept>
#include <string>

namespace tcnlm {

// Shape or dimension mismatch in array/tape operations.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data, files, or configuration.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training-time failures (divergence etc.).
struct TrainError : std::runtime_error {
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tcnlm
