#pragma once

#include <stdexcept>
#include <string>

namespace docre {

// Error taxonomy mirrored by the CLI exit codes:
//   IoError -> 2, ValidationError -> 3, NumericError -> 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape/dimension misuse inside the tensor core.
struct ShapeError : NumericError {
    explicit ShapeError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace docre
