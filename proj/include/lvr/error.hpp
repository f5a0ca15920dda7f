#pragma once

#include <stdexcept>
#include <string>

namespace lvr {

// Invalid configuration, malformed input file, or violated precondition.
// The CLI maps this to exit code 1; anything else thrown mid-run maps to 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lvr
