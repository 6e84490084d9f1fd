#pragma once

#include <stdexcept>
#include <string>

namespace spoutar {

// Category codes double as CLI exit codes.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 2;
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
    static constexpr int exit_code = 3;
};

struct RunError : std::runtime_error {
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 4;
};

}  // namespace spoutar
