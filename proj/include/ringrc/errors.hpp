#pragma once

#include <stdexcept>
#include <string>

namespace ringrc {

/// Invalid parameters or configuration (CLI exit code 1).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid input data: out-of-range values, unreadable files, incomplete corpora (exit code 1).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace ringrc
