#pragma once

#include <stdexcept>

namespace streambank {

// Dimension disagreement between operands or stored state.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration value or malformed input file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace streambank
