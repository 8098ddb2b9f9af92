#pragma once

#include <stdexcept>
#include <string>

namespace cdsbounds {

/// Invalid input to a library operation (bad index, out-of-range fraction, ...).
class ArgumentError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The requested construction needs a market structure that is not present,
/// e.g. a scaled reduction without a quote at the illiquid maturity.
class UnsupportedStructure : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Configuration or quote-file problem (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An internal self-check failed (maps to CLI exit code 4).
class ToleranceBreach : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define CDSB_REQUIRE(cond, msg)                                                                    \
    do {                                                                                           \
        if (!(cond))                                                                               \
            throw ::cdsbounds::ArgumentError(std::string(msg));                                    \
    } while (false)

} // namespace cdsbounds
