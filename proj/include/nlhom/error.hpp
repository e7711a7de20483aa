#pragma once

#include <stdexcept>
#include <string>

namespace nlhom {

// Invalid user input: malformed config, out-of-range parameters, violated
// geometric preconditions. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Non-finite state, failed iteration, or a violated numerical contract.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace nlhom
