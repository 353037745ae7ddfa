#pragma once

#include <stdexcept>
#include <string>

namespace koopman {

// Error categories map to distinct CLI exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wrap an angle into [0, 2*pi).
double wrap_2pi(double a);

inline const char* version_string() { return "0.1.0"; }

}  // namespace koopman
