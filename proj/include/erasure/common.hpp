#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace erasure {

// Boltzmann constant in pN·nm/K.
inline constexpr double kBoltzmann = 1.380649e-2;

inline constexpr double kLn2 = std::numbers::ln2;

/// Thermal energy k_B·T in pN·nm.
inline double thermal_energy(double temperature_K) { return kBoltzmann * temperature_K; }

/// Raised for inputs that violate a documented precondition or invariant.
/// The message names the offending field where there is one.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File-system failures, always carrying the path involved.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& message) {
  if (!cond) throw ValidationError(message);
}

inline void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite");
}

}  // namespace detail
}  // namespace erasure
