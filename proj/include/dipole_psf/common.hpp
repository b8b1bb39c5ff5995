#pragma once

#include <array>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dpsf {

using cdouble = std::complex<double>;

// Cartesian components (x, y, z). x is the optical axis, z the quantization axis.
using Vec3c = std::array<cdouble, 3>;
// Transverse components (y, z) in an image or pupil plane.
using Vec2c = std::array<cdouble, 2>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpsf
