#pragma once

#include "dipole_psf/common.hpp"

namespace dpsf {

/// Two-lens imaging system: objective of focal length f in a medium of index n,
/// tube lens of focal length f_image in a medium of index n_image.
/// All lengths in metres.
struct OpticalSystem {
  double lambda_vac = 493.41e-9;
  double n = 1.0;
  double n_image = 1.0;
  double na = 0.40;
  double f = 25e-3;
  double f_image = 135e-3;

  /// Validates and returns the system; throws DomainError on invalid values.
  static OpticalSystem make(double lambda_vac, double n, double n_image, double na, double f,
                            double f_image);
  void validate() const;

  double lambda_eff() const { return lambda_vac / n; }
  double k() const { return 2.0 * kPi / lambda_eff(); }
  double omega() const { return 2.0 * kPi * kSpeedOfLight / lambda_vac; }
  double na_g() const { return na / n; }
  double theta_max() const;
  /// Lateral magnification n f_image / (n_image f).
  double magnification() const { return n * f_image / (n_image * f); }
};

}  // namespace dpsf
