#include "dipole_psf/optics.hpp"

#include <cmath>

namespace dpsf::optics {

double tilt_angle(const OpticalSystem& system, int handedness) {
  if (handedness != 1 && handedness != -1) throw DomainError("tilt_angle: handedness must be +1 or -1");
  return handedness * system.lambda_eff() / (2.0 * kPi * system.f);
}

double apparent_shift(const PolarizationRatio& epsilon, const OpticalSystem& system) {
  if (epsilon.is_axial()) return 0.0;
  const cdouble e = epsilon.value();
  const double na = system.na_g();
  return -(system.lambda_eff() / (2.0 * kPi)) * e.real() / (1.0 + na * na * std::norm(e) / 2.0);
}

ShiftExtremum shift_extremum(const OpticalSystem& system) {
  const double na = system.na_g();
  if (na <= 0.0) throw DomainError("shift_extremum: the shift is unbounded for NA_g = 0");
  return {std::sqrt(2.0) / na, system.lambda_eff() / (std::sqrt(8.0) * kPi * na)};
}

WeakMomentum weak_momentum(cdouble epsilon, const OpticalSystem& system) {
  const double na = system.na_g();
  return {epsilon.real() / (1.0 + std::norm(epsilon) * na * na / 2.0), 0.0};
}

double image_centroid_analytic(cdouble epsilon, const OpticalSystem& system) {
  return -system.magnification() * apparent_shift(epsilon, system);
}

Vec2c pupil_field(const Vec3c& mu, double theta, double psi) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  // Unit vectors in (x, y, z) with x along the optical axis.
  const cdouble mu_theta = -st * mu[0] + ct * cp * mu[1] + ct * sp * mu[2];
  const cdouble mu_psi = -sp * mu[1] + cp * mu[2];
  return {-(mu_theta * cp - mu_psi * sp), -(mu_theta * sp + mu_psi * cp)};
}

Vec3c aperture_field(const dipole::Emitter& emitter, const OpticalSystem& system, double rho, double phi,
                     const ApertureFieldOptions& options) {
  if (!(rho >= 0.0)) throw DomainError("aperture_field: rho must be non-negative");
  const Vec3c mu = dipole::dipole_moment(emitter);
  const double f = system.f;
  const double tm = system.theta_max();
  const double slack = 1.0 + 1e-12;
  if (options.model == ApertureModel::SmallAperture) {
    if (rho > f * std::tan(tm) * slack) throw DomainError("aperture_field: rho lies outside the aperture");
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double radial = rho / f;
    cdouble phase = 1.0;
    if (options.collimation_phase) phase = std::exp(cdouble(0.0, system.k() * std::hypot(rho, f)));
    const cdouble ey = -(mu[1] - mu[0] * radial * cp) / f;
    const cdouble ez = -(mu[2] - mu[0] * radial * sp) / f;
    return {0.0, ey * phase, ez * phase};
  }
  if (rho > f * std::sin(tm) * slack) throw DomainError("aperture_field: rho lies outside the aperture");
  const double theta = std::asin(std::min(1.0, rho / f));
  const Vec2c p = pupil_field(mu, theta, phi);
  cdouble scale = 1.0 / (f * std::sqrt(std::cos(theta)));
  if (options.collimation_phase) scale *= std::exp(cdouble(0.0, system.k() * f));
  return {0.0, p[0] * scale, p[1] * scale};
}

}  // namespace dpsf::optics
