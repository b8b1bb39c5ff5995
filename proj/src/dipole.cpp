#include "dipole_psf/dipole.hpp"

#include <cmath>

namespace dpsf {

OpticalSystem OpticalSystem::make(double lambda_vac, double n, double n_image, double na, double f,
                                  double f_image) {
  OpticalSystem s{lambda_vac, n, n_image, na, f, f_image};
  s.validate();
  return s;
}

void OpticalSystem::validate() const {
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
      throw DomainError(std::string("OpticalSystem: ") + name + " must be positive and finite");
  };
  positive(lambda_vac, "lambda_vac");
  positive(n, "n");
  positive(n_image, "n_image");
  positive(f, "f");
  positive(f_image, "f_image");
  if (!std::isfinite(na) || na < 0.0 || na > n)
    throw DomainError("OpticalSystem: na must lie in [0, n]");
}

double OpticalSystem::theta_max() const { return std::asin(std::min(1.0, na_g())); }

}  // namespace dpsf

namespace dpsf::dipole {

PolarizationRatio PolarizationRatio::finite(cdouble value) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
    throw DomainError("PolarizationRatio: finite value required (use axial())");
  return PolarizationRatio(false, value);
}

cdouble PolarizationRatio::value() const {
  if (axial_) throw DomainError("PolarizationRatio: axial state has no finite value");
  return value_;
}

DipolePolarization DipolePolarization::from_amplitudes(cdouble alpha, cdouble beta) {
  const double norm = std::sqrt(std::norm(alpha) + std::norm(beta));
  if (!std::isfinite(norm) || norm == 0.0)
    throw DomainError("DipolePolarization: amplitudes must be finite and not both zero");
  return {alpha / norm, beta / norm};
}

DipolePolarization polarization_from_ratio(const PolarizationRatio& epsilon) {
  if (epsilon.is_axial()) {
    const double h = 1.0 / std::sqrt(2.0);
    return {h, h};
  }
  const cdouble e = epsilon.value();
  const double scale = 1.0 / std::sqrt(2.0 * (1.0 + std::norm(e)));
  return {(e + 1.0) * scale, (e - 1.0) * scale};
}

PolarizationRatio ratio_of(const DipolePolarization& pol) {
  const cdouble diff = pol.alpha - pol.beta;
  const cdouble sum = pol.alpha + pol.beta;
  if (std::abs(diff) <= 1e-15 * std::abs(sum)) return PolarizationRatio::axial();
  return PolarizationRatio::finite(sum / diff);
}

Vec3c dipole_moment(const Emitter& emitter) {
  if (std::holds_alternative<PiDipole>(emitter)) return {0.0, 0.0, 1.0};
  const auto& p = std::get<DipolePolarization>(emitter);
  const double s = 1.0 / std::sqrt(2.0);
  const cdouble i(0.0, 1.0);
  return {(p.alpha + p.beta) * s, i * (p.alpha - p.beta) * s, 0.0};
}

int handedness_for_transition(int delta_m) {
  if (delta_m < -1 || delta_m > 1) throw DomainError("delta_m must be -1, 0 or +1");
  return -delta_m;
}

SphericalFieldSample far_field(const Emitter& emitter, double r, double theta, double phi, double t,
                               const OpticalSystem& system) {
  if (!(r >= 10.0 * system.lambda_eff()))
    throw DomainError("far_field: r must be at least ten wavelengths");
  const Vec3c mu = dipole_moment(emitter);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  const std::array<double, 3> e_theta{ct * cp, ct * sp, -st};
  const std::array<double, 3> e_phi{-sp, cp, 0.0};
  cdouble m_theta = 0.0, m_phi = 0.0;
  for (int c = 0; c < 3; ++c) {
    m_theta += mu[c] * e_theta[c];
    m_phi += mu[c] * e_phi[c];
  }
  const cdouble carrier = std::exp(cdouble(0.0, system.k() * r - system.omega() * t)) / r;
  return {0.0, -m_theta * carrier, -m_phi * carrier, r, theta, phi};
}

double wavefront_radius(int handedness, double phi, double t, double c0, const OpticalSystem& system) {
  if (handedness < -1 || handedness > 1) throw DomainError("handedness must be -1, 0 or +1");
  return (-handedness * phi + system.omega() * t) / system.k() + c0;
}

AngularMomentumSplit angular_momentum_split(int delta_m, double theta) {
  if (delta_m < -1 || delta_m > 1) throw DomainError("angular_momentum_split: delta_m must be -1, 0 or +1");
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  const double denom = 1.0 + c2;
  return {delta_m * 2.0 * c2 / denom, delta_m * s2 / denom, delta_m};
}

double rayleigh_spin_density(double theta) {
  const double c = std::cos(theta);
  return c * c;
}

}  // namespace dpsf::dipole
