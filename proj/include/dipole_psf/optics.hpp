#pragma once

#include "dipole_psf/dipole.hpp"
#include "dipole_psf/optical_system.hpp"

namespace dpsf::optics {

using dipole::PolarizationRatio;

/// Wavefront tilt h * lambda_eff / (2 pi f) relative to the optical axis.
double tilt_angle(const OpticalSystem& system, int handedness);

/// Object-plane apparent shift -(lambda_eff / 2pi) Re(eps) / (1 + NA_g^2 |eps|^2 / 2).
double apparent_shift(const PolarizationRatio& epsilon, const OpticalSystem& system);
inline double apparent_shift(cdouble epsilon, const OpticalSystem& system) {
  return apparent_shift(PolarizationRatio::finite(epsilon), system);
}

struct ShiftExtremum {
  double epsilon_star;
  double dy_max;
};

ShiftExtremum shift_extremum(const OpticalSystem& system);

/// Weak value of transverse momentum, in units of hbar / f.
struct WeakMomentum {
  double p_y;
  double p_z;
};

WeakMomentum weak_momentum(cdouble epsilon, const OpticalSystem& system);

/// Image-plane centroid, equal to -M times the apparent shift.
double image_centroid_analytic(cdouble epsilon, const OpticalSystem& system);

enum class ApertureModel {
  SmallAperture,  // paraxial field map, rho <= f tan(theta_m)
  Orthographic,   // exact far field by apodized orthographic projection, rho <= f sin(theta_m)
};

struct ApertureFieldOptions {
  ApertureModel model = ApertureModel::SmallAperture;
  bool collimation_phase = true;
};

/// Field in the collimated beam behind the objective at polar position (rho, phi),
/// phi measured from the y axis towards z. The x component is zero.
Vec3c aperture_field(const dipole::Emitter& emitter, const OpticalSystem& system, double rho, double phi,
                     const ApertureFieldOptions& options = {});

/// Transverse pupil field of moment mu for a ray at polar angle theta and azimuth psi,
/// before apodization: -[(mu.e_theta) e_rho + (mu.e_psi) e_psi].
Vec2c pupil_field(const Vec3c& mu, double theta, double psi);

}  // namespace dpsf::optics
