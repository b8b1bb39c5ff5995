#pragma once

#include <variant>

#include "dipole_psf/common.hpp"
#include "dipole_psf/optical_system.hpp"

namespace dpsf::dipole {

/// Polarization ratio epsilon = (alpha + beta) / (alpha - beta).
/// The axial case (alpha == beta, a dipole along the optical axis) is a distinct state.
class PolarizationRatio {
 public:
  static PolarizationRatio finite(cdouble value);
  static PolarizationRatio axial() { return PolarizationRatio(true, {}); }

  bool is_axial() const { return axial_; }
  /// Throws DomainError for the axial state.
  cdouble value() const;

  bool operator==(const PolarizationRatio&) const = default;

 private:
  PolarizationRatio(bool axial, cdouble v) : axial_(axial), value_(v) {}
  bool axial_;
  cdouble value_;
};

/// Emitter built from sigma+ (alpha) and sigma- (beta) amplitudes, |alpha|^2 + |beta|^2 = 1.
struct DipolePolarization {
  cdouble alpha;
  cdouble beta;

  /// Normalizes the pair; throws DomainError if both vanish or are non-finite.
  static DipolePolarization from_amplitudes(cdouble alpha, cdouble beta);
  static DipolePolarization sigma_plus() { return {1.0, 0.0}; }
  static DipolePolarization sigma_minus() { return {0.0, 1.0}; }
};

/// Linear dipole along the quantization axis z.
struct PiDipole {
  bool operator==(const PiDipole&) const = default;
};

using Emitter = std::variant<DipolePolarization, PiDipole>;

DipolePolarization polarization_from_ratio(const PolarizationRatio& epsilon);
inline DipolePolarization polarization_from_ratio(cdouble epsilon) {
  return polarization_from_ratio(PolarizationRatio::finite(epsilon));
}
PolarizationRatio ratio_of(const DipolePolarization& pol);

/// Dipole moment in the main frame: ((alpha+beta) e_x + i (alpha-beta) e_y) / sqrt(2), or e_z.
Vec3c dipole_moment(const Emitter& emitter);

/// Handedness (+1 sigma+, -1 sigma-) radiated on a transition with the given Delta m.
int handedness_for_transition(int delta_m);

struct SphericalFieldSample {
  cdouble e_r;
  cdouble e_theta;
  cdouble e_phi;
  double r;
  double theta;
  double phi;
};

/// Far field on a sphere around z. Unit amplitude, carrying the 1/r envelope.
/// Requires r >= 10 lambda_eff.
SphericalFieldSample far_field(const Emitter& emitter, double r, double theta, double phi, double t,
                               const OpticalSystem& system);

/// Radius of the constant-phase surface through c0: (-h phi + omega t) / k + c0.
double wavefront_radius(int handedness, double phi, double t, double c0, const OpticalSystem& system);

struct AngularMomentumSplit {
  double spin;
  double orbital;
  int delta_m;
};

AngularMomentumSplit angular_momentum_split(int delta_m, double theta);

/// Normalized spin share cos^2(theta) of Rayleigh-scattered light.
double rayleigh_spin_density(double theta);

}  // namespace dpsf::dipole
