#include <doctest.h>

#include <cmath>
#include <random>

#include "dipole_psf/dipole.hpp"

using namespace dpsf;
using namespace dpsf::dipole;

namespace {
const OpticalSystem kAtom{};
}

TEST_CASE("polarization_from_ratio examples") {
  auto p1 = polarization_from_ratio(cdouble(1.0));
  CHECK(std::abs(p1.alpha - 1.0) < 1e-15);
  CHECK(std::abs(p1.beta) < 1e-15);

  auto p0 = polarization_from_ratio(cdouble(0.0));
  CHECK(std::abs(p0.alpha - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(p0.beta + 1.0 / std::sqrt(2.0)) < 1e-15);

  auto back = ratio_of(polarization_from_ratio(cdouble(2.0)));
  REQUIRE_FALSE(back.is_axial());
  CHECK(std::abs(back.value() - 2.0) < 1e-12);

  auto ax = polarization_from_ratio(PolarizationRatio::axial());
  CHECK(std::abs(ax.alpha - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(ax.beta - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(ratio_of(ax).is_axial());
  CHECK_THROWS_AS(PolarizationRatio::finite(cdouble(NAN, 0)), DomainError);
}

TEST_CASE("ratio round trip over the complex plane") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    cdouble e(u(gen), u(gen));
    auto p = polarization_from_ratio(e);
    CHECK(std::abs(std::norm(p.alpha) + std::norm(p.beta) - 1.0) < 1e-12);
    CHECK(std::abs(ratio_of(p).value() - e) < 1e-12 * std::max(1.0, std::abs(e)));
  }
}

TEST_CASE("dipole moments") {
  auto sp = dipole_moment(DipolePolarization::sigma_plus());
  CHECK(std::abs(sp[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(sp[1] - cdouble(0, 1.0 / std::sqrt(2.0))) < 1e-15);
  auto pi = dipole_moment(PiDipole{});
  CHECK(pi[2] == cdouble(1.0));
  CHECK(handedness_for_transition(+1) == -1);
  CHECK(handedness_for_transition(-1) == +1);
  CHECK(handedness_for_transition(0) == 0);
}

TEST_CASE("far field examples") {
  const double r = 1e-3;
  auto pi0 = far_field(PiDipole{}, r, 0.0, 0.3, 0.0, kAtom);
  CHECK(std::abs(pi0.e_theta) < 1e-18);
  CHECK(std::abs(pi0.e_phi) < 1e-18);

  auto pi_eq = far_field(PiDipole{}, r, 1.1, 0.3, 0.0, kAtom);
  CHECK(std::abs(pi_eq.e_theta) * r == doctest::Approx(std::sin(1.1)).epsilon(1e-12));

  auto s = far_field(DipolePolarization::sigma_plus(), r, kPi / 2, 0.4, 0.0, kAtom);
  CHECK(std::abs(s.e_phi) * r == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(s.e_theta) < 1e-12 / r);

  auto a = far_field(DipolePolarization::sigma_plus(), r, 0.7, 0.0, 0.0, kAtom);
  auto b = far_field(DipolePolarization::sigma_plus(), r, 0.7, kPi, 0.0, kAtom);
  double dphase = std::arg(b.e_phi / a.e_phi);
  CHECK(std::abs(std::abs(dphase) - kPi) < 1e-12);

  CHECK_THROWS_AS(far_field(PiDipole{}, 1e-6, 0.1, 0.1, 0.0, kAtom), DomainError);
}

TEST_CASE("far field transversality and 1/r envelope") {
  for (double th = 0.0; th < kPi; th += 0.3) {
    for (double ph = 0.0; ph < 2 * kPi; ph += 0.5) {
      auto e = far_field(polarization_from_ratio(cdouble(0.7, -0.2)), 1e-2, th, ph, 0.0, kAtom);
      CHECK(e.e_r == cdouble(0.0));
      auto e2 = far_field(polarization_from_ratio(cdouble(0.7, -0.2)), 2e-2, th, ph, 0.0, kAtom);
      CHECK(std::abs(e2.e_theta) == doctest::Approx(std::abs(e.e_theta) / 2).epsilon(1e-12));
    }
  }
}

TEST_CASE("far field phase follows the spiral wavefront") {
  // Along the constant-phase surface the field phase must not change.
  const double t = 1e-15;
  for (double phi : {0.0, 0.5, 1.3}) {
    double r0 = wavefront_radius(+1, 0.0, t, 1e-3, kAtom);
    double r1 = wavefront_radius(+1, phi, t, 1e-3, kAtom);
    auto a = far_field(DipolePolarization::sigma_plus(), r0, kPi / 2, 0.0, t, kAtom);
    auto b = far_field(DipolePolarization::sigma_plus(), r1, kPi / 2, phi, t, kAtom);
    CHECK(std::abs(std::arg(b.e_phi / a.e_phi)) < 1e-6);
  }
}

TEST_CASE("wavefront radius examples and tilt property") {
  const double lam = kAtom.lambda_eff();
  CHECK(wavefront_radius(0, 0.1, 1e-12, 0.0, kAtom) == wavefront_radius(0, 2.5, 1e-12, 0.0, kAtom));
  CHECK(wavefront_radius(+1, 2 * kPi, 0, 0, kAtom) - wavefront_radius(+1, 0, 0, 0, kAtom) ==
        doctest::Approx(-lam).epsilon(1e-12));
  CHECK(wavefront_radius(-1, 2 * kPi, 0, 0, kAtom) - wavefront_radius(-1, 0, 0, 0, kAtom) ==
        doctest::Approx(lam).epsilon(1e-12));
  for (int h : {+1, -1}) {
    for (double r : {1e-3, 1e-2, 0.1}) {
      const double dphi = 1e-3;
      const double dr = wavefront_radius(h, dphi, 0, r, kAtom) - wavefront_radius(h, 0, 0, r, kAtom);
      const double gamma = dr / (r * dphi);
      const double expected = -h / (kAtom.k() * r);
      CHECK(std::abs(gamma / expected - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("angular momentum split") {
  auto a = angular_momentum_split(+1, 0.0);
  CHECK(a.spin == doctest::Approx(1.0));
  CHECK(a.orbital == doctest::Approx(0.0));
  auto b = angular_momentum_split(+1, kPi / 2);
  CHECK(std::abs(b.spin) < 1e-15);
  CHECK(b.orbital == doctest::Approx(1.0));
  auto c = angular_momentum_split(0, 0.8);
  CHECK(c.spin == 0.0);
  CHECK(c.orbital == 0.0);
  CHECK_THROWS_AS(angular_momentum_split(2, 0.1), DomainError);
  for (int dm : {-1, 1}) {
    for (double th = -4.0; th <= 4.0; th += 0.001) {
      auto s = angular_momentum_split(dm, th);
      CHECK(std::abs(s.spin + s.orbital - dm) < 1e-12);
    }
  }
}

TEST_CASE("rayleigh spin density") {
  CHECK(rayleigh_spin_density(0.0) == doctest::Approx(1.0));
  CHECK(std::abs(rayleigh_spin_density(kPi / 2)) < 1e-15);
  CHECK(rayleigh_spin_density(kPi / 4) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("optical system validation") {
  CHECK_THROWS_AS(OpticalSystem::make(-1, 1, 1, 0.4, 0.025, 0.135), DomainError);
  CHECK_THROWS_AS(OpticalSystem::make(5e-7, 1, 1, 1.2, 0.025, 0.135), DomainError);
  auto s = OpticalSystem::make(685e-9, 1.46, 1.0, 0.41, 0.01, 0.2);
  CHECK(s.lambda_eff() == doctest::Approx(685e-9 / 1.46));
  CHECK(s.na_g() == doctest::Approx(0.41 / 1.46));
  CHECK(kAtom.magnification() == doctest::Approx(5.4));
}
