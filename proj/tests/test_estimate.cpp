#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "dipole_psf/estimate.hpp"
#include "dipole_psf/fileutil.hpp"
#include "dipole_psf/optics.hpp"
#include "dipole_psf/rng.hpp"

using namespace dpsf;
using namespace dpsf::estimate;
using dipole::polarization_from_ratio;
using psf::GridSpec;

namespace {

ImageRaster uniform_raster(std::size_t n) {
  auto r = ImageRaster::zeros(n, 1, 1e-6);
  for (double& v : r.values) v = 1.0 / n;
  return r;
}

ImageRaster gaussian_raster(std::size_t n, double pitch, const GaussianParams& g) {
  auto r = ImageRaster::zeros(n, n, pitch);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double dy = r.y_at(i) - g.y0, dz = r.z_at(j) - g.z0;
      const double a = std::cos(g.theta) * dy + std::sin(g.theta) * dz;
      const double b = -std::sin(g.theta) * dy + std::cos(g.theta) * dz;
      r.at(i, j) = g.offset + g.amplitude * std::exp(-0.5 * (a * a / (g.sigma_y * g.sigma_y) + b * b / (g.sigma_z * g.sigma_z)));
    }
  return r;
}

OpticalSystem system_with(double na_g, double lambda = 500e-9, double mag = 20.0) {
  OpticalSystem s;
  s.lambda_vac = lambda;
  s.na = na_g;
  s.f = 10e-3;
  s.f_image = mag * s.f;
  return s;
}

}  // namespace

TEST_CASE("counter generator is pinned") {
  rng::CounterRng a(42, 0), b(42, 0), c(42, 1);
  const std::uint64_t first = a.next_u64();
  CHECK(first == b.next_u64());
  CHECK(first != c.next_u64());
  // Reference values from an independent implementation of the same definition.
  rng::CounterRng ref(1, 0);
  CHECK(ref.next_u64() == 0x92D3F70F0575DDB1ULL);
  CHECK(rng::mix64(0) == 0ULL);
  CHECK(rng::mix64(1) == 0x5692161D100B05E5ULL);
  rng::CounterRng u(9, 3);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("poisson sampler moments") {
  for (double mean : {0.3, 4.0, 29.5, 30.0, 75.0, 1e4}) {
    rng::CounterRng g(7, static_cast<std::uint64_t>(mean * 10));
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(g.poisson(mean));
      s += k;
      s2 += k * k;
    }
    const double m = s / n, v = s2 / n - m * m;
    CHECK(std::abs(m - mean) < 5 * std::sqrt(mean / n));
    CHECK(std::abs(v / mean - 1) < 5 * std::sqrt(2.0 / n) + 0.002);
  }
  rng::CounterRng g(1, 1);
  CHECK(g.poisson(0.0) == 0);
  CHECK_THROWS_AS(g.poisson(-1.0), DomainError);
}

TEST_CASE("poisson sampler histogram at mean 50") {
  rng::CounterRng g(11, 0);
  const int n = 400000;
  std::vector<int> hist(200, 0);
  for (int i = 0; i < n; ++i) {
    const auto k = g.poisson(50.0);
    if (k < hist.size()) ++hist[k];
  }
  double chi2 = 0;
  int bins = 0;
  for (int k = 25; k <= 80; ++k) {
    const double p = std::exp(-50.0 + k * std::log(50.0) - std::lgamma(k + 1.0));
    const double e = n * p;
    chi2 += (hist[k] - e) * (hist[k] - e) / e;
    ++bins;
  }
  // 56 bins; the 99.9% chi-square quantile is about 95.
  CHECK(chi2 < 95.0);
}

TEST_CASE("add_shot_noise") {
  auto flat = uniform_raster(100);
  auto zero = add_shot_noise(flat, 0, 3);
  CHECK(zero.total() == 0.0);
  CHECK(add_shot_noise(flat, 1000, 5) == add_shot_noise(flat, 1000, 5));
  CHECK_FALSE(add_shot_noise(flat, 1000, 5) == add_shot_noise(flat, 1000, 6));
  auto bad = flat;
  bad.values[0] *= 2;
  CHECK_THROWS_AS(add_shot_noise(bad, 10, 1), DomainError);

  // Pooled over many seeded realizations so the 3-sigma band of the variance ratio is within 3%.
  double s = 0, s2 = 0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto counts = add_shot_noise(flat, 1000000, seed);
    for (double c : counts.values) {
      s += c;
      s2 += c * c;
      ++count;
    }
  }
  const double mean = s / count;
  const double var = (s2 - count * mean * mean) / (count - 1);
  CHECK(mean == doctest::Approx(1e4).epsilon(1e-3));
  CHECK(var / mean > 0.97);
  CHECK(var / mean < 1.03);
}

TEST_CASE("noiseless Gaussian is recovered") {
  const double pitch = 1e-6;
  GaussianParams truth{1.3 * pitch, 0.0, 4 * pitch, 4 * pitch, 100.0, 5.0, 0.0};
  auto r = gaussian_raster(41, pitch, truth);
  for (auto mode : {FitMode::SixParameter, FitMode::SevenParameter}) {
    auto fit = fit_gaussian(r, mode);
    CHECK(fit.converged);
    CHECK(std::abs(fit.y0 - truth.y0) < 1e-6 * truth.y0);
    CHECK(std::abs(fit.z0) < 1e-6 * pitch);
    CHECK(std::abs(fit.sigma_y / truth.sigma_y - 1) < 1e-6);
    CHECK(std::abs(fit.sigma_z / truth.sigma_z - 1) < 1e-6);
    CHECK(std::abs(fit.amplitude / 100.0 - 1) < 1e-6);
    CHECK(std::abs(fit.offset / 5.0 - 1) < 1e-6);
    CHECK(fit.theta_rot.has_value() == (mode == FitMode::SevenParameter));
  }
}

TEST_CASE("rotated elliptical Gaussian in seven-parameter mode") {
  const double pitch = 2e-6;
  GaussianParams truth{-2.2 * pitch, 3.1 * pitch, 5 * pitch, 2.5 * pitch, 40.0, 1.0, 0.4};
  auto fit = fit_gaussian(gaussian_raster(45, pitch, truth), FitMode::SevenParameter);
  REQUIRE(fit.converged);
  CHECK(fit.y0 == doctest::Approx(truth.y0).epsilon(1e-7));
  CHECK(fit.z0 == doctest::Approx(truth.z0).epsilon(1e-7));
  CHECK(fit.sigma_y == doctest::Approx(truth.sigma_y).epsilon(1e-7));
  CHECK(fit.sigma_z == doctest::Approx(truth.sigma_z).epsilon(1e-7));
  CHECK(*fit.theta_rot == doctest::Approx(0.4).epsilon(1e-7));
}

TEST_CASE("fit input validation") {
  CHECK_THROWS_AS(fit_gaussian(ImageRaster::zeros(3, 3, 1e-6)), DomainError);
  CHECK_THROWS_AS(fit_gaussian(ImageRaster::zeros(21, 21, 1e-6)), DomainError);
  auto flat = ImageRaster::zeros(21, 21, 1e-6);
  for (double& v : flat.values) v = 2.0;
  CHECK_THROWS_AS(fit_gaussian(flat), DomainError);
}

TEST_CASE("fit on a noisy symmetric PSF is unbiased") {
  auto s = system_with(0.2);
  auto g = GridSpec::default_for(s, 65);
  auto img = psf::render_image(polarization_from_ratio(cdouble(0.0)), s, g);
  double sum = 0, sum2 = 0;
  const int n = 100;
  for (int seed = 0; seed < n; ++seed) {
    auto fit = fit_gaussian(add_shot_noise(img, 100000, static_cast<std::uint64_t>(seed)), FitMode::SixParameter);
    REQUIRE(fit.converged);
    sum += fit.y0;
    sum2 += fit.y0 * fit.y0;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
  auto single = fit_gaussian(add_shot_noise(img, 100000, 12345), FitMode::SixParameter);
  CHECK(std::abs(single.y0) < 3 * sd);
  CHECK(std::abs(mean) < 3 * sd / std::sqrt(n));
}

TEST_CASE("fitted shift of a circular dipole at low NA") {
  auto s = system_with(0.1);
  auto img = psf::render_image(dipole::DipolePolarization::sigma_plus(), s, GridSpec::default_for(s, 65));
  auto fit = fit_gaussian(img, FitMode::SixParameter);
  REQUIRE(fit.converged);
  CHECK(fit.y0 / s.magnification() == doctest::Approx(s.lambda_eff() / (2 * kPi)).epsilon(0.05));
}

TEST_CASE("Gaussian fit and centroid agree on the shift") {
  auto s = system_with(0.2);
  psf::FieldBasis fb(s, GridSpec::default_for(s, 65));
  for (double e : {0.5, 1.0, 2.0}) {
    auto img = fb.intensity(dipole::dipole_moment(polarization_from_ratio(cdouble(e))));
    const double cm = psf::centroid_of_mass(img).y;
    const double gf = fit_gaussian(img, FitMode::SixParameter).y0;
    CHECK(std::abs(gf / cm - 1) < 0.05);
  }
}

TEST_CASE("Monte Carlo displacement") {
  OpticalSystem s;  // atom
  auto g = GridSpec::default_for(s, 65);
  auto sp = dipole::Emitter(dipole::DipolePolarization::sigma_plus());
  auto sm = dipole::Emitter(dipole::DipolePolarization::sigma_minus());

  auto same = mc_displacement(sp, sp, s, g, 20000, 60, 99);
  CHECK(same.stats.n_excluded == 0);
  CHECK(std::abs(same.stats.mean_dy) < 3 * same.stats.std_dy / std::sqrt(60.0));
  CHECK(std::abs(same.stats.mean_dz) < 3 * same.stats.std_dz / std::sqrt(60.0));

  auto sep = mc_displacement(sp, sm, s, g, 20000, 60, 7);
  CHECK(sep.stats.mean_dy == doctest::Approx(157.1e-9).epsilon(0.03));
  CHECK(std::abs(sep.stats.mean_dz) < 3 * sep.stats.std_dz / std::sqrt(60.0));
  CHECK(sep.trials.size() == 60);

  CHECK_THROWS_AS(mc_displacement(sp, sm, s, g, 100, 1, 1), DomainError);
}

TEST_CASE("Monte Carlo spread scales as one over root N") {
  OpticalSystem s;
  auto g = GridSpec::default_for(s, 51);
  auto e = dipole::Emitter(dipole::DipolePolarization::sigma_plus());
  auto lo = mc_displacement(e, e, s, g, 5000, 200, 1);
  auto hi = mc_displacement(e, e, s, g, 20000, 200, 2);
  CHECK(lo.stats.std_dy / hi.stats.std_dy == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("Monte Carlo is reproducible across thread counts") {
  OpticalSystem s;
  auto g = GridSpec::default_for(s, 51);
  auto a = dipole::Emitter(polarization_from_ratio(cdouble(0.5)));
  auto b = dipole::Emitter(polarization_from_ratio(cdouble(-0.5)));
  setenv("DIPOLE_PSF_THREADS", "1", 1);
  auto r1 = mc_displacement(a, b, s, g, 3000, 20, 17);
  setenv("DIPOLE_PSF_THREADS", "4", 1);
  auto r2 = mc_displacement(a, b, s, g, 3000, 20, 17);
  unsetenv("DIPOLE_PSF_THREADS");
  CHECK(r1.stats == r2.stats);
  for (std::size_t i = 0; i < r1.trials.size(); ++i) {
    CHECK(r1.trials[i].dy == r2.trials[i].dy);
    CHECK(r1.trials[i].dz == r2.trials[i].dz);
  }
  auto path = std::filesystem::temp_directory_path() / "dpsf_trials.csv";
  write_trials_csv(r1.trials, path);
  const std::string text = io::read_file(path);
  CHECK(text.rfind("trial_index,dy_m,dz_m,converged_a,converged_b\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 21);
  std::filesystem::remove(path);
}
