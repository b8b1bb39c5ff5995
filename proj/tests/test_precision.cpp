#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "dipole_psf/estimate.hpp"
#include "dipole_psf/fileutil.hpp"
#include "dipole_psf/precision.hpp"

using namespace dpsf;
using namespace dpsf::precision;

namespace {

OpticalSystem nano() {
  OpticalSystem s;
  s.lambda_vac = 685e-9;
  s.n = 1.46;
  s.na = 0.41 * 1.46;  // NA_g = 0.41
  s.f = 2e-3;
  s.f_image = 0.2;
  return s;
}

std::vector<double> log_samples(double lo, double hi, int n, double unit) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(unit * lo * std::pow(hi / lo, i / (n - 1.0)));
  return v;
}

}  // namespace

TEST_CASE("S metric basics") {
  const auto s = nano();
  const auto g = standard_grid(s);
  const SMetric m(s, g);
  const double lam = s.lambda_eff();
  CHECK(m(0.0, 0.0) == 0.0);
  CHECK(s_metric(0.0, 0.0, s, g) == 0.0);
  const double dy = 0.05 * lam;
  CHECK(m.valley(dy) <= m(dy, 0.0));
  for (double d : {0.01 * lam, 0.04 * lam}) {
    for (double e : {-1.5, 0.0, 0.7}) {
      const double a = m(d, e), b = m(-d, -e);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(a, 1e-300) + 1e-300);
    }
  }
  auto other = psf::ImageRaster::zeros(3, 3, 1.0);
  CHECK_THROWS_AS(precision::s_metric(m.image(0, 0), other), DomainError);
}

TEST_CASE("valley compensation keeps the image centred") {
  const auto s = nano();
  const auto g = standard_grid(s);
  const SMetric m(s, g);
  const double unit = normalized_length(s);
  for (double x : {0.05, 0.1, 0.2}) {
    auto img = m.image(x * unit, x / s.na_g());
    auto c = psf::centroid_of_mass(img);
    CHECK(std::abs(c.y) < g.pitch() / 100);
    auto fit = estimate::fit_gaussian(img, estimate::FitMode::SixParameter);
    CHECK(std::abs(fit.y0) < g.pitch() / 100);
  }
}

TEST_CASE("standard pixelization") {
  const double h = optimal_pixel_ratio();
  CHECK(h > 1.8);
  CHECK(h < 2.6);
  const auto s = nano();
  const auto g = standard_grid(s);
  CHECK(g.samples % 2 == 1);
  CHECK(g.pitch() == doctest::Approx(h * normalized_length(s) * s.magnification()).epsilon(1e-12));
}

TEST_CASE("power-law fits") {
  std::vector<double> x{0.01, 0.03, 0.1, 0.2}, y;
  for (double v : x) y.push_back(0.0333 * v * v);
  CHECK(std::abs(fit_fixed_exponent(x, y, 2.0) - 0.0333) < 1e-6);
  auto free = fit_free_exponent(x, y);
  CHECK(free.exponent == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_free_exponent({1.0}, {1.0}), DomainError);

  const auto s = nano();
  const auto g = standard_grid(s);
  const double unit = normalized_length(s);
  const auto samples = log_samples(0.02, 0.3, 8, unit);
  const SMetric m(s, g);
  std::vector<double> xs, lin, val;
  for (double d : samples) {
    xs.push_back(d / unit);
    lin.push_back(m(d, 0.0));
    val.push_back(m.valley(d));
  }
  CHECK(fit_free_exponent(xs, lin).exponent == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::abs(fit_free_exponent(xs, val).exponent - 4.0) < 0.2);
  auto pl = fit_power_laws(s, g, samples);
  CHECK(pl.a > 0.0);
  CHECK(pl.b > 0.0);
  CHECK_THROWS_AS(fit_power_laws(s, g, {0.5 * unit}), DomainError);
  CHECK_THROWS_AS(fit_power_laws(s, g, {}), DomainError);
}

TEST_CASE("precision limit") {
  const auto s = nano();
  const SMetric m(s, standard_grid(s));
  const double unit = normalized_length(s);
  auto pl = fit_power_laws(s, standard_grid(s), log_samples(0.02, 0.3, 6, unit));

  auto p4 = precision_limit(10000, m);
  CHECK(p4.dy_elliptical >= p4.dy_linear);
  CHECK(p4.d_epsilon == doctest::Approx(p4.dy_elliptical * 2 * kPi / s.lambda_eff()));
  CHECK(p4.dy_linear / unit == doctest::Approx(1 / std::sqrt(pl.a * 1e4)).epsilon(0.05));
  CHECK(p4.dy_elliptical / unit == doctest::Approx(std::pow(pl.b * 1e4, -0.25)).epsilon(0.05));
  const double target = 1e-4;
  CHECK(std::abs(m(p4.dy_linear, 0.0) / target - 1) < 1e-5);
  CHECK(std::abs(m.valley(p4.dy_elliptical) / target - 1) < 1e-5);

  auto p16 = precision_limit(40000, m);
  CHECK(p16.dy_linear == doctest::Approx(p4.dy_linear / 2).epsilon(0.05));

  auto p3 = precision_limit(1000, m);
  auto p6 = precision_limit(1000000, m);
  CHECK(p6.dy_elliptical / p6.dy_linear > p3.dy_elliptical / p3.dy_linear);

  CHECK_THROWS_AS(precision_limit(5, m), DomainError);
}

TEST_CASE("shot-noise expectation") {
  psf::ImageRaster flat = psf::ImageRaster::zeros(20, 20, 1e-6);
  for (double& v : flat.values) v = 1.0 / 400;
  for (std::uint64_t n : {1000ULL, 10000ULL}) {
    auto est = shot_noise_statistics(flat, n, 500, 3);
    CHECK(std::abs(est.mean - 1.0 / n) < 3 * est.standard_error);
  }
  auto a = shot_noise_statistics(flat, 2000, 500, 8);
  auto b = shot_noise_statistics(flat, 4000, 500, 9);
  CHECK(a.mean / b.mean == doctest::Approx(2.0).epsilon(0.1));
  CHECK(shot_noise_expectation(flat, 1000, 10, 1) == shot_noise_expectation(flat, 1000, 10, 1));
}

TEST_CASE("shot-noise expectation at a single photon") {
  // With independent Poisson pixels the expectation is sum_i N p_i / N^2 = 1/N exactly.
  psf::ImageRaster r = psf::ImageRaster::zeros(4, 1, 1e-6);
  r.values = {0.1, 0.2, 0.3, 0.4};
  auto est = shot_noise_statistics(r, 1, 100000, 21);
  CHECK(std::abs(est.mean - 1.0) < 3 * est.standard_error);
}

TEST_CASE("Allan deviation") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> noise(0.0, 2.0);
  std::vector<CentroidSample> white(10000);
  for (auto& p : white) p = {noise(gen), noise(gen)};
  auto pts = allan_deviation(white, {1, 4, 16, 64});
  REQUIRE(pts.size() == 4);
  for (const auto& p : pts) {
    CHECK(p.adev_y == doctest::Approx(2.0 / std::sqrt(static_cast<double>(p.bin_size))).epsilon(0.1));
    CHECK(p.adev_z == doctest::Approx(2.0 / std::sqrt(static_cast<double>(p.bin_size))).epsilon(0.1));
  }

  std::vector<CentroidSample> drift(1000);
  for (std::size_t i = 0; i < drift.size(); ++i) drift[i] = {0.01 * i, 0.0};
  for (const auto& p : allan_deviation(drift, {1, 5, 50})) {
    CHECK(p.adev_y == doctest::Approx(0.01 * p.bin_size / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(p.adev_z == 0.0);
  }

  std::vector<CentroidSample> flat(100, {3.0, -1.0});
  for (const auto& p : allan_deviation(flat, {1, 2, 10})) {
    CHECK(p.adev_y == 0.0);
    CHECK(p.adev_z == 0.0);
  }

  std::vector<std::string> warnings;
  auto some = allan_deviation(flat, {10, 60, 0}, &warnings);
  CHECK(some.size() == 1);
  CHECK(warnings.size() == 2);
}

TEST_CASE("Allan minimum sits at the noise-drift crossover") {
  std::mt19937_64 gen(17);
  const double sigma = 1.0, d = 1e-3;
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<CentroidSample> series(200000);
  for (std::size_t i = 0; i < series.size(); ++i) series[i] = {noise(gen) + d * i, noise(gen)};
  std::vector<std::uint64_t> bins;
  for (double b = 1; b <= 20000; b *= 1.25) bins.push_back(static_cast<std::uint64_t>(b));
  bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
  auto pts = allan_deviation(series, bins);
  auto best = std::min_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.adev_y < b.adev_y; });
  const double n_star = std::pow(2 * sigma * sigma / (d * d), 1.0 / 3.0);
  CHECK(best->bin_size > n_star / 2);
  CHECK(best->bin_size < n_star * 2);
}

TEST_CASE("S surface export") {
  const auto s = nano();
  auto pts = s_surface(s, standard_grid(s), {-0.2, 0.0, 0.2}, {-0.2, 0.0, 0.2});
  REQUIRE(pts.size() == 9);
  CHECK(pts[4].s_value == 0.0);
  // Valley points (eps_norm == dy_norm) lie below the displaced linear dipole.
  CHECK(pts[8].s_value < pts[7].s_value);
  auto path = std::filesystem::temp_directory_path() / "dpsf_surface.csv";
  write_s_surface_csv(pts, path);
  const std::string text = io::read_file(path);
  CHECK(text.rfind("delta_y_norm,epsilon_norm,s_value\n", 0) == 0);
  std::filesystem::remove(path);
}
