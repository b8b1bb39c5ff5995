#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dipole_psf/optical_system.hpp"
#include "dipole_psf/psf.hpp"

namespace dpsf::precision {

using psf::GridSpec;
using psf::ImageRaster;

/// Length unit lambda_eff / (2 pi NA_g) in the object plane.
double normalized_length(const OpticalSystem& system);

/// Pixels are integrated with this many sub-samples per side.
inline constexpr int kPixelSupersample = 9;

/// Sum of squared differences between two unit-normalized rasters on the same grid.
double s_metric(const ImageRaster& reference, const ImageRaster& other);

/// S(delta_y, epsilon) between the centred linear dipole and an emitter of real ratio epsilon
/// displaced by delta_y, both rendered with the small-aperture model and pixel integration.
double s_metric(double delta_y, double epsilon, const OpticalSystem& system, const GridSpec& grid);

/// Caches the reference image so repeated evaluations cost one render each.
class SMetric {
 public:
  SMetric(const OpticalSystem& system, const GridSpec& grid);
  double operator()(double delta_y, double epsilon) const;
  /// epsilon = delta_y * 2 pi / lambda_eff, where the apparent shift cancels the displacement.
  double valley(double delta_y) const;
  ImageRaster image(double delta_y, double epsilon) const;
  const OpticalSystem& system() const { return system_; }

 private:
  OpticalSystem system_;
  GridSpec grid_;
  ImageRaster reference_;
};

/// Pixel pitch (in units of normalized_length, object plane) that maximizes the
/// quadratic coefficient a. Found once by golden-section search.
double optimal_pixel_ratio();

/// Grid with the optimal pitch, covering about +-36 normalized units.
GridSpec standard_grid(const OpticalSystem& system);

struct PowerLaws {
  double a;  // S(x, 0) ~ a x^2
  double b;  // S(x, x / NA_g) ~ b x^4
};

/// Prefactor c of y = c x^p by least squares in log space with the exponent fixed.
double fit_fixed_exponent(const std::vector<double>& x, const std::vector<double>& y, double exponent);

struct LogLogFit {
  double prefactor;
  double exponent;
};

LogLogFit fit_free_exponent(const std::vector<double>& x, const std::vector<double>& y);

/// a and b in normalized units from S evaluated at the given displacements (metres).
/// Every sample must lie in (0, 0.3] normalized units.
PowerLaws fit_power_laws(const OpticalSystem& system, const GridSpec& grid, const std::vector<double>& dy_samples);

struct PrecisionPoint {
  std::uint64_t n_photons;
  double dy_linear;      // m, object plane
  double dy_elliptical;  // m, object plane
  double d_epsilon;      // dy_elliptical * 2 pi / lambda_eff
  bool operator==(const PrecisionPoint&) const = default;
};

/// Roots of S(Dy, 0) = 1/N and S(Dy, Dy 2pi/lambda_eff) = 1/N, bisected to 1e-6 relative
/// inside [1e-4, 10] normalized units.
PrecisionPoint precision_limit(std::uint64_t n_photons, const OpticalSystem& system, const GridSpec& grid);
PrecisionPoint precision_limit(std::uint64_t n_photons, const SMetric& metric);

struct ShotNoiseEstimate {
  double mean;
  double standard_error;
};

/// Mean over trials of (1/N^2) sum_i (n_i - N p_i)^2, with its standard error.
ShotNoiseEstimate shot_noise_statistics(const ImageRaster& raster, std::uint64_t n_photons, std::uint64_t n_trials,
                                        std::uint64_t seed);
double shot_noise_expectation(const ImageRaster& raster, std::uint64_t n_photons, std::uint64_t n_trials,
                              std::uint64_t seed);

struct CentroidSample {
  double y;
  double z;
};

struct AllanPoint {
  std::uint64_t bin_size;
  double adev_y;
  double adev_z;
  bool operator==(const AllanPoint&) const = default;
};

/// Non-overlapping Allan deviation. Bin sizes that leave fewer than two bins are
/// skipped and described in warnings.
std::vector<AllanPoint> allan_deviation(const std::vector<CentroidSample>& series,
                                        const std::vector<std::uint64_t>& bin_sizes,
                                        std::vector<std::string>* warnings = nullptr);

struct SurfacePoint {
  double delta_y_norm;
  double epsilon_norm;  // epsilon * NA_g
  double s_value;
};

std::vector<SurfacePoint> s_surface(const OpticalSystem& system, const GridSpec& grid,
                                    const std::vector<double>& delta_y_norm, const std::vector<double>& epsilon_norm);

void write_s_surface_csv(const std::vector<SurfacePoint>& points, const std::filesystem::path& path);

}  // namespace dpsf::precision
