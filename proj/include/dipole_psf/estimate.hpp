#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dipole_psf/dipole.hpp"
#include "dipole_psf/psf.hpp"

namespace dpsf::estimate {

using psf::ImageRaster;

/// Poisson counts with mean n_photons * p_i per pixel. The raster must sum to 1
/// within 1e-9. Different stream values give independent noise for one seed.
ImageRaster add_shot_noise(const ImageRaster& raster, std::uint64_t n_photons, std::uint64_t seed,
                           std::uint64_t stream = 0);

enum class FitMode { SixParameter = 6, SevenParameter = 7 };

/// Gaussian model parameters. Positions and widths in metres on the raster's plane.
struct GaussianParams {
  double y0 = 0.0;
  double z0 = 0.0;
  double sigma_y = 0.0;
  double sigma_z = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double theta = 0.0;  // rotation, used in seven-parameter mode only
};

struct GaussianFitResult {
  double y0;
  double z0;
  double sigma_y;
  double sigma_z;
  double amplitude;
  double offset;
  std::optional<double> theta_rot;
  double residual_ss;
  bool converged;
  int iterations;
};

/// Unweighted least-squares fit of O + A exp(-a^2/2sy^2 - b^2/2sz^2), with (a, b) the
/// pixel offset from (y0, z0) rotated by theta. Levenberg-Marquardt: damping x10 on a
/// rejected step, /10 on an accepted one; stops when the relative change of the residual
/// drops below 1e-10 or after 200 iterations, in which case converged is false.
/// Throws DomainError for rasters with too few pixels, no counts or no contrast.
GaussianFitResult fit_gaussian(const ImageRaster& raster, FitMode mode = FitMode::SevenParameter,
                               const std::optional<GaussianParams>& init = std::nullopt);

/// Starting point from raster moments.
GaussianParams moment_estimate(const ImageRaster& raster);

struct TrialRecord {
  std::size_t trial_index;
  double dy;
  double dz;
  bool converged_a;
  bool converged_b;
};

struct McDisplacementStats {
  double mean_dy = 0.0;
  double mean_dz = 0.0;
  double std_dy = 0.0;
  double std_dz = 0.0;
  std::uint64_t n_trials = 0;
  std::uint64_t n_excluded = 0;
  std::uint64_t seed = 0;
  bool operator==(const McDisplacementStats&) const = default;
};

struct McDisplacementResult {
  McDisplacementStats stats;
  std::vector<TrialRecord> trials;
};

struct McOptions {
  FitMode mode = FitMode::SevenParameter;
  psf::RenderOptions render;
};

/// Monte Carlo of the displacement between the images of two emitters. Each trial
/// draws independent shot noise on both noiseless images (streams 2t and 2t+1),
/// fits both and records (centroid_a - centroid_b) / M. Trials with a non-converged
/// fit are excluded from the statistics and counted.
McDisplacementResult mc_displacement(const dipole::Emitter& a, const dipole::Emitter& b, const OpticalSystem& system,
                                     const psf::GridSpec& grid, std::uint64_t n_photons, std::uint64_t n_trials,
                                     std::uint64_t seed, const McOptions& options = {});

/// CSV with header trial_index,dy_m,dz_m,converged_a,converged_b.
void write_trials_csv(const std::vector<TrialRecord>& trials, const std::filesystem::path& path);

}  // namespace dpsf::estimate
