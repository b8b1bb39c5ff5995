#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dipole_psf/io_formats.hpp"
#include "dipole_psf/optics.hpp"

namespace dpsf::commands {

namespace fs = std::filesystem;

/// Files produced by a command. The envelope is always written last.
struct Outcome {
  fs::path envelope;
  std::vector<fs::path> files;
  bool all_converged = true;
  std::vector<std::string> warnings;
};

/// Removes a trailing .json or .csv so that "--out run.json" and "--out run" agree.
fs::path output_stem(const fs::path& out);

Outcome run_psf(const io::ExperimentConfig& config, const fs::path& out, bool with_aperture);

struct ShiftCurveArgs {
  double epsilon_min = -6.0;
  double epsilon_max = 6.0;
  int steps = 121;
};

/// Analytic and rendered object-plane shifts for epsilon = x + i epsilon_im on a uniform
/// grid of x, with epsilon_im taken from the config.
io::ShiftCurve compute_shift_curve(const io::ExperimentConfig& config, const ShiftCurveArgs& args);
Outcome run_shift_curve(const io::ExperimentConfig& config, const ShiftCurveArgs& args, const fs::path& out);

/// Displacement between the configured emitter and its mirror (epsilon -> -epsilon).
/// Requires noise.seed.
Outcome run_montecarlo(const io::ExperimentConfig& config, const fs::path& out);

struct PrecisionArgs {
  std::vector<std::uint64_t> n_list{1000, 10000, 100000, 1000000};
};
Outcome run_precision(const io::ExperimentConfig& config, const PrecisionArgs& args, const fs::path& out);

struct SurfaceArgs {
  double dy_max_norm = 1.0;
  double eps_max_norm = 1.0;
  int steps = 41;
};
Outcome run_s_surface(const io::ExperimentConfig& config, const SurfaceArgs& args, const fs::path& out);

struct AllanArgs {
  fs::path series;
  std::vector<std::uint64_t> bins;  // empty: powers of two up to half the series length
};
/// Two numeric columns (y, z) or three (t, y, z). An optional header line and '#' comments are skipped.
std::vector<precision::CentroidSample> read_series_csv(const fs::path& path);
Outcome run_allan(const io::ExperimentConfig& config, const AllanArgs& args, const fs::path& out);

struct AmSplitArgs {
  int delta_m = 1;
  std::vector<double> theta_deg;  // empty: 0 to 180 in 5 degree steps
  bool rayleigh = false;
};
Outcome run_amsplit(const io::ExperimentConfig& config, const AmSplitArgs& args, const fs::path& out);

struct FieldmapArgs {
  optics::ApertureModel model = optics::ApertureModel::SmallAperture;
};
Outcome run_fieldmap(const io::ExperimentConfig& config, const FieldmapArgs& args, const fs::path& out);

}  // namespace dpsf::commands
