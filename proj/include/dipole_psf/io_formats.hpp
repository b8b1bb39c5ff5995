#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dipole_psf/dipole.hpp"
#include "dipole_psf/estimate.hpp"
#include "dipole_psf/optical_system.hpp"
#include "dipole_psf/precision.hpp"
#include "dipole_psf/psf.hpp"

namespace dpsf::io {

using Json = nlohmann::ordered_json;

// Configuration documents use human-scaled units (nm, um, mm, degrees).
// Conversion to SI happens in the to_* accessors only.

struct SystemSection {
  double lambda_vac_nm = 493.41;
  double n = 1.0;
  double n_image = 1.0;
  double na = 0.40;
  double f_mm = 25.0;
  double f_image_mm = 135.0;
  bool operator==(const SystemSection&) const = default;
};

enum class DipoleKind { Ratio, Axial, Pi };

struct DipoleSection {
  DipoleKind kind = DipoleKind::Ratio;
  double epsilon_re = 1.0;
  double epsilon_im = 0.0;
  bool operator==(const DipoleSection&) const = default;
};

struct GridSection {
  std::optional<double> half_extent_um;  // image plane; absent selects the default window
  int samples = 129;
  bool operator==(const GridSection&) const = default;
};

struct OptionsSection {
  double defocus_nm = 0.0;
  std::optional<double> pbs_filter_deg;
  bool apodization = true;
  bool operator==(const OptionsSection&) const = default;
};

struct NoiseSection {
  std::uint64_t n_photons = 20000;
  std::uint64_t n_trials = 100;
  std::optional<std::uint64_t> seed;
  bool operator==(const NoiseSection&) const = default;
};

struct ExperimentConfig {
  SystemSection system;
  DipoleSection dipole;
  GridSection grid;
  OptionsSection options;
  NoiseSection noise;

  OpticalSystem to_system() const;
  dipole::Emitter to_emitter() const;
  /// The emitter with epsilon -> -epsilon; axial and pi emitters are their own mirror.
  dipole::Emitter to_mirror_emitter() const;
  psf::GridSpec to_grid() const;
  psf::RenderOptions to_render_options() const;

  bool operator==(const ExperimentConfig&) const = default;
};

struct ConfigIssue {
  std::string path;
  std::string message;
};

/// Carries every problem found in a document, each with its dotted path.
class ConfigValidationError : public ConfigError {
 public:
  explicit ConfigValidationError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Parses and validates a configuration document. Absent sections and fields
/// take their defaults; unknown keys are errors.
ExperimentConfig load_config(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);
/// Checks ranges on an in-memory config and throws ConfigValidationError.
void validate_config(const ExperimentConfig& config);
Json config_to_json(const ExperimentConfig& config);
std::string serialize(const ExperimentConfig& config);

/// JSON text with every floating-point number printed to 17 significant digits.
/// Objects keep insertion order; indentation is two spaces.
std::string dump_json(const Json& value);

struct ShiftCurveRow {
  double epsilon;
  double dy_analytic_m;
  double dy_rendered_m;
  bool operator==(const ShiftCurveRow&) const = default;
};

struct ShiftCurve {
  std::vector<ShiftCurveRow> rows;
  bool operator==(const ShiftCurve&) const = default;
};

struct RasterEntry {
  std::string label;
  std::string csv_file;
  std::string raw_file;      // empty when only CSV was written
  std::string sidecar_file;  // empty when only CSV was written
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  double pitch_m = 0.0;
  bool operator==(const RasterEntry&) const = default;
};

struct RasterReference {
  std::vector<RasterEntry> entries;
  bool operator==(const RasterReference&) const = default;
};

struct TableReference {
  std::string file;
  std::vector<std::string> columns;
  std::uint64_t rows = 0;
  bool operator==(const TableReference&) const = default;
};

using Payload = std::variant<ShiftCurve, estimate::McDisplacementStats, std::vector<precision::PrecisionPoint>,
                             std::vector<precision::AllanPoint>, RasterReference, TableReference>;

struct ResultEnvelope {
  std::string tool_version;
  std::string produced_at;  // ISO 8601, UTC
  std::string command;
  Json parameters = Json::object();  // command arguments not held in the config
  ExperimentConfig config_echo;
  Payload payload;
  std::vector<std::string> artifacts;  // files written next to the envelope
  std::vector<std::string> warnings;
  bool operator==(const ResultEnvelope&) const = default;
};

std::string tool_version();
std::string utc_timestamp();

Json payload_to_json(const Payload& payload);
Json envelope_to_json(const ResultEnvelope& envelope);
ResultEnvelope envelope_from_json(const Json& doc);

void write_results(const ResultEnvelope& envelope, const std::filesystem::path& path);
ResultEnvelope read_results(const std::filesystem::path& path);

}  // namespace dpsf::io
