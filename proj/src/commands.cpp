#include "dipole_psf/commands.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "dipole_psf/estimate.hpp"
#include "dipole_psf/fileutil.hpp"
#include "dipole_psf/parallel.hpp"
#include "dipole_psf/precision.hpp"
#include "dipole_psf/psf.hpp"

namespace dpsf::commands {

namespace {

struct Writer {
  fs::path stem;
  Outcome outcome;

  explicit Writer(const fs::path& out) : stem(output_stem(out)) {
    if (stem.filename().empty()) throw ConfigError("--out must name a file stem");
    if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  }

  fs::path sibling(const std::string& suffix) const { return fs::path(stem.string() + suffix); }

  std::string add(const std::string& suffix, std::string_view bytes) {
    const fs::path p = sibling(suffix);
    io::write_file_atomic(p, bytes);
    outcome.files.push_back(p);
    return p.filename().string();
  }

  std::string add_file(const fs::path& p) {
    outcome.files.push_back(p);
    return p.filename().string();
  }

  Outcome finish(io::ResultEnvelope env) {
    env.tool_version = io::tool_version();
    env.produced_at = io::utc_timestamp();
    for (const auto& f : outcome.files) env.artifacts.push_back(f.filename().string());
    env.warnings = outcome.warnings;
    outcome.envelope = sibling(".json");
    io::write_results(env, outcome.envelope);
    outcome.files.push_back(outcome.envelope);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
    return outcome;
  }
};

io::ResultEnvelope envelope(const std::string& command, const io::ExperimentConfig& config) {
  io::ResultEnvelope env;
  env.command = command;
  env.config_echo = config;
  return env;
}

std::string csv_header(const std::vector<std::string>& columns) {
  std::string s;
  for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
  return s + "\n";
}

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    first = false;
    out += io::format_double(v);
  }
  out += '\n';
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1) throw ConfigError("steps must be at least 1");
  if (!(lo <= hi)) throw ConfigError("range minimum exceeds maximum");
  std::vector<double> v(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) v[static_cast<std::size_t>(i)] = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
  return v;
}

io::RasterEntry write_raster_with_raw(Writer& w, const std::string& label, const psf::ImageRaster& r) {
  io::RasterEntry e;
  e.label = label;
  const fs::path csv = w.sibling("_" + label + ".csv");
  const fs::path raw = w.sibling("_" + label + ".f64");
  const fs::path side = w.sibling("_" + label + ".f64.json");
  psf::write_raster_csv(r, csv);
  psf::write_raster_raw(r, raw, side);
  e.csv_file = w.add_file(csv);
  e.raw_file = w.add_file(raw);
  e.sidecar_file = w.add_file(side);
  e.rows = r.rows;
  e.cols = r.cols;
  e.pitch_m = r.pitch;
  return e;
}

std::vector<io::RasterEntry> write_aperture_maps(Writer& w, const io::ExperimentConfig& config,
                                                 optics::ApertureModel model) {
  const OpticalSystem sys = config.to_system();
  const dipole::Emitter emitter = config.to_emitter();
  const double tm = sys.theta_max();
  const double rho_max = model == optics::ApertureModel::SmallAperture ? sys.f * std::tan(tm) : sys.f * std::sin(tm);
  const auto n = static_cast<std::size_t>(config.grid.samples);
  const double pitch = 2.0 * rho_max / static_cast<double>(n);
  optics::ApertureFieldOptions opts;
  opts.model = model;

  // Planes: H = z component, V = y component, R/L = (E_H -+ i E_V) / sqrt(2).
  const char* names[] = {"H", "V", "R", "L"};
  std::vector<std::vector<cdouble>> planes(4, std::vector<cdouble>(n * n));
  parallel_for(n, [&](std::size_t r) {
    const double y = (static_cast<double>(r) - 0.5 * (n - 1.0)) * pitch;
    for (std::size_t c = 0; c < n; ++c) {
      const double z = (static_cast<double>(c) - 0.5 * (n - 1.0)) * pitch;
      const double rho = std::hypot(y, z);
      if (rho > rho_max) continue;
      const Vec3c e = optics::aperture_field(emitter, sys, rho, std::atan2(z, y), opts);
      const cdouble h = e[2], v = e[1];
      const cdouble i(0.0, 1.0);
      planes[0][r * n + c] = h;
      planes[1][r * n + c] = v;
      planes[2][r * n + c] = (h - i * v) / std::sqrt(2.0);
      planes[3][r * n + c] = (h + i * v) / std::sqrt(2.0);
    }
  });

  std::vector<io::RasterEntry> entries;
  for (int k = 0; k < 4; ++k) {
    auto intensity = psf::ImageRaster::zeros(n, n, pitch);
    auto phase = psf::ImageRaster::zeros(n, n, pitch);
    for (std::size_t i = 0; i < n * n; ++i) {
      const cdouble f = planes[static_cast<std::size_t>(k)][i];
      intensity.values[i] = std::norm(f);
      double ph = std::arg(f);
      if (ph < 0.0) ph += 2.0 * kPi;
      phase.values[i] = ph;
    }
    for (auto [label, raster] : {std::pair{std::string("aperture_") + names[k] + "_intensity", &intensity},
                                 std::pair{std::string("aperture_") + names[k] + "_phase", &phase}}) {
      const fs::path csv = w.sibling("_" + label + ".csv");
      psf::write_raster_csv(*raster, csv);
      io::RasterEntry e;
      e.label = label;
      e.csv_file = w.add_file(csv);
      e.rows = n;
      e.cols = n;
      e.pitch_m = pitch;
      entries.push_back(e);
    }
  }
  return entries;
}

}  // namespace

fs::path output_stem(const fs::path& out) {
  const auto ext = out.extension();
  if (ext == ".json" || ext == ".csv") {
    fs::path p = out;
    return p.replace_extension();
  }
  return out;
}

Outcome run_psf(const io::ExperimentConfig& config, const fs::path& out, bool with_aperture) {
  Writer w(out);
  const auto image = psf::render_image(config.to_emitter(), config.to_system(), config.to_grid(),
                                       config.to_render_options());
  io::RasterReference ref;
  ref.entries.push_back(write_raster_with_raw(w, "image", image));
  if (with_aperture) {
    for (auto& e : write_aperture_maps(w, config, optics::ApertureModel::SmallAperture)) ref.entries.push_back(e);
  }
  auto env = envelope("psf", config);
  env.parameters = {{"aperture", with_aperture}};
  env.payload = ref;
  return w.finish(std::move(env));
}

io::ShiftCurve compute_shift_curve(const io::ExperimentConfig& config, const ShiftCurveArgs& args) {
  const OpticalSystem sys = config.to_system();
  const psf::FieldBasis basis(sys, config.to_grid(), config.to_render_options());
  const double eps_im = config.dipole.kind == io::DipoleKind::Ratio ? config.dipole.epsilon_im : 0.0;
  const auto xs = linspace(args.epsilon_min, args.epsilon_max, args.steps);
  io::ShiftCurve curve;
  curve.rows.resize(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    const cdouble eps(xs[i], eps_im);
    const auto mu = dipole::dipole_moment(dipole::polarization_from_ratio(eps));
    const auto c = psf::centroid_of_mass(basis.intensity(mu));
    curve.rows[i] = {xs[i], optics::apparent_shift(eps, sys), -c.y / sys.magnification()};
  });
  return curve;
}

Outcome run_shift_curve(const io::ExperimentConfig& config, const ShiftCurveArgs& args, const fs::path& out) {
  Writer w(out);
  const auto curve = compute_shift_curve(config, args);
  std::string csv = csv_header({"epsilon", "dy_analytic_m", "dy_rendered_m"});
  for (const auto& r : curve.rows) append_row(csv, {r.epsilon, r.dy_analytic_m, r.dy_rendered_m});
  w.add(".csv", csv);
  auto env = envelope("shift-curve", config);
  env.parameters = {{"epsilon_min", args.epsilon_min}, {"epsilon_max", args.epsilon_max}, {"steps", args.steps}};
  env.payload = curve;
  return w.finish(std::move(env));
}

Outcome run_montecarlo(const io::ExperimentConfig& config, const fs::path& out) {
  if (!config.noise.seed) throw ConfigError("montecarlo requires a seed (--seed or noise.seed)");
  const OpticalSystem sys = config.to_system();
  estimate::McOptions opts;
  opts.render = config.to_render_options();
  Writer w(out);
  const auto res = estimate::mc_displacement(config.to_emitter(), config.to_mirror_emitter(), sys, config.to_grid(),
                                             config.noise.n_photons, config.noise.n_trials, *config.noise.seed, opts);
  const fs::path trials = w.sibling("_trials.csv");
  estimate::write_trials_csv(res.trials, trials);
  w.add_file(trials);
  if (res.stats.n_excluded > 0) {
    w.outcome.all_converged = false;
    w.outcome.warnings.push_back(std::to_string(res.stats.n_excluded) + " of " + std::to_string(res.stats.n_trials) +
                                 " trials had a non-converged fit and were excluded");
  }
  auto env = envelope("montecarlo", config);
  env.payload = res.stats;
  return w.finish(std::move(env));
}

Outcome run_precision(const io::ExperimentConfig& config, const PrecisionArgs& args, const fs::path& out) {
  if (args.n_list.empty()) throw ConfigError("precision needs at least one photon number");
  Writer w(out);
  const OpticalSystem sys = config.to_system();
  const precision::SMetric metric(sys, precision::standard_grid(sys));
  std::vector<precision::PrecisionPoint> pts(args.n_list.size());
  parallel_for(pts.size(), [&](std::size_t i) { pts[i] = precision::precision_limit(args.n_list[i], metric); });
  std::string csv = csv_header({"n_photons", "dy_linear_m", "dy_elliptical_m", "d_epsilon"});
  for (const auto& p : pts) {
    csv += std::to_string(p.n_photons) + ",";
    append_row(csv, {p.dy_linear, p.dy_elliptical, p.d_epsilon});
  }
  w.add(".csv", csv);
  auto env = envelope("precision", config);
  env.parameters = {{"n_list", args.n_list}};
  env.payload = pts;
  return w.finish(std::move(env));
}

Outcome run_s_surface(const io::ExperimentConfig& config, const SurfaceArgs& args, const fs::path& out) {
  Writer w(out);
  const OpticalSystem sys = config.to_system();
  const auto dy = linspace(-args.dy_max_norm, args.dy_max_norm, args.steps);
  const auto eps = linspace(-args.eps_max_norm, args.eps_max_norm, args.steps);
  const auto pts = precision::s_surface(sys, precision::standard_grid(sys), dy, eps);
  const fs::path csv = w.sibling(".csv");
  precision::write_s_surface_csv(pts, csv);
  io::TableReference ref{w.add_file(csv), {"delta_y_norm", "epsilon_norm", "s_value"}, pts.size()};
  auto env = envelope("s-surface", config);
  env.parameters = {{"dy_max_norm", args.dy_max_norm}, {"eps_max_norm", args.eps_max_norm}, {"steps", args.steps}};
  env.payload = ref;
  return w.finish(std::move(env));
}

std::vector<precision::CentroidSample> read_series_csv(const fs::path& path) {
  std::istringstream in(io::read_file(path));
  std::vector<precision::CentroidSample> series;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> cols;
    std::stringstream ls(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ls, tok, ',')) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || (*end != '\0' && *end != ' ')) {
        numeric = false;
        break;
      }
      cols.push_back(v);
    }
    if (!numeric) {
      if (series.empty() && line_no == 1) continue;  // header
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (cols.size() != 2 && cols.size() != 3)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 2 or 3 columns");
    for (double v : cols)
      if (!std::isfinite(v)) throw IoError(path.string() + ":" + std::to_string(line_no) + ": non-finite value");
    const std::size_t o = cols.size() - 2;
    series.push_back({cols[o], cols[o + 1]});
  }
  if (series.empty()) throw IoError(path.string() + ": no samples");
  return series;
}

Outcome run_allan(const io::ExperimentConfig& config, const AllanArgs& args, const fs::path& out) {
  const auto series = read_series_csv(args.series);
  std::vector<std::uint64_t> bins = args.bins;
  if (bins.empty())
    for (std::uint64_t b = 1; 2 * b <= series.size(); b *= 2) bins.push_back(b);
  Writer w(out);
  const auto pts = precision::allan_deviation(series, bins, &w.outcome.warnings);
  std::string csv = csv_header({"bin_size", "adev_y", "adev_z"});
  for (const auto& p : pts) {
    csv += std::to_string(p.bin_size) + ",";
    append_row(csv, {p.adev_y, p.adev_z});
  }
  w.add(".csv", csv);
  auto env = envelope("allan", config);
  env.parameters = {{"series", args.series.string()}, {"bins", bins}};
  env.payload = pts;
  return w.finish(std::move(env));
}

Outcome run_amsplit(const io::ExperimentConfig& config, const AmSplitArgs& args, const fs::path& out) {
  std::vector<double> thetas = args.theta_deg;
  if (thetas.empty())
    for (int d = 0; d <= 180; d += 5) thetas.push_back(d);
  Writer w(out);
  std::vector<std::string> cols{"theta_rad", "spin", "orbital"};
  if (args.rayleigh) cols.push_back("rayleigh_spin");
  std::string csv = csv_header(cols);
  for (double deg : thetas) {
    const double th = deg * kPi / 180.0;
    const auto s = dipole::angular_momentum_split(args.delta_m, th);
    if (args.rayleigh)
      append_row(csv, {th, s.spin, s.orbital, dipole::rayleigh_spin_density(th)});
    else
      append_row(csv, {th, s.spin, s.orbital});
  }
  io::TableReference ref{w.add(".csv", csv), cols, thetas.size()};
  auto env = envelope("amsplit", config);
  env.parameters = {{"delta_m", args.delta_m}, {"theta_deg", thetas}, {"rayleigh", args.rayleigh}};
  env.payload = ref;
  return w.finish(std::move(env));
}

Outcome run_fieldmap(const io::ExperimentConfig& config, const FieldmapArgs& args, const fs::path& out) {
  Writer w(out);
  io::RasterReference ref;
  ref.entries = write_aperture_maps(w, config, args.model);
  auto env = envelope("fieldmap", config);
  env.parameters = {
      {"aperture_model", args.model == optics::ApertureModel::SmallAperture ? "small-aperture" : "orthographic"}};
  env.payload = ref;
  return w.finish(std::move(env));
}

}  // namespace dpsf::commands
