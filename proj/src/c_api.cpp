#include "dipole_psf.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "dipole_psf/commands.hpp"
#include "dipole_psf/io_formats.hpp"
#include "dipole_psf/optics.hpp"
#include "dipole_psf/psf.hpp"

struct dpsf_config {
  dpsf::io::ExperimentConfig value;
};

struct dpsf_raster {
  dpsf::psf::ImageRaster value;
};

namespace {

thread_local std::string g_last_error;

dpsf_status fail(dpsf_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

template <class F>
dpsf_status guarded(F&& body) {
  try {
    return body();
  } catch (const dpsf::ConfigError& e) {
    return fail(DPSF_ERR_CONFIG, e.what());
  } catch (const dpsf::DomainError& e) {
    return fail(DPSF_ERR_DOMAIN, e.what());
  } catch (const dpsf::IoError& e) {
    return fail(DPSF_ERR_IO, e.what());
  } catch (const dpsf::NonConvergedError& e) {
    return fail(DPSF_ERR_NONCONVERGED, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(DPSF_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DPSF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DPSF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DPSF_ERR_INTERNAL, "unknown error");
  }
}

#define DPSF_REQUIRE(cond, what) \
  if (!(cond)) return fail(DPSF_ERR_INVALID_ARGUMENT, what)

double* number_field(dpsf::io::ExperimentConfig& c, const std::string& key) {
  if (key == "system.lambda_vac_nm") return &c.system.lambda_vac_nm;
  if (key == "system.n") return &c.system.n;
  if (key == "system.n_image") return &c.system.n_image;
  if (key == "system.na") return &c.system.na;
  if (key == "system.f_mm") return &c.system.f_mm;
  if (key == "system.f_image_mm") return &c.system.f_image_mm;
  if (key == "dipole.epsilon_re") return &c.dipole.epsilon_re;
  if (key == "dipole.epsilon_im") return &c.dipole.epsilon_im;
  if (key == "options.defocus_nm") return &c.options.defocus_nm;
  return nullptr;
}

bool integral(double v) { return std::isfinite(v) && v == std::floor(v); }

dpsf_status run(const dpsf::commands::Outcome& outcome, bool allow_nonconverged) {
  if (!outcome.all_converged && !allow_nonconverged) {
    std::string msg = "some fits did not converge";
    if (!outcome.warnings.empty()) msg = outcome.warnings.front();
    return fail(DPSF_ERR_NONCONVERGED, msg);
  }
  return DPSF_OK;
}

}  // namespace

extern "C" {

const char* dpsf_version(void) { return DPSF_VERSION_STRING; }

const char* dpsf_last_error(void) { return g_last_error.c_str(); }

const char* dpsf_status_name(dpsf_status status) {
  switch (status) {
    case DPSF_OK: return "ok";
    case DPSF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DPSF_ERR_DOMAIN: return "domain error";
    case DPSF_ERR_CONFIG: return "configuration error";
    case DPSF_ERR_IO: return "i/o error";
    case DPSF_ERR_NONCONVERGED: return "fit did not converge";
    case DPSF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

dpsf_status dpsf_config_new(dpsf_config** out) {
  DPSF_REQUIRE(out, "out is null");
  return guarded([&] {
    *out = new dpsf_config{};
    return DPSF_OK;
  });
}

dpsf_status dpsf_config_from_json(const char* text, dpsf_config** out) {
  DPSF_REQUIRE(text && out, "null argument");
  return guarded([&] {
    *out = new dpsf_config{dpsf::io::load_config(text)};
    return DPSF_OK;
  });
}

dpsf_status dpsf_config_load(const char* path, dpsf_config** out) {
  DPSF_REQUIRE(path && out, "null argument");
  return guarded([&] {
    *out = new dpsf_config{dpsf::io::load_config_file(path)};
    return DPSF_OK;
  });
}

void dpsf_config_free(dpsf_config* config) { delete config; }

dpsf_status dpsf_config_set_number(dpsf_config* config, const char* key, double value) {
  DPSF_REQUIRE(config && key, "null argument");
  auto& c = config->value;
  const std::string k = key;
  if (double* field = number_field(c, k)) {
    *field = value;
    if (k.rfind("dipole.", 0) == 0) c.dipole.kind = dpsf::io::DipoleKind::Ratio;
    return DPSF_OK;
  }
  if (k == "system.magnification") {
    if (!(std::isfinite(value) && value > 0.0)) return fail(DPSF_ERR_CONFIG, "system.magnification: must be positive");
    c.system.f_image_mm = value * c.system.n_image * c.system.f_mm / c.system.n;
    return DPSF_OK;
  }
  if (k == "grid.half_extent_um") {
    c.grid.half_extent_um = value;
    return DPSF_OK;
  }
  if (k == "options.pbs_filter_deg") {
    c.options.pbs_filter_deg = value;
    return DPSF_OK;
  }
  if (k == "grid.samples") {
    if (!integral(value) || std::abs(value) > 1e9) return fail(DPSF_ERR_CONFIG, "grid.samples: expected an integer");
    c.grid.samples = static_cast<int>(value);
    return DPSF_OK;
  }
  if (k == "noise.n_photons" || k == "noise.n_trials" || k == "noise.seed") {
    if (!integral(value) || value < 0.0 || value >= 18446744073709551616.0)
      return fail(DPSF_ERR_CONFIG, k + ": expected a non-negative integer");
    const auto u = static_cast<std::uint64_t>(value);
    if (k == "noise.n_photons") c.noise.n_photons = u;
    else if (k == "noise.n_trials") c.noise.n_trials = u;
    else c.noise.seed = u;
    return DPSF_OK;
  }
  return fail(DPSF_ERR_INVALID_ARGUMENT, "unknown numeric config key '" + k + "'");
}

dpsf_status dpsf_config_clear(dpsf_config* config, const char* key) {
  DPSF_REQUIRE(config && key, "null argument");
  const std::string k = key;
  auto& c = config->value;
  if (k == "grid.half_extent_um") c.grid.half_extent_um.reset();
  else if (k == "options.pbs_filter_deg") c.options.pbs_filter_deg.reset();
  else if (k == "noise.seed") c.noise.seed.reset();
  else return fail(DPSF_ERR_INVALID_ARGUMENT, "key '" + k + "' is not optional");
  return DPSF_OK;
}

dpsf_status dpsf_config_set_dipole(dpsf_config* config, const char* kind) {
  DPSF_REQUIRE(config && kind, "null argument");
  const std::string k = kind;
  auto& d = config->value.dipole;
  if (k == "ratio") d.kind = dpsf::io::DipoleKind::Ratio;
  else if (k == "axial") d.kind = dpsf::io::DipoleKind::Axial;
  else if (k == "pi") d.kind = dpsf::io::DipoleKind::Pi;
  else return fail(DPSF_ERR_INVALID_ARGUMENT, "dipole kind must be ratio, axial or pi");
  return DPSF_OK;
}

dpsf_status dpsf_config_set_apodization(dpsf_config* config, int enabled) {
  DPSF_REQUIRE(config, "config is null");
  config->value.options.apodization = enabled != 0;
  return DPSF_OK;
}

dpsf_status dpsf_config_get_number(const dpsf_config* config, const char* key, double* value) {
  DPSF_REQUIRE(config && key && value, "null argument");
  auto c = config->value;
  const std::string k = key;
  if (double* field = number_field(c, k)) {
    *value = *field;
    return DPSF_OK;
  }
  if (k == "grid.samples") *value = c.grid.samples;
  else if (k == "noise.n_photons") *value = static_cast<double>(c.noise.n_photons);
  else if (k == "noise.n_trials") *value = static_cast<double>(c.noise.n_trials);
  else if (k == "system.magnification") *value = c.system.n * c.system.f_image_mm / (c.system.n_image * c.system.f_mm);
  else if (k == "grid.half_extent_um" && c.grid.half_extent_um) *value = *c.grid.half_extent_um;
  else if (k == "options.pbs_filter_deg" && c.options.pbs_filter_deg) *value = *c.options.pbs_filter_deg;
  else if (k == "noise.seed" && c.noise.seed) *value = static_cast<double>(*c.noise.seed);
  else return fail(DPSF_ERR_INVALID_ARGUMENT, "key '" + k + "' is unknown or unset");
  return DPSF_OK;
}

dpsf_status dpsf_config_validate(const dpsf_config* config) {
  DPSF_REQUIRE(config, "config is null");
  return guarded([&] {
    dpsf::io::validate_config(config->value);
    return DPSF_OK;
  });
}

dpsf_status dpsf_config_to_json(const dpsf_config* config, char** json) {
  DPSF_REQUIRE(config && json, "null argument");
  return guarded([&] {
    const std::string s = dpsf::io::serialize(config->value);
    char* buf = new char[s.size() + 1];
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *json = buf;
    return DPSF_OK;
  });
}

void dpsf_string_free(char* s) { delete[] s; }

dpsf_status dpsf_apparent_shift(const dpsf_config* config, double eps_re, double eps_im, double* shift_m) {
  DPSF_REQUIRE(config && shift_m, "null argument");
  return guarded([&] {
    *shift_m = dpsf::optics::apparent_shift(dpsf::cdouble(eps_re, eps_im), config->value.to_system());
    return DPSF_OK;
  });
}

dpsf_status dpsf_shift_extremum(const dpsf_config* config, double* epsilon_star, double* dy_max_m) {
  DPSF_REQUIRE(config && epsilon_star && dy_max_m, "null argument");
  return guarded([&] {
    const auto e = dpsf::optics::shift_extremum(config->value.to_system());
    *epsilon_star = e.epsilon_star;
    *dy_max_m = e.dy_max;
    return DPSF_OK;
  });
}

dpsf_status dpsf_tilt_angle(const dpsf_config* config, int handedness, double* angle_rad) {
  DPSF_REQUIRE(config && angle_rad, "null argument");
  return guarded([&] {
    *angle_rad = dpsf::optics::tilt_angle(config->value.to_system(), handedness);
    return DPSF_OK;
  });
}

dpsf_status dpsf_magnification(const dpsf_config* config, double* magnification) {
  DPSF_REQUIRE(config && magnification, "null argument");
  return guarded([&] {
    *magnification = config->value.to_system().magnification();
    return DPSF_OK;
  });
}

dpsf_status dpsf_angular_momentum_split(int delta_m, double theta_rad, double* spin, double* orbital) {
  DPSF_REQUIRE(spin && orbital, "null argument");
  return guarded([&] {
    const auto s = dpsf::dipole::angular_momentum_split(delta_m, theta_rad);
    *spin = s.spin;
    *orbital = s.orbital;
    return DPSF_OK;
  });
}

dpsf_status dpsf_render(const dpsf_config* config, dpsf_raster** out) {
  DPSF_REQUIRE(config && out, "null argument");
  return guarded([&] {
    const auto& c = config->value;
    *out = new dpsf_raster{dpsf::psf::render_image(c.to_emitter(), c.to_system(), c.to_grid(), c.to_render_options())};
    return DPSF_OK;
  });
}

void dpsf_raster_free(dpsf_raster* raster) { delete raster; }

dpsf_status dpsf_raster_shape(const dpsf_raster* raster, size_t* rows, size_t* cols, double* pitch_m) {
  DPSF_REQUIRE(raster, "raster is null");
  if (rows) *rows = raster->value.rows;
  if (cols) *cols = raster->value.cols;
  if (pitch_m) *pitch_m = raster->value.pitch;
  return DPSF_OK;
}

const double* dpsf_raster_data(const dpsf_raster* raster) { return raster ? raster->value.values.data() : nullptr; }

dpsf_status dpsf_raster_centroid(const dpsf_raster* raster, double* y_m, double* z_m) {
  DPSF_REQUIRE(raster && y_m && z_m, "null argument");
  return guarded([&] {
    const auto c = dpsf::psf::centroid_of_mass(raster->value);
    *y_m = c.y;
    *z_m = c.z;
    return DPSF_OK;
  });
}

dpsf_status dpsf_run_psf(const dpsf_config* config, const char* out, int with_aperture) {
  DPSF_REQUIRE(config && out, "null argument");
  return guarded([&] { return run(dpsf::commands::run_psf(config->value, out, with_aperture != 0), false); });
}

dpsf_status dpsf_run_shift_curve(const dpsf_config* config, double eps_min, double eps_max, int steps,
                                 const char* out) {
  DPSF_REQUIRE(config && out, "null argument");
  return guarded([&] {
    return run(dpsf::commands::run_shift_curve(config->value, {eps_min, eps_max, steps}, out), false);
  });
}

dpsf_status dpsf_run_montecarlo(const dpsf_config* config, int allow_nonconverged, const char* out) {
  DPSF_REQUIRE(config && out, "null argument");
  return guarded([&] { return run(dpsf::commands::run_montecarlo(config->value, out), allow_nonconverged != 0); });
}

dpsf_status dpsf_run_precision(const dpsf_config* config, const uint64_t* n_list, size_t count, const char* out) {
  DPSF_REQUIRE(config && out && (n_list || count == 0), "null argument");
  return guarded([&] {
    dpsf::commands::PrecisionArgs args;
    if (count) args.n_list.assign(n_list, n_list + count);
    return run(dpsf::commands::run_precision(config->value, args, out), false);
  });
}

dpsf_status dpsf_run_s_surface(const dpsf_config* config, double dy_max_norm, double eps_max_norm, int steps,
                               const char* out) {
  DPSF_REQUIRE(config && out, "null argument");
  return guarded([&] {
    return run(dpsf::commands::run_s_surface(config->value, {dy_max_norm, eps_max_norm, steps}, out), false);
  });
}

dpsf_status dpsf_run_allan(const dpsf_config* config, const char* series_csv, const uint64_t* bins, size_t count,
                           const char* out) {
  DPSF_REQUIRE(config && series_csv && out && (bins || count == 0), "null argument");
  return guarded([&] {
    dpsf::commands::AllanArgs args;
    args.series = series_csv;
    if (count) args.bins.assign(bins, bins + count);
    return run(dpsf::commands::run_allan(config->value, args, out), false);
  });
}

dpsf_status dpsf_run_amsplit(const dpsf_config* config, int delta_m, const double* theta_deg, size_t count,
                             int rayleigh, const char* out) {
  DPSF_REQUIRE(config && out && (theta_deg || count == 0), "null argument");
  return guarded([&] {
    dpsf::commands::AmSplitArgs args;
    args.delta_m = delta_m;
    if (count) args.theta_deg.assign(theta_deg, theta_deg + count);
    args.rayleigh = rayleigh != 0;
    return run(dpsf::commands::run_amsplit(config->value, args, out), false);
  });
}

dpsf_status dpsf_run_fieldmap(const dpsf_config* config, dpsf_aperture_model model, const char* out) {
  DPSF_REQUIRE(config && out, "null argument");
  return guarded([&] {
    dpsf::commands::FieldmapArgs args;
    args.model = model == DPSF_APERTURE_ORTHOGRAPHIC ? dpsf::optics::ApertureModel::Orthographic
                                                     : dpsf::optics::ApertureModel::SmallAperture;
    return run(dpsf::commands::run_fieldmap(config->value, args, out), false);
  });
}

}  // extern "C"
