#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "dipole_psf.h"

namespace {

struct Overrides {
  std::string config_path;
  std::string out;
  std::optional<double> seed, na, eps_re, eps_im, lambda_nm, n, n_image, magnification;
  std::optional<double> grid_samples, grid_extent_um, photons, trials, defocus_nm, pbs_deg;
  std::string dipole_kind;
  bool no_apodization = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output stem; .json and .csv extensions are stripped")->required();
  cmd->add_option("--seed", o.seed, "random seed (required for montecarlo unless set in the config)");
  cmd->add_option("--na", o.na, "numerical aperture n sin(theta_m)");
  cmd->add_option("--epsilon-re", o.eps_re, "real part of the polarization ratio");
  cmd->add_option("--epsilon-im", o.eps_im, "imaginary part of the polarization ratio");
  cmd->add_option("--dipole", o.dipole_kind, "ratio, axial or pi")->check(CLI::IsMember({"ratio", "axial", "pi"}));
  cmd->add_option("--lambda-nm", o.lambda_nm, "vacuum wavelength in nm");
  cmd->add_option("--n", o.n, "object-side refractive index");
  cmd->add_option("--n-image", o.n_image, "image-side refractive index");
  cmd->add_option("--magnification", o.magnification, "lateral magnification (sets the tube-lens focal length)");
  cmd->add_option("--grid-samples", o.grid_samples, "odd number of pixels per side");
  cmd->add_option("--grid-extent-um", o.grid_extent_um, "image-plane half extent in um");
  cmd->add_option("--photons", o.photons, "photons per image");
  cmd->add_option("--trials", o.trials, "Monte Carlo trials");
  cmd->add_option("--defocus-nm", o.defocus_nm, "emitter defocus in nm");
  cmd->add_option("--pbs-deg", o.pbs_deg, "transmission axis of a polarizing filter, degrees from y");
  cmd->add_flag("--no-apodization", o.no_apodization, "disable the sqrt(cos theta) aperture factor");
}

int report(dpsf_status s) {
  if (s != DPSF_OK) std::fprintf(stderr, "error (%s): %s\n", dpsf_status_name(s), dpsf_last_error());
  return static_cast<int>(s);
}

// Builds the effective configuration: file (or defaults), then flag overrides.
dpsf_status build_config(const Overrides& o, dpsf_config** cfg) {
  dpsf_status s = o.config_path.empty() ? dpsf_config_new(cfg) : dpsf_config_load(o.config_path.c_str(), cfg);
  if (s != DPSF_OK) return s;
  const std::pair<const char*, const std::optional<double>*> numeric[] = {
      {"system.lambda_vac_nm", &o.lambda_nm}, {"system.n", &o.n},
      {"system.n_image", &o.n_image},         {"system.na", &o.na},
      {"dipole.epsilon_re", &o.eps_re},       {"dipole.epsilon_im", &o.eps_im},
      {"grid.samples", &o.grid_samples},      {"grid.half_extent_um", &o.grid_extent_um},
      {"noise.n_photons", &o.photons},        {"noise.n_trials", &o.trials},
      {"noise.seed", &o.seed},                {"options.defocus_nm", &o.defocus_nm},
      {"options.pbs_filter_deg", &o.pbs_deg}, {"system.magnification", &o.magnification},
  };
  for (const auto& [key, value] : numeric) {
    if (!*value) continue;
    if ((s = dpsf_config_set_number(*cfg, key, **value)) != DPSF_OK) return s;
  }
  if (!o.dipole_kind.empty() && (s = dpsf_config_set_dipole(*cfg, o.dipole_kind.c_str())) != DPSF_OK) return s;
  if (o.no_apodization && (s = dpsf_config_set_apodization(*cfg, 0)) != DPSF_OK) return s;
  return dpsf_config_validate(*cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Images of rotating and linear dipoles through a two-lens system"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dpsf_version());

  Overrides o;

  auto* psf = app.add_subcommand("psf", "render the image raster");
  bool aperture = false;
  add_common(psf, o);
  psf->add_flag("--aperture", aperture, "also write aperture field maps in linear and circular bases");

  auto* curve = app.add_subcommand("shift-curve", "apparent shift versus epsilon");
  double eps_min = -6.0, eps_max = 6.0;
  int steps = 121;
  add_common(curve, o);
  curve->add_option("--eps-min", eps_min, "smallest epsilon")->capture_default_str();
  curve->add_option("--eps-max", eps_max, "largest epsilon")->capture_default_str();
  curve->add_option("--steps", steps, "number of epsilon values")->capture_default_str();

  auto* mc = app.add_subcommand("montecarlo", "displacement between the emitter and its mirror image under shot noise");
  bool allow_nonconverged = false;
  add_common(mc, o);
  mc->add_flag("--allow-nonconverged", allow_nonconverged, "exit 0 even if some fits did not converge");

  auto* prec = app.add_subcommand("precision", "precision limits for linear and elliptical dipoles");
  std::vector<std::uint64_t> n_list;
  add_common(prec, o);
  prec->add_option("--n-list", n_list, "photon numbers (default 1e3 1e4 1e5 1e6)");

  auto* surf = app.add_subcommand("s-surface", "S metric over displacement and polarization");
  double dy_max = 1.0, eps_norm_max = 1.0;
  int surf_steps = 41;
  add_common(surf, o);
  surf->add_option("--dy-max", dy_max, "half range of delta_y in normalized units")->capture_default_str();
  surf->add_option("--eps-max", eps_norm_max, "half range of epsilon * NA_g")->capture_default_str();
  surf->add_option("--steps", surf_steps, "samples per axis")->capture_default_str();

  auto* allan = app.add_subcommand("allan", "Allan deviation of a centroid series");
  std::string series;
  std::vector<std::uint64_t> bins;
  add_common(allan, o);
  allan->add_option("--series", series, "CSV with columns y,z or t,y,z")->required()->check(CLI::ExistingFile);
  allan->add_option("--bins", bins, "bin sizes (default powers of two)");

  auto* am = app.add_subcommand("amsplit", "spin and orbital angular momentum shares versus polar angle");
  int delta_m = 1;
  std::vector<double> theta_deg;
  bool rayleigh = false;
  add_common(am, o);
  am->add_option("--delta-m", delta_m, "magnetic quantum number change")->capture_default_str();
  am->add_option("--theta-deg", theta_deg, "polar angles in degrees (default 0 to 180 in 5 degree steps)");
  am->add_flag("--rayleigh", rayleigh, "add the Rayleigh-scattering spin column");

  auto* fm = app.add_subcommand("fieldmap", "aperture field maps in linear and circular bases");
  std::string model = "small";
  add_common(fm, o);
  fm->add_option("--aperture-model", model, "small or orthographic")
      ->check(CLI::IsMember({"small", "orthographic"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  dpsf_config* cfg = nullptr;
  dpsf_status s = build_config(o, &cfg);
  if (s != DPSF_OK) {
    dpsf_config_free(cfg);
    return report(s);
  }
  const char* out = o.out.c_str();
  if (psf->parsed()) {
    s = dpsf_run_psf(cfg, out, aperture);
  } else if (curve->parsed()) {
    s = dpsf_run_shift_curve(cfg, eps_min, eps_max, steps, out);
  } else if (mc->parsed()) {
    s = dpsf_run_montecarlo(cfg, allow_nonconverged, out);
  } else if (prec->parsed()) {
    s = dpsf_run_precision(cfg, n_list.data(), n_list.size(), out);
  } else if (surf->parsed()) {
    s = dpsf_run_s_surface(cfg, dy_max, eps_norm_max, surf_steps, out);
  } else if (allan->parsed()) {
    s = dpsf_run_allan(cfg, series.c_str(), bins.data(), bins.size(), out);
  } else if (am->parsed()) {
    s = dpsf_run_amsplit(cfg, delta_m, theta_deg.data(), theta_deg.size(), rayleigh, out);
  } else if (fm->parsed()) {
    s = dpsf_run_fieldmap(cfg, model == "orthographic" ? DPSF_APERTURE_ORTHOGRAPHIC : DPSF_APERTURE_SMALL, out);
  }
  dpsf_config_free(cfg);
  return report(s);
}
