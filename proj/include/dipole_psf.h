#ifndef DIPOLE_PSF_H
#define DIPOLE_PSF_H

#include <stddef.h>
#include <stdint.h>

#if defined(DPSF_BUILDING_LIBRARY)
#define DPSF_API __attribute__((visibility("default")))
#else
#define DPSF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status. On failure, dpsf_last_error() describes
   the problem until the next failing call on the same thread. */
typedef enum dpsf_status {
  DPSF_OK = 0,
  DPSF_ERR_INVALID_ARGUMENT = 1,
  DPSF_ERR_DOMAIN = 2,
  DPSF_ERR_CONFIG = 3,
  DPSF_ERR_IO = 4,
  DPSF_ERR_NONCONVERGED = 5,
  DPSF_ERR_INTERNAL = 6
} dpsf_status;

typedef struct dpsf_config dpsf_config;
typedef struct dpsf_raster dpsf_raster;

typedef enum dpsf_aperture_model { DPSF_APERTURE_SMALL = 0, DPSF_APERTURE_ORTHOGRAPHIC = 1 } dpsf_aperture_model;

DPSF_API const char* dpsf_version(void);
DPSF_API const char* dpsf_last_error(void);
DPSF_API const char* dpsf_status_name(dpsf_status status);

/* ---- configuration ---- */

DPSF_API dpsf_status dpsf_config_new(dpsf_config** out);
DPSF_API dpsf_status dpsf_config_from_json(const char* text, dpsf_config** out);
DPSF_API dpsf_status dpsf_config_load(const char* path, dpsf_config** out);
DPSF_API void dpsf_config_free(dpsf_config* config);

/* Sets a numeric field by dotted path, e.g. "system.na", "grid.samples", "noise.seed".
   "system.magnification" rewrites system.f_image_mm from the current f_mm, n and n_image.
   Values are checked by dpsf_config_validate, not here. */
DPSF_API dpsf_status dpsf_config_set_number(dpsf_config* config, const char* key, double value);
/* Clears an optional field: "grid.half_extent_um", "options.pbs_filter_deg" or "noise.seed". */
DPSF_API dpsf_status dpsf_config_clear(dpsf_config* config, const char* key);
/* kind is "ratio", "axial" or "pi". */
DPSF_API dpsf_status dpsf_config_set_dipole(dpsf_config* config, const char* kind);
DPSF_API dpsf_status dpsf_config_set_apodization(dpsf_config* config, int enabled);
DPSF_API dpsf_status dpsf_config_get_number(const dpsf_config* config, const char* key, double* value);
DPSF_API dpsf_status dpsf_config_validate(const dpsf_config* config);
/* The caller releases *json with dpsf_string_free. */
DPSF_API dpsf_status dpsf_config_to_json(const dpsf_config* config, char** json);
DPSF_API void dpsf_string_free(char* s);

/* ---- analytic results (SI units, object plane) ---- */

DPSF_API dpsf_status dpsf_apparent_shift(const dpsf_config* config, double eps_re, double eps_im, double* shift_m);
DPSF_API dpsf_status dpsf_shift_extremum(const dpsf_config* config, double* epsilon_star, double* dy_max_m);
DPSF_API dpsf_status dpsf_tilt_angle(const dpsf_config* config, int handedness, double* angle_rad);
DPSF_API dpsf_status dpsf_magnification(const dpsf_config* config, double* magnification);
DPSF_API dpsf_status dpsf_angular_momentum_split(int delta_m, double theta_rad, double* spin, double* orbital);

/* ---- rendering ---- */

/* Unit-total image of the configured emitter. */
DPSF_API dpsf_status dpsf_render(const dpsf_config* config, dpsf_raster** out);
DPSF_API void dpsf_raster_free(dpsf_raster* raster);
DPSF_API dpsf_status dpsf_raster_shape(const dpsf_raster* raster, size_t* rows, size_t* cols, double* pitch_m);
/* Row-major values; valid until the raster is freed. */
DPSF_API const double* dpsf_raster_data(const dpsf_raster* raster);
DPSF_API dpsf_status dpsf_raster_centroid(const dpsf_raster* raster, double* y_m, double* z_m);

/* ---- commands; each writes <out_stem>.json plus its data files ---- */

DPSF_API dpsf_status dpsf_run_psf(const dpsf_config* config, const char* out, int with_aperture);
DPSF_API dpsf_status dpsf_run_shift_curve(const dpsf_config* config, double eps_min, double eps_max, int steps,
                                          const char* out);
/* Returns DPSF_ERR_NONCONVERGED after writing all outputs when some fits did not
   converge, unless allow_nonconverged is nonzero. */
DPSF_API dpsf_status dpsf_run_montecarlo(const dpsf_config* config, int allow_nonconverged, const char* out);
DPSF_API dpsf_status dpsf_run_precision(const dpsf_config* config, const uint64_t* n_list, size_t count,
                                        const char* out);
DPSF_API dpsf_status dpsf_run_s_surface(const dpsf_config* config, double dy_max_norm, double eps_max_norm, int steps,
                                        const char* out);
/* bins may be NULL with count 0 for powers of two. */
DPSF_API dpsf_status dpsf_run_allan(const dpsf_config* config, const char* series_csv, const uint64_t* bins,
                                    size_t count, const char* out);
/* theta_deg may be NULL with count 0 for 0..180 degrees in 5 degree steps. */
DPSF_API dpsf_status dpsf_run_amsplit(const dpsf_config* config, int delta_m, const double* theta_deg, size_t count,
                                      int rayleigh, const char* out);
DPSF_API dpsf_status dpsf_run_fieldmap(const dpsf_config* config, dpsf_aperture_model model, const char* out);

#ifdef __cplusplus
}
#endif

#endif
