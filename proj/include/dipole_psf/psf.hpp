#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "dipole_psf/dipole.hpp"
#include "dipole_psf/optical_system.hpp"
#include "dipole_psf/specfun.hpp"

namespace dpsf::psf {

/// Square image-plane sampling grid centred on the optical axis.
struct GridSpec {
  double half_extent = 0.0;  // m, image plane
  int samples = 129;         // odd

  static GridSpec make(double half_extent, int samples);
  /// half_extent = 6 lambda_eff M / (2 NA_g).
  static GridSpec default_for(const OpticalSystem& system, int samples = 129);

  void validate() const;
  double pitch() const { return 2.0 * half_extent / samples; }
  /// Centre of pixel i along either axis.
  double coordinate(int i) const { return (i - (samples - 1) / 2) * pitch(); }
  bool operator==(const GridSpec&) const = default;
};

/// Row-major image. Rows follow y (vertical), columns follow z (horizontal).
struct ImageRaster {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double pitch = 0.0;
  double origin_y = 0.0;  // y of the central pixel
  double origin_z = 0.0;  // z of the central pixel
  std::vector<double> values;

  static ImageRaster zeros(std::size_t rows, std::size_t cols, double pitch);
  static ImageRaster zeros(const GridSpec& grid);

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double y_at(std::size_t r) const { return origin_y + (static_cast<double>(r) - 0.5 * (rows - 1.0)) * pitch; }
  double z_at(std::size_t c) const { return origin_z + (static_cast<double>(c) - 0.5 * (cols - 1.0)) * pitch; }
  double total() const;
  bool same_geometry(const ImageRaster& other) const;
  bool operator==(const ImageRaster&) const = default;
};

struct GreensIntegrals {
  double i0;
  double i1;
  double i2;
};

/// Apodized diffraction integrals at image radius rho (image plane).
GreensIntegrals greens_integrals(const OpticalSystem& system, double rho,
                                 const specfun::QuadratureRule& rule = specfun::default_rule());

/// In-focus vectorial image field from the Green's-function integrals, components (x, y, z)
/// with x = 0. phi is the image azimuth measured from y towards z.
Vec3c image_field_greens(const Vec3c& mu, const OpticalSystem& system, double rho, double phi,
                         const specfun::QuadratureRule& rule = specfun::default_rule());

/// Small-aperture closed form of the image field. Intended for NA_g up to about 0.3.
Vec3c image_field_smallna(const Vec3c& mu, const OpticalSystem& system, double rho, double phi);

struct RenderOptions {
  double defocus = 0.0;                 // m, object side
  std::optional<double> pbs_axis;       // rad in the (y, z) plane; 0 transmits y
  bool apodization = true;
  double offset_y = 0.0;                // emitter displacement, object plane
  double offset_z = 0.0;
  int theta_order = specfun::kDefaultQuadratureOrder;
  int psi_nodes = 256;
};

/// Image fields of the three unit dipoles e_x, e_y, e_z on a grid. Any emitter's
/// field is a linear combination of these.
class FieldBasis {
 public:
  FieldBasis(const OpticalSystem& system, const GridSpec& grid, const RenderOptions& options = {});

  /// Image field (y, z components) of moment mu at pixel (row, col).
  Vec2c field(const Vec3c& mu, std::size_t row, std::size_t col) const;
  /// Intensity |E_y|^2 + |E_z|^2, optionally normalized to unit total.
  ImageRaster intensity(const Vec3c& mu, bool normalize = true) const;

  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  std::size_t n_ = 0;
  // Six planes, (dipole component, image component) in order (x,y) (x,z) (y,y) (y,z) (z,y) (z,z).
  std::vector<cdouble> planes_;
};

/// Full vectorial image of an emitter, normalized to unit total.
/// Throws ConfigError when the grid cannot resolve the PSF or options are out of range.
ImageRaster render_image(const dipole::Emitter& emitter, const OpticalSystem& system, const GridSpec& grid,
                         const RenderOptions& options = {});

/// Small-aperture image averaged over supersample x supersample points per pixel,
/// for an emitter displaced by (offset_y, offset_z) in the object plane. Unit total.
ImageRaster render_image_smallna(const dipole::Emitter& emitter, const OpticalSystem& system,
                                 const GridSpec& grid, double offset_y = 0.0, double offset_z = 0.0,
                                 int supersample = 1);

struct Centroid {
  double y;
  double z;
};

Centroid centroid_of_mass(const ImageRaster& raster);

void write_raster_csv(const ImageRaster& raster, const std::filesystem::path& path);
ImageRaster read_raster_csv(const std::filesystem::path& path);
/// Raw little-endian float64 data plus a JSON sidecar with the geometry.
void write_raster_raw(const ImageRaster& raster, const std::filesystem::path& raw_path,
                      const std::filesystem::path& sidecar_path);
ImageRaster read_raster_raw(const std::filesystem::path& raw_path, const std::filesystem::path& sidecar_path);

}  // namespace dpsf::psf
