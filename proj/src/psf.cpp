#include "dipole_psf/psf.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "dipole_psf/optics.hpp"
#include "dipole_psf/parallel.hpp"

namespace dpsf::psf {

GridSpec GridSpec::make(double half_extent, int samples) {
  GridSpec g{half_extent, samples};
  g.validate();
  return g;
}

GridSpec GridSpec::default_for(const OpticalSystem& system, int samples) {
  if (system.na_g() <= 0.0) throw ConfigError("default grid needs a positive numerical aperture");
  return make(6.0 * system.lambda_eff() * system.magnification() / (2.0 * system.na_g()), samples);
}

void GridSpec::validate() const {
  if (!std::isfinite(half_extent) || half_extent <= 0.0) throw ConfigError("grid half_extent must be positive");
  if (samples < 1 || samples % 2 == 0) throw ConfigError("grid samples must be a positive odd integer");
}

ImageRaster ImageRaster::zeros(std::size_t rows, std::size_t cols, double pitch) {
  ImageRaster r;
  r.rows = rows;
  r.cols = cols;
  r.pitch = pitch;
  r.values.assign(rows * cols, 0.0);
  return r;
}

ImageRaster ImageRaster::zeros(const GridSpec& grid) {
  return zeros(static_cast<std::size_t>(grid.samples), static_cast<std::size_t>(grid.samples), grid.pitch());
}

double ImageRaster::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

bool ImageRaster::same_geometry(const ImageRaster& o) const {
  return rows == o.rows && cols == o.cols && pitch == o.pitch && origin_y == o.origin_y && origin_z == o.origin_z;
}

GreensIntegrals greens_integrals(const OpticalSystem& system, double rho, const specfun::QuadratureRule& rule) {
  if (!(rho >= 0.0)) throw DomainError("greens_integrals: rho must be non-negative");
  const double kappa = system.k() / system.magnification();
  const double tm = system.theta_max();
  GreensIntegrals g{0.0, 0.0, 0.0};
  auto x = rule.nodes();
  auto w = rule.weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = 0.5 * tm * (1.0 + x[i]);
    const double c = std::cos(t), s = std::sin(t);
    const double arg = kappa * rho * s;
    const double base = 0.5 * tm * w[i] * std::sqrt(c) * s;
    g.i0 += base * (1.0 + c) * specfun::bessel_j(0, arg);
    g.i1 += base * s * specfun::bessel_j(1, arg);
    g.i2 += base * (1.0 - c) * specfun::bessel_j(2, arg);
  }
  return g;
}

Vec3c image_field_greens(const Vec3c& mu, const OpticalSystem& system, double rho, double phi,
                         const specfun::QuadratureRule& rule) {
  const GreensIntegrals g = greens_integrals(system, rho, rule);
  const cdouble i(0.0, 1.0);
  const double c1 = std::cos(phi), s1 = std::sin(phi);
  const double c2 = std::cos(2 * phi), s2 = std::sin(2 * phi);
  const cdouble ey = -kPi * (2.0 * i * mu[0] * g.i1 * c1 + mu[1] * (g.i0 + g.i2 * c2) + mu[2] * g.i2 * s2);
  const cdouble ez = -kPi * (2.0 * i * mu[0] * g.i1 * s1 + mu[1] * g.i2 * s2 + mu[2] * (g.i0 - g.i2 * c2));
  return {0.0, ey, ez};
}

Vec3c image_field_smallna(const Vec3c& mu, const OpticalSystem& system, double rho, double phi) {
  const double na = system.na_g();
  const double scale = system.k() * na / system.magnification();
  const double x = scale * rho;
  const double j1x = x < 1e-8 ? 0.5 : specfun::bessel_j(1, x) / x;
  const double j2x = x < 1e-8 ? x / 8.0 : specfun::bessel_j(2, x) / x;
  const cdouble axial = cdouble(0.0, 1.0) * mu[0] * na * na * scale * j2x;
  const double transverse = na * scale * j1x;
  return {0.0, axial * std::cos(phi) + mu[1] * transverse, axial * std::sin(phi) + mu[2] * transverse};
}

namespace {

void validate_render(const OpticalSystem& system, const GridSpec& grid, const RenderOptions& options) {
  system.validate();
  grid.validate();
  if (system.na_g() <= 0.0) throw ConfigError("rendering needs a positive numerical aperture");
  const double max_pitch = system.lambda_eff() * system.magnification() / (8.0 * system.na_g());
  if (grid.pitch() > max_pitch)
    throw ConfigError("grid too coarse: pitch " + std::to_string(grid.pitch()) + " m exceeds " +
                      std::to_string(max_pitch) + " m");
  if (!std::isfinite(options.defocus) || std::abs(options.defocus) > 20.0 * system.lambda_eff())
    throw ConfigError("defocus must lie within 20 effective wavelengths of focus");
  if (options.pbs_axis && !std::isfinite(*options.pbs_axis)) throw ConfigError("PBS axis must be finite");
  if (!std::isfinite(options.offset_y) || !std::isfinite(options.offset_z))
    throw ConfigError("emitter offset must be finite");
  if (options.theta_order < 8) throw ConfigError("theta quadrature order must be at least 8");
  if (options.psi_nodes < 256) throw ConfigError("azimuthal quadrature needs at least 256 nodes");
}

constexpr std::size_t kRowChunk = 8;

}  // namespace

FieldBasis::FieldBasis(const OpticalSystem& system, const GridSpec& grid, const RenderOptions& options)
    : grid_(grid), n_(static_cast<std::size_t>(grid.samples)) {
  validate_render(system, grid, options);
  using Eigen::Index;
  using Mat = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic>;

  const std::size_t n = n_;
  const int L = options.psi_nodes;
  const auto rule = specfun::QuadratureRule::gauss_legendre(options.theta_order);
  const double tm = system.theta_max();
  const double k = system.k();
  const double kappa = k / system.magnification();
  const cdouble i(0.0, 1.0);

  std::vector<double> coord(n);
  for (std::size_t a = 0; a < n; ++a) coord[a] = grid.coordinate(static_cast<int>(a));
  std::vector<double> cpsi(L), spsi(L);
  for (int l = 0; l < L; ++l) {
    cpsi[l] = std::cos(2.0 * kPi * l / L);
    spsi[l] = std::sin(2.0 * kPi * l / L);
  }

  const std::size_t chunks = (n + kRowChunk - 1) / kRowChunk;
  std::vector<Mat> acc(chunks);
  for (std::size_t ch = 0; ch < chunks; ++ch)
    acc[ch] = Mat::Zero(static_cast<Index>(std::min(kRowChunk, n - ch * kRowChunk)), static_cast<Index>(6 * n));

  // For each theta node, B (L x 6n) holds the pupil field of every basis dipole and image
  // component times the column phase; each row chunk then accumulates A * B in node order.
  Mat B(L, static_cast<Index>(6 * n));
  for (int j = 0; j < rule.order(); ++j) {
    const double theta = 0.5 * tm * (1.0 + rule.nodes()[j]);
    const double c = std::cos(theta), s = std::sin(theta);
    double weight = 0.5 * tm * rule.weights()[j] * (2.0 * kPi / L) * s;
    if (options.apodization) weight *= std::sqrt(c);
    const cdouble focus = std::exp(i * (k * options.defocus * c));
    const double row_rate = kappa * s;

    for (int l = 0; l < L; ++l) {
      const double psi = 2.0 * kPi * l / L;
      const cdouble shift = std::exp(-i * (k * s * (options.offset_y * cpsi[l] + options.offset_z * spsi[l])));
      const cdouble common = weight * focus * shift;
      cdouble p[6];
      for (int d = 0; d < 3; ++d) {
        Vec3c mu{0.0, 0.0, 0.0};
        mu[d] = 1.0;
        Vec2c f = optics::pupil_field(mu, theta, psi);
        if (options.pbs_axis) {
          const double u0 = std::cos(*options.pbs_axis), u1 = std::sin(*options.pbs_axis);
          const cdouble along = f[0] * u0 + f[1] * u1;
          f = {along * u0, along * u1};
        }
        p[2 * d] = f[0] * common;
        p[2 * d + 1] = f[1] * common;
      }
      for (std::size_t cc = 0; cc < n; ++cc) {
        const cdouble col = std::exp(-i * (row_rate * coord[cc] * spsi[l]));
        for (int q = 0; q < 6; ++q) B(l, static_cast<Index>(q * n + cc)) = p[q] * col;
      }
    }

    parallel_for(chunks, [&](std::size_t ch) {
      const std::size_t r0 = ch * kRowChunk;
      const Index nr = acc[ch].rows();
      Mat A(nr, L);
      for (Index r = 0; r < nr; ++r) {
        const double y = coord[r0 + static_cast<std::size_t>(r)];
        for (int l = 0; l < L; ++l) A(r, l) = std::exp(-i * (row_rate * y * cpsi[l]));
      }
      acc[ch].noalias() += A * B;
    });
  }

  planes_.assign(6 * n * n, 0.0);
  for (std::size_t ch = 0; ch < chunks; ++ch)
    for (Index r = 0; r < acc[ch].rows(); ++r)
      for (int q = 0; q < 6; ++q)
        for (std::size_t cc = 0; cc < n; ++cc)
          planes_[(q * n + ch * kRowChunk + static_cast<std::size_t>(r)) * n + cc] =
              acc[ch](r, static_cast<Index>(q * n + cc));
}

Vec2c FieldBasis::field(const Vec3c& mu, std::size_t row, std::size_t col) const {
  const std::size_t idx = row * n_ + col;
  const std::size_t plane = n_ * n_;
  Vec2c e{0.0, 0.0};
  for (int d = 0; d < 3; ++d) {
    e[0] += mu[d] * planes_[(2 * d) * plane + idx];
    e[1] += mu[d] * planes_[(2 * d + 1) * plane + idx];
  }
  return e;
}

ImageRaster FieldBasis::intensity(const Vec3c& mu, bool normalize) const {
  ImageRaster out = ImageRaster::zeros(grid_);
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t c = 0; c < n_; ++c) {
      const Vec2c e = field(mu, r, c);
      out.at(r, c) = std::norm(e[0]) + std::norm(e[1]);
    }
  if (normalize) {
    const double t = out.total();
    if (!(t > 0.0)) throw DomainError("rendered image has no intensity");
    for (double& v : out.values) v /= t;
  }
  return out;
}

ImageRaster render_image(const dipole::Emitter& emitter, const OpticalSystem& system, const GridSpec& grid,
                         const RenderOptions& options) {
  return FieldBasis(system, grid, options).intensity(dipole::dipole_moment(emitter));
}

ImageRaster render_image_smallna(const dipole::Emitter& emitter, const OpticalSystem& system,
                                 const GridSpec& grid, double offset_y, double offset_z, int supersample) {
  system.validate();
  grid.validate();
  if (system.na_g() <= 0.0) throw ConfigError("rendering needs a positive numerical aperture");
  if (supersample < 1) throw ConfigError("supersample must be at least 1");
  const Vec3c mu = dipole::dipole_moment(emitter);
  const double M = system.magnification();
  const double pitch = grid.pitch();
  ImageRaster out = ImageRaster::zeros(grid);
  const std::size_t n = out.rows;
  parallel_for(n, [&](std::size_t r) {
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int a = 0; a < supersample; ++a) {
        const double y = grid.coordinate(static_cast<int>(r)) + ((a + 0.5) / supersample - 0.5) * pitch + M * offset_y;
        for (int b = 0; b < supersample; ++b) {
          const double z =
              grid.coordinate(static_cast<int>(c)) + ((b + 0.5) / supersample - 0.5) * pitch + M * offset_z;
          const Vec3c e = image_field_smallna(mu, system, std::hypot(y, z), std::atan2(z, y));
          acc += std::norm(e[1]) + std::norm(e[2]);
        }
      }
      out.at(r, c) = acc;
    }
  });
  const double t = out.total();
  if (!(t > 0.0)) throw DomainError("rendered image has no intensity");
  for (double& v : out.values) v /= t;
  return out;
}

Centroid centroid_of_mass(const ImageRaster& raster) {
  double sum = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t r = 0; r < raster.rows; ++r)
    for (std::size_t c = 0; c < raster.cols; ++c) {
      const double v = raster.at(r, c);
      sum += v;
      sy += v * (static_cast<double>(r) - 0.5 * (raster.rows - 1.0));
      sz += v * (static_cast<double>(c) - 0.5 * (raster.cols - 1.0));
    }
  if (!(sum > 0.0) || !std::isfinite(sum)) throw DomainError("centroid_of_mass: raster has no positive intensity");
  return {raster.origin_y + raster.pitch * sy / sum, raster.origin_z + raster.pitch * sz / sum};
}

}  // namespace dpsf::psf
