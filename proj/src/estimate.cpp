#include "dipole_psf/estimate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "dipole_psf/fileutil.hpp"
#include "dipole_psf/parallel.hpp"
#include "dipole_psf/rng.hpp"

namespace dpsf::estimate {

ImageRaster add_shot_noise(const ImageRaster& raster, std::uint64_t n_photons, std::uint64_t seed,
                           std::uint64_t stream) {
  const double total = raster.total();
  if (!(std::abs(total - 1.0) <= 1e-9)) throw DomainError("add_shot_noise: raster must be normalized to total 1");
  ImageRaster out = raster;
  rng::CounterRng gen(seed, stream);
  const double n = static_cast<double>(n_photons);
  for (double& v : out.values) {
    if (v < 0.0) throw DomainError("add_shot_noise: raster values must be non-negative");
    v = n_photons == 0 ? 0.0 : static_cast<double>(gen.poisson(n * v));
  }
  return out;
}

namespace {

constexpr int kMaxIterations = 200;
constexpr double kRelTol = 1e-10;

struct PixelGrid {
  std::vector<double> u;  // row offset from the raster centre, pixels
  std::vector<double> v;  // column offset
  Eigen::VectorXd data;
};

PixelGrid make_pixels(const ImageRaster& r) {
  PixelGrid g;
  const std::size_t n = r.rows * r.cols;
  g.u.resize(n);
  g.v.resize(n);
  g.data.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < r.rows; ++i)
    for (std::size_t j = 0; j < r.cols; ++j) {
      const std::size_t k = i * r.cols + j;
      g.u[k] = static_cast<double>(i) - 0.5 * (r.rows - 1.0);
      g.v[k] = static_cast<double>(j) - 0.5 * (r.cols - 1.0);
      g.data[static_cast<Eigen::Index>(k)] = r.values[k];
    }
  return g;
}

// Parameter vector p = (y0, z0, sy, sz, A, O[, theta]) in pixel units.
double residuals(const PixelGrid& g, const Eigen::VectorXd& p, Eigen::VectorXd& res, Eigen::MatrixXd* jac) {
  const bool rot = p.size() == 7;
  const double th = rot ? p[6] : 0.0;
  const double ct = std::cos(th), st = std::sin(th);
  const double sy = p[2], sz = p[3], A = p[4], O = p[5];
  const double isy2 = 1.0 / (sy * sy), isz2 = 1.0 / (sz * sz);
  double ss = 0.0;
  for (std::size_t k = 0; k < g.u.size(); ++k) {
    const double dy = g.u[k] - p[0], dz = g.v[k] - p[1];
    const double a = ct * dy + st * dz;
    const double b = -st * dy + ct * dz;
    const double e = std::exp(-0.5 * (a * a * isy2 + b * b * isz2));
    const double r = g.data[static_cast<Eigen::Index>(k)] - (O + A * e);
    res[static_cast<Eigen::Index>(k)] = r;
    ss += r * r;
    if (jac) {
      const auto row = static_cast<Eigen::Index>(k);
      const double Ae = A * e;
      (*jac)(row, 0) = Ae * (a * ct * isy2 - b * st * isz2);
      (*jac)(row, 1) = Ae * (a * st * isy2 + b * ct * isz2);
      (*jac)(row, 2) = Ae * a * a * isy2 / sy;
      (*jac)(row, 3) = Ae * b * b * isz2 / sz;
      (*jac)(row, 4) = e;
      (*jac)(row, 5) = 1.0;
      if (rot) (*jac)(row, 6) = Ae * a * b * (isz2 - isy2);
    }
  }
  return ss;
}

}  // namespace

GaussianParams moment_estimate(const ImageRaster& raster) {
  if (raster.values.empty()) throw DomainError("fit_gaussian: empty raster");
  const auto [mn, mx] = std::minmax_element(raster.values.begin(), raster.values.end());
  const double lo = *mn, hi = *mx;
  if (!(hi > lo)) throw DomainError("fit_gaussian: raster has no contrast");
  double w = 0, su = 0, sv = 0;
  for (std::size_t i = 0; i < raster.rows; ++i)
    for (std::size_t j = 0; j < raster.cols; ++j) {
      const double x = raster.at(i, j) - lo;
      w += x;
      su += x * (static_cast<double>(i) - 0.5 * (raster.rows - 1.0));
      sv += x * (static_cast<double>(j) - 0.5 * (raster.cols - 1.0));
    }
  const double mu = su / w, mv = sv / w;
  double suu = 0, svv = 0;
  for (std::size_t i = 0; i < raster.rows; ++i)
    for (std::size_t j = 0; j < raster.cols; ++j) {
      const double x = raster.at(i, j) - lo;
      const double du = static_cast<double>(i) - 0.5 * (raster.rows - 1.0) - mu;
      const double dv = static_cast<double>(j) - 0.5 * (raster.cols - 1.0) - mv;
      suu += x * du * du;
      svv += x * dv * dv;
    }
  GaussianParams p;
  p.y0 = raster.origin_y + mu * raster.pitch;
  p.z0 = raster.origin_z + mv * raster.pitch;
  p.sigma_y = std::max(0.5, std::sqrt(suu / w)) * raster.pitch;
  p.sigma_z = std::max(0.5, std::sqrt(svv / w)) * raster.pitch;
  p.amplitude = hi - lo;
  p.offset = lo;
  return p;
}

GaussianFitResult fit_gaussian(const ImageRaster& raster, FitMode mode, const std::optional<GaussianParams>& init) {
  const int np = static_cast<int>(mode);
  if (raster.values.size() < static_cast<std::size_t>(3 * np))
    throw DomainError("fit_gaussian: raster needs at least three pixels per parameter");
  if (!(raster.pitch > 0.0)) throw DomainError("fit_gaussian: raster pitch must be positive");
  for (double v : raster.values)
    if (!std::isfinite(v)) throw DomainError("fit_gaussian: raster contains non-finite values");
  if (!(raster.total() > 0.0)) throw DomainError("fit_gaussian: raster has no counts");

  const GaussianParams start = init ? *init : moment_estimate(raster);
  const double h = raster.pitch;
  Eigen::VectorXd p(np);
  p[0] = (start.y0 - raster.origin_y) / h;
  p[1] = (start.z0 - raster.origin_z) / h;
  p[2] = start.sigma_y / h;
  p[3] = start.sigma_z / h;
  p[4] = start.amplitude;
  p[5] = start.offset;
  if (np == 7) p[6] = start.theta;
  if (!(p[2] > 0.0) || !(p[3] > 0.0)) throw DomainError("fit_gaussian: initial widths must be positive");

  const PixelGrid g = make_pixels(raster);
  const auto n = static_cast<Eigen::Index>(g.u.size());
  Eigen::VectorXd res(n), trial_res(n);
  Eigen::MatrixXd J(n, np);
  double ss = residuals(g, p, res, &J);
  double lambda = 1e-3;
  bool converged = ss == 0.0;
  int iterations = 0;

  while (!converged && iterations < kMaxIterations) {
    ++iterations;
    const Eigen::MatrixXd H = J.transpose() * J;
    const Eigen::VectorXd grad = J.transpose() * res;
    const double diag_floor = 1e-12 * std::max(1e-300, H.diagonal().maxCoeff());
    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd D = H;
      for (int d = 0; d < np; ++d) D(d, d) += lambda * std::max(H(d, d), diag_floor);
      const Eigen::VectorXd step = D.ldlt().solve(grad);
      const Eigen::VectorXd cand = p + step;
      double cand_ss = std::numeric_limits<double>::infinity();
      if (step.allFinite() && cand[2] > 0.0 && cand[3] > 0.0) cand_ss = residuals(g, cand, trial_res, nullptr);
      if (cand_ss < ss) {
        const double rel = (ss - cand_ss) / ss;
        p = cand;
        ss = residuals(g, p, res, &J);
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (rel < kRelTol || ss == 0.0) converged = true;
      } else {
        lambda *= 10.0;
        // No damping yields a decrease: the residual is at its floor.
        if (lambda > 1e30) {
          converged = true;
          break;
        }
      }
    }
  }

  GaussianFitResult out;
  out.y0 = raster.origin_y + p[0] * h;
  out.z0 = raster.origin_z + p[1] * h;
  out.sigma_y = p[2] * h;
  out.sigma_z = p[3] * h;
  out.amplitude = p[4];
  out.offset = p[5];
  if (np == 7) out.theta_rot = p[6];
  out.residual_ss = ss;
  out.converged = converged;
  out.iterations = iterations;
  return out;
}

McDisplacementResult mc_displacement(const dipole::Emitter& a, const dipole::Emitter& b, const OpticalSystem& system,
                                     const psf::GridSpec& grid, std::uint64_t n_photons, std::uint64_t n_trials,
                                     std::uint64_t seed, const McOptions& options) {
  if (n_trials < 2) throw DomainError("mc_displacement: at least two trials are required");
  if (n_photons == 0) throw DomainError("mc_displacement: photon number must be positive");
  const psf::FieldBasis basis(system, grid, options.render);
  const ImageRaster img_a = basis.intensity(dipole::dipole_moment(a));
  const ImageRaster img_b = basis.intensity(dipole::dipole_moment(b));
  const double M = system.magnification();

  std::vector<TrialRecord> trials(n_trials);
  parallel_for(n_trials, [&](std::size_t t) {
    const ImageRaster na = add_shot_noise(img_a, n_photons, seed, 2 * t);
    const ImageRaster nb = add_shot_noise(img_b, n_photons, seed, 2 * t + 1);
    TrialRecord rec{t, 0.0, 0.0, false, false};
    try {
      const auto fa = fit_gaussian(na, options.mode);
      const auto fb = fit_gaussian(nb, options.mode);
      rec.converged_a = fa.converged;
      rec.converged_b = fb.converged;
      rec.dy = (fa.y0 - fb.y0) / M;
      rec.dz = (fa.z0 - fb.z0) / M;
    } catch (const DomainError&) {
      // A degenerate noisy image counts as a failed fit.
    }
    trials[t] = rec;
  });

  McDisplacementResult out;
  out.trials = std::move(trials);
  out.stats.n_trials = n_trials;
  out.stats.seed = seed;
  double sy = 0, sz = 0;
  std::uint64_t used = 0;
  for (const auto& r : out.trials) {
    if (!(r.converged_a && r.converged_b)) continue;
    sy += r.dy;
    sz += r.dz;
    ++used;
  }
  out.stats.n_excluded = n_trials - used;
  if (used == 0) return out;
  out.stats.mean_dy = sy / used;
  out.stats.mean_dz = sz / used;
  if (used > 1) {
    double vy = 0, vz = 0;
    for (const auto& r : out.trials) {
      if (!(r.converged_a && r.converged_b)) continue;
      vy += (r.dy - out.stats.mean_dy) * (r.dy - out.stats.mean_dy);
      vz += (r.dz - out.stats.mean_dz) * (r.dz - out.stats.mean_dz);
    }
    out.stats.std_dy = std::sqrt(vy / (used - 1));
    out.stats.std_dz = std::sqrt(vz / (used - 1));
  }
  return out;
}

void write_trials_csv(const std::vector<TrialRecord>& trials, const std::filesystem::path& path) {
  std::string out = "trial_index,dy_m,dz_m,converged_a,converged_b\n";
  for (const auto& t : trials) {
    out += std::to_string(t.trial_index) + ',' + io::format_double(t.dy) + ',' + io::format_double(t.dz) + ',' +
           (t.converged_a ? "1" : "0") + ',' + (t.converged_b ? "1" : "0") + '\n';
  }
  io::write_file_atomic(path, out);
}

}  // namespace dpsf::estimate
