#include "dipole_psf/precision.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "dipole_psf/estimate.hpp"
#include "dipole_psf/fileutil.hpp"
#include "dipole_psf/parallel.hpp"

namespace dpsf::precision {
namespace {

constexpr double kHalfExtentNorm = 36.0;
constexpr double kBracketLo = 1e-4;
constexpr double kBracketHi = 10.0;
constexpr int kScanPoints = 41;

ImageRaster image_for(const OpticalSystem& system, const GridSpec& grid, double delta_y, double epsilon) {
  return psf::render_image_smallna(dipole::polarization_from_ratio(cdouble(epsilon)), system, grid, delta_y, 0.0,
                                   kPixelSupersample);
}

GridSpec grid_for_ratio(const OpticalSystem& system, double ratio) {
  const double pitch = ratio * normalized_length(system) * system.magnification();
  const int half = static_cast<int>(std::ceil(kHalfExtentNorm / ratio));
  const int samples = 2 * half + 1;
  return GridSpec::make(0.5 * samples * pitch, samples);
}

double bisect_root(const std::function<double(double)>& s, double target, const std::string& label) {
  std::vector<double> xs(kScanPoints), ss(kScanPoints);
  std::size_t hit = xs.size();
  for (int i = 0; i < kScanPoints; ++i) {
    xs[i] = kBracketLo * std::pow(kBracketHi / kBracketLo, static_cast<double>(i) / (kScanPoints - 1));
    ss[i] = s(xs[i]);
    if (ss[i] >= target) {
      hit = static_cast<std::size_t>(i);
      break;
    }
  }
  if (hit == xs.size())
    throw DomainError("precision_limit: no root of the " + label + " cut in [1e-4, 10] normalized units; S(10) = " +
                      std::to_string(ss.back()) + " < 1/N = " + std::to_string(target));
  if (hit == 0)
    throw DomainError("precision_limit: the " + label + " cut already exceeds 1/N at the lower bracket end");
  for (std::size_t i = 1; i <= hit; ++i)
    if (!(ss[i] > ss[i - 1]))
      throw DomainError("precision_limit: the " + label + " cut is not increasing near x = " + std::to_string(xs[i]));
  double lo = xs[hit - 1], hi = xs[hit];
  while ((hi - lo) > 1e-6 * lo) {
    const double mid = 0.5 * (lo + hi);
    if (s(mid) >= target) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double normalized_length(const OpticalSystem& system) {
  if (!(system.na_g() > 0.0)) throw DomainError("normalized units need a positive numerical aperture");
  return system.lambda_eff() / (2.0 * kPi * system.na_g());
}

double s_metric(const ImageRaster& reference, const ImageRaster& other) {
  if (!reference.same_geometry(other)) throw DomainError("s_metric: rasters are on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < reference.values.size(); ++i) {
    const double d = reference.values[i] - other.values[i];
    s += d * d;
  }
  return s;
}

double s_metric(double delta_y, double epsilon, const OpticalSystem& system, const GridSpec& grid) {
  return SMetric(system, grid)(delta_y, epsilon);
}

SMetric::SMetric(const OpticalSystem& system, const GridSpec& grid)
    : system_(system), grid_(grid), reference_(image_for(system, grid, 0.0, 0.0)) {}

ImageRaster SMetric::image(double delta_y, double epsilon) const { return image_for(system_, grid_, delta_y, epsilon); }

double SMetric::operator()(double delta_y, double epsilon) const {
  if (delta_y == 0.0 && epsilon == 0.0) return 0.0;
  return s_metric(reference_, image(delta_y, epsilon));
}

double SMetric::valley(double delta_y) const { return (*this)(delta_y, delta_y * 2.0 * kPi / system_.lambda_eff()); }

double optimal_pixel_ratio() {
  static double cached = 0.0;
  static std::once_flag once;
  std::call_once(once, [] {
    const OpticalSystem canonical;
    const double x = 0.02;
    auto a_of = [&](double ratio) {
      const SMetric m(canonical, grid_for_ratio(canonical, ratio));
      return m(x * normalized_length(canonical), 0.0) / (x * x);
    };
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 1.2, hi = 3.5;
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = a_of(c), fd = a_of(d);
    while (hi - lo > 1e-3) {
      if (fc > fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - g * (hi - lo);
        fc = a_of(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + g * (hi - lo);
        fd = a_of(d);
      }
    }
    cached = 0.5 * (lo + hi);
  });
  return cached;
}

GridSpec standard_grid(const OpticalSystem& system) { return grid_for_ratio(system, optimal_pixel_ratio()); }

double fit_fixed_exponent(const std::vector<double>& x, const std::vector<double>& y, double exponent) {
  if (x.empty() || x.size() != y.size()) throw DomainError("fit: need matching, non-empty samples");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit: samples must be positive");
    acc += std::log(y[i]) - exponent * std::log(x[i]);
  }
  return std::exp(acc / static_cast<double>(x.size()));
}

LogLogFit fit_free_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2 || x.size() != y.size()) throw DomainError("fit: need at least two matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit: samples must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) throw DomainError("fit: samples must span more than one abscissa");
  const double slope = (n * sxy - sx * sy) / denom;
  return {std::exp((sy - slope * sx) / n), slope};
}

PowerLaws fit_power_laws(const OpticalSystem& system, const GridSpec& grid, const std::vector<double>& dy_samples) {
  const double unit = normalized_length(system);
  if (dy_samples.empty()) throw DomainError("fit_power_laws: no samples");
  for (double d : dy_samples)
    if (!(d > 0.0) || d > 0.3 * unit * (1.0 + 1e-12))
      throw DomainError("fit_power_laws: samples must lie in (0, 0.3] normalized units");
  const SMetric metric(system, grid);
  std::vector<double> x, lin, val;
  for (double d : dy_samples) {
    x.push_back(d / unit);
    lin.push_back(metric(d, 0.0));
    val.push_back(metric.valley(d));
  }
  return {fit_fixed_exponent(x, lin, 2.0), fit_fixed_exponent(x, val, 4.0)};
}

PrecisionPoint precision_limit(std::uint64_t n_photons, const OpticalSystem& system, const GridSpec& grid) {
  return precision_limit(n_photons, SMetric(system, grid));
}

PrecisionPoint precision_limit(std::uint64_t n_photons, const SMetric& metric) {
  if (n_photons < 10) throw DomainError("precision_limit: at least 10 photons are required");
  const double unit = normalized_length(metric.system());
  const double target = 1.0 / static_cast<double>(n_photons);
  const double xl = bisect_root([&](double x) { return metric(x * unit, 0.0); }, target, "linear");
  const double xe = bisect_root([&](double x) { return metric.valley(x * unit); }, target, "elliptical");
  const double dy_e = xe * unit;
  return {n_photons, xl * unit, dy_e, dy_e * 2.0 * kPi / metric.system().lambda_eff()};
}

ShotNoiseEstimate shot_noise_statistics(const ImageRaster& raster, std::uint64_t n_photons, std::uint64_t n_trials,
                                        std::uint64_t seed) {
  if (n_photons == 0) throw DomainError("shot_noise_expectation: photon number must be positive");
  if (n_trials < 2) throw DomainError("shot_noise_expectation: at least two trials are required");
  const double n = static_cast<double>(n_photons);
  std::vector<double> values(n_trials);
  parallel_for(n_trials, [&](std::size_t t) {
    const ImageRaster counts = estimate::add_shot_noise(raster, n_photons, seed, t);
    double s = 0.0;
    for (std::size_t i = 0; i < counts.values.size(); ++i) {
      const double d = counts.values[i] - n * raster.values[i];
      s += d * d;
    }
    values[t] = s / (n * n);
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n_trials);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n_trials - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_trials))};
}

double shot_noise_expectation(const ImageRaster& raster, std::uint64_t n_photons, std::uint64_t n_trials,
                              std::uint64_t seed) {
  return shot_noise_statistics(raster, n_photons, n_trials, seed).mean;
}

std::vector<AllanPoint> allan_deviation(const std::vector<CentroidSample>& series,
                                        const std::vector<std::uint64_t>& bin_sizes,
                                        std::vector<std::string>* warnings) {
  std::vector<AllanPoint> out;
  for (std::uint64_t n : bin_sizes) {
    if (n == 0 || series.size() / n < 2) {
      if (warnings)
        warnings->push_back("bin size " + std::to_string(n) + " skipped: needs at least two full bins from " +
                            std::to_string(series.size()) + " samples");
      continue;
    }
    const std::size_t bins = series.size() / n;
    std::vector<double> my(bins), mz(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      double sy = 0, sz = 0;
      for (std::size_t i = k * n; i < (k + 1) * n; ++i) {
        sy += series[i].y;
        sz += series[i].z;
      }
      my[k] = sy / static_cast<double>(n);
      mz[k] = sz / static_cast<double>(n);
    }
    double vy = 0, vz = 0;
    for (std::size_t k = 0; k + 1 < bins; ++k) {
      vy += (my[k + 1] - my[k]) * (my[k + 1] - my[k]);
      vz += (mz[k + 1] - mz[k]) * (mz[k + 1] - mz[k]);
    }
    const double m = static_cast<double>(bins - 1);
    out.push_back({n, std::sqrt(0.5 * vy / m), std::sqrt(0.5 * vz / m)});
  }
  return out;
}

std::vector<SurfacePoint> s_surface(const OpticalSystem& system, const GridSpec& grid,
                                    const std::vector<double>& delta_y_norm, const std::vector<double>& epsilon_norm) {
  const SMetric metric(system, grid);
  const double unit = normalized_length(system);
  const double na = system.na_g();
  std::vector<SurfacePoint> out(delta_y_norm.size() * epsilon_norm.size());
  parallel_for(out.size(), [&](std::size_t k) {
    const double dy = delta_y_norm[k / epsilon_norm.size()];
    const double en = epsilon_norm[k % epsilon_norm.size()];
    out[k] = {dy, en, metric(dy * unit, en / na)};
  });
  return out;
}

void write_s_surface_csv(const std::vector<SurfacePoint>& points, const std::filesystem::path& path) {
  std::string text = "delta_y_norm,epsilon_norm,s_value\n";
  for (const auto& p : points)
    text += io::format_double(p.delta_y_norm) + ',' + io::format_double(p.epsilon_norm) + ',' +
            io::format_double(p.s_value) + '\n';
  io::write_file_atomic(path, text);
}

}  // namespace dpsf::precision
