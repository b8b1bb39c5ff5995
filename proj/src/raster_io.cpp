#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dipole_psf/fileutil.hpp"
#include "dipole_psf/psf.hpp"

namespace dpsf::io {

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename temporary file onto " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace dpsf::io

namespace dpsf::psf {
namespace {

double parse_number(const std::string& token, const std::filesystem::path& path) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  while (end && *end == ' ') ++end;
  if (token.empty() || end == token.c_str() || (end && *end != '\0') || errno == ERANGE)
    throw IoError(path.string() + ": malformed number '" + token + "'");
  return v;
}

void check_values(const ImageRaster& r, const std::filesystem::path& path) {
  for (double v : r.values)
    if (!std::isfinite(v) || v < 0.0) throw IoError(path.string() + ": raster values must be finite and non-negative");
}

}  // namespace

void write_raster_csv(const ImageRaster& raster, const std::filesystem::path& path) {
  std::string out;
  out += "# pitch_m=" + io::format_double(raster.pitch) + "\n";
  out += "# origin_y_m=" + io::format_double(raster.origin_y) + "\n";
  out += "# origin_z_m=" + io::format_double(raster.origin_z) + "\n";
  for (std::size_t r = 0; r < raster.rows; ++r) {
    for (std::size_t c = 0; c < raster.cols; ++c) {
      if (c) out += ',';
      out += io::format_double(raster.at(r, c));
    }
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

ImageRaster read_raster_csv(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  ImageRaster r;
  bool have_pitch = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const double v = parse_number(line.substr(eq + 1), path);
      if (key == "pitch_m") {
        r.pitch = v;
        have_pitch = true;
      } else if (key == "origin_y_m") {
        r.origin_y = v;
      } else if (key == "origin_z_m") {
        r.origin_z = v;
      }
      continue;
    }
    std::size_t count = 0;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      r.values.push_back(parse_number(cell, path));
      ++count;
    }
    if (r.rows == 0) r.cols = count;
    if (count != r.cols) throw IoError(path.string() + ": ragged raster rows");
    ++r.rows;
  }
  if (!have_pitch) throw IoError(path.string() + ": missing '# pitch_m=' header");
  check_values(r, path);
  return r;
}

void write_raster_raw(const ImageRaster& raster, const std::filesystem::path& raw_path,
                      const std::filesystem::path& sidecar_path) {
  std::string bytes(raster.values.size() * sizeof(double), '\0');
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(raster.values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  nlohmann::ordered_json side;
  side["rows"] = raster.rows;
  side["cols"] = raster.cols;
  side["pitch_m"] = raster.pitch;
  side["origin_y_m"] = raster.origin_y;
  side["origin_z_m"] = raster.origin_z;
  io::write_file_atomic(raw_path, bytes);
  io::write_file_atomic(sidecar_path, side.dump(2) + "\n");
}

ImageRaster read_raster_raw(const std::filesystem::path& raw_path, const std::filesystem::path& sidecar_path) {
  ImageRaster r;
  try {
    const auto side = nlohmann::json::parse(io::read_file(sidecar_path));
    r.rows = side.at("rows").get<std::size_t>();
    r.cols = side.at("cols").get<std::size_t>();
    r.pitch = side.at("pitch_m").get<double>();
    r.origin_y = side.at("origin_y_m").get<double>();
    r.origin_z = side.at("origin_z_m").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(sidecar_path.string() + ": " + e.what());
  }
  const std::string bytes = io::read_file(raw_path);
  if (bytes.size() != r.rows * r.cols * sizeof(double))
    throw IoError(raw_path.string() + ": size does not match the sidecar geometry");
  r.values.resize(r.rows * r.cols);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    r.values[i] = std::bit_cast<double>(bits);
  }
  check_values(r, raw_path);
  return r;
}

}  // namespace dpsf::psf
