#include "dipole_psf/io_formats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "dipole_psf/fileutil.hpp"

namespace dpsf::io {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << '\n';
    os << (issues[i].path.empty() ? "<document>" : issues[i].path) << ": " << issues[i].message;
  }
  return os.str();
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

class Reader {
 public:
  std::vector<ConfigIssue> issues;

  void add(std::string path, std::string message) { issues.push_back({std::move(path), std::move(message)}); }

  void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
      bool known = false;
      for (const char* k : allowed) known = known || item.key() == k;
      if (!known) add(child(path, item.key()), "unknown key");
    }
  }

  // Returns the sub-object or nullptr; reports a non-object value.
  const Json* section(const Json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) return nullptr;
    if (!it->is_object()) {
      add(child(path, key), "expected an object");
      return nullptr;
    }
    return &*it;
  }

  void number(const Json& obj, const char* key, const std::string& path, double& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number()) {
      add(child(path, key), "expected a number");
      return;
    }
    out = it->get<double>();
  }

  void optional_number(const Json& obj, const char* key, const std::string& path, std::optional<double>& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    if (!it->is_number()) {
      add(child(path, key), "expected a number or null");
      return;
    }
    out = it->get<double>();
  }

  template <class Int>
  void integer(const Json& obj, const char* key, const std::string& path, Int& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    read_integer(*it, child(path, key), out);
  }

  template <class Int>
  bool read_integer(const Json& v, const std::string& path, Int& out) {
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
        add(path, "integer out of range");
        return false;
      }
      out = static_cast<Int>(u);
      return true;
    }
    if (v.is_number_integer()) {
      const auto s = v.get<std::int64_t>();
      if (s < 0 && std::is_unsigned_v<Int>) {
        add(path, "must be non-negative");
        return false;
      }
      out = static_cast<Int>(s);
      return true;
    }
    add(path, "expected an integer");
    return false;
  }

  void boolean(const Json& obj, const char* key, const std::string& path, bool& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_boolean()) {
      add(child(path, key), "expected true or false");
      return;
    }
    out = it->get<bool>();
  }
};

void read_dipole(Reader& rd, const Json& obj, DipoleSection& out) {
  const std::string path = "dipole";
  rd.check_keys(obj, path, {"epsilon_re", "epsilon_im", "axial", "pi"});
  const bool has_ratio = obj.contains("epsilon_re") || obj.contains("epsilon_im");
  int forms = has_ratio ? 1 : 0;
  for (const char* flag : {"axial", "pi"}) {
    auto it = obj.find(flag);
    if (it == obj.end()) continue;
    ++forms;
    if (!it->is_boolean() || !it->get<bool>()) {
      rd.add(child(path, flag), "must be true when present");
      continue;
    }
    out.kind = std::string(flag) == "axial" ? DipoleKind::Axial : DipoleKind::Pi;
  }
  if (forms > 1) {
    rd.add(path, "give either epsilon_re/epsilon_im, axial or pi");
    return;
  }
  if (has_ratio) {
    out.kind = DipoleKind::Ratio;
    out.epsilon_re = 0.0;
    out.epsilon_im = 0.0;
    rd.number(obj, "epsilon_re", path, out.epsilon_re);
    rd.number(obj, "epsilon_im", path, out.epsilon_im);
  }
}

ExperimentConfig parse_config(const Json& doc, Reader& rd) {
  ExperimentConfig cfg;
  if (!doc.is_object()) {
    rd.add("", "expected a JSON object");
    return cfg;
  }
  rd.check_keys(doc, "", {"system", "dipole", "grid", "options", "noise"});
  if (const Json* s = rd.section(doc, "system", "")) {
    rd.check_keys(*s, "system", {"lambda_vac_nm", "n", "n_image", "na", "f_mm", "f_image_mm"});
    rd.number(*s, "lambda_vac_nm", "system", cfg.system.lambda_vac_nm);
    rd.number(*s, "n", "system", cfg.system.n);
    rd.number(*s, "n_image", "system", cfg.system.n_image);
    rd.number(*s, "na", "system", cfg.system.na);
    rd.number(*s, "f_mm", "system", cfg.system.f_mm);
    rd.number(*s, "f_image_mm", "system", cfg.system.f_image_mm);
  }
  if (const Json* d = rd.section(doc, "dipole", "")) read_dipole(rd, *d, cfg.dipole);
  if (const Json* g = rd.section(doc, "grid", "")) {
    rd.check_keys(*g, "grid", {"half_extent_um", "samples"});
    rd.optional_number(*g, "half_extent_um", "grid", cfg.grid.half_extent_um);
    rd.integer(*g, "samples", "grid", cfg.grid.samples);
  }
  if (const Json* o = rd.section(doc, "options", "")) {
    rd.check_keys(*o, "options", {"defocus_nm", "pbs_filter_deg", "apodization"});
    rd.number(*o, "defocus_nm", "options", cfg.options.defocus_nm);
    rd.optional_number(*o, "pbs_filter_deg", "options", cfg.options.pbs_filter_deg);
    rd.boolean(*o, "apodization", "options", cfg.options.apodization);
  }
  if (const Json* n = rd.section(doc, "noise", "")) {
    rd.check_keys(*n, "noise", {"n_photons", "n_trials", "seed"});
    rd.integer(*n, "n_photons", "noise", cfg.noise.n_photons);
    rd.integer(*n, "n_trials", "noise", cfg.noise.n_trials);
    if (auto it = n->find("seed"); it != n->end() && !it->is_null()) {
      std::uint64_t seed = 0;
      if (rd.read_integer(*it, "noise.seed", seed)) cfg.noise.seed = seed;
    }
  }
  return cfg;
}

void check_ranges(const ExperimentConfig& c, Reader& rd) {
  auto positive = [&](double v, const char* path) {
    if (!(std::isfinite(v) && v > 0.0)) rd.add(path, "must be a positive finite number");
  };
  auto finite = [&](double v, const char* path) {
    if (!std::isfinite(v)) rd.add(path, "must be finite");
  };
  positive(c.system.lambda_vac_nm, "system.lambda_vac_nm");
  positive(c.system.n, "system.n");
  positive(c.system.n_image, "system.n_image");
  positive(c.system.f_mm, "system.f_mm");
  positive(c.system.f_image_mm, "system.f_image_mm");
  if (!(std::isfinite(c.system.na) && c.system.na >= 0.0)) {
    rd.add("system.na", "must lie in [0, n]");
  } else if (std::isfinite(c.system.n) && c.system.na > c.system.n) {
    rd.add("system.na", "must not exceed the refractive index n");
  }
  if (c.dipole.kind == DipoleKind::Ratio) {
    finite(c.dipole.epsilon_re, "dipole.epsilon_re");
    finite(c.dipole.epsilon_im, "dipole.epsilon_im");
  }
  if (c.grid.half_extent_um) positive(*c.grid.half_extent_um, "grid.half_extent_um");
  if (c.grid.samples < 3 || c.grid.samples % 2 == 0) rd.add("grid.samples", "must be an odd integer of at least 3");
  finite(c.options.defocus_nm, "options.defocus_nm");
  if (c.options.pbs_filter_deg) finite(*c.options.pbs_filter_deg, "options.pbs_filter_deg");
  if (c.noise.n_photons < 1) rd.add("noise.n_photons", "must be at least 1");
  if (c.noise.n_trials < 1) rd.add("noise.n_trials", "must be at least 1");
}

void append_float(double v, std::string& out) {
  if (!std::isfinite(v)) throw DomainError("JSON output cannot represent a non-finite number");
  std::string s = format_double(v);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  out += s;
}

void emit(const Json& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& item : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        out += Json(item.key()).dump();
        out += ": ";
        emit(item.value(), out, indent + 2);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(v[i], out, indent + 2);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "]";
      return;
    }
    case Json::value_t::number_float:
      append_float(v.get<double>(), out);
      return;
    default:
      out += v.dump();
  }
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

const char* payload_tag(const Payload& p) {
  static constexpr const char* tags[] = {"shift_curve", "montecarlo", "precision", "allan", "raster", "table"};
  return tags[p.index()];
}

Payload payload_from_json(const std::string& tag, const Json& j) {
  if (tag == "shift_curve") {
    ShiftCurve c;
    for (const auto& r : j.at("rows"))
      c.rows.push_back({r.at("epsilon").get<double>(), r.at("dy_analytic_m").get<double>(),
                        r.at("dy_rendered_m").get<double>()});
    return c;
  }
  if (tag == "montecarlo") {
    estimate::McDisplacementStats s;
    s.mean_dy = j.at("mean_dy_m").get<double>();
    s.mean_dz = j.at("mean_dz_m").get<double>();
    s.std_dy = j.at("std_dy_m").get<double>();
    s.std_dz = j.at("std_dz_m").get<double>();
    s.n_trials = j.at("n_trials").get<std::uint64_t>();
    s.n_excluded = j.at("n_excluded").get<std::uint64_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  }
  if (tag == "precision") {
    std::vector<precision::PrecisionPoint> pts;
    for (const auto& p : j)
      pts.push_back({p.at("n_photons").get<std::uint64_t>(), p.at("dy_linear_m").get<double>(),
                     p.at("dy_elliptical_m").get<double>(), p.at("d_epsilon").get<double>()});
    return pts;
  }
  if (tag == "allan") {
    std::vector<precision::AllanPoint> pts;
    for (const auto& p : j)
      pts.push_back({p.at("bin_size").get<std::uint64_t>(), p.at("adev_y").get<double>(), p.at("adev_z").get<double>()});
    return pts;
  }
  if (tag == "raster") {
    RasterReference ref;
    for (const auto& e : j.at("entries"))
      ref.entries.push_back({e.at("label").get<std::string>(), e.at("csv_file").get<std::string>(),
                             e.at("raw_file").get<std::string>(), e.at("sidecar_file").get<std::string>(),
                             e.at("rows").get<std::uint64_t>(), e.at("cols").get<std::uint64_t>(),
                             e.at("pitch_m").get<double>()});
    return ref;
  }
  if (tag == "table") {
    return TableReference{j.at("file").get<std::string>(), j.at("columns").get<std::vector<std::string>>(),
                          j.at("rows").get<std::uint64_t>()};
  }
  throw IoError("unknown payload type '" + tag + "'");
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<ConfigIssue> issues)
    : ConfigError(join_issues(issues)), issues_(std::move(issues)) {}

OpticalSystem ExperimentConfig::to_system() const {
  return OpticalSystem::make(system.lambda_vac_nm * 1e-9, system.n, system.n_image, system.na, system.f_mm * 1e-3,
                             system.f_image_mm * 1e-3);
}

dipole::Emitter ExperimentConfig::to_emitter() const {
  switch (dipole.kind) {
    case DipoleKind::Axial:
      return dipole::polarization_from_ratio(dipole::PolarizationRatio::axial());
    case DipoleKind::Pi:
      return dipole::PiDipole{};
    case DipoleKind::Ratio:
      break;
  }
  return dipole::polarization_from_ratio(cdouble(dipole.epsilon_re, dipole.epsilon_im));
}

dipole::Emitter ExperimentConfig::to_mirror_emitter() const {
  if (dipole.kind != DipoleKind::Ratio) return to_emitter();
  return dipole::polarization_from_ratio(-cdouble(dipole.epsilon_re, dipole.epsilon_im));
}

psf::GridSpec ExperimentConfig::to_grid() const {
  if (grid.half_extent_um) return psf::GridSpec::make(*grid.half_extent_um * 1e-6, grid.samples);
  return psf::GridSpec::default_for(to_system(), grid.samples);
}

psf::RenderOptions ExperimentConfig::to_render_options() const {
  psf::RenderOptions o;
  o.defocus = options.defocus_nm * 1e-9;
  if (options.pbs_filter_deg) o.pbs_axis = *options.pbs_filter_deg * kPi / 180.0;
  o.apodization = options.apodization;
  return o;
}

ExperimentConfig load_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text, nullptr, true, false);
  } catch (const Json::parse_error& e) {
    throw ConfigValidationError({{"", std::string("parse error: ") + e.what()}});
  }
  Reader rd;
  ExperimentConfig cfg = parse_config(doc, rd);
  if (rd.issues.empty()) check_ranges(cfg, rd);
  if (!rd.issues.empty()) throw ConfigValidationError(std::move(rd.issues));
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  try {
    return load_config(read_file(path));
  } catch (const ConfigValidationError& e) {
    auto issues = e.issues();
    for (auto& i : issues) i.message += " (in " + path.string() + ")";
    throw ConfigValidationError(std::move(issues));
  }
}

void validate_config(const ExperimentConfig& config) {
  Reader rd;
  check_ranges(config, rd);
  if (!rd.issues.empty()) throw ConfigValidationError(std::move(rd.issues));
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["system"] = {{"lambda_vac_nm", c.system.lambda_vac_nm}, {"n", c.system.n},       {"n_image", c.system.n_image},
                 {"na", c.system.na},                       {"f_mm", c.system.f_mm}, {"f_image_mm", c.system.f_image_mm}};
  switch (c.dipole.kind) {
    case DipoleKind::Ratio:
      j["dipole"] = {{"epsilon_re", c.dipole.epsilon_re}, {"epsilon_im", c.dipole.epsilon_im}};
      break;
    case DipoleKind::Axial:
      j["dipole"] = {{"axial", true}};
      break;
    case DipoleKind::Pi:
      j["dipole"] = {{"pi", true}};
      break;
  }
  j["grid"] = {{"half_extent_um", optional_json(c.grid.half_extent_um)}, {"samples", c.grid.samples}};
  j["options"] = {{"defocus_nm", c.options.defocus_nm},
                  {"pbs_filter_deg", optional_json(c.options.pbs_filter_deg)},
                  {"apodization", c.options.apodization}};
  j["noise"] = {{"n_photons", c.noise.n_photons},
                {"n_trials", c.noise.n_trials},
                {"seed", c.noise.seed ? Json(*c.noise.seed) : Json(nullptr)}};
  return j;
}

std::string serialize(const ExperimentConfig& config) { return dump_json(config_to_json(config)) + "\n"; }

std::string dump_json(const Json& value) {
  std::string out;
  emit(value, out, 0);
  return out;
}

std::string tool_version() { return DPSF_VERSION_STRING; }

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json payload_to_json(const Payload& payload) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ShiftCurve>) {
          Json rows = Json::array();
          for (const auto& r : p.rows)
            rows.push_back({{"epsilon", r.epsilon}, {"dy_analytic_m", r.dy_analytic_m}, {"dy_rendered_m", r.dy_rendered_m}});
          return {{"rows", rows}};
        } else if constexpr (std::is_same_v<T, estimate::McDisplacementStats>) {
          return {{"mean_dy_m", p.mean_dy}, {"mean_dz_m", p.mean_dz}, {"std_dy_m", p.std_dy}, {"std_dz_m", p.std_dz},
                  {"n_trials", p.n_trials}, {"n_excluded", p.n_excluded}, {"seed", p.seed}};
        } else if constexpr (std::is_same_v<T, std::vector<precision::PrecisionPoint>>) {
          Json a = Json::array();
          for (const auto& q : p)
            a.push_back({{"n_photons", q.n_photons}, {"dy_linear_m", q.dy_linear}, {"dy_elliptical_m", q.dy_elliptical},
                         {"d_epsilon", q.d_epsilon}});
          return a;
        } else if constexpr (std::is_same_v<T, std::vector<precision::AllanPoint>>) {
          Json a = Json::array();
          for (const auto& q : p) a.push_back({{"bin_size", q.bin_size}, {"adev_y", q.adev_y}, {"adev_z", q.adev_z}});
          return a;
        } else if constexpr (std::is_same_v<T, RasterReference>) {
          Json a = Json::array();
          for (const auto& e : p.entries)
            a.push_back({{"label", e.label}, {"csv_file", e.csv_file}, {"raw_file", e.raw_file},
                         {"sidecar_file", e.sidecar_file}, {"rows", e.rows}, {"cols", e.cols}, {"pitch_m", e.pitch_m}});
          return {{"entries", a}};
        } else {
          return {{"file", p.file}, {"columns", p.columns}, {"rows", p.rows}};
        }
      },
      payload);
}

Json envelope_to_json(const ResultEnvelope& e) {
  Json j;
  j["tool_version"] = e.tool_version;
  j["produced_at"] = e.produced_at;
  j["command"] = e.command;
  j["parameters"] = e.parameters;
  j["config"] = config_to_json(e.config_echo);
  j["payload_type"] = payload_tag(e.payload);
  j["payload"] = payload_to_json(e.payload);
  j["artifacts"] = e.artifacts;
  j["warnings"] = e.warnings;
  return j;
}

ResultEnvelope envelope_from_json(const Json& doc) {
  ResultEnvelope e;
  try {
    e.tool_version = doc.at("tool_version").get<std::string>();
    e.produced_at = doc.at("produced_at").get<std::string>();
    e.command = doc.at("command").get<std::string>();
    e.parameters = doc.at("parameters");
    Reader rd;
    e.config_echo = parse_config(doc.at("config"), rd);
    if (rd.issues.empty()) check_ranges(e.config_echo, rd);
    if (!rd.issues.empty()) throw ConfigValidationError(std::move(rd.issues));
    e.payload = payload_from_json(doc.at("payload_type").get<std::string>(), doc.at("payload"));
    e.artifacts = doc.at("artifacts").get<std::vector<std::string>>();
    e.warnings = doc.at("warnings").get<std::vector<std::string>>();
  } catch (const Json::exception& ex) {
    throw IoError(std::string("malformed result envelope: ") + ex.what());
  }
  return e;
}

void write_results(const ResultEnvelope& envelope, const std::filesystem::path& path) {
  write_file_atomic(path, dump_json(envelope_to_json(envelope)) + "\n");
}

ResultEnvelope read_results(const std::filesystem::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path), nullptr, true, false);
  } catch (const Json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  try {
    return envelope_from_json(doc);
  } catch (const std::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace dpsf::io
