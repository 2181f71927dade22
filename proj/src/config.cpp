#include "nvtensor/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nvtensor/errors.hpp"
#include "nvtensor/experiments.hpp"
#include "nvtensor/util.hpp"

namespace nvt {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const std::size_t a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end == s.c_str() || *end != '\0')
    throw ConfigError("bad numeric value for '" + key + "': " + s);
  return v;
}

long parse_long(const std::string& key, const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (errno != 0 || end == s.c_str() || *end != '\0')
    throw ConfigError("bad integer value for '" + key + "': " + s);
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || end == s.c_str() || *end != '\0' || s.find('-') != std::string::npos)
    throw ConfigError("bad unsigned value for '" + key + "': " + s);
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw ConfigError("bad boolean value for '" + key + "': " + s);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(key, item));
  return out;
}

std::vector<long> parse_long_list(const std::string& key, const std::string& s) {
  std::vector<long> out;
  for (const auto& item : split_list(s)) out.push_back(parse_long(key, item));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double_17(v[i]);
  }
  return out;
}

std::string join_longs(const std::vector<long>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      out[section];  // a section may legitimately hold no overrides
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key before any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    if (!out[section].emplace(key, value).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return out;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig config_from_map(const ConfigMap& m) {
  ExperimentConfig c;
  for (const auto& [section, kv] : m) {
    for (const auto& [key, value] : kv) {
      const std::string where = section + "." + key;
      if (section == "run") {
        if (key == "experiment") c.experiment = value;
        else if (key == "seed") c.seed = parse_u64(where, value);
        else throw ConfigError("unknown key: " + where);
      } else if (section == "model") {
        if (key == "sites") c.sites = static_cast<int>(parse_long(where, value));
        else if (key == "spacing_nm") c.spacing_nm = parse_double(where, value);
        else if (key == "gamma") c.gamma = parse_double_list(where, value);
        else if (key == "interaction") c.interaction = value;
        else if (key == "rabi_mhz") c.rabi_mhz = parse_double(where, value);
        else if (key == "splitting_mhz") c.splitting_mhz = parse_double(where, value);
        else if (key == "initial") c.initial = value;
        else throw ConfigError("unknown key: " + where);
      } else if (section == "engine") {
        if (key == "name") c.engine = value;
        else if (key == "dt_ns") c.dt_ns = parse_double(where, value);
        else if (key == "n_steps") c.n_steps = static_cast<int>(parse_long(where, value));
        else if (key == "chi_max") c.chi_max = parse_long(where, value);
        else if (key == "chi_list") c.chi_list = parse_long_list(where, value);
        else if (key == "rel_floor") c.rel_floor = parse_double(where, value);
        else if (key == "krylov_tol") c.krylov_tol = parse_double(where, value);
        else if (key == "krylov_dim") c.krylov_dim = static_cast<int>(parse_long(where, value));
        else if (key == "wii_substeps") c.wii_substeps = parse_bool(where, value);
        else throw ConfigError("unknown key: " + where);
      } else if (section == "qfi") {
        if (key == "delta_mhz") c.qfi_delta_mhz = parse_double(where, value);
        else if (key == "restarts") c.qfi_restarts = static_cast<int>(parse_long(where, value));
        else if (key == "chi_sld") c.qfi_chi_sld = parse_long(where, value);
        else if (key == "cadence") c.qfi_cadence = static_cast<int>(parse_long(where, value));
        else if (key == "smoothing") c.qfi_smoothing = static_cast<int>(parse_long(where, value));
        else throw ConfigError("unknown key: " + where);
      } else if (section == "output") {
        if (key == "directory") c.out_dir = value;
        else if (key == "opee_cadence") c.opee_cadence = static_cast<int>(parse_long(where, value));
        else throw ConfigError("unknown key: " + where);
      } else {
        throw ConfigError("unknown section: [" + section + "]");
      }
    }
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  return config_from_map(parse_config_file(path));
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  out << "experiment = " << c.experiment << "\n";
  out << "seed = " << c.seed << "\n";
  out << "\n[model]\n";
  out << "sites = " << c.sites << "\n";
  out << "spacing_nm = " << format_double_17(c.spacing_nm) << "\n";
  out << "gamma = " << join_doubles(c.gamma) << "\n";
  out << "interaction = " << c.interaction << "\n";
  out << "rabi_mhz = " << format_double_17(c.rabi_mhz) << "\n";
  out << "splitting_mhz = " << format_double_17(c.splitting_mhz) << "\n";
  out << "initial = " << c.initial << "\n";
  out << "\n[engine]\n";
  out << "name = " << c.engine << "\n";
  out << "dt_ns = " << format_double_17(c.dt_ns) << "\n";
  out << "n_steps = " << c.n_steps << "\n";
  out << "chi_max = " << c.chi_max << "\n";
  out << "chi_list = " << join_longs(c.chi_list) << "\n";
  out << "rel_floor = " << format_double_17(c.rel_floor) << "\n";
  out << "krylov_tol = " << format_double_17(c.krylov_tol) << "\n";
  out << "krylov_dim = " << c.krylov_dim << "\n";
  out << "wii_substeps = " << (c.wii_substeps ? "on" : "off") << "\n";
  out << "\n[qfi]\n";
  out << "delta_mhz = " << format_double_17(c.qfi_delta_mhz) << "\n";
  out << "restarts = " << c.qfi_restarts << "\n";
  out << "chi_sld = " << c.qfi_chi_sld << "\n";
  out << "cadence = " << c.qfi_cadence << "\n";
  out << "smoothing = " << c.qfi_smoothing << "\n";
  out << "\n[output]\n";
  out << "directory = " << c.out_dir << "\n";
  out << "opee_cadence = " << c.opee_cadence << "\n";
  return out.str();
}

void validate_config(const ExperimentConfig& c) {
  bool known = false;
  for (const auto& e : experiment_registry()) known = known || e.name == c.experiment;
  if (!known) throw ConfigError("unknown experiment '" + c.experiment + "'");
  if (c.sites < 1) throw ConfigError("model.sites must be >= 1");
  if (!(c.spacing_nm > 0.0)) throw ConfigError("model.spacing_nm must be positive");
  if (c.gamma.empty()) throw ConfigError("model.gamma must not be empty");
  for (double g : c.gamma)
    if (!(g >= 0.0)) throw ConfigError("model.gamma entries must be >= 0");
  if (c.interaction != "rotating" && c.interaction != "lab")
    throw ConfigError("model.interaction must be 'rotating' or 'lab'");
  if (!(c.rabi_mhz >= 0.0)) throw ConfigError("model.rabi_mhz must be >= 0");
  if (!(c.splitting_mhz >= 0.0)) throw ConfigError("model.splitting_mhz must be >= 0");
  if (c.initial != "zero" && c.initial != "plus")
    throw ConfigError("model.initial must be 'zero' or 'plus'");
  if (c.engine != "tdvp" && c.engine != "wii" && c.engine != "ed")
    throw ConfigError("engine.name must be 'tdvp', 'wii' or 'ed'");
  if (!(c.dt_ns > 0.0)) throw ConfigError("engine.dt_ns must be positive");
  if (c.n_steps < 1) throw ConfigError("engine.n_steps must be >= 1");
  if (c.chi_max < 1) throw ConfigError("engine.chi_max must be >= 1");
  if (c.chi_list.empty()) throw ConfigError("engine.chi_list must not be empty");
  for (long chi : c.chi_list)
    if (chi < 1) throw ConfigError("engine.chi_list entries must be >= 1");
  if (!(c.rel_floor >= 0.0)) throw ConfigError("engine.rel_floor must be >= 0");
  if (!(c.krylov_tol > 0.0)) throw ConfigError("engine.krylov_tol must be positive");
  if (c.krylov_dim < 2) throw ConfigError("engine.krylov_dim must be >= 2");
  if (!(c.qfi_delta_mhz > 0.0)) throw ConfigError("qfi.delta_mhz must be positive");
  if (c.qfi_restarts < 1) throw ConfigError("qfi.restarts must be >= 1");
  if (c.qfi_cadence < 1) throw ConfigError("qfi.cadence must be >= 1");
  if (c.qfi_smoothing < 1) throw ConfigError("qfi.smoothing must be >= 1");
  if (c.opee_cadence < 0) throw ConfigError("output.opee_cadence must be >= 0");
  if (c.out_dir.empty()) throw ConfigError("output.directory is empty");
  if (c.experiment == "qfi-dynamics" && c.engine == "ed")
    throw ConfigError("qfi-dynamics requires a tensor-network engine (tdvp or wii)");

  // Hard capacity guards.
  if (c.sites > 12)
    throw CapacityError("model.sites exceeds the hard cap of 12");
  const double horizon_us = config_dt_us(c) * c.n_steps;
  if (horizon_us > 10.0 + 1e-12)
    throw CapacityError("dt_ns * n_steps exceeds the 10 us horizon cap");
  const bool needs_ed = c.engine == "ed" || c.experiment == "engine-comparison" ||
                        c.experiment == "bond-scan" || c.experiment == "dissipation-scan";
  if (needs_ed && c.sites > 6)
    throw CapacityError("dense-reference comparisons require sites <= 6");
}

std::string config_hash(const ExperimentConfig& c) {
  return hex64(fnv1a64(serialize_config(c)));
}

double config_dt_us(const ExperimentConfig& c) { return c.dt_ns * 1e-3; }

ModelSpec model_from_config(const ExperimentConfig& c, double gamma_per_us) {
  ModelSpec m = standard_chain_model(c.sites, c.spacing_nm, gamma_per_us,
                                     two_pi * c.rabi_mhz, two_pi * c.splitting_mhz / 2.0);
  m.interaction = c.interaction == "lab" ? InteractionForm::LabFrame
                                         : InteractionForm::Effective;
  return m;
}

EngineOptions engine_from_config(const ExperimentConfig& c) {
  return engine_from_config(c, c.engine);
}

EngineOptions engine_from_config(const ExperimentConfig& c, const std::string& engine_name) {
  EngineOptions opt;
  if (engine_name == "tdvp") opt.kind = EngineKind::Tdvp;
  else if (engine_name == "wii") opt.kind = EngineKind::Wii;
  else if (engine_name == "ed") opt.kind = EngineKind::DenseReference;
  else throw ConfigError("unknown engine: " + engine_name);

  opt.tdvp.chi_max = c.chi_max;
  opt.tdvp.rel_floor = c.rel_floor;
  opt.tdvp.krylov.tol = c.krylov_tol;
  opt.tdvp.krylov.max_dim = c.krylov_dim;
  opt.wii.chi_max = c.chi_max;
  opt.wii.rel_floor = c.rel_floor;
  opt.wii.complex_substeps = c.wii_substeps;
  opt.ed.krylov.tol = std::min(c.krylov_tol, 1e-12);
  opt.ed.krylov.max_dim = std::max(c.krylov_dim, 30);
  return opt;
}

InitialState initial_from_config(const ExperimentConfig& c) {
  InitialState init;
  init.kind = c.initial == "plus" ? InitialState::Kind::PlusProduct
                                  : InitialState::Kind::ZeroProduct;
  return init;
}

}  // namespace nvt
