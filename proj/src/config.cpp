#include "tpflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace tpf {

namespace {

struct RawValue {
  std::string text;
  int line = 0;
  mutable bool used = false;
};

using Section = std::map<std::string, RawValue>;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Extractor {
 public:
  explicit Extractor(std::map<std::string, Section>& sections) : sections_(sections) {}

  const RawValue* find(const std::string& section, const std::string& key) const {
    auto sit = sections_.find(section);
    if (sit == sections_.end()) return nullptr;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    kit->second.used = true;
    return &kit->second;
  }

  std::string require(const std::string& section, const std::string& key) const {
    const RawValue* v = find(section, key);
    if (!v) throw ConfigError("missing required key " + section + "." + key);
    return v->text;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    const RawValue* v = find(section, key);
    if (!v) return fallback;
    return to_double(*v, section + "." + key);
  }

  int get_int(const std::string& section, const std::string& key, int fallback) const {
    const RawValue* v = find(section, key);
    if (!v) return fallback;
    try {
      size_t pos = 0;
      int out = std::stoi(v->text, &pos);
      if (pos != v->text.size()) throw std::invalid_argument("");
      return out;
    } catch (...) {
      throw ConfigError("expected an integer for " + section + "." + key, v->line);
    }
  }

  uint64_t get_u64(const std::string& section, const std::string& key, uint64_t fallback) const {
    const RawValue* v = find(section, key);
    if (!v) return fallback;
    try {
      return std::stoull(v->text);
    } catch (...) {
      throw ConfigError("expected an unsigned integer for " + section + "." + key, v->line);
    }
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    const RawValue* v = find(section, key);
    return v ? v->text : fallback;
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const RawValue* v = find(section, key);
    if (!v) return fallback;
    if (v->text == "on" || v->text == "true" || v->text == "1") return true;
    if (v->text == "off" || v->text == "false" || v->text == "0") return false;
    throw ConfigError("expected on/off for " + section + "." + key, v->line);
  }

  static double to_double(const RawValue& v, const std::string& what) {
    try {
      size_t pos = 0;
      double out = std::stod(v.text, &pos);
      if (pos != v.text.size()) throw std::invalid_argument("");
      return out;
    } catch (...) {
      throw ConfigError("expected a number for " + what, v.line);
    }
  }

  void check_all_used() const {
    for (const auto& [sname, section] : sections_) {
      for (const auto& [key, v] : section) {
        if (!v.used) throw ConfigError("unknown key " + sname + "." + key, v.line);
      }
    }
  }

 private:
  std::map<std::string, Section>& sections_;
};

Mat2 parse_lambda(const std::string& text, int line) {
  auto parts = split(text, ' ');
  if (parts.size() != 3) throw ConfigError("permeability needs three entries: a11 a12 a22", line);
  Mat2 m;
  try {
    m(0, 0) = std::stod(parts[0]);
    m(0, 1) = m(1, 0) = std::stod(parts[1]);
    m(1, 1) = std::stod(parts[2]);
  } catch (...) {
    throw ConfigError("bad permeability entry", line);
  }
  return m;
}

}  // namespace

std::vector<double> parse_ladder_values(const std::string& text) {
  std::vector<double> values;
  if (text.rfind("geometric:", 0) == 0) {
    auto parts = split(text.substr(10), ':');
    if (parts.size() != 3) throw ConfigError("geometric ladder needs start:factor:count");
    double start = std::stod(parts[0]);
    double factor = std::stod(parts[1]);
    int count = std::stoi(parts[2]);
    if (start <= 0.0 || factor <= 0.0 || factor >= 1.0 || count < 1)
      throw ConfigError("geometric ladder needs start > 0, factor in (0,1), count >= 1");
    double v = start;
    for (int k = 0; k < count; ++k, v *= factor) values.push_back(v);
    values.push_back(0.0);
  } else {
    for (const auto& item : split(text, ',')) values.push_back(std::stod(item));
  }
  return values;
}

CaseConfig parse_config(std::istream& in) {
  std::map<std::string, Section> sections;
  std::string line, current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw ConfigError("empty section name", line_no);
      sections[current];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
    if (current.empty()) throw ConfigError("key outside of any section", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (sections[current].count(key)) throw ConfigError("duplicate key " + key, line_no);
    sections[current][key] = RawValue{value, line_no, false};
  }

  Extractor ex(sections);
  CaseConfig cfg;

  // [mesh]
  cfg.backend = ex.require("mesh", "backend");
  if (cfg.backend != "ddfv" && cfg.backend != "cvfe")
    throw ConfigError("mesh.backend must be ddfv or cvfe");
  cfg.nx = ex.get_int("mesh", "nx", 0);
  cfg.ny = ex.get_int("mesh", "ny", 0);
  cfg.mesh_file = ex.get_string("mesh", "file", "");
  if (cfg.mesh_file.empty()) {
    if (!ex.find("mesh", "nx")) throw ConfigError("missing required key mesh.nx");
    if (!ex.find("mesh", "ny")) throw ConfigError("missing required key mesh.ny");
    if (cfg.nx < 2 || cfg.ny < 2) throw ConfigError("mesh.nx and mesh.ny must be >= 2");
  }
  cfg.distortion = ex.get_double("mesh", "distortion", 0.0);
  if (cfg.distortion < 0.0 || cfg.distortion > 0.4)
    throw ConfigError("mesh.distortion must lie in [0, 0.4]");
  cfg.split = ex.get_string("mesh", "split", "diagonal");
  if (cfg.split != "diagonal" && cfg.split != "acute")
    throw ConfigError("mesh.split must be diagonal or acute");
  cfg.mesh_seed = ex.get_u64("mesh", "seed", 1);
  {
    std::string dir = ex.get_string("mesh", "dirichlet", "left,right");
    cfg.dirichlet_sides = split(dir, ',');
    if (cfg.dirichlet_sides.empty())
      throw ConfigError("mesh.dirichlet must name at least one boundary segment");
    for (const auto& s : cfg.dirichlet_sides) {
      if (s != "left" && s != "right" && s != "top" && s != "bottom" && s != "all")
        throw ConfigError("mesh.dirichlet entries must be left/right/top/bottom/all");
    }
  }

  // [fluid]
  {
    std::string law = ex.get_string("fluid", "pc_law", "linear");
    if (law == "linear")
      cfg.fluid.pc_law = PcLaw::linear;
    else if (law == "tanh")
      cfg.fluid.pc_law = PcLaw::tanh_blend;
    else
      throw ConfigError("fluid.pc_law must be linear or tanh");
    cfg.fluid.pc_slope = ex.get_double("fluid", "pc_slope", cfg.fluid.pc_slope);
    cfg.fluid.pc_tanh_amp = ex.get_double("fluid", "pc_tanh_amp", cfg.fluid.pc_tanh_amp);
    cfg.fluid.pc_tanh_rate = ex.get_double("fluid", "pc_tanh_rate", cfg.fluid.pc_tanh_rate);
    cfg.fluid.mu_g = ex.get_double("fluid", "mu_g", cfg.fluid.mu_g);
    cfg.fluid.mu_w = ex.get_double("fluid", "mu_w", cfg.fluid.mu_w);
    cfg.fluid.rho0 = ex.get_double("fluid", "rho0", cfg.fluid.rho0);
    cfg.fluid.rho1 = ex.get_double("fluid", "rho1", cfg.fluid.rho1);
    cfg.fluid.rho_steepness_g = ex.get_double("fluid", "rho_steepness_g", cfg.fluid.rho_steepness_g);
    cfg.fluid.rho_steepness_w = ex.get_double("fluid", "rho_steepness_w", cfg.fluid.rho_steepness_w);
    cfg.fluid.mobility_exponent = ex.get_int("fluid", "mobility_exponent", cfg.fluid.mobility_exponent);
    cfg.fluid.quadrature_points = ex.get_int("fluid", "quadrature_points", cfg.fluid.quadrature_points);
    if (cfg.fluid.rho0 <= 0.0) throw ConfigError("fluid.rho0 must be positive");
    if (cfg.fluid.rho1 < cfg.fluid.rho0) throw ConfigError("fluid.rho1 must be >= rho0");
  }

  // [medium]
  {
    cfg.medium.phi = ex.get_double("medium", "phi", cfg.medium.phi);
    if (const RawValue* v = ex.find("medium", "lambda"))
      cfg.medium.lambda = parse_lambda(v->text, v->line);
    for (int r = 1; r < 100; ++r) {
      std::string prefix = "region" + std::to_string(r);
      const RawValue* box = ex.find("medium", prefix + ".box");
      if (!box) break;
      auto parts = split(box->text, ' ');
      if (parts.size() != 4) throw ConfigError("region box needs x0 y0 x1 y1", box->line);
      MediumRegion region;
      region.x0 = std::stod(parts[0]);
      region.y0 = std::stod(parts[1]);
      region.x1 = std::stod(parts[2]);
      region.y1 = std::stod(parts[3]);
      region.phi = ex.get_double("medium", prefix + ".phi", cfg.medium.phi);
      region.lambda = cfg.medium.lambda;
      if (const RawValue* v = ex.find("medium", prefix + ".lambda"))
        region.lambda = parse_lambda(v->text, v->line);
      cfg.medium.regions.push_back(region);
    }
    try {
      cfg.medium.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }

  // [time]
  cfg.dt = Extractor::to_double({ex.require("time", "dt"), 0, true}, "time.dt");
  cfg.t_final = Extractor::to_double({ex.require("time", "t_final"), 0, true}, "time.t_final");
  if (cfg.dt <= 0.0 || cfg.t_final <= 0.0) throw ConfigError("time.dt and time.t_final must be positive");

  // [solver]
  cfg.newton.tol = ex.get_double("solver", "tol", 1e-9);
  cfg.newton.max_iter = ex.get_int("solver", "max_iter", 30);
  cfg.newton.max_halvings = ex.get_int("solver", "damping", 20);
  if (cfg.newton.tol <= 0.0) throw ConfigError("solver.tol must be positive");
  if (const RawValue* v = ex.find("solver", "eps_ladder")) {
    try {
      cfg.ladder.eps = parse_ladder_values(v->text);
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), v->line);
    }
  }
  if (const RawValue* v = ex.find("solver", "eta_ladder")) {
    try {
      cfg.ladder.eta = parse_ladder_values(v->text);
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), v->line);
    }
  }
  try {
    cfg.ladder.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  // [initial]
  cfg.profile = ex.get_string("initial", "profile", "zero");
  if (cfg.profile != "zero" && cfg.profile != "uniform" && cfg.profile != "two-region")
    throw ConfigError("initial.profile must be zero, uniform or two-region");
  cfg.pg = ex.get_double("initial", "pg", 0.0);
  cfg.pw = ex.get_double("initial", "pw", 0.0);
  cfg.pg_left = ex.get_double("initial", "pg_left", 0.0);
  cfg.pw_left = ex.get_double("initial", "pw_left", 0.0);
  cfg.pg_right = ex.get_double("initial", "pg_right", 0.0);
  cfg.pw_right = ex.get_double("initial", "pw_right", 0.0);
  cfg.xsplit = ex.get_double("initial", "xsplit", 0.5);

  // [verify]
  cfg.seed = ex.get_u64("verify", "seed", cfg.seed);
  cfg.samples = ex.get_int("verify", "samples", cfg.samples);
  cfg.pressure_range = ex.get_double("verify", "pressure_range", cfg.pressure_range);
  if (cfg.samples < 1) throw ConfigError("verify.samples must be >= 1");

  // [output]
  cfg.out_dir = ex.get_string("output", "dir", cfg.out_dir);
  cfg.write_fields = ex.get_bool("output", "fields", cfg.write_fields);

  ex.check_all_used();
  return cfg;
}

CaseConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

}  // namespace tpf
