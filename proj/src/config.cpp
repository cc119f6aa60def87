#include "fepic/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fepic {

namespace {

enum class Dim { None, Length, Time, Field, Energy, Voltage, Temperature, Conductivity, HeatCapacity, Lorenz,
                 ThermalConductivity };

struct Unit {
  const char* name;
  double factor;
};

struct DimInfo {
  const char* input_default;
  const char* canonical;
  std::vector<Unit> units;
};

const DimInfo& dim_info(Dim d) {
  static const std::map<Dim, DimInfo> table = {
      {Dim::None, {"", "", {{"", 1.0}}}},
      {Dim::Length, {"nm", "m", {{"m", 1.0}, {"nm", 1e-9}, {"um", 1e-6}, {"A", 1e-10}}}},
      {Dim::Time, {"fs", "s", {{"s", 1.0}, {"ps", 1e-12}, {"fs", 1e-15}}}},
      {Dim::Field, {"GV/m", "V/m", {{"V/m", 1.0}, {"MV/m", 1e6}, {"GV/m", 1e9}, {"V/nm", 1e9}}}},
      {Dim::Energy, {"eV", "eV", {{"eV", 1.0}}}},
      {Dim::Voltage, {"V", "V", {{"V", 1.0}, {"kV", 1e3}}}},
      {Dim::Temperature, {"K", "K", {{"K", 1.0}}}},
      {Dim::Conductivity, {"S/m", "S/m", {{"S/m", 1.0}}}},
      {Dim::HeatCapacity, {"J/(K*m^3)", "J/(K*m^3)", {{"J/(K*m^3)", 1.0}}}},
      {Dim::Lorenz, {"W*Ohm/K^2", "W*Ohm/K^2", {{"W*Ohm/K^2", 1.0}}}},
      {Dim::ThermalConductivity, {"W/(m*K)", "W/(m*K)", {{"W/(m*K)", 1.0}}}},
  };
  return table.at(d);
}

struct Ctx {
  std::string source;
  int line = 0;
  std::string key;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::InvalidConfig,
                source + ":" + std::to_string(line) + ": " + key + ": " + msg);
  }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const Ctx& ctx) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) ctx.fail("expected a number, got '" + s + "'");
  return v;
}

double unit_factor(Dim dim, const std::string& unit, const Ctx& ctx) {
  const auto& info = dim_info(dim);
  const std::string u = unit.empty() ? info.input_default : unit;
  for (const auto& cand : info.units) {
    if (u == cand.name) return cand.factor;
  }
  std::string allowed;
  for (const auto& cand : info.units) allowed += std::string(allowed.empty() ? "" : ", ") + cand.name;
  ctx.fail("unknown unit '" + unit + "' (allowed: " + (allowed.empty() ? "none" : allowed) + ")");
}

// "<number> [unit]"
double parse_quantity(const std::string& raw, Dim dim, const Ctx& ctx) {
  const std::string s = trim(raw);
  const auto sp = s.find_first_of(" \t");
  const std::string num = s.substr(0, sp);
  const std::string unit = sp == std::string::npos ? "" : trim(s.substr(sp));
  return parse_double(num, ctx) * unit_factor(dim, unit, ctx);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

bool parse_bool(const std::string& raw, const Ctx& ctx) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  ctx.fail("expected true or false, got '" + s + "'");
}

long parse_int(const std::string& raw, const Ctx& ctx) {
  const std::string s = trim(raw);
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) ctx.fail("expected an integer, got '" + s + "'");
  return v;
}

struct Key {
  std::string section;
  std::string name;
  std::string doc;
  bool required = false;
  std::function<void(SimConfig&, const std::string&, const Ctx&)> set;
  std::function<std::string(const SimConfig&)> get;
};

template <class Acc>
Key number(const char* sec, const char* name, Dim dim, Acc acc, const char* doc, bool required = false) {
  const auto& info = dim_info(dim);
  std::string d = doc;
  if (*info.input_default) d += std::string(" [") + info.input_default + "]";
  return {sec, name, d, required,
          [=](SimConfig& c, const std::string& raw, const Ctx& ctx) { acc(c) = parse_quantity(raw, dim, ctx); },
          [=](const SimConfig& c) {
            const std::string u = dim_info(dim).canonical;
            return fmt(acc(const_cast<SimConfig&>(c))) + (u.empty() ? "" : " " + u);
          }};
}

template <class T, class Acc>
Key integer(const char* sec, const char* name, Acc acc, const char* doc) {
  return {sec, name, doc, false,
          [=](SimConfig& c, const std::string& raw, const Ctx& ctx) {
            const long v = parse_int(raw, ctx);
            if (v < 0) ctx.fail("must not be negative");
            acc(c) = static_cast<T>(v);
          },
          [=](const SimConfig& c) { return std::to_string(acc(const_cast<SimConfig&>(c))); }};
}

template <class Acc>
Key boolean(const char* sec, const char* name, Acc acc, const char* doc) {
  return {sec, name, doc, false,
          [=](SimConfig& c, const std::string& raw, const Ctx& ctx) { acc(c) = parse_bool(raw, ctx); },
          [=](const SimConfig& c) { return std::string(acc(const_cast<SimConfig&>(c)) ? "true" : "false"); }};
}

template <class E, class Acc>
Key choice(const char* sec, const char* name, std::vector<std::pair<std::string, E>> options, Acc acc,
           const char* doc) {
  return {sec, name, doc, false,
          [=](SimConfig& c, const std::string& raw, const Ctx& ctx) {
            const std::string s = trim(raw);
            for (const auto& [label, value] : options) {
              if (s == label) {
                acc(c) = value;
                return;
              }
            }
            std::string allowed;
            for (const auto& o : options) allowed += (allowed.empty() ? "" : ", ") + o.first;
            ctx.fail("expected one of " + allowed + ", got '" + s + "'");
          },
          [=](const SimConfig& c) {
            for (const auto& [label, value] : options) {
              if (acc(const_cast<SimConfig&>(c)) == value) return label;
            }
            return std::string("?");
          }};
}

// "T:y, T:y, ..." or a single number for a constant.
template <class Acc>
Key table(const char* sec, const char* name, Acc acc, const char* doc) {
  return {sec, name, doc, false,
          [=](SimConfig& c, const std::string& raw, const Ctx& ctx) {
            Table1D t;
            const std::string s = trim(raw);
            if (s.find(':') == std::string::npos) {
              t = Table1D::constant(parse_double(s, ctx));
            } else {
              for (const auto& item : split(s, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos) ctx.fail("table entries are 'T:value'");
                t.points.emplace_back(parse_double(trim(item.substr(0, colon)), ctx),
                                      parse_double(trim(item.substr(colon + 1)), ctx));
              }
            }
            try {
              t.validate(name);
            } catch (const Error& e) {
              ctx.fail(e.what());
            }
            acc(c) = t;
          },
          [=](const SimConfig& c) {
            const Table1D& t = acc(const_cast<SimConfig&>(c));
            if (t.points.size() == 1) return fmt(t.points.front().second);
            std::string out;
            for (const auto& [x, y] : t.points) out += (out.empty() ? "" : ", ") + fmt(x) + ":" + fmt(y);
            return out;
          }};
}

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back(choice<MeshSource>("mesh", "source", {{"box", MeshSource::Box}, {"file", MeshSource::File}},
                                   [](SimConfig& c) -> MeshSource& { return c.mesh_source; },
                                   "box (built-in planar diode mesher) or file"));
    k.push_back({"mesh", "path", "mesh file for source = file", false,
                 [](SimConfig& c, const std::string& raw, const Ctx&) { c.mesh_path = trim(raw); },
                 [](const SimConfig& c) { return c.mesh_path; }});
    k.push_back(number("mesh", "width", Dim::Length, [](SimConfig& c) -> double& { return c.box.width; }, "box x extent"));
    k.push_back(number("mesh", "depth", Dim::Length, [](SimConfig& c) -> double& { return c.box.depth; }, "box y extent"));
    k.push_back(number("mesh", "gap", Dim::Length, [](SimConfig& c) -> double& { return c.box.gap; }, "cathode-anode distance"));
    k.push_back(integer<int>("mesh", "nx", [](SimConfig& c) -> int& { return c.box.nx; }, "divisions along x"));
    k.push_back(integer<int>("mesh", "ny", [](SimConfig& c) -> int& { return c.box.ny; }, "divisions along y"));
    k.push_back(integer<int>("mesh", "nz", [](SimConfig& c) -> int& { return c.box.nz; }, "divisions across the gap"));
    k.push_back(number("mesh", "z_grading", Dim::None, [](SimConfig& c) -> double& { return c.box.z_grading; },
                       "ratio of successive z spacings (> 1 refines at the cathode)"));
    k.push_back(number("mesh", "metal_thickness", Dim::Length,
                       [](SimConfig& c) -> double& { return c.box.metal_thickness; }, "metal slab under the cathode"));
    k.push_back(integer<int>("mesh", "nz_metal", [](SimConfig& c) -> int& { return c.box.nz_metal; },
                             "divisions through the metal slab"));

    k.push_back(choice<AnodeMode>("field", "mode", {{"field", AnodeMode::Field}, {"voltage", AnodeMode::Voltage}},
                                  [](SimConfig& c) -> AnodeMode& { return c.anode; },
                                  "field: applied E0 on the top boundary; voltage: fixed anode potential"));
    k.push_back(number("field", "E0", Dim::Field, [](SimConfig& c) -> double& { return c.applied_field; },
                       "applied long-range field"));
    k.push_back(number("field", "voltage", Dim::Voltage, [](SimConfig& c) -> double& { return c.voltage; },
                       "anode potential"));
    k.push_back(number("field", "cg_tolerance", Dim::None, [](SimConfig& c) -> double& { return c.cg_tolerance; },
                       "relative residual of the Poisson solve"));

    k.push_back(number("time", "dt_pic", Dim::Time, [](SimConfig& c) -> double& { return c.dt_pic; },
                       "particle time step", true));
    k.push_back(number("time", "dt_heat", Dim::Time, [](SimConfig& c) -> double& { return c.dt_heat; },
                       "heat equation time step"));
    k.push_back(number("time", "duration", Dim::Time, [](SimConfig& c) -> double& { return c.duration; },
                       "simulated time", true));

    k.push_back(number("particles", "weight", Dim::None, [](SimConfig& c) -> double& { return c.weight; },
                       "electrons per superparticle"));
    k.push_back(boolean("particles", "collisions", [](SimConfig& c) -> bool& { return c.collisions; },
                        "binary Coulomb collisions"));
    k.push_back(number("particles", "coulomb_log", Dim::None, [](SimConfig& c) -> double& { return c.coulomb_log; },
                       "Landau logarithm"));
    k.push_back(integer<std::uint64_t>("particles", "seed", [](SimConfig& c) -> std::uint64_t& { return c.seed; },
                                       "random seed"));

    k.push_back(number("emission", "work_function", Dim::Energy,
                       [](SimConfig& c) -> double& { return c.emitter.work_function_ev; }, "work function"));
    k.push_back(choice<OverBarrierPolicy>(
        "emission", "over_barrier", {{"saturate", OverBarrierPolicy::Saturate}, {"throw", OverBarrierPolicy::Throw}},
        [](SimConfig& c) -> OverBarrierPolicy& { return c.emitter.over_barrier; },
        "behaviour above barrier collapse"));
    k.push_back(number("emission", "temperature", Dim::Temperature,
                       [](SimConfig& c) -> double& { return c.surface_temperature; },
                       "emitter temperature when the mesh has no metal"));

    k.push_back(table("material", "sigma", [](SimConfig& c) -> Table1D& { return c.material.sigma_bulk; },
                      "bulk electric conductivity, 'T:sigma, ...' in K and S/m, or a constant"));
    k.push_back(table("material", "size_factor", [](SimConfig& c) -> Table1D& { return c.material.size_factor; },
                      "finite-size factor nu, 'T:nu, ...' or a constant"));
    k.push_back(number("material", "lorenz", Dim::Lorenz, [](SimConfig& c) -> double& { return c.material.lorenz; },
                       "Lorenz number"));
    k.push_back(number("material", "heat_capacity", Dim::HeatCapacity,
                       [](SimConfig& c) -> double& { return c.material.heat_capacity; }, "volumetric heat capacity"));
    k.push_back(number("material", "ambient", Dim::Temperature,
                       [](SimConfig& c) -> double& { return c.material.ambient; }, "temperature held on the metal bottom"));
    k.push_back(number("material", "fixed_kappa", Dim::ThermalConductivity,
                       [](SimConfig& c) -> double& { return c.material.fixed_kappa; },
                       "constant thermal conductivity replacing L T sigma (0 = off)"));
    k.push_back(number("material", "theta", Dim::None, [](SimConfig& c) -> double& { return c.theta; },
                       "time discretisation weight, 1 = implicit Euler"));
    k.push_back(boolean("material", "lumped_mass", [](SimConfig& c) -> bool& { return c.lumped_mass; },
                        "row-sum lumped heat capacity matrix"));
    k.push_back(number("material", "feature_size", Dim::Length, [](SimConfig& c) -> double& { return c.feature_size; },
                       "characteristic emitter diameter d used for nu (informational)"));

    k.push_back({"output", "dir", "output directory", false,
                 [](SimConfig& c, const std::string& raw, const Ctx&) { c.output_dir = trim(raw); },
                 [](const SimConfig& c) { return c.output_dir; }});
    k.push_back(integer<int>("output", "diagnostics_every", [](SimConfig& c) -> int& { return c.diagnostics_every; },
                             "steps between diagnostics rows"));
    k.push_back(integer<int>("output", "snapshot_every", [](SimConfig& c) -> int& { return c.snapshot_every; },
                             "steps between particle snapshots (0 = none)"));
    k.push_back(boolean("output", "fields", [](SimConfig& c) -> bool& { return c.write_fields; },
                        "write final nodal fields"));

    k.push_back(number("steady", "window", Dim::Time, [](SimConfig& c) -> double& { return c.steady_window; },
                       "moving-average window of the current"));
    k.push_back(number("steady", "hold", Dim::Time, [](SimConfig& c) -> double& { return c.steady_hold; },
                       "time the averaged current must stay within tolerance"));
    k.push_back(number("steady", "tolerance", Dim::None, [](SimConfig& c) -> double& { return c.steady_tolerance; },
                       "relative change accepted as steady"));
    k.push_back(number("steady", "average", Dim::Time, [](SimConfig& c) -> double& { return c.average_window; },
                       "window of the reported steady current"));

    k.push_back({"sweep", "voltages", "anode voltages of a diode sweep, comma separated [V]", false,
                 [](SimConfig& c, const std::string& raw, const Ctx& ctx) {
                   c.sweep_voltages.clear();
                   std::string s = trim(raw);
                   double factor = 1.0;
                   if (const auto sp = s.find_last_of(" \t"); sp != std::string::npos) {
                     const std::string tail = trim(s.substr(sp));
                     if (!tail.empty() && (std::isalpha(static_cast<unsigned char>(tail[0])) != 0)) {
                       factor = unit_factor(Dim::Voltage, tail, ctx);
                       s = trim(s.substr(0, sp));
                     }
                   }
                   for (const auto& item : split(s, ',')) c.sweep_voltages.push_back(parse_double(item, ctx) * factor);
                 },
                 [](const SimConfig& c) {
                   std::string out;
                   for (double v : c.sweep_voltages) out += (out.empty() ? "" : ", ") + fmt(v);
                   return out.empty() ? out : out + " V";
                 }});
    k.push_back(number("sweep", "duration", Dim::Time, [](SimConfig& c) -> double& { return c.sweep_duration; },
                       "longest run per voltage"));

    k.push_back(boolean("run", "deterministic", [](SimConfig& c) -> bool& { return c.deterministic; },
                        "thread-count independent reductions"));
    k.push_back(integer<int>("run", "threads", [](SimConfig& c) -> int& { return c.threads; },
                             "worker threads (0 = runtime default)"));
    return k;
  }();
  return keys;
}

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& msg) {
    throw Error(ErrorKind::InvalidConfig, key + ": " + msg);
  };
  if (mesh_source == MeshSource::File && mesh_path.empty()) fail("mesh.path", "required when source = file");
  if (mesh_source == MeshSource::Box) {
    if (!(box.width > 0.0)) fail("mesh.width", "must be positive");
    if (!(box.depth > 0.0)) fail("mesh.depth", "must be positive");
    if (!(box.gap > 0.0)) fail("mesh.gap", "must be positive");
    if (box.nx < 1) fail("mesh.nx", "must be at least 1");
    if (box.ny < 1) fail("mesh.ny", "must be at least 1");
    if (box.nz < 1) fail("mesh.nz", "must be at least 1");
    if (!(box.z_grading > 0.0)) fail("mesh.z_grading", "must be positive");
    if (box.metal_thickness < 0.0) fail("mesh.metal_thickness", "must not be negative");
    if (box.metal_thickness > 0.0 && box.nz_metal < 1) fail("mesh.nz_metal", "must be at least 1 with a metal slab");
  }
  if (anode == AnodeMode::Voltage && voltage < 0.0) fail("field.voltage", "must not be negative");
  if (!(cg_tolerance > 0.0 && cg_tolerance < 1.0)) fail("field.cg_tolerance", "must lie in (0, 1)");
  if (!(dt_pic > 0.0)) fail("time.dt_pic", "must be positive");
  if (!(dt_heat >= dt_pic)) fail("time.dt_heat", "must be at least time.dt_pic");
  if (!(duration >= 0.0)) fail("time.duration", "must not be negative");
  if (!(weight > 0.0)) fail("particles.weight", "must be positive");
  if (coulomb_log < 0.0) fail("particles.coulomb_log", "must not be negative");
  if (!(emitter.work_function_ev > 0.0)) fail("emission.work_function", "must be positive");
  if (!(surface_temperature > 0.0)) fail("emission.temperature", "must be positive");
  try {
    material.validate();
  } catch (const Error& e) {
    fail("material", e.what());
  }
  if (theta < 0.0 || theta > 1.0) fail("material.theta", "must lie in [0, 1]");
  if (diagnostics_every < 1) fail("output.diagnostics_every", "must be at least 1");
  if (!(steady_window > 0.0)) fail("steady.window", "must be positive");
  if (steady_hold < 0.0) fail("steady.hold", "must not be negative");
  if (!(steady_tolerance > 0.0)) fail("steady.tolerance", "must be positive");
  if (!(average_window > 0.0)) fail("steady.average", "must be positive");
  for (double v : sweep_voltages) {
    if (!(v > 0.0)) fail("sweep.voltages", "voltages must be positive");
  }
  if (!(sweep_duration > 0.0)) fail("sweep.duration", "must be positive");
}

SimConfig parse_config(std::istream& in, const std::string& source_name) {
  SimConfig cfg;
  std::set<std::string> seen;
  std::set<std::string> sections;
  for (const auto& k : schema()) sections.insert(k.section);

  std::string line;
  std::string section;
  Ctx ctx{source_name, 0, ""};
  while (std::getline(in, line)) {
    ++ctx.line;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        ctx.key = s;
        ctx.fail("malformed section header");
      }
      section = trim(s.substr(1, s.size() - 2));
      if (!sections.count(section)) {
        ctx.key = "[" + section + "]";
        ctx.fail("unknown section");
      }
      continue;
    }
    const auto eq = s.find('=');
    ctx.key = section.empty() ? s : section + "." + trim(s.substr(0, eq));
    if (eq == std::string::npos) ctx.fail("expected 'key = value'");
    if (section.empty()) ctx.fail("key outside of any section");
    const std::string name = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const std::string full = section + "." + name;
    const Key* key = nullptr;
    for (const auto& k : schema()) {
      if (k.section == section && k.name == name) key = &k;
    }
    if (key == nullptr) ctx.fail("unknown key");
    if (!seen.insert(full).second) ctx.fail("duplicate key");
    if (value.empty()) ctx.fail("missing value");
    key->set(cfg, value, ctx);
  }
  for (const auto& k : schema()) {
    if (k.required && !seen.count(k.section + "." + k.name)) {
      throw Error(ErrorKind::InvalidConfig, source_name + ": missing required key " + k.section + "." + k.name);
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidConfig, source_name + ": " + e.what());
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path);
  return parse_config(in, path);
}

std::string dump_config(const SimConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& k : schema()) {
    if (k.section != section) {
      section = k.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    const std::string v = k.get(cfg);
    if (v.empty()) continue;
    out += k.name + " = " + v + "\n";
  }
  return out;
}

std::string config_reference() {
  std::string out;
  for (const auto& k : schema()) {
    out += k.section + "." + k.name + (k.required ? " (required)" : "") + ": " + k.doc + "\n";
  }
  return out;
}

}  // namespace fepic
