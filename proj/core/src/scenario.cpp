#include "cavsim/scenario.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cavsim {

using nlohmann::json;

namespace {

// Recognized unit suffixes and their factor to SI base units. Longest
// match wins (sample_interval_ms is _ms, not _s).
const std::vector<std::pair<std::string, double>> kUnitSuffixes = {
    {"_rad_per_s", 1.0},   {"_mW_per_cm2", 10.0}, {"_W_per_m2", 1.0},
    {"_G_per_cm", 1e-2},   {"_T_per_m", 1.0},     {"_m_per_s", 1.0},
    {"_per_s", 1.0},       {"_GHz", 1e9},         {"_MHz", 1e6},
    {"_kHz", 1e3},         {"_Hz", 1.0},          {"_Gamma", 1.0},
    {"_count", 1.0},       {"_frac", 1.0},        {"_seed", 1.0},
    {"_sign", 1.0},        {"_nm", 1e-9},         {"_um", 1e-6},
    {"_mm", 1e-3},         {"_cm", 1e-2},         {"_uK", 1e-6},
    {"_mK", 1e-3},         {"_uW", 1e-6},         {"_mW", 1e-3},
    {"_us", 1e-6},         {"_ms", 1e-3},         {"_W", 1.0},
    {"_K", 1.0},           {"_m", 1.0},           {"_s", 1.0},
};

const double* suffix_factor(const std::string& key) {
  for (const auto& [suf, fac] : kUnitSuffixes)
    if (key.size() > suf.size() &&
        key.compare(key.size() - suf.size(), suf.size(), suf) == 0)
      return &fac;
  return nullptr;
}

struct Reader {
  const json& obj;
  std::string path;
  std::vector<std::string>& violations;
  mutable std::vector<std::string> consumed;

  void fail(const std::string& msg) const { violations.push_back(path + ": " + msg); }

  // Finds "<prefix><unit suffix>" among the keys; returns the SI value.
  std::optional<double> num(const std::string& prefix) const {
    std::optional<double> out;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const std::string& key = it.key();
      if (key == prefix && it->is_number()) {
        fail("numeric key '" + key + "' lacks a unit suffix");
        consumed.push_back(key);
        continue;
      }
      double fac = 0.0;
      bool match = false;
      for (const auto& [suf, f] : kUnitSuffixes)
        if (key == prefix + suf) {
          match = true;
          fac = f;
          break;
        }
      if (!match) continue;
      consumed.push_back(key);
      if (out) {
        fail("duplicate keys for '" + prefix + "'");
        continue;
      }
      if (!it->is_number()) {
        fail("key '" + key + "' must be a number");
        continue;
      }
      out = it->get<double>() * fac;
    }
    return out;
  }

  std::optional<std::vector<double>> arr(const std::string& prefix) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const std::string& key = it.key();
      bool direct = false;
      double fac = 1.0;
      for (const auto& [suf, f] : kUnitSuffixes)
        if (key == prefix + suf) {
          direct = true;
          fac = f;
        }
      if (!direct) continue;
      consumed.push_back(key);
      if (!it->is_array()) {
        fail("key '" + key + "' must be an array");
        return std::nullopt;
      }
      std::vector<double> out;
      for (const auto& v : *it) {
        if (!v.is_number()) {
          fail("key '" + key + "' has a non-numeric element");
          return std::nullopt;
        }
        out.push_back(v.get<double>() * fac);
      }
      return out;
    }
    return std::nullopt;
  }

  std::optional<Vec3> vec(const std::string& prefix) const {
    auto a = arr(prefix);
    if (!a) return std::nullopt;
    if (a->size() != 3) {
      fail("key '" + prefix + "' must have 3 elements");
      return std::nullopt;
    }
    return Vec3((*a)[0], (*a)[1], (*a)[2]);
  }

  std::optional<std::string> str(const std::string& key) const {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    consumed.push_back(key);
    if (!it->is_string()) {
      fail("key '" + key + "' must be a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  std::optional<bool> flag(const std::string& key) const {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    consumed.push_back(key);
    if (!it->is_boolean()) {
      fail("key '" + key + "' must be a boolean");
      return std::nullopt;
    }
    return it->get<bool>();
  }

  // Call last: flags leftover keys (typos, bare numbers).
  void finish() const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const std::string& key = it.key();
      if (std::find(consumed.begin(), consumed.end(), key) != consumed.end())
        continue;
      if (it->is_number() || (it->is_array() && !it->empty() && (*it)[0].is_number()))
        fail("unrecognized numeric key '" + key +
             "' (missing or unknown unit suffix?)");
      else
        fail("unrecognized key '" + key + "'");
    }
  }
};

Vec3 axis_from_string(const std::string& s, const Reader& r) {
  if (s.size() == 2 && (s[0] == '+' || s[0] == '-')) {
    const double sign = s[0] == '+' ? 1.0 : -1.0;
    if (s[1] == 'x') return sign * Vec3::UnitX();
    if (s[1] == 'y') return sign * Vec3::UnitY();
    if (s[1] == 'z') return sign * Vec3::UnitZ();
  }
  r.fail("axis '" + s + "' must be one of +x -x +y -y +z -z");
  return -Vec3::UnitY();
}

std::string axis_to_string(const Vec3& v) {
  const char axes[3] = {'x', 'y', 'z'};
  for (int a = 0; a < 3; ++a) {
    if (v[a] > 0.5) return std::string("+") + axes[a];
    if (v[a] < -0.5) return std::string("-") + axes[a];
  }
  return "-y";
}

void read_tone(const json& j, const std::string& path, ToneField& tone,
               std::vector<std::string>& violations) {
  Reader r{j, path, violations};
  if (auto v = r.num("wavelength")) tone.wavelength = *v;
  if (auto v = r.num("power")) tone.power = *v;
  if (auto v = r.num("waist")) tone.waist = *v;
  if (auto v = r.num("backscatter")) tone.backscatter_fraction = *v;
  if (auto v = r.num("propagation")) tone.propagation_sign = *v >= 0 ? +1 : -1;
  if (auto s = r.str("polarization")) {
    if (*s == "x")
      tone.polarization = Vec3::UnitX();
    else if (*s == "y")
      tone.polarization = Vec3::UnitY();
    else if (*s == "z")
      tone.polarization = Vec3::UnitZ();
    else
      r.fail("polarization must be x, y or z");
  }
  r.finish();
}

void read_schedule(const json& j, const std::string& path, PowerSchedule& sched,
                   std::vector<std::string>& violations) {
  Reader r{j, path, violations};
  auto times = r.arr("times");
  auto powers = r.arr("powers");
  r.finish();
  if (!times || !powers) {
    violations.push_back(path + ": needs times_* and powers_* arrays");
    return;
  }
  if (times->size() != powers->size() || times->empty()) {
    violations.push_back(path + ": times/powers must match and be non-empty");
    return;
  }
  sched.knots.clear();
  for (std::size_t i = 0; i < times->size(); ++i) {
    if (i > 0 && (*times)[i] <= (*times)[i - 1]) {
      violations.push_back(path + ": times must be strictly increasing");
      return;
    }
    sched.knots.emplace_back((*times)[i], (*powers)[i]);
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> v)
    : std::runtime_error("scenario validation failed:\n  " +
                         [&v] {
                           std::string s;
                           for (std::size_t i = 0; i < v.size(); ++i)
                             s += (i ? "\n  " : "") + v[i];
                           return s;
                         }()),
      violations(std::move(v)) {}

Scenario parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // report a line number instead of nlohmann's byte offset
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("top level must be an object");

  std::vector<std::string> violations;
  Scenario s;
  s.run.trap_tone = {1560e-9, 0.0, 157e-6, Vec3::UnitY(), +1, 0.0};
  s.run.comp_tone = {1527e-9, 0.0, 155e-6, Vec3::UnitX(), -1, 0.0};

  Reader top{doc, "$", violations};
  if (auto v = top.str("label")) s.label = *v;

  if (auto it = doc.find("tones"); it != doc.end()) {
    top.consumed.push_back("tones");
    if (auto t = it->find("trap"); t != it->end())
      read_tone(*t, "tones.trap", s.run.trap_tone, violations);
    if (auto t = it->find("compensation"); t != it->end())
      read_tone(*t, "tones.compensation", s.run.comp_tone, violations);
    for (auto t = it->begin(); t != it->end(); ++t)
      if (t.key() != "trap" && t.key() != "compensation")
        violations.push_back("tones: unrecognized tone '" + t.key() + "'");
  }
  s.run.trap_schedule = PowerSchedule::constant(s.run.trap_tone.power);
  s.run.comp_schedule = PowerSchedule::constant(s.run.comp_tone.power);

  if (auto it = doc.find("schedules"); it != doc.end()) {
    top.consumed.push_back("schedules");
    if (auto t = it->find("trap"); t != it->end())
      read_schedule(*t, "schedules.trap", s.run.trap_schedule, violations);
    if (auto t = it->find("compensation"); t != it->end())
      read_schedule(*t, "schedules.compensation", s.run.comp_schedule, violations);
    for (auto t = it->begin(); t != it->end(); ++t)
      if (t.key() != "trap" && t.key() != "compensation")
        violations.push_back("schedules: unrecognized tone '" + t.key() + "'");
  }

  if (auto it = doc.find("cooling"); it != doc.end()) {
    top.consumed.push_back("cooling");
    Reader r{*it, "cooling", violations};
    CoolingConfig& c = s.run.cooling;
    if (auto v = r.num("detuning")) c.detuning_gamma = *v;
    if (auto v = r.num("beam_intensity")) c.beam_intensity = *v;
    if (auto v = r.num("repump_intensity")) c.repump_intensity = *v;
    if (auto v = r.num("repump_detuning")) c.repump_detuning_Hz = *v;
    if (auto v = r.flag("gradient_on")) c.gradient_on = *v;
    if (auto v = r.num("gradient")) c.gradient_T_per_m = *v;
    if (auto v = r.vec("mot_center")) c.mot_center = *v;
    if (auto v = r.num("capture_radius")) c.capture_radius = *v;
    if (auto v = r.num("pgc_threshold")) c.pgc_threshold_gamma = *v;
    if (auto v = r.num("pgc_rate")) c.pgc_rate = *v;
    if (auto v = r.num("pgc_temperature_coeff")) c.pgc_temperature_coeff = *v;
    if (auto v = r.num("pgc_floor")) c.pgc_floor_K = *v;
    if (auto v = r.num("pgc_velocity_cutoff")) c.pgc_velocity_cutoff = *v;
    r.finish();
  }

  if (auto it = doc.find("source"); it != doc.end()) {
    top.consumed.push_back("source");
    Reader r{*it, "source", violations};
    if (auto v = r.num("rate")) s.run.source.rate = *v;
    if (auto v = r.num("temperature")) s.run.source.temperature = *v;
    if (auto v = r.num("ring_radius")) s.run.source.ring_radius = *v;
    if (auto v = r.vec("center")) s.run.source.center = *v;
    r.finish();
  }

  if (auto it = doc.find("gravity"); it != doc.end()) {
    top.consumed.push_back("gravity");
    Reader r{*it, "gravity", violations};
    if (auto v = r.flag("enabled")) s.run.gravity.enabled = *v;
    if (auto v = r.str("pull")) s.run.gravity.pull = axis_from_string(*v, r);
    r.finish();
  }

  if (auto it = doc.find("run"); it != doc.end()) {
    top.consumed.push_back("run");
    Reader r{*it, "run", violations};
    RunConfig& c = s.run;
    if (auto v = r.num("duration")) c.duration = *v;
    if (auto v = r.num("dt")) c.dt = *v;
    if (auto v = r.num("sample_interval")) c.sample_interval = *v;
    if (auto v = r.num("scale")) c.scale = *v;
    if (auto v = r.num("loss_rate")) c.loss_rate = *v;
    if (auto v = r.num("sim_radius")) c.sim_radius = *v;
    if (auto v = r.num("sim_half_length")) c.sim_half_length = *v;
    if (auto v = r.num("master")) c.seed = std::uint64_t(*v);
    if (auto v = r.num("threads")) c.threads = int(*v);
    r.finish();
  }

  if (auto it = doc.find("readout"); it != doc.end()) {
    top.consumed.push_back("readout");
    Reader r{*it, "readout", violations};
    DispersiveParams& d = s.run.dispersive;
    if (auto v = r.num("coupling_g")) d.g = *v * kTwoPi;
    if (auto v = r.num("coupling_g_angular")) d.g = *v;
    if (auto v = r.num("probe_detuning")) d.delta = *v * kTwoPi;
    if (auto v = r.num("probe_detuning_angular")) d.delta = *v;
    if (auto v = r.num("kappa")) d.kappa = *v * kTwoPi;
    if (auto v = r.num("kappa_angular")) d.kappa = *v;
    if (auto v = r.num("mode_waist")) d.mode_waist = *v;
    if (auto v = r.num("probe_noise")) s.probe_noise_rms = *v;
    if (auto v = r.num("probe_span")) s.probe_span_Hz = *v;
    r.finish();
  }

  if (auto it = doc.find("sweep"); it != doc.end()) {
    top.consumed.push_back("sweep");
    Reader r{*it, "sweep", violations};
    if (auto v = r.str("parameter")) s.sweep_parameter = *v;
    if (auto v = it->find("values"); v != it->end()) {
      r.consumed.push_back("values");
      // unit rides on the parameter name, so bare numbers are fine here
      if (!v->is_array())
        violations.push_back("sweep.values must be an array");
      else
        for (const auto& x : *v) s.sweep_values.push_back(x.get<double>());
    }
    r.finish();
    if (!s.sweep_parameter.empty() && !suffix_factor(s.sweep_parameter))
      violations.push_back("sweep.parameter '" + s.sweep_parameter +
                           "' lacks a unit suffix");
  }

  if (auto it = doc.find("output"); it != doc.end()) {
    top.consumed.push_back("output");
    Reader r{*it, "output", violations};
    if (auto v = r.str("dir")) s.out_dir = *v;
    r.finish();
  }
  top.finish();

  auto check = [&](const char* where, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      violations.push_back(std::string(where) + ": " + e.what());
    }
  };
  check("tones.trap", [&] { s.run.trap_tone.validate(); });
  check("tones.compensation", [&] { s.run.comp_tone.validate(); });
  check("cooling", [&] { s.run.cooling.validate(); });
  check("source", [&] { s.run.source.validate(); });
  if (s.run.dt <= 0) violations.push_back("run: dt must be > 0");
  if (s.run.duration < 0) violations.push_back("run: duration must be >= 0");
  if (s.run.scale <= 0) violations.push_back("run: scale must be > 0");
  if (s.run.sample_interval <= 0)
    violations.push_back("run: sample interval must be > 0");
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return s;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  // canonical form: SI base units only, so parse(serialize(s)) is exact
  json j;
  j["label"] = s.label;
  auto tone = [](const ToneField& t) {
    json o;
    o["wavelength_m"] = t.wavelength;
    o["power_W"] = t.power;
    o["waist_m"] = t.waist;
    o["polarization"] = t.polarization.x() > 0.5   ? "x"
                        : t.polarization.y() > 0.5 ? "y"
                                                   : "z";
    o["propagation_sign"] = t.propagation_sign;
    o["backscatter_frac"] = t.backscatter_fraction;
    return o;
  };
  j["tones"]["trap"] = tone(s.run.trap_tone);
  j["tones"]["compensation"] = tone(s.run.comp_tone);
  auto sched = [](const PowerSchedule& p) {
    json o;
    auto& t = o["times_s"] = json::array();
    auto& w = o["powers_W"] = json::array();
    for (const auto& [tk, pk] : p.knots) {
      t.push_back(tk);
      w.push_back(pk);
    }
    return o;
  };
  j["schedules"]["trap"] = sched(s.run.trap_schedule);
  j["schedules"]["compensation"] = sched(s.run.comp_schedule);
  const CoolingConfig& c = s.run.cooling;
  j["cooling"] = {{"detuning_Gamma", c.detuning_gamma},
                  {"beam_intensity_W_per_m2", c.beam_intensity},
                  {"repump_intensity_W_per_m2", c.repump_intensity},
                  {"repump_detuning_Hz", c.repump_detuning_Hz},
                  {"gradient_on", c.gradient_on},
                  {"gradient_T_per_m", c.gradient_T_per_m},
                  {"mot_center_m", {c.mot_center.x(), c.mot_center.y(), c.mot_center.z()}},
                  {"capture_radius_m", c.capture_radius},
                  {"pgc_threshold_Gamma", c.pgc_threshold_gamma},
                  {"pgc_rate_per_s", c.pgc_rate},
                  {"pgc_temperature_coeff_frac", c.pgc_temperature_coeff},
                  {"pgc_floor_K", c.pgc_floor_K},
                  {"pgc_velocity_cutoff_m_per_s", c.pgc_velocity_cutoff}};
  j["source"] = {{"rate_per_s", s.run.source.rate},
                 {"temperature_K", s.run.source.temperature},
                 {"ring_radius_m", s.run.source.ring_radius},
                 {"center_m", {s.run.source.center.x(), s.run.source.center.y(),
                               s.run.source.center.z()}}};
  j["gravity"] = {{"enabled", s.run.gravity.enabled},
                  {"pull", axis_to_string(s.run.gravity.pull)}};
  j["run"] = {{"duration_s", s.run.duration},
              {"dt_s", s.run.dt},
              {"sample_interval_s", s.run.sample_interval},
              {"scale_count", s.run.scale},
              {"loss_rate_per_s", s.run.loss_rate},
              {"sim_radius_m", s.run.sim_radius},
              {"sim_half_length_m", s.run.sim_half_length},
              {"master_seed", s.run.seed},
              {"threads_count", s.run.threads}};
  const DispersiveParams& d = s.run.dispersive;
  j["readout"] = {{"coupling_g_angular_rad_per_s", d.g},
                  {"probe_detuning_angular_rad_per_s", d.delta},
                  {"kappa_angular_rad_per_s", d.kappa},
                  {"mode_waist_m", d.mode_waist},
                  {"probe_noise_frac", s.probe_noise_rms},
                  {"probe_span_Hz", s.probe_span_Hz}};
  if (!s.sweep_parameter.empty() || !s.sweep_values.empty())
    j["sweep"] = {{"parameter", s.sweep_parameter}, {"values", s.sweep_values}};
  j["output"] = {{"dir", s.out_dir}};
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a(const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for checksum: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string s = buf.str();
  return fnv1a(s.data(), s.size());
}

std::uint64_t scenario_hash(const Scenario& s) {
  const std::string text = serialize_scenario(s);
  return fnv1a(text.data(), text.size());
}

void apply_parameter(Scenario& s, const std::string& parameter, double value) {
  if (parameter == "comp_power_W") {
    s.run.comp_tone.power = value;
    s.run.comp_schedule = PowerSchedule::constant(value);
  } else if (parameter == "trap_power_W") {
    s.run.trap_tone.power = value;
    s.run.trap_schedule = PowerSchedule::constant(value);
  } else if (parameter == "detuning_Gamma") {
    s.run.cooling.detuning_gamma = value;
  } else if (parameter == "beam_intensity_W_per_m2") {
    s.run.cooling.beam_intensity = value;
  } else if (parameter == "repump_detuning_MHz") {
    s.run.cooling.repump_detuning_Hz = value * 1e6;
  } else if (parameter == "pgc_floor_uK") {
    s.run.cooling.pgc_floor_K = value * 1e-6;
  } else if (parameter == "source_rate_per_s") {
    s.run.source.rate = value;
  } else if (parameter == "duration_s") {
    s.run.duration = value;
  } else {
    throw UnknownParameterError("unknown sweep parameter: " + parameter);
  }
}

std::uint64_t sweep_seed(std::uint64_t master, const std::string& parameter,
                         double value) {
  const std::uint64_t ph = fnv1a(parameter.data(), parameter.size());
  return derive_stream_seed(master ^ ph, std::bit_cast<std::uint64_t>(value));
}

void write_trace_csv(const std::string& path, const EnsembleTrace& trace) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  std::fprintf(f,
               "t_s,N_trapped,N_transiting,N_departed,T_x_uK,T_y_uK,T_z_uK,"
               "f_F1,cavity_shift_Hz\n");
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 trace.times[i], trace.trapped[i], trace.transiting[i],
                 trace.departed[i], trace.temperature_K[i].x() * 1e6,
                 trace.temperature_K[i].y() * 1e6,
                 trace.temperature_K[i].z() * 1e6, trace.f1_fraction[i],
                 trace.cavity_shift_Hz[i]);
  std::fclose(f);
}

void write_table_csv(const std::string& path,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < columns.size(); ++i)
    std::fprintf(f, "%s%s", i ? "," : "", columns[i].c_str());
  std::fprintf(f, "\n");
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::invalid_argument("row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i)
      std::fprintf(f, "%s%.17g", i ? "," : "", row[i]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

void write_manifest(const std::string& out_dir, const Scenario& scenario,
                    const std::vector<std::string>& files) {
  json j;
  j["format"] = "cavsim-manifest-1";
  j["label"] = scenario.label;
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(scenario_hash(scenario)));
  j["config_fnv1a"] = hex;
  j["master_seed"] = scenario.run.seed;
  j["files"] = json::array();
  for (const auto& name : files) {
    const std::uint64_t h = fnv1a_file(out_dir + "/" + name);
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    j["files"].push_back({{"name", name}, {"fnv1a", hex}});
  }
  std::ofstream out(out_dir + "/manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + out_dir);
  out << j.dump(2) << "\n";
}

namespace {

std::string value_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  std::string t(buf);
  for (auto& c : t)
    if (c == '.') c = 'p';
  return t;
}

void write_snapshot(const std::string& path, const RunResult& res) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < res.atoms.size(); ++i) {
    const Atom& a = res.atoms[i];
    rows.push_back({double(a.rng_id), a.position.x(), a.position.y(),
                    a.position.z(), a.velocity.x(), a.velocity.y(),
                    a.velocity.z(), a.dark ? 1.0 : 0.0,
                    double(int(res.status[i]))});
  }
  write_table_csv(path,
                  {"atom_id", "x_m", "y_m", "z_m", "vx_m_per_s", "vy_m_per_s",
                   "vz_m_per_s", "dark", "status"},
                  rows);
}

}  // namespace

std::vector<std::string> run_bundle(const AtomicData& data, const Scenario& s,
                                    bool snapshot) {
  std::filesystem::create_directories(s.out_dir);
  std::vector<std::string> files;

  auto run_one = [&](const Scenario& sc, const std::string& trace_name) {
    const RunResult res = run_accumulation(data, sc.run);
    write_trace_csv(sc.out_dir + "/" + trace_name, res.trace);
    files.push_back(trace_name);
    if (snapshot) {
      const std::string name = "snapshot_" + trace_name;
      write_snapshot(sc.out_dir + "/" + name, res);
      files.push_back(name);
    }
    return res;
  };

  if (s.sweep_parameter.empty()) {
    run_one(s, "trace.csv");
  } else {
    std::vector<std::vector<double>> rows;
    for (double v : s.sweep_values) {
      Scenario sv = s;
      apply_parameter(sv, s.sweep_parameter, v);
      sv.run.seed = sweep_seed(s.run.seed, s.sweep_parameter, v);
      const RunResult res =
          run_one(sv, "trace_" + s.sweep_parameter + "_" + value_tag(v) + ".csv");
      const auto& tr = res.trace;
      const bool has = !tr.times.empty();
      rows.push_back({v, has ? tr.trapped.back() : 0.0,
                      has ? tr.cavity_shift_Hz.back() : 0.0,
                      has ? tr.f1_fraction.back() : 0.0});
    }
    write_table_csv(s.out_dir + "/sweep.csv",
                    {s.sweep_parameter, "N_trapped_final", "cavity_shift_Hz",
                     "f_F1"},
                    rows);
    files.push_back("sweep.csv");
  }
  {
    std::ofstream cfg(s.out_dir + "/scenario_resolved.json");
    cfg << serialize_scenario(s);
  }
  files.push_back("scenario_resolved.json");
  write_manifest(s.out_dir, s, files);
  return files;
}

}  // namespace cavsim
