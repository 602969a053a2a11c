#include "fmopto/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fmopto/errors.hpp"

namespace fmopto::harness {

namespace {

using Keys = std::set<std::string>;

void reject_unknown(const json& obj, const std::string& path, const Keys& allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
}

double number(const json& obj, const std::string& path, const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key, "missing required number");
  if (!it->is_number()) throw ConfigError(path + "." + key, "expected a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + "." + key, "must be finite");
  return v;
}

std::optional<double> maybe_number(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  return number(obj, path, key);
}

long integer(const json& obj, const std::string& path, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
  return v.get<long>();
}

bool parse_unit(const json& obj, const std::string& path) {
  if (!obj.contains("frequency_unit")) return false;
  const auto& u = obj.at("frequency_unit");
  if (!u.is_string()) throw ConfigError(path + ".frequency_unit", "expected \"rad/s\" or \"hz\"");
  const std::string s = u.get<std::string>();
  if (s == "hz") return true;
  if (s == "rad/s") return false;
  throw ConfigError(path + ".frequency_unit", "expected \"rad/s\" or \"hz\", got \"" + s + "\"");
}

PhysicalBlock parse_physical(const json& obj) {
  const std::string path = "physical";
  reject_unknown(obj, path,
                 {"frequency_unit", "omega_c", "omega_m", "omega_l", "delta_c", "kappa", "gamma", "g", "power",
                  "temperature", "G_override"});
  PhysicalBlock b;
  b.hz = parse_unit(obj, path);
  const double f = b.hz ? kTwoPi : 1.0;
  auto& p = b.params;
  p.omega_c = f * number(obj, path, "omega_c");
  p.omega_m = f * number(obj, path, "omega_m");
  const bool has_l = obj.contains("omega_l");
  const bool has_d = obj.contains("delta_c");
  if (has_l == has_d) throw ConfigError(path, "give exactly one of omega_l and delta_c");
  p.omega_l = has_l ? f * number(obj, path, "omega_l") : p.omega_c - f * number(obj, path, "delta_c");
  p.kappa = f * number(obj, path, "kappa");
  p.gamma = f * number(obj, path, "gamma");
  p.g = f * number(obj, path, "g");
  p.power = maybe_number(obj, path, "power");
  p.temperature = maybe_number(obj, path, "temperature").value_or(0.0);
  if (auto G = maybe_number(obj, path, "G_override")) b.G_override = f * *G;
  return b;
}

ReducedBlock parse_reduced(const json& obj) {
  const std::string path = "reduced";
  reject_unknown(obj, path,
                 {"delta_c_prime", "G", "G_re", "G_im", "kappa", "gamma", "n_th", "temperature", "omega_m",
                  "frequency_unit", "g", "E"});
  ReducedBlock b;
  b.hz = parse_unit(obj, path);
  b.delta_c_prime = number(obj, path, "delta_c_prime");
  if (obj.contains("G")) {
    if (obj.contains("G_re") || obj.contains("G_im")) throw ConfigError(path + ".G", "give either G or G_re/G_im");
    b.G_re = number(obj, path, "G");
  } else {
    b.G_re = number(obj, path, "G_re");
    b.G_im = maybe_number(obj, path, "G_im").value_or(0.0);
  }
  b.kappa = number(obj, path, "kappa");
  b.gamma = number(obj, path, "gamma");
  b.n_th = maybe_number(obj, path, "n_th");
  b.temperature = maybe_number(obj, path, "temperature");
  if (auto wm = maybe_number(obj, path, "omega_m")) b.omega_m = (b.hz ? kTwoPi : 1.0) * *wm;
  if (b.n_th && b.temperature) throw ConfigError(path, "give either n_th or temperature, not both");
  if (!b.n_th && !b.temperature) b.n_th = 0.0;
  if (b.temperature && !b.omega_m) throw ConfigError(path + ".omega_m", "required when temperature is given");
  b.g = maybe_number(obj, path, "g").value_or(0.0);
  b.E = maybe_number(obj, path, "E").value_or(0.0);
  return b;
}

SimulationSettings parse_simulation(const json& obj) {
  const std::string path = "simulation";
  reject_unknown(obj, path,
                 {"t_max_periods", "steps_per_period", "steps_per_mech_period", "dt", "stride", "dense_tail_periods",
                  "average_periods", "divergence_factor", "coupling", "integrator", "probe_horizon_lifetimes"});
  SimulationSettings s;
  if (obj.contains("t_max_periods")) s.t_max_periods = number(obj, path, "t_max_periods");
  if (obj.contains("steps_per_period")) s.step.steps_per_period = static_cast<int>(integer(obj, path, "steps_per_period"));
  if (obj.contains("steps_per_mech_period"))
    s.step.steps_per_mech_period = static_cast<int>(integer(obj, path, "steps_per_mech_period"));
  s.step.dt = maybe_number(obj, path, "dt");
  if (obj.contains("stride")) s.stride = integer(obj, path, "stride");
  if (obj.contains("dense_tail_periods")) s.dense_tail_periods = static_cast<int>(integer(obj, path, "dense_tail_periods"));
  if (obj.contains("average_periods")) s.average_periods = static_cast<int>(integer(obj, path, "average_periods"));
  if (obj.contains("divergence_factor")) s.divergence_factor = number(obj, path, "divergence_factor");
  if (obj.contains("probe_horizon_lifetimes")) s.probe_horizon_lifetimes = number(obj, path, "probe_horizon_lifetimes");
  if (obj.contains("coupling")) {
    const auto& c = obj.at("coupling");
    const std::string v = c.is_string() ? c.get<std::string>() : "";
    if (v == "constant")
      s.coupling = CouplingMode::constant;
    else if (v == "mean-field")
      s.coupling = CouplingMode::mean_field;
    else
      throw ConfigError(path + ".coupling", "expected \"constant\" or \"mean-field\"");
  }
  if (obj.contains("integrator")) {
    const auto& c = obj.at("integrator");
    const std::string v = c.is_string() ? c.get<std::string>() : "";
    if (v == "magnus4-channel")
      s.integrator = Integrator::channel;
    else if (v == "rk4")
      s.integrator = Integrator::rk4;
    else
      throw ConfigError(path + ".integrator", "expected \"magnus4-channel\" or \"rk4\"");
  }
  return s;
}

TaskBlock parse_task(const json& obj) {
  const std::string path = "task";
  reject_unknown(obj, path, {"sweeps", "nu_list"});
  TaskBlock t;
  if (obj.contains("sweeps")) {
    const auto& arr = obj.at("sweeps");
    if (!arr.is_array()) throw ConfigError(path + ".sweeps", "expected an array of sweep strings");
    for (const auto& s : arr) {
      if (!s.is_string()) throw ConfigError(path + ".sweeps", "expected sweep strings like \"xi=0:3.5:30\"");
      t.sweeps.push_back(parse_sweep(s.get<std::string>()));
    }
  }
  if (obj.contains("nu_list")) {
    const auto& arr = obj.at("nu_list");
    if (!arr.is_array() || arr.empty()) throw ConfigError(path + ".nu_list", "expected a non-empty array of numbers");
    t.nu_list.clear();
    for (const auto& v : arr) {
      if (!v.is_number()) throw ConfigError(path + ".nu_list", "expected numbers");
      t.nu_list.push_back(v.get<double>());
    }
  }
  return t;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::vector<double> SweepSpec::values() const {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    out[static_cast<std::size_t>(i)] =
        scale == SweepScale::log ? std::exp(std::log(start) + f * (std::log(stop) - std::log(start)))
                                 : start + f * (stop - start);
  }
  out.front() = start;
  out.back() = stop;
  return out;
}

std::string SweepSpec::to_string() const {
  std::string s = parameter + "=" + format_double(start) + ":" + format_double(stop) + ":" + std::to_string(count);
  if (scale == SweepScale::log) s += ":log";
  return s;
}

SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("sweep", "expected name=start:stop:count[:log], got \"" + text + "\"");
  SweepSpec spec;
  spec.parameter = text.substr(0, eq);
  std::vector<std::string> parts;
  std::stringstream rest(text.substr(eq + 1));
  for (std::string part; std::getline(rest, part, ':');) parts.push_back(part);
  if (parts.size() != 3 && parts.size() != 4)
    throw ConfigError("sweep", "expected name=start:stop:count[:log], got \"" + text + "\"");
  try {
    std::size_t used = 0;
    spec.start = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("start");
    spec.stop = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("stop");
    spec.count = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw ConfigError("sweep", "could not parse numbers in \"" + text + "\"");
  }
  if (parts.size() == 4) {
    if (parts[3] == "log")
      spec.scale = SweepScale::log;
    else if (parts[3] != "lin" && parts[3] != "linear")
      throw ConfigError("sweep", "unknown scale \"" + parts[3] + "\"");
  }
  if (spec.count < 2) throw ConfigError("sweep." + spec.parameter, "count must be at least 2");
  if (spec.start == spec.stop) throw ConfigError("sweep." + spec.parameter, "start and stop must differ");
  if (!std::isfinite(spec.start) || !std::isfinite(spec.stop)) throw ConfigError("sweep." + spec.parameter, "bounds must be finite");
  if (spec.scale == SweepScale::log && (spec.start <= 0.0 || spec.stop <= 0.0))
    throw ConfigError("sweep." + spec.parameter, "log sweeps need positive bounds");
  return spec;
}

RunConfig parse_config(const json& doc) {
  reject_unknown(doc, "", {"physical", "reduced", "modulation", "simulation", "task", "output", "parallel"});
  RunConfig c;
  const bool has_p = doc.contains("physical");
  const bool has_r = doc.contains("reduced");
  if (has_p == has_r) throw ConfigError("", "exactly one of \"physical\" and \"reduced\" parameter blocks is required");
  if (has_p) c.physical = parse_physical(doc.at("physical"));
  if (has_r) c.reduced = parse_reduced(doc.at("reduced"));

  if (!doc.contains("modulation")) throw ConfigError("modulation", "missing block");
  const auto& mod = doc.at("modulation");
  reject_unknown(mod, "modulation", {"xi", "nu"});
  c.modulation.xi = number(mod, "modulation", "xi");
  c.modulation.nu = number(mod, "modulation", "nu");

  if (doc.contains("simulation")) c.simulation = parse_simulation(doc.at("simulation"));
  if (doc.contains("task")) c.task = parse_task(doc.at("task"));
  if (doc.contains("output")) {
    const auto& out = doc.at("output");
    reject_unknown(out, "output", {"dir"});
    if (out.contains("dir")) {
      if (!out.at("dir").is_string()) throw ConfigError("output.dir", "expected a string");
      c.output_dir = out.at("dir").get<std::string>();
    }
  }
  if (doc.contains("parallel")) c.parallel = static_cast<int>(integer(doc, "", "parallel"));
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed config document: ") + e.what());
  }
  return parse_config(doc);
}

void validate(const RunConfig& c) {
  if (c.physical.has_value() == c.reduced.has_value())
    throw ConfigError("", "exactly one of physical and reduced parameters must be set");
  const auto check = [](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
  };
  if (c.physical) {
    const auto& p = c.physical->params;
    check(p.omega_c > 0.0, "physical.omega_c", "must be positive");
    check(p.omega_m > 0.0, "physical.omega_m", "must be positive");
    check(p.omega_l >= 0.0, "physical.omega_l", "must be non-negative");
    check(p.kappa >= 0.0, "physical.kappa", "must be non-negative");
    check(p.gamma >= 0.0, "physical.gamma", "must be non-negative");
    check(p.g >= 0.0, "physical.g", "must be non-negative");
    check(p.temperature >= 0.0, "physical.temperature", "must be non-negative");
    check(!p.power || *p.power >= 0.0, "physical.power", "must be non-negative");
    check(p.power || c.physical->G_override, "physical", "either power or G_override is required");
  }
  if (c.reduced) {
    const auto& r = *c.reduced;
    check(r.kappa >= 0.0, "reduced.kappa", "must be non-negative");
    check(r.gamma >= 0.0, "reduced.gamma", "must be non-negative");
    check(!r.n_th || *r.n_th >= 0.0, "reduced.n_th", "must be non-negative");
    check(!r.temperature || *r.temperature >= 0.0, "reduced.temperature", "must be non-negative");
    check(!r.omega_m || *r.omega_m > 0.0, "reduced.omega_m", "must be positive");
    check(r.g >= 0.0, "reduced.g", "must be non-negative");
  }
  check(c.modulation.xi >= 0.0, "modulation.xi", "must be non-negative");
  check(c.modulation.nu > 0.0, "modulation.nu", "must be positive");
  const auto& s = c.simulation;
  check(s.t_max_periods > 0.0, "simulation.t_max_periods", "must be positive");
  check(s.step.steps_per_period >= 1, "simulation.steps_per_period", "must be at least 1");
  check(s.step.steps_per_mech_period >= 1, "simulation.steps_per_mech_period", "must be at least 1");
  check(!s.step.dt || *s.step.dt > 0.0, "simulation.dt", "must be positive");
  check(s.stride >= 0, "simulation.stride", "must be non-negative");
  check(s.average_periods >= 1, "simulation.average_periods", "must be at least 1");
  check(s.dense_tail_periods >= 0, "simulation.dense_tail_periods", "must be non-negative");
  check(s.divergence_factor > 1.0, "simulation.divergence_factor", "must exceed 1");
  check(s.probe_horizon_lifetimes >= 50.0, "simulation.probe_horizon_lifetimes", "must be at least 50 cavity lifetimes");
  check(c.parallel >= 1, "parallel", "must be at least 1");
  for (double nu : c.task.nu_list) check(nu > 0.0, "task.nu_list", "entries must be positive");
}

json to_json(const ReducedParams& r) {
  json j;
  j["delta_c_prime"] = r.delta_c_prime;
  j["G_re"] = r.G_re;
  j["G_im"] = r.G_im;
  j["kappa"] = r.kappa;
  j["gamma"] = r.gamma;
  j["xi"] = r.xi;
  j["nu"] = r.nu;
  j["n_th"] = r.n_th;
  j["g"] = r.g;
  j["E"] = r.E;
  return j;
}

json to_json(const RunConfig& c) {
  json doc;
  if (c.physical) {
    const auto& p = c.physical->params;
    json b;
    b["frequency_unit"] = "rad/s";
    b["omega_c"] = p.omega_c;
    b["omega_m"] = p.omega_m;
    b["omega_l"] = p.omega_l;
    b["kappa"] = p.kappa;
    b["gamma"] = p.gamma;
    b["g"] = p.g;
    if (p.power) b["power"] = *p.power;
    b["temperature"] = p.temperature;
    if (c.physical->G_override) b["G_override"] = *c.physical->G_override;
    doc["physical"] = b;
  } else {
    const auto& r = *c.reduced;
    json b;
    b["frequency_unit"] = "rad/s";
    b["delta_c_prime"] = r.delta_c_prime;
    b["G_re"] = r.G_re;
    b["G_im"] = r.G_im;
    b["kappa"] = r.kappa;
    b["gamma"] = r.gamma;
    if (r.n_th) b["n_th"] = *r.n_th;
    if (r.temperature) b["temperature"] = *r.temperature;
    if (r.omega_m) b["omega_m"] = *r.omega_m;
    b["g"] = r.g;
    b["E"] = r.E;
    doc["reduced"] = b;
  }
  doc["modulation"] = {{"xi", c.modulation.xi}, {"nu", c.modulation.nu}};
  const auto& s = c.simulation;
  json sim;
  sim["t_max_periods"] = s.t_max_periods;
  sim["steps_per_period"] = s.step.steps_per_period;
  sim["steps_per_mech_period"] = s.step.steps_per_mech_period;
  if (s.step.dt) sim["dt"] = *s.step.dt;
  sim["stride"] = s.stride;
  sim["dense_tail_periods"] = s.dense_tail_periods;
  sim["average_periods"] = s.average_periods;
  sim["divergence_factor"] = s.divergence_factor;
  sim["coupling"] = s.coupling == CouplingMode::constant ? "constant" : "mean-field";
  sim["integrator"] = std::string(to_string(s.integrator));
  sim["probe_horizon_lifetimes"] = s.probe_horizon_lifetimes;
  doc["simulation"] = sim;
  json task;
  task["sweeps"] = json::array();
  for (const auto& sw : c.task.sweeps) task["sweeps"].push_back(sw.to_string());
  task["nu_list"] = c.task.nu_list;
  doc["task"] = task;
  doc["output"] = {{"dir", c.output_dir.string()}};
  doc["parallel"] = c.parallel;
  return doc;
}

ReducedParams resolve(const RunConfig& c) {
  validate(c);
  ModulationParams mod = c.modulation;
  ReducedParams r;
  if (c.physical) {
    mod.nu = c.modulation.nu * c.physical->params.omega_m;
    std::optional<std::complex<double>> G;
    if (c.physical->G_override) G = std::complex<double>(*c.physical->G_override, 0.0);
    r = reduce(c.physical->params, mod, G);
  } else {
    const auto& b = *c.reduced;
    r.delta_c_prime = b.delta_c_prime;
    r.G_re = b.G_re;
    r.G_im = b.G_im;
    r.kappa = b.kappa;
    r.gamma = b.gamma;
    r.xi = mod.xi;
    r.nu = mod.nu;
    r.n_th = b.n_th ? *b.n_th : thermal_occupation(*b.omega_m, *b.temperature);
    r.g = b.g;
    r.E = b.E;
  }
  r.validate();
  return r;
}

void apply_parameter(RunConfig& c, const std::string& name, double value) {
  if (name == "xi") {
    c.modulation.xi = value;
    return;
  }
  if (name == "nu") {
    c.modulation.nu = value;
    return;
  }
  if (c.reduced) {
    auto& b = *c.reduced;
    if (name == "delta_c_prime") b.delta_c_prime = value;
    else if (name == "G" ) { b.G_re = value; b.G_im = 0.0; }
    else if (name == "G_re") b.G_re = value;
    else if (name == "G_im") b.G_im = value;
    else if (name == "kappa") b.kappa = value;
    else if (name == "gamma") b.gamma = value;
    else if (name == "g") b.g = value;
    else if (name == "E") b.E = value;
    else if (name == "n_th") { b.n_th = value; b.temperature.reset(); }
    else if (name == "temperature") {
      if (!b.omega_m) throw ConfigError("sweep.temperature", "reduced.omega_m is required to sweep temperature");
      b.temperature = value;
      b.n_th.reset();
    } else {
      throw ConfigError("sweep." + name, "not a sweepable parameter for a reduced parameter block");
    }
    return;
  }
  auto& b = *c.physical;
  auto& p = b.params;
  const double f = b.hz ? kTwoPi : 1.0;
  if (name == "delta_c") p.omega_l = p.omega_c - f * value;
  else if (name == "omega_c") { const double d = p.delta_c(); p.omega_c = f * value; p.omega_l = p.omega_c - d; }
  else if (name == "omega_l") p.omega_l = f * value;
  else if (name == "omega_m") p.omega_m = f * value;
  else if (name == "kappa") p.kappa = f * value;
  else if (name == "gamma") p.gamma = f * value;
  else if (name == "g") p.g = f * value;
  else if (name == "power") p.power = value;
  else if (name == "temperature") p.temperature = value;
  else if (name == "G_override") b.G_override = f * value;
  else throw ConfigError("sweep." + name, "not a sweepable parameter for a physical parameter block");
}

}  // namespace fmopto::harness
