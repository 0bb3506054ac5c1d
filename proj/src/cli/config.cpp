#include "cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

#include "flowseek/errors.hpp"

namespace flowseek::cli {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& j, std::string name, std::initializer_list<const char*> keys)
      : j_(j), name_(std::move(name)) {
    if (!j.is_object()) throw ConfigError(name_ + ": expected an object");
    for (const auto& [key, value] : j.items()) {
      const bool known = std::any_of(keys.begin(), keys.end(),
                                     [&key](const char* k) { return key == k; });
      if (!known) throw ConfigError(name_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const char* key) const { return j_.at(key); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  long integer(const char* key, long fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    return v.get<long>();
  }

  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return v.get<std::string>();
  }

  std::string where(const char* key) const { return name_ + "." + key; }

 private:
  const json& j_;
  std::string name_;
};

std::uint32_t to_u32(long v, const std::string& what) {
  if (v < 0 || v > static_cast<long>(UINT32_MAX)) throw ConfigError(what + " out of range");
  return static_cast<std::uint32_t>(v);
}

Vec2 parse_point(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(what + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

GridSpec parse_grid(const json& j) {
  const Section s(j, "field.grid", {"x0", "y0", "nx", "ny", "dx", "dy"});
  GridSpec g;
  g.x0 = s.number("x0", g.x0);
  g.y0 = s.number("y0", g.y0);
  g.nx = to_u32(s.integer("nx", g.nx), "field.grid.nx");
  g.ny = to_u32(s.integer("ny", g.ny), "field.grid.ny");
  g.dx = s.number("dx", g.dx);
  g.dy = s.number("dy", g.dy);
  return g;
}

FieldSpec parse_field(const json& j, const std::filesystem::path& base_dir) {
  const Section s(j, "field",
                  {"type", "ell", "path", "source", "amplitude", "k_x", "omega", "sigma",
                   "decay_length", "nt", "dt", "grid"});
  FieldSpec f;
  const std::string type = s.string("type", "");
  if (s.has("source")) f.source = parse_point(s.at("source"), "field.source");
  if (type == "radial") {
    f.type = FieldSpec::Type::Radial;
    f.ell = s.number("ell", f.ell);
  } else if (type == "bundle") {
    f.type = FieldSpec::Type::Bundle;
    std::filesystem::path p = s.string("path", "");
    if (p.empty()) throw ConfigError("field.path is required for a bundle field");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    f.bundle_path = std::filesystem::absolute(p).lexically_normal().string();
  } else if (type == "synth_wake") {
    f.type = FieldSpec::Type::SynthWake;
    SynthWakeParams& w = f.wake;
    w.amplitude = s.number("amplitude", w.amplitude);
    w.k_x = s.number("k_x", w.k_x);
    w.omega = s.number("omega", w.omega);
    w.sigma = s.number("sigma", w.sigma);
    w.decay_length = s.number("decay_length", w.decay_length);
    w.nt = to_u32(s.integer("nt", w.nt), "field.nt");
    w.dt = s.has("dt") ? s.number("dt", 0.0) : kTwoPi / (w.omega * w.nt);
    if (s.has("grid")) w.grid = parse_grid(s.at("grid"));
  } else {
    throw ConfigError("field.type must be one of radial, bundle, synth_wake");
  }
  return f;
}

GainLaw parse_gain(const json& j) {
  const Section s(j, "gain", {"kind", "g0", "m_floor"});
  GainLaw g;
  g.kind = parse_gain_kind(s.string("kind", std::string(to_string(g.kind))));
  g.g0 = s.number("g0", g.g0);
  g.m_floor = s.number("m_floor", g.m_floor);
  return g;
}

AgentSpec parse_agent(const json& j) {
  const Section s(j, "agent", {"speed", "initial", "radial_sweep"});
  AgentSpec a;
  a.speed = s.number("speed", a.speed);
  if (s.has("initial") == s.has("radial_sweep")) {
    throw ConfigError("agent: give exactly one of 'initial' or 'radial_sweep'");
  }
  if (s.has("initial")) {
    const json& list = s.at("initial");
    if (!list.is_array() || list.empty()) throw ConfigError("agent.initial must be a non-empty list");
    for (const json& item : list) {
      const Section init(item, "agent.initial[]", {"x", "y", "theta"});
      for (const char* key : {"x", "y", "theta"}) {
        if (!init.has(key)) throw ConfigError(init.where(key) + " is required");
      }
      a.initial.push_back({init.number("x", 0.0), init.number("y", 0.0), init.number("theta", 0.0), 0.0});
    }
  } else {
    const Section sw(s.at("radial_sweep"), "agent.radial_sweep",
                     {"count", "r_first", "r_step", "eta", "psi"});
    RadialSweep r;
    r.count = static_cast<int>(sw.integer("count", r.count));
    r.r_first = sw.number("r_first", r.r_first);
    r.r_step = sw.number("r_step", r.r_step);
    r.eta = sw.number("eta", r.eta);
    r.psi = sw.number("psi", r.psi);
    a.sweep = r;
  }
  return a;
}

IntegrationSpec parse_integration(const json& j) {
  const Section s(j, "integration", {"dt", "t_end", "r_stop", "r_escape", "record_every"});
  IntegrationSpec i;
  i.dt = s.number("dt", i.dt);
  i.t_end = s.number("t_end", i.t_end);
  i.r_stop = s.number("r_stop", i.r_stop);
  i.r_escape = s.optional_number("r_escape");
  i.record_every = static_cast<int>(s.integer("record_every", i.record_every));
  return i;
}

SensingConfig parse_sensing(const json& j, SensingConfig c) {
  const Section s(j, "sensing", {"mode", "n_samples", "stencil_h", "m_floor"});
  const std::string mode = s.string("mode", "windowed");
  if (mode == "windowed") {
    c.source = SpectralSource::Windowed;
  } else if (mode == "analytic") {
    c.source = SpectralSource::Analytic;
  } else {
    throw ConfigError("sensing.mode must be windowed or analytic");
  }
  c.n_samples = static_cast<int>(s.integer("n_samples", c.n_samples));
  c.stencil_h = s.number("stencil_h", c.stencil_h);
  c.m_floor = s.number("m_floor", c.m_floor);
  return c;
}

std::string_view field_type_name(FieldSpec::Type t) {
  switch (t) {
    case FieldSpec::Type::Radial:
      return "radial";
    case FieldSpec::Type::Bundle:
      return "bundle";
    case FieldSpec::Type::SynthWake:
      return "synth_wake";
  }
  return "radial";
}

}  // namespace

void RunConfig::validate() const {
  if (field.type == FieldSpec::Type::Radial && !(field.ell > 0.0)) {
    throw ConfigError("field.ell must be positive");
  }
  gain.validate();
  sensing.validate();
  if (!(agent.speed > 0.0)) throw ConfigError("agent.speed must be positive");
  if (agent.sweep) {
    const RadialSweep& s = *agent.sweep;
    if (s.count < 1) throw ConfigError("agent.radial_sweep.count must be >= 1");
    if (!(s.r_first > 0.0) || s.r_step < 0.0) {
      throw ConfigError("agent.radial_sweep needs r_first > 0 and r_step >= 0");
    }
  }
  SimulationOptions opts;
  opts.speed = agent.speed;
  opts.dt = integration.dt;
  opts.t_end = integration.t_end;
  opts.r_stop = integration.r_stop;
  opts.r_escape = integration.r_escape;
  opts.record_every = integration.record_every;
  opts.validate();
  if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  try {
    const json& j = doc.is_object() && doc.contains("config") ? doc.at("config") : doc;
    const Section top(j, "config",
                      {"field", "gain", "agent", "integration", "sensing", "output"});
    if (!top.has("field")) throw ConfigError("config: a field spec is required");
    RunConfig c;
    c.field = parse_field(top.at("field"), base_dir);
    if (top.has("gain")) c.gain = parse_gain(top.at("gain"));
    if (top.has("agent")) {
      c.agent = parse_agent(top.at("agent"));
    } else {
      c.agent.sweep = RadialSweep{};
    }
    if (top.has("integration")) c.integration = parse_integration(top.at("integration"));
    if (top.has("sensing")) c.sensing = parse_sensing(top.at("sensing"), c.sensing);
    if (top.has("output")) {
      const Section out(top.at("output"), "output", {"dir"});
      c.output_dir = out.string("dir", c.output_dir);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const RunConfig& c) {
  json field = {{"type", field_type_name(c.field.type)},
                {"source", {c.field.source.x, c.field.source.y}}};
  switch (c.field.type) {
    case FieldSpec::Type::Radial:
      field["ell"] = c.field.ell;
      break;
    case FieldSpec::Type::Bundle:
      field["path"] = c.field.bundle_path;
      break;
    case FieldSpec::Type::SynthWake: {
      const SynthWakeParams& w = c.field.wake;
      field["amplitude"] = w.amplitude;
      field["k_x"] = w.k_x;
      field["omega"] = w.omega;
      field["sigma"] = w.sigma;
      field["decay_length"] = w.decay_length;
      field["nt"] = w.nt;
      field["dt"] = w.dt;
      field["grid"] = {{"x0", w.grid.x0}, {"y0", w.grid.y0}, {"nx", w.grid.nx},
                       {"ny", w.grid.ny}, {"dx", w.grid.dx}, {"dy", w.grid.dy}};
      break;
    }
  }

  json agent = {{"speed", c.agent.speed}};
  if (c.agent.sweep) {
    const RadialSweep& s = *c.agent.sweep;
    agent["radial_sweep"] = {{"count", s.count}, {"r_first", s.r_first}, {"r_step", s.r_step},
                             {"eta", s.eta},     {"psi", s.psi}};
  } else {
    json list = json::array();
    for (const AgentState& s : c.agent.initial) {
      list.push_back({{"x", s.x}, {"y", s.y}, {"theta", s.theta}});
    }
    agent["initial"] = list;
  }

  json integration = {{"dt", c.integration.dt},
                      {"t_end", c.integration.t_end},
                      {"r_stop", c.integration.r_stop},
                      {"record_every", c.integration.record_every}};
  integration["r_escape"] = c.integration.r_escape ? json(*c.integration.r_escape) : json(nullptr);

  return {
      {"field", field},
      {"gain", {{"kind", to_string(c.gain.kind)}, {"g0", c.gain.g0}, {"m_floor", c.gain.m_floor}}},
      {"agent", agent},
      {"integration", integration},
      {"sensing",
       {{"mode", c.sensing.source == SpectralSource::Analytic ? "analytic" : "windowed"},
        {"n_samples", c.sensing.n_samples},
        {"stencil_h", c.sensing.stencil_h},
        {"m_floor", c.sensing.m_floor}}},
      {"output", {{"dir", c.output_dir}}},
  };
}

std::vector<AgentState> initial_states(const RunConfig& c) {
  if (!c.agent.sweep) return c.agent.initial;
  const RadialSweep& s = *c.agent.sweep;
  std::vector<AgentState> out;
  for (int i = 0; i < s.count; ++i) {
    AgentState st = from_polar({s.r_first + i * s.r_step, s.eta, s.psi});
    st.x += c.field.source.x;
    st.y += c.field.source.y;
    out.push_back(st);
  }
  return out;
}

std::optional<GridFieldBundle> field_bundle(const FieldSpec& spec) {
  switch (spec.type) {
    case FieldSpec::Type::Radial:
      return std::nullopt;
    case FieldSpec::Type::Bundle:
      try {
        return load_bundle(spec.bundle_path);
      } catch (const FormatError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    case FieldSpec::Type::SynthWake:
      return synth_wake(spec.wake);
  }
  return std::nullopt;
}

std::shared_ptr<const Field> make_field(const FieldSpec& spec) {
  if (spec.type == FieldSpec::Type::Radial) {
    return std::make_shared<const RadialField>(RadialFieldParams{spec.ell});
  }
  return field_from_bundle(*field_bundle(spec));
}

}  // namespace flowseek::cli
