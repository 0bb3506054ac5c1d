#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowseek/agent.hpp"
#include "flowseek/field.hpp"
#include "flowseek/sensing.hpp"
#include "flowseek/wake.hpp"
#include "json.hpp"

namespace flowseek::cli {

struct FieldSpec {
  enum class Type { Radial, Bundle, SynthWake };
  Type type = Type::Radial;
  double ell = 6.5;             // radial
  std::string bundle_path;      // bundle, stored absolute once resolved
  SynthWakeParams wake;         // synth_wake
  Vec2 source;                  // true source position, diagnostics only
};

// Initial conditions on a ray of increasing radius, all with the same bearing.
struct RadialSweep {
  int count = 5;
  double r_first = 1.0;
  double r_step = 1.0;
  double eta = 0.0;
  double psi = kPi / 2.0;
};

struct AgentSpec {
  double speed = 1.0;
  std::vector<AgentState> initial;
  std::optional<RadialSweep> sweep;
};

struct IntegrationSpec {
  double dt = 1e-3;
  double t_end = 300.0;
  double r_stop = 0.05;
  std::optional<double> r_escape;
  int record_every = 10;
};

struct RunConfig {
  FieldSpec field;
  GainLaw gain;
  AgentSpec agent;
  IntegrationSpec integration;
  SensingConfig sensing{32, 0.01, 1e-9, SpectralSource::Windowed};
  std::string output_dir = "flowseek_out";

  void validate() const;  // throws ConfigError
};

// Accepts either a bare config or a document with the config under "config"
// (as embedded in summary.json). Relative bundle paths resolve against
// base_dir. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Every field, defaults included; parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

std::vector<AgentState> initial_states(const RunConfig& config);
std::shared_ptr<const Field> make_field(const FieldSpec& spec);
// The gridded form of a field spec (synth_wake or bundle); nullopt for radial.
std::optional<GridFieldBundle> field_bundle(const FieldSpec& spec);

}  // namespace flowseek::cli
