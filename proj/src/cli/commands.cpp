#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "cli/config.hpp"
#include "cli/output.hpp"
#include "flowseek/analysis.hpp"
#include "flowseek/errors.hpp"
#include "json.hpp"

namespace flowseek::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string run_name(std::size_t i) {
  std::string n = std::to_string(i);
  return "run_" + std::string(n.size() < 3 ? 3 - n.size() : 0, '0') + n;
}

// ---------------------------------------------------------------- simulate

struct RunOutcome {
  json summary;
  Termination reason = Termination::TimeLimit;
  bool quasi_steady_violated = false;
};

RunOutcome simulate_one(std::size_t index, const AgentState& init, const Field& field,
                        const RunConfig& cfg, const SimulationOptions& opts, const fs::path& dir) {
  const Trajectory traj = simulate(init, field, cfg.gain, cfg.sensing, opts);
  const std::string name = run_name(index);
  const Vec2 src = cfg.field.source;

  double r_min = kNaN, r_max = kNaN, q_drift = kNaN;
  const double q0 = traj.samples.front().q;
  {
    CsvWriter csv(dir / (name + ".csv"), "t,x,y,theta,r,eta,psi,m,s,G,Omega,Q");
    for (const TrajectorySample& s : traj.samples) {
      const Vec2 rel = s.state.position() - src;
      const double r = norm(rel);
      const double eta = std::atan2(rel.y, rel.x);
      const double psi = wrap_to_pi(kPi - (s.state.theta - eta));
      csv.row({s.t, s.state.x, s.state.y, wrap_to_pi(s.state.theta), r, eta, psi, s.sensed.m,
               s.sensed.s, s.gain, s.omega, s.q});
      r_min = std::isnan(r_min) ? r : std::min(r_min, r);
      r_max = std::isnan(r_max) ? r : std::max(r_max, r);
      if (std::isfinite(s.q) && std::isfinite(q0) && q0 != 0.0) {
        const double d = std::abs(s.q - q0) / std::abs(q0);
        q_drift = std::isnan(q_drift) ? d : std::max(q_drift, d);
      }
    }
  }

  const TrajectorySample& last = traj.samples.back();
  json summary = {
      {"run", name},
      {"csv", name + ".csv"},
      {"initial", {{"x", init.x}, {"y", init.y}, {"theta", init.theta}}},
      {"termination", to_string(traj.reason)},
      {"detail", traj.detail},
      {"t_final", last.t},
      {"r_min", number_or_null(r_min)},
      {"r_max", number_or_null(r_max)},
      {"r_escape", traj.r_escape},
      {"q_initial", number_or_null(q0)},
      {"q_drift", number_or_null(q_drift)},
      {"quasi_steady_violated", traj.quasi_steady_violated},
      {"gain_saturated", traj.saturated},
  };
  json sidecar = summary;
  sidecar["integrator"] = traj.integrator;
  sidecar["dt"] = traj.dt;
  sidecar["samples"] = traj.samples.size();
  sidecar["gain"] = {{"kind", to_string(cfg.gain.kind)}, {"g0", cfg.gain.g0},
                     {"m_floor", cfg.gain.m_floor}};
  sidecar["speed"] = cfg.agent.speed;
  write_json(dir / (name + ".json"), sidecar);
  return {summary, traj.reason, traj.quasi_steady_violated};
}

int cmd_simulate(const RunConfig& cfg, unsigned jobs, std::ostream& out, std::ostream& err) {
  cfg.validate();
  const auto field = make_field(cfg.field);
  const std::vector<AgentState> inits = initial_states(cfg);
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);

  SimulationOptions opts;
  opts.speed = cfg.agent.speed;
  opts.dt = cfg.integration.dt;
  opts.t_end = cfg.integration.t_end;
  opts.r_stop = cfg.integration.r_stop;
  opts.r_escape = cfg.integration.r_escape;
  opts.record_every = cfg.integration.record_every;
  opts.source = cfg.field.source;

  std::vector<RunOutcome> outcomes(inits.size());
  std::vector<std::exception_ptr> failures(inits.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < inits.size(); i = next++) {
      try {
        outcomes[i] = simulate_one(i, inits[i], *field, cfg, opts, dir);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, inits.size()));
  std::vector<std::future<void>> pool;
  for (unsigned w = 0; w < n_workers; ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  json runs = json::array();
  std::map<std::string, int> counts;
  bool sensing_failed = false;
  std::size_t fast_runs = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const RunOutcome& o = outcomes[i];
    runs.push_back(o.summary);
    ++counts[std::string(to_string(o.reason))];
    sensing_failed = sensing_failed || o.reason == Termination::SensingFailure;
    fast_runs += o.quasi_steady_violated ? 1 : 0;
    out << run_name(i) << ": " << o.summary["termination"].get<std::string>() << '\n';
  }
  if (fast_runs > 0) {
    err << "warning: in " << fast_runs << " of " << outcomes.size()
        << " runs the sensor moved more than a tenth of a wavelength per signal period "
           "(quasi-steady sensing assumption violated)\n";
  }
  write_json(dir / "summary.json",
             {{"config", to_json(cfg)}, {"runs", runs}, {"terminations", counts}});
  return sensing_failed ? kExitRuntime : kExitOk;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string kind = "static";
  double rho = 2.0;
  double ell = 6.5;
  double speed = 1.0;
  std::vector<double> q_values;
  double extent = 15.0;
  int grid_n = 121;
  std::string out_dir = "flowseek_analysis";
};

json bounds_json(const RadialBounds& b) {
  json j = {{"kind", to_string(b.kind)}, {"r_min", b.r_min}, {"r_max", number_or_null(b.r_max)}};
  if (b.kind == RadialBounds::Kind::Conditional) j["r_outer"] = b.r_outer;
  return j;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const GainKind kind = parse_gain_kind(a.kind);
  if (!(a.rho > 0.0) || !(a.ell > 0.0) || !(a.speed > 0.0)) {
    throw ConfigError("analyze: rho, ell and speed must be positive");
  }
  if (!(a.extent > 0.0) || a.grid_n < 2) {
    throw ConfigError("analyze: extent must be positive and grid-n >= 2");
  }
  PortraitGrid grid{-a.extent, a.extent, -a.extent, a.extent, a.grid_n, a.grid_n};
  const PortraitReport report = portrait(kind, a.rho, a.ell, grid, a.speed);
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);

  json fps = json::array();
  for (const FixedPoint& fp : report.fixed_points) {
    json eig = json::array();
    for (const auto& l : fp.eigenvalues) eig.push_back({{"re", l.real()}, {"im", l.imag()}});
    fps.push_back({{"r", fp.r_star},
                   {"psi", fp.psi_star},
                   {"kind", to_string(fp.kind)},
                   {"eigenvalues", eig},
                   {"closed_form_magnitude",
                    closed_form_eigenvalue_magnitude(kind, fp, a.rho, a.ell, a.speed)}});
  }

  {
    CsvWriter csv(dir / "q_grid.csv", "r_cos_psi,r_sin_psi,Q");
    const double du = (grid.u_max - grid.u_min) / (grid.nu - 1);
    const double dv = (grid.v_max - grid.v_min) / (grid.nv - 1);
    for (int j = 0; j < grid.nv; ++j) {
      for (int i = 0; i < grid.nu; ++i) {
        csv.row({grid.u_min + i * du, grid.v_min + j * dv,
                 report.q_grid[static_cast<std::size_t>(j) * grid.nu + i]});
      }
    }
  }

  json doc = {{"kind", to_string(kind)},
              {"rho", a.rho},
              {"ell", a.ell},
              {"speed", a.speed},
              {"regime", report.classification},
              {"fixed_points", fps},
              {"critical_q", report.has_critical_q ? json(report.critical_q) : json(nullptr)},
              {"relative_equilibria", report.relative_equilibria},
              {"q_grid_csv", "q_grid.csv"}};

  if (!report.separatrix.empty()) {
    CsvWriter csv(dir / "separatrix.csv", "r_cos_psi,r_sin_psi");
    for (const auto& p : report.separatrix) csv.row({p[0], p[1]});
    doc["separatrix_csv"] = "separatrix.csv";
  }

  json curves = json::array();
  for (std::size_t k = 0; k < a.q_values.size(); ++k) {
    const double q = a.q_values[k];
    const RadialBounds b = radial_bounds(kind, q, a.rho, a.ell);
    const double r_hi = std::isfinite(b.r_max) ? std::max(b.r_max, b.r_outer) * 1.2 : 2.0 * a.extent;
    const std::string name = "rdot_" + std::to_string(k) + ".csv";
    CsvWriter csv(dir / name, "r,rdot_plus,rdot_minus");
    const int n = 2000;
    for (int i = 1; i <= n; ++i) {
      const double r = r_hi * i / n;
      try {
        const double v = radial_velocity(kind, r, q, a.rho, a.ell, a.speed);
        csv.row({r, v, -v});
      } catch (const DomainError&) {
        // r outside the permitted excursion for this Q
      }
    }
    curves.push_back({{"q", q}, {"csv", name}, {"bounds", bounds_json(b)}});
  }
  doc["rdot_curves"] = curves;
  write_json(dir / "analysis.json", doc);

  out << "regime: " << report.classification << ", fixed points: " << report.fixed_points.size();
  if (report.has_critical_q) out << ", |Q_cr| = " << format_double(report.critical_q);
  out << '\n';
  return kExitOk;
}

// -------------------------------------------------------------------- scan

struct ScanArgs {
  double rho = 2.0;
  double ell_min = 4.0;
  double ell_max = 8.0;
  double step = 0.1;
  std::string out_dir;
};

int cmd_scan(const ScanArgs& a, std::ostream& out) {
  if (!(a.rho > 0.0) || !(a.ell_min > 0.0) || !(a.ell_max > a.ell_min) || !(a.step > 0.0)) {
    throw ConfigError("scan: need rho > 0, 0 < ell-min < ell-max and step > 0");
  }
  const BifurcationScan scan = bifurcation_scan(a.rho, a.ell_min, a.ell_max, a.step);
  if (!a.out_dir.empty()) {
    const fs::path dir = a.out_dir;
    fs::create_directories(dir);
    {
      CsvWriter csv(dir / "scan.csv", "ell,n_fixed_points");
      for (const auto& [ell, n] : scan.samples) csv.row({ell, static_cast<double>(n)});
    }
    write_json(dir / "scan.json", {{"rho", a.rho},
                                   {"ell_min", a.ell_min},
                                   {"ell_max", a.ell_max},
                                   {"step", a.step},
                                   {"ell_critical", scan.ell_critical},
                                   {"scan_csv", "scan.csv"}});
  }
  out << "ell_critical = " << format_double(scan.ell_critical) << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ fields

struct FieldsArgs {
  std::string config;
  std::string out_dir;
  std::vector<double> source;
  GridSpec grid{-10.0, -10.0, 81, 81, 0.25, 0.25};
  std::uint32_t nt = 32;
  double m_floor = 1e-9;
};

int cmd_fields(const FieldsArgs& a, std::ostream& out) {
  RunConfig cfg = load_config(a.config);
  if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
  Vec2 source = cfg.field.source;
  if (!a.source.empty()) source = {a.source.at(0), a.source.at(1)};
  if (!(a.m_floor > 0.0)) throw ConfigError("fields: m-floor must be positive");

  GridFieldBundle bundle;
  if (auto b = field_bundle(cfg.field)) {
    bundle = std::move(*b);
  } else {
    if (!(cfg.field.ell > 0.0)) throw ConfigError("field.ell must be positive");
    if (a.nt < 8) throw ConfigError("fields: nt must be >= 8");
    const RadialField field({cfg.field.ell});
    try {
      bundle = sample_field(field, a.grid, a.nt);
    } catch (const FormatError& e) {
      throw ConfigError(std::string("fields grid: ") + e.what());
    }
  }
  const SpectralGrids g = spectral_grids(bundle, source, a.m_floor);

  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  std::size_t masked = 0;
  {
    CsvWriter csv(dir / "fields.csv", "x,y,m,phi,gx,gy,delta");
    for (std::uint32_t j = 0; j < g.ny; ++j) {
      for (std::uint32_t i = 0; i < g.nx; ++i) {
        const std::size_t k = g.index(j, i);
        const Vec2 x = g.node(j, i);
        if (std::isnan(g.delta[k])) ++masked;
        csv.row({x.x, x.y, g.m[k], g.phi[k], g.grad_phi[k].x, g.grad_phi[k].y, g.delta[k]});
      }
    }
  }
  write_json(dir / "fields.json", {{"config", to_json(cfg)},
                                   {"source", {source.x, source.y}},
                                   {"nx", g.nx},
                                   {"ny", g.ny},
                                   {"nt", bundle.nt},
                                   {"masked", masked},
                                   {"suspect_wraps", g.suspect_wraps},
                                   {"csv", "fields.csv"}});
  out << "wrote " << (dir / "fields.csv").string() << " (" << g.nx * g.ny << " nodes, " << masked
      << " masked)\n";
  return kExitOk;
}

// -------------------------------------------------------------- synth-wake

struct SynthArgs {
  SynthWakeParams params;
  std::optional<double> dt;
  std::string out_path;
};

int cmd_synth_wake(SynthArgs a, std::ostream& out) {
  if (a.params.nt < 8) throw ConfigError("synth-wake: nt must be >= 8");
  a.params.dt = a.dt.value_or(kTwoPi / (a.params.omega * a.params.nt));
  const GridFieldBundle bundle = synth_wake(a.params);
  const fs::path path = a.out_path;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_bundle(bundle, path);
  out << "wrote " << path.string() << " (" << bundle.nx << "x" << bundle.ny << "x" << bundle.nt
      << ")\n";
  return kExitOk;
}

void add_grid_options(CLI::App* cmd, GridSpec& g) {
  cmd->add_option("--x0", g.x0, "grid origin x")->capture_default_str();
  cmd->add_option("--y0", g.y0, "grid origin y")->capture_default_str();
  cmd->add_option("--nx", g.nx, "grid nodes along x")->capture_default_str();
  cmd->add_option("--ny", g.ny, "grid nodes along y")->capture_default_str();
  cmd->add_option("--dx", g.dx, "grid spacing x")->capture_default_str();
  cmd->add_option("--dy", g.dy, "grid spacing y")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral-phase source seeking: simulation, analysis and wake tools", "flowseek"};
  app.require_subcommand(1);

  std::string sim_config;
  std::string sim_out;
  std::optional<double> sim_dt, sim_t_end;
  std::string sim_sensing;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sim = app.add_subcommand("simulate", "integrate trajectories from a run config");
  sim->add_option("--config", sim_config, "run config JSON (or a summary.json)")->required();
  sim->add_option("--out", sim_out, "output directory, overrides output.dir");
  sim->add_option("--dt", sim_dt, "time step, overrides integration.dt");
  sim->add_option("--t-end", sim_t_end, "final time, overrides integration.t_end");
  sim->add_option("--sensing", sim_sensing, "windowed or analytic, overrides sensing.mode")
      ->check(CLI::IsMember({"windowed", "analytic"}));
  sim->add_option("--jobs", jobs, "parallel trajectories")->capture_default_str();

  AnalyzeArgs an;
  auto* ana = app.add_subcommand("analyze", "phase-portrait report for the radial field");
  ana->add_option("--kind", an.kind, "static, proportional or inverse")->capture_default_str();
  ana->add_option("--rho", an.rho, "gain length scale V/G0")->capture_default_str();
  ana->add_option("--ell", an.ell, "field decay length")->capture_default_str();
  ana->add_option("--speed", an.speed, "sensor speed V")->capture_default_str();
  ana->add_option("--q", an.q_values, "Q values for (r, rdot) curves");
  ana->add_option("--extent", an.extent, "half-width of the Q grid")->capture_default_str();
  ana->add_option("--grid-n", an.grid_n, "Q grid nodes per axis")->capture_default_str();
  ana->add_option("--out", an.out_dir, "output directory")->capture_default_str();

  ScanArgs sc;
  auto* scn = app.add_subcommand("scan", "locate the proportional-gain saddle-node in ell");
  scn->add_option("--rho", sc.rho, "gain length scale")->capture_default_str();
  scn->add_option("--ell-min", sc.ell_min)->capture_default_str();
  scn->add_option("--ell-max", sc.ell_max)->capture_default_str();
  scn->add_option("--step", sc.step)->capture_default_str();
  scn->add_option("--out", sc.out_dir, "write scan.csv and scan.json here");

  FieldsArgs fa;
  auto* fld = app.add_subcommand("fields", "export m, phi, grad phi and delta grids");
  fld->add_option("--config", fa.config, "config with a field section")->required();
  fld->add_option("--out", fa.out_dir, "output directory, overrides output.dir");
  fld->add_option("--source", fa.source, "source position x y")->expected(2);
  fld->add_option("--nt", fa.nt, "frames per period for analytic fields")->capture_default_str();
  fld->add_option("--m-floor", fa.m_floor, "mask threshold")->capture_default_str();
  add_grid_options(fld, fa.grid);

  SynthArgs sw;
  auto* syn = app.add_subcommand("synth-wake", "write a synthetic wake as WAVF1");
  syn->add_option("--out", sw.out_path, "output file")->required();
  syn->add_option("--amplitude", sw.params.amplitude)->capture_default_str();
  syn->add_option("--kx", sw.params.k_x, "streamwise wavenumber")->capture_default_str();
  syn->add_option("--omega", sw.params.omega)->capture_default_str();
  syn->add_option("--sigma", sw.params.sigma, "lateral width")->capture_default_str();
  syn->add_option("--decay", sw.params.decay_length, "streamwise decay length")
      ->capture_default_str();
  syn->add_option("--nt", sw.params.nt, "frames per period")->capture_default_str();
  syn->add_option("--dt", sw.dt, "frame interval, default 2 pi / (omega nt)");
  add_grid_options(syn, sw.params.grid);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) {
      RunConfig cfg = load_config(sim_config);
      if (!sim_out.empty()) cfg.output_dir = sim_out;
      if (sim_dt) cfg.integration.dt = *sim_dt;
      if (sim_t_end) cfg.integration.t_end = *sim_t_end;
      if (!sim_sensing.empty()) {
        cfg.sensing.source =
            sim_sensing == "analytic" ? SpectralSource::Analytic : SpectralSource::Windowed;
      }
      return cmd_simulate(cfg, jobs, out, err);
    }
    if (ana->parsed()) return cmd_analyze(an, out);
    if (scn->parsed()) return cmd_scan(sc, out);
    if (fld->parsed()) return cmd_fields(fa, out);
    if (syn->parsed()) return cmd_synth_wake(sw, out);
  } catch (const NoTransitionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoTransition;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace flowseek::cli
