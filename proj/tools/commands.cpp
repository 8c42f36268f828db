#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "obliq/error.hpp"
#include "obliq/io.hpp"

namespace obliq::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Missing files, unreadable config, bad flag values.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json diagnostic(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << dump(diagnostic("config", e.what()));
    return config_error;
  } catch (const FormatError& e) {
    err << dump(diagnostic(e.kind(), e.what()));
    return config_error;
  } catch (const json::exception& e) {
    err << dump(diagnostic("format", e.what()));
    return config_error;
  } catch (const ConvergenceError& e) {
    json d = diagnostic(e.kind(), e.what());
    d["error"]["previous"] = e.previous();
    d["error"]["last"] = e.last();
    err << dump(d);
    return solver_failure;
  } catch (const SolverError& e) {
    err << dump(diagnostic(e.kind(), e.what()));
    return solver_failure;
  } catch (const Error& e) {
    err << dump(diagnostic(e.kind(), e.what()));
    return validation_failure;
  } catch (const fs::filesystem_error& e) {
    err << dump(diagnostic("io", e.what()));
    return config_error;
  }
}

json load_config(const std::string& path) {
  if (path.empty()) throw ConfigError("missing --config");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

// Files named in a config are relative to the config's directory.
fs::path resolve(const std::string& config, const std::string& file) {
  const fs::path p(file);
  if (p.is_absolute()) return p;
  return fs::path(config).parent_path() / p;
}

SampledPath read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open '" + p.string() + "'");
  return io::path_from_csv(in);
}

void write_file(const CommandOptions& o, const std::string& name, const std::string& content) {
  const fs::path dir(o.out_dir.empty() ? "." : o.out_dir);
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + (dir / name).string() + "'");
  f << content;
  if (!f) throw ConfigError("write failed for '" + (dir / name).string() + "'");
}

std::size_t unsigned_field(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned()) throw FormatError(std::string(key) + ": expected a nonnegative integer");
  return j[key].get<std::size_t>();
}

SimulationOptions sim_options(const json& cfg, const CommandOptions& o) {
  SimulationOptions s;
  std::string method = cfg.value("method", std::string("exact"));
  if (o.method) method = *o.method;
  try {
    s.method = parse_solve_method(method);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  s.level = o.level ? *o.level : unsigned_field(cfg, "level", 0);
  s.grid_tol = o.tol ? *o.tol : cfg.value("tol", s.grid_tol);
  s.max_iter = unsigned_field(cfg, "max_iter", s.max_iter);
  return s;
}

std::uint64_t seed_field(const json& j, std::uint64_t fallback) {
  if (!j.contains("seed")) return fallback;
  if (!j["seed"].is_number_unsigned()) throw FormatError("seed: expected an unsigned 64-bit integer");
  return j["seed"].get<std::uint64_t>();
}

// {"start", "axis" (one-based), "slope", "horizon"}: one axis-parallel segment.
RegularPath linear_from_json(const json& j) {
  const Vector start = io::vector_from_json(j.at("start"));
  const std::size_t axis = j.at("axis").get<std::size_t>();
  if (axis == 0 || axis > static_cast<std::size_t>(start.size()))
    throw FormatError("linear.axis: expected a one-based component index");
  const double horizon = j.at("horizon").get<double>();
  return RegularPath(start, {0.0, horizon}, {axis - 1}, {j.at("slope").get<double>()});
}

struct Driver {
  std::optional<RegularPath> regular;
  std::optional<SampledPath> sampled;
};

Driver load_driver(const json& cfg, const CommandOptions& o) {
  Driver d;
  if (cfg.contains("path"))
    d.regular = io::regular_path_from_json(cfg["path"]);
  else if (cfg.contains("linear"))
    d.regular = linear_from_json(cfg["linear"]);
  else if (cfg.contains("path_csv"))
    d.sampled = read_csv(resolve(o.config, cfg["path_csv"].get<std::string>()));
  else
    throw FormatError("expected one of 'path', 'linear', 'path_csv'");
  return d;
}

SampledPath on_grid(const RegularPath& x, std::size_t steps) {
  return x.sample(union_times(uniform_grid(x.horizon(), steps), x.breakpoints()));
}

// Simulated trajectories are written on the driving grid unless "output" is "full".
bool full_output(const json& cfg) {
  const std::string mode = cfg.value("output", std::string("grid"));
  if (mode != "grid" && mode != "full") throw FormatError("output: expected \"grid\" or \"full\"");
  return mode == "full";
}

SkorokhodSolution on_times(SkorokhodSolution sol, const std::vector<double>& times) {
  sol.z = resample(sol.z, times);
  sol.l = resample(sol.l, times);
  return sol;
}

ParticleSystemSolution on_times(ParticleSystemSolution sol, const std::vector<double>& times) {
  sol.y = resample(sol.y, times);
  sol.l = resample(sol.l, times);
  sol.z = resample(sol.z, times);
  sol.x = resample(sol.x, times);
  return sol;
}

std::size_t grid_steps(const json& cfg) { return unsigned_field(cfg, "grid_steps", 10000); }

json summary(const std::string& command, const std::string& route, const SampledPath& state,
             const SampledPath& l, std::size_t phases, std::size_t events) {
  return {{"command", command},
          {"route", route},
          {"horizon", state.horizon()},
          {"samples", state.size()},
          {"phases", phases},
          {"events", events},
          {"final_state", io::vector_to_json(state.finish())},
          {"final_l", io::vector_to_json(l.finish())}};
}

int solve_skorokhod(const json& cfg, const CommandOptions& o, std::ostream& out) {
  const ReflectionMatrix r(io::matrix_from_json(cfg.at("matrix")));
  const SimulationOptions opts = sim_options(cfg, o);
  const Driver drv = load_driver(cfg, o);
  const bool exact = opts.method == SolveMethod::continuous;
  const SampledPath x = drv.regular ? on_grid(*drv.regular, grid_steps(cfg)) : *drv.sampled;

  const SkorokhodSolution sol = exact && drv.regular ? solve_regular(r, *drv.regular) : solve_sampled(r, x, opts);

  json s = summary("solve", sol.diagnostics.route, sol.z, sol.l, sol.phases.size(), sol.events.size());
  s["problem"] = "skorokhod";
  const SolutionResidual res = drv.regular ? solution_residual(r, *drv.regular, sol) : solution_residual(r, x, sol);
  s["identity_residual"] = res.identity;
  if (o.compare || cfg.value("compare", false)) {
    SimulationOptions other = opts;
    other.method = opts.method == SolveMethod::grid ? SolveMethod::continuous : SolveMethod::grid;
    const SkorokhodSolution alt = other.method == SolveMethod::continuous && drv.regular
                                      ? solve_regular(r, *drv.regular)
                                      : solve_sampled(r, x, other);
    s["sup_difference"] = {{"against", alt.diagnostics.route},
                           {"z", sup_distance(sol.z, alt.z)},
                           {"l", sup_distance(sol.l, alt.l)}};
  }
  write_file(o, "solution.csv", io::skorokhod_csv(sol));
  write_file(o, "events.json", dump(io::events_to_json(sol.events)));
  out << dump(s);
  return ok;
}

int solve_particles(const json& cfg, const CommandOptions& o, std::ostream& out) {
  const CollisionParams q = io::params_from_json(cfg.at("params"));
  const SimulationOptions opts = sim_options(cfg, o);
  const Driver drv = load_driver(cfg, o);
  const bool linear = cfg.contains("linear");

  const auto run = [&](SolveMethod method) {
    if (method == SolveMethod::continuous && drv.regular) {
      if (!linear) return solve_competing(q, *drv.regular);
      const RegularPath& p = *drv.regular;
      return solve_regular_linear(q, p.start(), p.axes()[0], p.slopes()[0], p.horizon());
    }
    SimulationOptions so = opts;
    so.method = method;
    return solve_competing(q, drv.regular ? on_grid(*drv.regular, grid_steps(cfg)) : *drv.sampled, so);
  };
  const ParticleSystemSolution sol = run(opts.method);

  json s = summary("solve", sol.route, sol.y, sol.l, sol.phases.size(), sol.events.size());
  s["problem"] = "particles";
  if (o.compare || cfg.value("compare", false)) {
    const ParticleSystemSolution alt =
        run(opts.method == SolveMethod::grid ? SolveMethod::continuous : SolveMethod::grid);
    s["sup_difference"] = {{"against", alt.route},
                           {"y", sup_distance(sol.y, alt.y)},
                           {"l", sup_distance(sol.l, alt.l)}};
  }
  write_file(o, "solution.csv", io::particles_csv(sol));
  write_file(o, "events.json", dump(io::events_to_json(sol.events)));
  out << dump(s);
  return ok;
}

}  // namespace

int cmd_validate(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json cfg = load_config(o.config);
    if (!cfg.contains("matrix") && !cfg.contains("params")) throw FormatError("expected 'matrix' or 'params'");
    json report = json::object();
    bool accepted = true;
    if (cfg.contains("matrix")) {
      json m;
      try {
        MatrixTolerances tol;
        if (o.tol) tol.radius_margin = *o.tol;
        const ValidationReport v = validate_reflection_m_matrix(io::matrix_from_json(cfg["matrix"]), tol);
        m = {{"accepted", v.accepted}, {"failed", to_string(v.failed)}, {"reason", v.reason}};
        if (v.failed == MatrixCondition::none || v.failed == MatrixCondition::spectral_radius)
          m["spectral_radius"] = v.spectral_radius;
        accepted = accepted && v.accepted;
      } catch (const DimensionError& e) {
        m = {{"accepted", false}, {"failed", e.kind()}, {"reason", e.what()}};
        accepted = false;
      } catch (const InvalidEntryError& e) {
        m = {{"accepted", false}, {"failed", e.kind()}, {"reason", e.what()}};
        accepted = false;
      }
      report["matrix"] = m;
    }
    if (cfg.contains("params")) {
      const json& p = cfg["params"];
      ParamsReport v;
      if (p.contains("symmetric")) {
        io::params_from_json(p);
        v.accepted = true;
      } else {
        v = validate_collision_params(io::vector_from_json(p.at("qplus")), io::vector_from_json(p.at("qminus")));
      }
      report["params"] = {{"accepted", v.accepted}, {"reason", v.reason}};
      accepted = accepted && v.accepted;
    }
    report["accepted"] = accepted;
    out << dump(report);
    return accepted ? ok : validation_failure;
  });
}

int cmd_solve(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json cfg = load_config(o.config);
    const std::string problem = cfg.value("problem", std::string(cfg.contains("params") ? "particles" : "skorokhod"));
    if (problem == "skorokhod") return solve_skorokhod(cfg, o, out);
    if (problem == "particles") return solve_particles(cfg, o, out);
    throw ConfigError("unknown problem '" + problem + "'");
  });
}

int cmd_simulate_srbm(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json cfg = load_config(o.config);
    const ReflectionMatrix r(io::matrix_from_json(cfg.at("matrix")));
    BrownianSpec spec = io::brownian_from_json(cfg.at("brownian"));
    if (o.seed) spec.seed = *o.seed;
    const Vector z0 = cfg.contains("z0") ? io::vector_from_json(cfg["z0"]) : Vector::Zero(static_cast<Eigen::Index>(spec.dim));
    const SimulationOptions opts = sim_options(cfg, o);
    const SkorokhodSolution sol = simulate_srbm(r, spec, z0, opts);

    json s = summary("simulate-srbm", sol.diagnostics.route, sol.z, sol.l, sol.phases.size(), sol.events.size());
    s["seed"] = spec.seed;
    const auto grid = uniform_grid(spec.horizon, spec.steps);
    write_file(o, "srbm.csv", io::skorokhod_csv(full_output(cfg) ? sol : on_times(sol, grid)));
    write_file(o, "events.json", dump(io::events_to_json(sol.events)));
    out << dump(s);
    return ok;
  });
}

int cmd_simulate_cbp(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json cfg = load_config(o.config);
    CbpSpec spec = io::cbp_from_json(cfg.at("cbp"));
    if (o.seed) spec.seed = *o.seed;
    const SimulationOptions opts = sim_options(cfg, o);
    const ParticleSystemSolution sol = simulate_cbp(spec, opts);

    json s = summary("simulate-cbp", sol.route, sol.y, sol.l, sol.phases.size(), sol.events.size());
    s["seed"] = spec.seed;
    if (o.compare || cfg.value("cross_check", false)) {
      const GapSrbmCheck c = check_gap_srbm(spec, sol, opts);
      s["gap_srbm_discrepancy"] = {{"z", c.z_distance}, {"l", c.l_distance}, {"factor", c.factor_residual}};
    }
    const auto grid = uniform_grid(spec.horizon, spec.steps);
    write_file(o, "cbp.csv", io::particles_csv(full_output(cfg) ? sol : on_times(sol, grid)));
    write_file(o, "events.json", dump(io::events_to_json(sol.events)));
    out << dump(s);
    return ok;
  });
}

int cmd_approximate(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json cfg = load_config(o.config);
    std::optional<SampledPath> x;
    if (cfg.contains("path_csv")) {
      x = read_csv(resolve(o.config, cfg["path_csv"].get<std::string>()));
    } else if (cfg.contains("brownian")) {
      BrownianSpec spec = io::brownian_from_json(cfg["brownian"]);
      if (o.seed) spec.seed = *o.seed;
      x = sample_brownian(spec);
    } else {
      throw FormatError("expected 'path_csv' or 'brownian'");
    }
    const std::size_t level = o.level ? *o.level : unsigned_field(cfg, "level", 0);
    if (level == 0) throw ConfigError("approximation level must be given and positive");
    const RegularPath reg = standard_regular_approximation(*x, level);

    json s = {{"command", "approximate"},
              {"level", level},
              {"segments", reg.segments()},
              {"horizon", reg.horizon()},
              {"sup_error", sup_distance(reg.to_sampled(), *x)}};
    write_file(o, "regular_path.json", dump(io::regular_path_to_json(reg)));
    write_file(o, "approximation.csv", io::path_csv(reg.to_sampled()));
    out << dump(s);
    return ok;
  });
}

int cmd_verify(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json cfg = load_config(o.config);
    const std::uint64_t base_seed = o.seed ? *o.seed : seed_field(cfg, 1);

    json entries = cfg.contains("suites") ? cfg["suites"] : json("all");
    if (entries.is_string() && entries.get<std::string>() == "all") {
      entries = json::array();
      for (const auto& n : suite_names()) entries.push_back(n);
    }
    if (!entries.is_array()) throw FormatError("suites: expected an array or \"all\"");

    std::vector<std::pair<std::string, SuiteOptions>> plan;
    for (const json& e : entries) {
      const json obj = e.is_string() ? json{{"name", e}} : e;
      const std::string name = obj.at("name").get<std::string>();
      try {
        default_count(name);
      } catch (const ParameterError& ex) {
        throw ConfigError(ex.what());
      }
      SuiteOptions so;
      so.count = unsigned_field(obj, "count", 0);
      so.seed = o.seed ? *o.seed : seed_field(obj, base_seed);
      so.tol = o.tol ? *o.tol : obj.value("tol", 0.0);
      so.break_hypothesis = obj.value("break_hypothesis", false);
      plan.emplace_back(name, so);
    }

    json full = json::array();
    json brief = json::array();
    bool passed = true;
    for (const auto& [name, so] : plan) {
      const SuiteResult r = run_suite(name, so);
      json j = io::suite_to_json(r);
      j["seed"] = so.seed;
      full.push_back(j);
      brief.push_back({{"suite", name},
                       {"passed", r.passed()},
                       {"instances", r.instances.size()},
                       {"failures", r.failures},
                       {"errors", r.errors},
                       {"max_violation", r.max_violation}});
      passed = passed && r.passed();
    }
    write_file(o, "verify_report.json", dump({{"passed", passed}, {"suites", full}}));
    out << dump({{"command", "verify"}, {"passed", passed}, {"suites", brief}});
    return passed ? ok : validation_failure;
  });
}

}  // namespace obliq::cli
