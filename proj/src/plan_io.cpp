#include "mfrl/plan_io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "mfrl/errors.hpp"

namespace mfrl {

using nlohmann::json;

namespace {

void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw SchemaError(std::string(where) + ": expected a JSON object");
}

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  require_object(j, where);
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError(std::string(where) + ": unknown key \"" + key + "\"");
    }
  }
}

// Typed field access that turns nlohmann type errors into SchemaError.
template <class T>
T get(const json& j, const char* key, std::string_view where) {
  if (!j.contains(key)) throw SchemaError(std::string(where) + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string(where) + ": field \"" + key + "\" has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, std::string_view where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

void check_header(const json& j, std::string_view command) {
  require_object(j, "plan");
  const int version = get<int>(j, "version", "plan");
  if (version != kPlanVersion) throw SchemaError("plan: unsupported version " + std::to_string(version));
  const auto cmd = get<std::string>(j, "command", "plan");
  if (cmd != command) throw SchemaError("plan: command is \"" + cmd + "\", expected \"" + std::string(command) + "\"");
}

TrigPolynomial poly_from_json(const json& j, std::string_view where) {
  check_keys(j, where, {"cos", "sin"});
  return {get_or<std::vector<double>>(j, "cos", {}, where), get_or<std::vector<double>>(j, "sin", {}, where)};
}

json poly_to_json(const TrigPolynomial& p) { return {{"cos", p.cos_coeffs}, {"sin", p.sin_coeffs}}; }

std::vector<int> int_list(const json& j, const char* key, std::string_view where) {
  return get<std::vector<int>>(j, key, where);
}

}  // namespace

ProblemSpec problem_from_json(const json& j) {
  constexpr std::string_view where = "problem";
  require_object(j, where);
  const double a = get_or<double>(j, "a", 0.0, where);
  const double T = get_or<double>(j, "T", 1.0, where);
  if (j.contains("benchmark")) {
    check_keys(j, where, {"benchmark", "a", "T", "value", "lambda"});
    const auto name = get<std::string>(j, "benchmark", where);
    if (name != "constant" && j.contains("value")) throw SchemaError("problem: \"value\" only applies to constant");
    if (name != "quadratic" && j.contains("lambda")) throw SchemaError("problem: \"lambda\" only applies to quadratic");
    if (name == "null") return null_benchmark(a, T);
    if (name == "constant") return constant_benchmark(get<double>(j, "value", where), a, T);
    if (name == "linear") return linear_benchmark(a, T);
    if (name == "quadratic") return quadratic_benchmark(get_or<double>(j, "lambda", 0.5, where), a, T);
    throw SchemaError("problem: unknown benchmark \"" + name + "\"");
  }
  check_keys(j, where, {"hamiltonian", "terminal", "a", "T"});
  ProblemSpec p;
  p.a = a;
  p.T = T;
  const auto& h = j.contains("hamiltonian") ? j.at("hamiltonian") : throw SchemaError("problem: missing \"hamiltonian\"");
  check_keys(h, "hamiltonian", {"family", "lambda", "drift_kernel", "running_kernel"});
  try {
    p.hamiltonian.family = hamiltonian_family_from_string(get<std::string>(h, "family", "hamiltonian"));
  } catch (const InputDomainError& e) {
    throw SchemaError(std::string("hamiltonian: ") + e.what());
  }
  p.hamiltonian.lambda = get_or<double>(h, "lambda", 0.0, "hamiltonian");
  if (h.contains("drift_kernel")) p.hamiltonian.drift_kernel = poly_from_json(h.at("drift_kernel"), "drift_kernel");
  if (h.contains("running_kernel")) {
    p.hamiltonian.running_kernel = poly_from_json(h.at("running_kernel"), "running_kernel");
  }
  const auto& t = j.contains("terminal") ? j.at("terminal") : throw SchemaError("problem: missing \"terminal\"");
  check_keys(t, "terminal", {"g", "h"});
  if (t.contains("g")) p.terminal.g = poly_from_json(t.at("g"), "g");
  if (t.contains("h")) p.terminal.h = poly_from_json(t.at("h"), "h");
  return p;
}

json problem_to_json(const ProblemSpec& p) {
  return {{"hamiltonian",
           {{"family", to_string(p.hamiltonian.family)},
            {"lambda", p.hamiltonian.lambda},
            {"drift_kernel", poly_to_json(p.hamiltonian.drift_kernel)},
            {"running_kernel", poly_to_json(p.hamiltonian.running_kernel)}}},
          {"terminal", {{"g", poly_to_json(p.terminal.g)}, {"h", poly_to_json(p.terminal.h)}}},
          {"a", p.a},
          {"T", p.T}};
}

Measure measure_from_json(const json& j) {
  constexpr std::string_view where = "measure";
  require_object(j, where);
  const auto type = get<std::string>(j, "type", where);
  if (type == "empirical") {
    check_keys(j, where, {"type", "dim", "atoms"});
    const int dim = get_or<int>(j, "dim", 1, where);
    const auto atoms = get<std::vector<double>>(j, "atoms", where);
    if (dim < 1) throw SchemaError("measure: dim must be positive");
    if (atoms.empty() || atoms.size() % static_cast<std::size_t>(dim) != 0) {
      throw SchemaError("measure: atom count is not a positive multiple of dim");
    }
    try {
      return EmpiricalMeasure(dim, atoms);
    } catch (const InputDomainError& e) {
      throw SchemaError(std::string("measure: ") + e.what());
    }
  }
  if (type == "grid") {
    check_keys(j, where, {"type", "values"});
    try {
      return GridDensity(get<std::vector<double>>(j, "values", where));
    } catch (const InputDomainError& e) {
      throw SchemaError(std::string("measure: ") + e.what());
    }
  }
  throw SchemaError("measure: unknown type \"" + type + "\"");
}

json measure_to_json(const Measure& mu) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&mu)) {
    return {{"type", "empirical"},
            {"dim", e->dim()},
            {"atoms", std::vector<double>(e->coords().begin(), e->coords().end())}};
  }
  const auto& g = std::get<GridDensity>(mu);
  return {{"type", "grid"}, {"values", std::vector<double>(g.values().begin(), g.values().end())}};
}

SolvePlan solve_plan_from_json(const json& j) {
  check_header(j, "solve");
  check_keys(j, "plan", {"version", "command", "problem", "solver", "N", "mesh", "n_t", "save_every", "cfl", "t",
                         "atoms", "n_paths", "n_steps", "seed"});
  SolvePlan plan;
  plan.problem = problem_from_json(j.contains("problem") ? j.at("problem") : throw SchemaError("plan: missing \"problem\""));
  plan.solver = get_or<std::string>(j, "solver", "fd", "plan");
  if (plan.solver == "fd") {
    plan.n_particles = get<int>(j, "N", "plan");
    plan.mesh = get<int>(j, "mesh", "plan");
    plan.fd.n_t = get_or<int>(j, "n_t", 0, "plan");
    plan.fd.save_every = get_or<int>(j, "save_every", 0, "plan");
    plan.fd.cfl = get_or<double>(j, "cfl", plan.fd.cfl, "plan");
    for (const char* k : {"t", "atoms", "n_paths", "n_steps", "seed"}) {
      if (j.contains(k)) throw SchemaError(std::string("plan: \"") + k + "\" does not apply to the fd solver");
    }
  } else if (plan.solver == "mc") {
    plan.atoms = get<std::vector<double>>(j, "atoms", "plan");
    plan.n_particles = static_cast<int>(plan.atoms.size());
    plan.t = get_or<double>(j, "t", 0.0, "plan");
    plan.n_paths = get_or<std::size_t>(j, "n_paths", plan.n_paths, "plan");
    plan.n_steps = get_or<int>(j, "n_steps", plan.n_steps, "plan");
    plan.seed = get_or<std::uint64_t>(j, "seed", 0, "plan");
    for (const char* k : {"N", "mesh", "n_t", "save_every", "cfl"}) {
      if (j.contains(k)) throw SchemaError(std::string("plan: \"") + k + "\" does not apply to the mc solver");
    }
  } else {
    throw SchemaError("plan: solver must be \"fd\" or \"mc\"");
  }
  return plan;
}

ExperimentPlan rate_plan_from_json(const json& j) {
  check_header(j, "rate");
  check_keys(j, "plan", {"version", "command", "problem", "N_list", "time_points", "configs_per_n", "n_paths",
                         "n_steps", "seed", "reference", "reference_modes", "m_ref", "false_alarm"});
  ExperimentPlan plan;
  plan.problem = problem_from_json(j.contains("problem") ? j.at("problem") : throw SchemaError("plan: missing \"problem\""));
  plan.n_list = int_list(j, "N_list", "plan");
  if (plan.n_list.size() < 3) throw SchemaError("plan: N_list needs at least 3 entries");
  plan.time_points = get_or<int>(j, "time_points", plan.time_points, "plan");
  plan.configs_per_n = get_or<int>(j, "configs_per_n", plan.configs_per_n, "plan");
  plan.n_paths = get_or<std::size_t>(j, "n_paths", plan.n_paths, "plan");
  plan.n_steps = get_or<int>(j, "n_steps", plan.n_steps, "plan");
  plan.seed = get_or<std::uint64_t>(j, "seed", 0, "plan");
  const auto ref = get_or<std::string>(j, "reference", "spectral", "plan");
  if (ref == "spectral") {
    plan.reference = ReferenceMethod::Spectral;
  } else if (ref == "surrogate") {
    plan.reference = ReferenceMethod::Surrogate;
  } else {
    throw SchemaError("plan: reference must be \"spectral\" or \"surrogate\"");
  }
  plan.reference_modes = get_or<int>(j, "reference_modes", plan.reference_modes, "plan");
  plan.m_ref = get_or<std::size_t>(j, "m_ref", 0, "plan");
  plan.false_alarm = get_or<double>(j, "false_alarm", plan.false_alarm, "plan");
  return plan;
}

ProbePlan probe_plan_from_json(const json& j) {
  check_header(j, "probe");
  check_keys(j, "plan",
             {"version", "command", "problem", "N", "mesh", "epsilons", "targets", "time_stride", "shift_subdivisions"});
  ProbePlan plan;
  plan.problem = problem_from_json(j.contains("problem") ? j.at("problem") : throw SchemaError("plan: missing \"problem\""));
  plan.n_particles = get<int>(j, "N", "plan");
  plan.mesh = get<int>(j, "mesh", "plan");
  plan.epsilons = get<std::vector<double>>(j, "epsilons", "plan");
  plan.search.time_stride = get_or<int>(j, "time_stride", 1, "plan");
  plan.search.shift_subdivisions = get_or<int>(j, "shift_subdivisions", 1, "plan");
  if (!j.contains("targets") || !j.at("targets").is_array()) throw SchemaError("plan: \"targets\" must be an array");
  for (const auto& t : j.at("targets")) {
    check_keys(t, "target", {"t", "z", "measure"});
    ConvolutionTarget tg;
    tg.t = get<double>(t, "t", "target");
    tg.z = get_or<double>(t, "z", 0.0, "target");
    tg.mu = measure_from_json(t.contains("measure") ? t.at("measure") : throw SchemaError("target: missing \"measure\""));
    plan.targets.push_back(std::move(tg));
  }
  return plan;
}

ComplexityPlan complexity_plan_from_json(const json& j) {
  check_header(j, "complexity");
  check_keys(j, "plan", {"version", "command", "measure", "N_list", "n_trials", "seed"});
  ComplexityPlan plan;
  if (j.contains("measure")) {
    auto mu = measure_from_json(j.at("measure"));
    if (!std::holds_alternative<GridDensity>(mu)) throw SchemaError("plan: the sampled measure must be a grid density");
    plan.density = std::get<GridDensity>(std::move(mu));
  }
  plan.n_list = int_list(j, "N_list", "plan");
  if (plan.n_list.size() < 3) throw SchemaError("plan: N_list needs at least 3 entries");
  plan.n_trials = get_or<int>(j, "n_trials", plan.n_trials, "plan");
  plan.seed = get_or<std::uint64_t>(j, "seed", 0, "plan");
  return plan;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace mfrl
