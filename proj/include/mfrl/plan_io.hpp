#pragma once

// JSON plan files for the command-line tool. Every object is checked against
// its allowed keys; unknown keys, wrong types and missing fields raise
// SchemaError. Semantic checks (positivity, budgets) stay with the modules.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfrl/convolution.hpp"
#include "mfrl/fd_solver.hpp"
#include "mfrl/rate_lab.hpp"

namespace mfrl {

inline constexpr int kPlanVersion = 1;

// {"benchmark": "null"|"constant"|"linear"|"quadratic", "a", "T", "value", "lambda"}
// or {"hamiltonian": {...}, "terminal": {...}, "a", "T"}.
ProblemSpec problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const ProblemSpec& p);

// {"type": "empirical", "dim": d, "atoms": [...]} (atoms point-major) or
// {"type": "grid", "values": [...]}.
Measure measure_from_json(const nlohmann::json& j);
nlohmann::json measure_to_json(const Measure& mu);

struct SolvePlan {
  ProblemSpec problem;
  std::string solver = "fd";  // "fd" | "mc"
  int n_particles = 2;
  // fd
  int mesh = 32;
  FdOptions fd;
  // mc
  double t = 0.0;
  std::vector<double> atoms;
  std::size_t n_paths = 10000;
  int n_steps = 200;
  std::uint64_t seed = 0;
};

struct ProbePlan {
  ProblemSpec problem;
  int n_particles = 2;
  int mesh = 32;
  std::vector<double> epsilons;
  std::vector<ConvolutionTarget> targets;
  GridSearch search;
};

struct ComplexityPlan {
  GridDensity density = GridDensity::uniform(128);
  std::vector<int> n_list;
  int n_trials = 200;
  std::uint64_t seed = 0;
};

// Top-level documents carry {"version": 1, "command": "<name>", ...}.
SolvePlan solve_plan_from_json(const nlohmann::json& j);
ExperimentPlan rate_plan_from_json(const nlohmann::json& j);
ProbePlan probe_plan_from_json(const nlohmann::json& j);
ComplexityPlan complexity_plan_from_json(const nlohmann::json& j);

// Parses a file; malformed JSON raises SchemaError.
nlohmann::json read_json_file(const std::string& path);

}  // namespace mfrl
