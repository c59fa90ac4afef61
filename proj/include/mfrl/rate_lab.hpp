#pragma once

// Convergence-rate experiments: sup |v^N(t, x) - v(t, mu^x)| over sampled
// configurations against alpha(N)^{1/3}, and Monte Carlo sample complexity of
// empirical measures in W_1 and rho_*.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfrl/fit.hpp"
#include "mfrl/mean_field.hpp"
#include "mfrl/problem.hpp"
#include "mfrl/torus_measure.hpp"

namespace mfrl {

struct ExperimentPlan {
  ProblemSpec problem;
  std::vector<int> n_list;     // strictly increasing, at least 3 entries
  int time_points = 8;         // t_j = j T / time_points, j < time_points
  int configs_per_n = 64;      // uniform random configurations per N
  std::size_t n_paths = 2000;  // Monte Carlo paths per configuration
  int n_steps = 200;           // Euler steps on [0, T]; multiple of time_points
  std::uint64_t seed = 0;
  ReferenceMethod reference = ReferenceMethod::Spectral;
  int reference_modes = 256;
  std::size_t m_ref = 0;       // surrogate atoms; 0 selects 32 max(N_list)
  double false_alarm = 0.005;  // per-row probability that MC noise exceeds the budget
};

// Throws InputDomainError on an invalid plan.
void validate(const ExperimentPlan& plan);

struct RateRow {
  int n = 0;
  double alpha = 0.0;
  double alpha_cbrt = 0.0;
  double sup_error = 0.0;
  double mc_std = 0.0;        // standard error of the sample attaining the sup
  double noise_budget = 0.0;  // MC quantile over all samples plus reference bias
  double t_argmax = 0.0;
  std::string notes;
};

struct RateReport {
  std::vector<RateRow> rows;  // sorted by N
  std::optional<PowerLawFit> fit;  // sup_error against alpha; empty if some error is 0
  // C anchored at the smallest N: sup_error(N_1) / alpha(N_1)^{1/3}.
  double c_fit = 0.0;
  bool bound_holds = false;  // sup_error <= c_fit alpha^{1/3} + budget on every row
  bool monotone = false;     // nonincreasing in N up to the budgets
  std::vector<std::string> flags;
  // Provenance.
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  int n_steps = 0;
  int time_points = 0;
  int configs_per_n = 0;
  std::string reference;
  std::size_t m_ref = 0;
  double reference_bias = 0.0;
  double truncation_tail = 0.0;
};

RateReport run_rate_experiment(const ExperimentPlan& plan);

// OLS in log-log space of error against alpha.
PowerLawFit fit_rate(std::span<const double> alpha, std::span<const double> error);

void write_rate_csv(const RateReport& report, std::ostream& out);
nlohmann::json rate_report_json(const RateReport& report);

struct ComplexityRow {
  int n = 0;
  double w1_mean = 0.0;
  double w1_se = 0.0;
  double rho_mean = 0.0;
  double rho_se = 0.0;
};

struct ComplexityTable {
  std::vector<ComplexityRow> rows;
  std::optional<double> w1_slope, rho_slope;  // log-log slopes against N
  double max_rho_w1_ratio = 0.0;              // max over trials of rho_* / W_1
  int trials = 0;
};

// Needs n_trials >= 100 and at least 3 sample sizes. Trial r at size N draws
// from sample_iid with seed mix_stream(mix_stream(seed, N), r).
ComplexityTable sample_complexity_experiment(const GridDensity& mu, const std::vector<int>& n_list, int n_trials,
                                             std::uint64_t seed, const TorusContext& ctx = TorusContext(1));

void write_complexity_csv(const ComplexityTable& table, std::ostream& out);

}  // namespace mfrl
