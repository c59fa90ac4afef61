#pragma once

// Reference values v(t, mu) of the mean-field HJB equation for Hamiltonians
// linear in p on the circle.

#include <cstdint>
#include <span>
#include <vector>

#include "mfrl/mc_solver.hpp"
#include "mfrl/problem.hpp"

namespace mfrl {

enum class ReferenceMethod {
  // Fourier-Galerkin Fokker-Planck flow of the measure; common noise enters
  // through an exact Gaussian average over the global shift.
  Spectral,
  // v^{M_ref}(t, mu^y) from Monte Carlo with M_ref atoms drawn from mu.
  Surrogate,
};

struct MeanFieldConfig {
  ReferenceMethod method = ReferenceMethod::Spectral;
  int modes = 256;          // Fourier modes |k| <= modes
  double max_step = 5e-4;   // largest integrating-factor RK4 step
  std::size_t m_ref = 0;    // surrogate atom count (required for Surrogate)
  std::size_t n_paths = 4000;
  int n_steps = 200;
  std::uint64_t seed = 0;
};

struct MeanFieldValue {
  double value = 0.0;
  double std_error = 0.0;    // Monte Carlo error (surrogate only)
  double bias_budget = 0.0;  // alpha(M_ref)^{1/3} for the surrogate, 0 otherwise
};

MeanFieldValue mean_field_reference(const ProblemSpec& problem, double t, const Measure& mu,
                                    const MeanFieldConfig& cfg = {});

// v(T - tau, mu) for each duration tau from a single spectral solve.
std::vector<double> mean_field_profile(const ProblemSpec& problem, const Measure& mu,
                                       std::span<const double> durations, const MeanFieldConfig& cfg = {});

}  // namespace mfrl
