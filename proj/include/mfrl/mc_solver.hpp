#pragma once

// Feynman-Kac Monte Carlo for the particle HJB equation with a Hamiltonian
// that is linear in p: v^N(t, x) = E[ int_t^T (1/N) sum_i f(X^i_s, mu^X_s) ds + G(mu^X_T) ]
// along dX^i = b(X^i, mu^X) dt + sqrt(2) dW^i + sqrt(2a) dB.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mfrl/problem.hpp"

namespace mfrl {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n_paths)
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
};

// Welford accumulator; a constant sample stream yields that constant and zero spread.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Euler-Maruyama with n_steps steps on [t, T]; path p draws from CounterRng(seed, p).
// Throws UnsupportedError for the quadratic family.
McEstimate mc_solve_linear(const ProblemSpec& problem, double t, const EmpiricalMeasure& atoms,
                           std::size_t n_paths, int n_steps, std::uint64_t seed);

// Estimates v^N(T - tau, x) for every tau in `durations` from one set of paths,
// using that the dynamics are time-homogeneous. Paths advance with step T / n_steps;
// each duration must be a multiple of that step.
std::vector<McEstimate> mc_profile_linear(const ProblemSpec& problem, const EmpiricalMeasure& atoms,
                                          std::span<const double> durations, std::size_t n_paths, int n_steps,
                                          std::uint64_t seed);

}  // namespace mfrl
