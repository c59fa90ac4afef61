#include "mfrl/mc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfrl/errors.hpp"
#include "mfrl/rng.hpp"

namespace mfrl {

namespace {

void check_supported(const ProblemSpec& problem) {
  validate(problem);
  if (problem.hamiltonian.family == HamiltonianFamily::QuadraticInP) {
    throw UnsupportedError("Monte Carlo needs a Hamiltonian linear in p (zero or linear family)");
  }
}

// Per-path simulation state with cached harmonics cos(kx), sin(kx).
class PathSimulator {
 public:
  PathSimulator(const ProblemSpec& problem, std::span<const double> atoms)
      : problem_(problem),
        n_(atoms.size()),
        kdeg_(problem.hamiltonian.drift_kernel.degree()),
        jdeg_(problem.hamiltonian.running_kernel.degree()),
        tdeg_(std::max(problem.terminal.g.degree(), problem.terminal.h.degree())),
        deg_(std::max({kdeg_, jdeg_, tdeg_})),
        x_(atoms.begin(), atoms.end()),
        cs_(n_ * static_cast<std::size_t>(deg_ + 1)),
        sn_(n_ * static_cast<std::size_t>(deg_ + 1)),
        drift_(n_, 0.0) {
    mom_.c.assign(static_cast<std::size_t>(deg_) + 1, 0.0);
    mom_.s.assign(static_cast<std::size_t>(deg_) + 1, 0.0);
    has_drift_ = !problem.hamiltonian.drift_kernel.is_zero();
    has_running_ = !problem.hamiltonian.running_kernel.is_zero();
  }

  void reset(std::span<const double> atoms) { std::copy(atoms.begin(), atoms.end(), x_.begin()); }

  // Refreshes harmonics and moments at the current positions.
  void observe() {
    const auto d1 = static_cast<std::size_t>(deg_ + 1);
    std::fill(mom_.c.begin(), mom_.c.end(), 0.0);
    std::fill(mom_.s.begin(), mom_.s.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double* c = cs_.data() + i * d1;
      double* s = sn_.data() + i * d1;
      c[0] = 1.0;
      s[0] = 0.0;
      if (deg_ >= 1) {
        c[1] = std::cos(x_[i]);
        s[1] = std::sin(x_[i]);
      }
      for (int k = 2; k <= deg_; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        c[ku] = c[ku - 1] * c[1] - s[ku - 1] * s[1];
        s[ku] = s[ku - 1] * c[1] + c[ku - 1] * s[1];
      }
      for (std::size_t k = 0; k < d1; ++k) {
        mom_.c[k] += c[k];
        mom_.s[k] += s[k];
      }
    }
    const double inv = 1.0 / static_cast<double>(n_);
    for (auto& v : mom_.c) v *= inv;
    for (auto& v : mom_.s) v *= inv;
  }

  double running_cost() const {
    return has_running_ ? self_interaction(problem_.hamiltonian.running_kernel, mom_) : 0.0;
  }
  double terminal() const { return terminal_value(problem_.terminal, mom_); }

  void step(CounterRng& rng, double dt) {
    const auto d1 = static_cast<std::size_t>(deg_ + 1);
    if (has_drift_) {
      const auto& k = problem_.hamiltonian.drift_kernel;
      for (std::size_t i = 0; i < n_; ++i) {
        const double* c = cs_.data() + i * d1;
        const double* s = sn_.data() + i * d1;
        double b = k.cos_coeff(0);
        for (int q = 1; q <= kdeg_; ++q) {
          const auto qu = static_cast<std::size_t>(q);
          b += k.cos_coeff(q) * (c[qu] * mom_.c[qu] + s[qu] * mom_.s[qu]) +
               k.sin_coeff(q) * (s[qu] * mom_.c[qu] - c[qu] * mom_.s[qu]);
        }
        drift_[i] = b;
      }
    }
    const double idio = std::sqrt(2.0 * dt);
    for (std::size_t i = 0; i < n_; ++i) x_[i] += drift_[i] * dt + idio * rng.normal();
    if (problem_.a > 0.0) {
      const double common = std::sqrt(2.0 * problem_.a * dt) * rng.normal();
      for (auto& x : x_) x += common;
    }
  }

 private:
  const ProblemSpec& problem_;
  std::size_t n_;
  int kdeg_, jdeg_, tdeg_, deg_;
  bool has_drift_ = false;
  bool has_running_ = false;
  std::vector<double> x_;
  std::vector<double> cs_, sn_;
  std::vector<double> drift_;
  Moments mom_;
};

std::vector<double> atom_list(const EmpiricalMeasure& atoms) {
  if (atoms.dim() != 1) throw InputDomainError("Monte Carlo solver handles d = 1 configurations");
  return {atoms.coords().begin(), atoms.coords().end()};
}

}  // namespace

std::vector<McEstimate> mc_profile_linear(const ProblemSpec& problem, const EmpiricalMeasure& atoms,
                                          std::span<const double> durations, std::size_t n_paths, int n_steps,
                                          std::uint64_t seed) {
  check_supported(problem);
  if (n_paths == 0) throw InputDomainError("n_paths must be positive");
  if (n_steps < 1) throw InputDomainError("n_steps must be positive");
  const auto x0 = atom_list(atoms);
  const double dt = problem.T / n_steps;
  std::vector<int> marks(durations.size());
  for (std::size_t q = 0; q < durations.size(); ++q) {
    const double tau = durations[q];
    if (!(tau >= 0.0 && tau <= problem.T + 1e-12)) throw InputDomainError("durations must lie in [0, T]");
    const double steps = tau / dt;
    const long r = std::lround(steps);
    if (std::abs(steps - static_cast<double>(r)) > 1e-6) {
      throw InputDomainError("duration " + std::to_string(tau) + " is not a multiple of the step T / n_steps");
    }
    marks[q] = static_cast<int>(r);
  }
  const int last = marks.empty() ? 0 : *std::max_element(marks.begin(), marks.end());

  // payoff[path * Q + q]; filled in parallel, reduced in path order.
  const std::size_t nq = durations.size();
  std::vector<double> payoff(n_paths * nq);
#pragma omp parallel
  {
    PathSimulator sim(problem, x0);
    std::vector<double> at_step(static_cast<std::size_t>(last) + 1);
#pragma omp for schedule(static)
    for (std::ptrdiff_t sp = 0; sp < static_cast<std::ptrdiff_t>(n_paths); ++sp) {
      const auto path = static_cast<std::size_t>(sp);
      CounterRng rng(seed, path);
      sim.reset(x0);
      double running = 0.0;
      double prev_f = 0.0;
      for (int s = 0; s <= last; ++s) {
        sim.observe();
        const double f = sim.running_cost();
        if (s > 0) running += 0.5 * dt * (prev_f + f);
        prev_f = f;
        at_step[static_cast<std::size_t>(s)] = running + sim.terminal();
        if (s < last) sim.step(rng, dt);
      }
      for (std::size_t q = 0; q < nq; ++q) payoff[path * nq + q] = at_step[static_cast<std::size_t>(marks[q])];
    }
  }
  std::vector<McEstimate> out(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    RunningStats stats;
    for (std::size_t p = 0; p < n_paths; ++p) stats.add(payoff[p * nq + q]);
    out[q] = {stats.mean(), stats.std_error(), n_paths, seed};
  }
  return out;
}

McEstimate mc_solve_linear(const ProblemSpec& problem, double t, const EmpiricalMeasure& atoms,
                           std::size_t n_paths, int n_steps, std::uint64_t seed) {
  check_supported(problem);
  if (!(t >= 0.0 && t <= problem.T)) throw InputDomainError("t must lie in [0, T]");
  if (n_paths == 0) throw InputDomainError("n_paths must be positive");
  if (n_steps < 1) throw InputDomainError("n_steps must be positive");
  // Rescale so that the duration T - t is covered by exactly n_steps steps.
  ProblemSpec scaled = problem;
  const double tau = problem.T - t;
  if (tau == 0.0) {
    const auto x0 = atom_list(atoms);
    const double g = terminal_value(problem.terminal, x0);
    return {g, 0.0, n_paths, seed};
  }
  scaled.T = tau;
  const double durations[1] = {tau};
  return mc_profile_linear(scaled, atoms, durations, n_paths, n_steps, seed)[0];
}

}  // namespace mfrl
