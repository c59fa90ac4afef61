#include "mfrl/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "mfrl/errors.hpp"
#include "mfrl/rng.hpp"
#include "mfrl/sobolev_metric.hpp"

namespace mfrl {

namespace {

// Complex Fourier coefficients p_j of a trigonometric polynomial, p(x) = sum p_j e^{ijx},
// stored at offset deg + j.
std::vector<Complex> complex_coeffs(const TrigPolynomial& p, int deg) {
  std::vector<Complex> out(static_cast<std::size_t>(2 * deg + 1), Complex(0.0, 0.0));
  out[static_cast<std::size_t>(deg)] = p.cos_coeff(0);
  for (int j = 1; j <= deg; ++j) {
    const Complex plus = 0.5 * Complex(p.cos_coeff(j), -p.sin_coeff(j));
    out[static_cast<std::size_t>(deg + j)] = plus;
    out[static_cast<std::size_t>(deg - j)] = std::conj(plus);
  }
  return out;
}

// m_k = int e^{-ikx} mu(dx) for k = 0..modes.
std::vector<Complex> measure_modes(const Measure& mu, int modes) {
  std::vector<Complex> m(static_cast<std::size_t>(modes) + 1, Complex(0.0, 0.0));
  if (const auto* emp = std::get_if<EmpiricalMeasure>(&mu)) {
    if (emp->dim() != 1) throw InputDomainError("mean-field reference handles d = 1 measures");
    for (std::size_t i = 0; i < emp->size(); ++i) {
      const Complex step = std::polar(1.0, -emp->atom(i)[0]);
      Complex e(1.0, 0.0);
      for (int k = 0; k <= modes; ++k) {
        m[static_cast<std::size_t>(k)] += e;
        e *= step;
      }
    }
    for (auto& v : m) v /= static_cast<double>(emp->size());
  } else {
    const auto& g = std::get<GridDensity>(mu);
    for (std::size_t j = 0; j < g.mesh(); ++j) {
      const double w = g.values()[j] * g.spacing();
      if (w == 0.0) continue;
      for (int k = 0; k <= modes; ++k) m[static_cast<std::size_t>(k)] += w * std::polar(1.0, -k * g.node(j));
    }
  }
  m[0] = 1.0;
  return m;
}

class SpectralFlow {
 public:
  SpectralFlow(const ProblemSpec& problem, int modes) : modes_(modes), problem_(problem) {
    const auto& ham = problem.hamiltonian;
    kdeg_ = ham.family == HamiltonianFamily::Zero ? 0 : ham.drift_kernel.degree();
    jdeg_ = ham.family == HamiltonianFamily::Zero ? 0 : ham.running_kernel.degree();
    kappa_ = complex_coeffs(ham.drift_kernel, kdeg_);
    has_drift_ = ham.family != HamiltonianFamily::Zero && !ham.drift_kernel.is_zero();
    has_running_ = ham.family != HamiltonianFamily::Zero && !ham.running_kernel.is_zero();
    if (std::max({kdeg_, jdeg_, problem.terminal.g.degree(), problem.terminal.h.degree()}) > modes_) {
      throw ConfigurationError("spectral reference needs more modes than the problem degree");
    }
  }

  Complex mode(const std::vector<Complex>& m, int k) const {
    if (k > modes_ || k < -modes_) return {0.0, 0.0};
    return k >= 0 ? m[static_cast<std::size_t>(k)] : std::conj(m[static_cast<std::size_t>(-k)]);
  }

  // Transport part of dm_k/ds: -ik sum_j kappa_j m_j m_{k-j}.
  void nonlinear(const std::vector<Complex>& m, std::vector<Complex>& out) const {
    std::fill(out.begin(), out.end(), Complex(0.0, 0.0));
    if (!has_drift_) return;
    for (int k = 1; k <= modes_; ++k) {
      Complex acc(0.0, 0.0);
      for (int j = -kdeg_; j <= kdeg_; ++j) {
        const Complex kj = kappa_[static_cast<std::size_t>(j + kdeg_)];
        if (kj == Complex(0.0, 0.0)) continue;
        acc += kj * mode(m, j) * mode(m, k - j);
      }
      out[static_cast<std::size_t>(k)] = Complex(0.0, -static_cast<double>(k)) * acc;
    }
  }

  // int int J(x - y) mu(dx) mu(dy) = J_0 + sum_{j>=1} J^cos_j |m_j|^2.
  double running(const std::vector<Complex>& m) const {
    if (!has_running_) return 0.0;
    const auto& jk = problem_.hamiltonian.running_kernel;
    double v = jk.cos_coeff(0);
    for (int j = 1; j <= jdeg_; ++j) v += jk.cos_coeff(j) * std::norm(m[static_cast<std::size_t>(j)]);
    return v;
  }

  // E G(shift_Z mu) with Z ~ N(0, var).
  double terminal(const std::vector<Complex>& m, double var) const {
    const auto& g = problem_.terminal.g;
    const auto& h = problem_.terminal.h;
    const int gd = g.degree(), hd = h.degree();
    const auto gam = complex_coeffs(g, gd);
    const auto eta = complex_coeffs(h, hd);
    const auto damp = [var](int j) { return std::exp(-0.5 * var * static_cast<double>(j) * j); };
    Complex lin(0.0, 0.0);
    for (int j = -gd; j <= gd; ++j) lin += gam[static_cast<std::size_t>(j + gd)] * mode(m, -j) * damp(j);
    Complex quad(0.0, 0.0);
    for (int j = -hd; j <= hd; ++j) {
      for (int jj = -hd; jj <= hd; ++jj) {
        quad += eta[static_cast<std::size_t>(j + hd)] * eta[static_cast<std::size_t>(jj + hd)] * mode(m, -j) *
                mode(m, -jj) * damp(j + jj);
      }
    }
    return lin.real() + quad.real();
  }

  // Advances (m, q) by dt with Lawson integrating-factor RK4; q accumulates the running cost.
  void step(std::vector<Complex>& m, double& q, double dt) {
    const std::size_t n = m.size();
    e_half_.resize(n);
    e_full_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double lam = -static_cast<double>(k) * static_cast<double>(k);
      e_half_[k] = std::exp(0.5 * dt * lam);
      e_full_[k] = std::exp(dt * lam);
    }
    k1_.resize(n), k2_.resize(n), k3_.resize(n), k4_.resize(n), tmp_.resize(n);
    nonlinear(m, k1_);
    const double r1 = running(m);
    for (std::size_t k = 0; k < n; ++k) tmp_[k] = e_half_[k] * (m[k] + 0.5 * dt * k1_[k]);
    nonlinear(tmp_, k2_);
    const double r2 = running(tmp_);
    for (std::size_t k = 0; k < n; ++k) tmp_[k] = e_half_[k] * m[k] + 0.5 * dt * k2_[k];
    nonlinear(tmp_, k3_);
    const double r3 = running(tmp_);
    for (std::size_t k = 0; k < n; ++k) tmp_[k] = e_full_[k] * m[k] + dt * e_half_[k] * k3_[k];
    nonlinear(tmp_, k4_);
    const double r4 = running(tmp_);
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = e_full_[k] * m[k] +
             dt / 6.0 * (e_full_[k] * k1_[k] + 2.0 * e_half_[k] * (k2_[k] + k3_[k]) + k4_[k]);
    }
    m[0] = 1.0;
    q += dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
  }

 private:
  int modes_;
  const ProblemSpec& problem_;
  int kdeg_ = 0, jdeg_ = 0;
  bool has_drift_ = false, has_running_ = false;
  std::vector<Complex> kappa_;
  std::vector<double> e_half_, e_full_;
  std::vector<Complex> k1_, k2_, k3_, k4_, tmp_;
};

EmpiricalMeasure resample(const EmpiricalMeasure& mu, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 1);
  std::vector<double> atoms(n);
  for (auto& x : atoms) x = mu.atom(static_cast<std::size_t>(rng.uniform() * static_cast<double>(mu.size())))[0];
  return EmpiricalMeasure(atoms);
}

void check_reference(const ProblemSpec& problem) {
  validate(problem);
  if (problem.hamiltonian.family == HamiltonianFamily::QuadraticInP) {
    throw UnsupportedError("no mean-field reference for Hamiltonians nonlinear in p");
  }
}

}  // namespace

std::vector<double> mean_field_profile(const ProblemSpec& problem, const Measure& mu,
                                       std::span<const double> durations, const MeanFieldConfig& cfg) {
  check_reference(problem);
  if (cfg.modes < 1) throw ConfigurationError("spectral reference needs modes >= 1");
  if (!(cfg.max_step > 0.0)) throw ConfigurationError("spectral step must be positive");
  std::vector<std::size_t> order(durations.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return durations[a] < durations[b]; });

  SpectralFlow flow(problem, cfg.modes);
  auto m = measure_modes(mu, cfg.modes);
  double q = 0.0;
  double s = 0.0;
  std::vector<double> out(durations.size());
  for (std::size_t idx : order) {
    const double tau = durations[idx];
    if (!(tau >= 0.0 && tau <= problem.T + 1e-12)) throw InputDomainError("durations must lie in [0, T]");
    const double span = tau - s;
    if (span > 0.0) {
      const int steps = static_cast<int>(std::ceil(span / cfg.max_step - 1e-9));
      const double dt = span / steps;
      for (int i = 0; i < steps; ++i) flow.step(m, q, dt);
      s = tau;
    }
    const double value = q + flow.terminal(m, 2.0 * problem.a * tau);
    if (!std::isfinite(value)) throw DivergenceError("spectral reference produced a non-finite value");
    out[idx] = value;
  }
  return out;
}

MeanFieldValue mean_field_reference(const ProblemSpec& problem, double t, const Measure& mu,
                                    const MeanFieldConfig& cfg) {
  check_reference(problem);
  if (!(t >= 0.0 && t <= problem.T)) throw InputDomainError("t must lie in [0, T]");
  if (cfg.method == ReferenceMethod::Surrogate) {
    if (cfg.m_ref == 0) throw ConfigurationError("surrogate reference requires m_ref");
    const EmpiricalMeasure atoms = std::holds_alternative<GridDensity>(mu)
                                       ? sample_iid(std::get<GridDensity>(mu), cfg.m_ref, cfg.seed)
                                       : resample(std::get<EmpiricalMeasure>(mu), cfg.m_ref, cfg.seed);
    const auto est = mc_solve_linear(problem, t, atoms, cfg.n_paths, cfg.n_steps, cfg.seed);
    return {est.mean, est.std_error, std::cbrt(alpha_rate(cfg.m_ref, 1))};
  }
  const double tau[1] = {problem.T - t};
  return {mean_field_profile(problem, mu, tau, cfg)[0], 0.0, 0.0};
}

}  // namespace mfrl
