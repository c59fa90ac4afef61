#include "mfrl/problem.hpp"

#include <algorithm>
#include <cmath>

#include "mfrl/errors.hpp"
#include "mfrl/sobolev_metric.hpp"

namespace mfrl {

TrigPolynomial TrigPolynomial::cosine(double amp, int k) {
  TrigPolynomial p;
  p.cos_coeffs.assign(static_cast<std::size_t>(k) + 1, 0.0);
  p.cos_coeffs[static_cast<std::size_t>(k)] = amp;
  return p;
}

TrigPolynomial TrigPolynomial::sine(double amp, int k) {
  TrigPolynomial p;
  p.sin_coeffs.assign(static_cast<std::size_t>(k) + 1, 0.0);
  p.sin_coeffs[static_cast<std::size_t>(k)] = amp;
  return p;
}

int TrigPolynomial::degree() const {
  int deg = 0;
  for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
    if (cos_coeffs[k] != 0.0) deg = std::max(deg, static_cast<int>(k));
  }
  for (std::size_t k = 1; k < sin_coeffs.size(); ++k) {
    if (sin_coeffs[k] != 0.0) deg = std::max(deg, static_cast<int>(k));
  }
  return deg;
}

bool TrigPolynomial::is_zero() const {
  return std::all_of(cos_coeffs.begin(), cos_coeffs.end(), [](double c) { return c == 0.0; }) &&
         std::all_of(sin_coeffs.begin(), sin_coeffs.end(), [](double c) { return c == 0.0; });
}

double TrigPolynomial::cos_coeff(int k) const {
  return k >= 0 && static_cast<std::size_t>(k) < cos_coeffs.size() ? cos_coeffs[static_cast<std::size_t>(k)] : 0.0;
}

double TrigPolynomial::sin_coeff(int k) const {
  return k >= 1 && static_cast<std::size_t>(k) < sin_coeffs.size() ? sin_coeffs[static_cast<std::size_t>(k)] : 0.0;
}

double TrigPolynomial::operator()(double x) const {
  double v = cos_coeff(0);
  const int deg = static_cast<int>(std::max(cos_coeffs.size(), sin_coeffs.size()));
  for (int k = 1; k < deg; ++k) {
    const double c = cos_coeff(k), s = sin_coeff(k);
    if (c != 0.0) v += c * std::cos(k * x);
    if (s != 0.0) v += s * std::sin(k * x);
  }
  return v;
}

double TrigPolynomial::derivative(double x) const {
  double v = 0.0;
  const int deg = static_cast<int>(std::max(cos_coeffs.size(), sin_coeffs.size()));
  for (int k = 1; k < deg; ++k) {
    const double c = cos_coeff(k), s = sin_coeff(k);
    if (c != 0.0) v -= k * c * std::sin(k * x);
    if (s != 0.0) v += k * s * std::cos(k * x);
  }
  return v;
}

double TrigPolynomial::sup_bound() const {
  double s = std::abs(cos_coeff(0));
  for (int k = 1; k <= degree(); ++k) s += std::abs(cos_coeff(k)) + std::abs(sin_coeff(k));
  return s;
}

double TrigPolynomial::lipschitz_bound() const {
  double s = 0.0;
  for (int k = 1; k <= degree(); ++k) s += k * (std::abs(cos_coeff(k)) + std::abs(sin_coeff(k)));
  return s;
}

FourierVector TrigPolynomial::fourier(const TorusContext& ctx) const {
  if (ctx.dim() != 1) throw InputDomainError("trigonometric polynomials live on the circle");
  if (degree() > ctx.trunc()) throw InputDomainError("polynomial degree exceeds the Fourier truncation");
  const double root = std::sqrt(kTwoPi);
  std::vector<Complex> coeffs(ctx.num_modes(), Complex(0.0, 0.0));
  const auto zero = ctx.zero_mode();
  coeffs[zero] = root * cos_coeff(0);
  for (int k = 1; k <= degree(); ++k) {
    // cos(kx) = (e^{ikx} + e^{-ikx}) / 2, sin(kx) = (e^{ikx} - e^{-ikx}) / 2i,
    // and int e^{-ilx} e^{ikx} dx = 2 pi [l == k].
    const Complex plus = 0.5 * root * Complex(cos_coeff(k), -sin_coeff(k));
    coeffs[zero + static_cast<std::size_t>(k)] = plus;
    coeffs[zero - static_cast<std::size_t>(k)] = std::conj(plus);
  }
  return {ctx, std::move(coeffs)};
}

TrigPolynomial operator+(const TrigPolynomial& a, const TrigPolynomial& b) {
  TrigPolynomial out;
  out.cos_coeffs.assign(std::max(a.cos_coeffs.size(), b.cos_coeffs.size()), 0.0);
  out.sin_coeffs.assign(std::max(a.sin_coeffs.size(), b.sin_coeffs.size()), 0.0);
  for (std::size_t k = 0; k < out.cos_coeffs.size(); ++k) {
    out.cos_coeffs[k] = a.cos_coeff(static_cast<int>(k)) + b.cos_coeff(static_cast<int>(k));
  }
  for (std::size_t k = 1; k < out.sin_coeffs.size(); ++k) {
    out.sin_coeffs[k] = a.sin_coeff(static_cast<int>(k)) + b.sin_coeff(static_cast<int>(k));
  }
  return out;
}

std::string to_string(HamiltonianFamily f) {
  switch (f) {
    case HamiltonianFamily::Zero:
      return "zero";
    case HamiltonianFamily::LinearInP:
      return "linear";
    case HamiltonianFamily::QuadraticInP:
      return "quadratic";
  }
  return "unknown";
}

HamiltonianFamily hamiltonian_family_from_string(const std::string& s) {
  if (s == "zero") return HamiltonianFamily::Zero;
  if (s == "linear") return HamiltonianFamily::LinearInP;
  if (s == "quadratic") return HamiltonianFamily::QuadraticInP;
  throw InputDomainError("unknown Hamiltonian family '" + s + "'");
}

namespace {

void check_poly(const TrigPolynomial& p, const TorusContext& ctx, const char* name) {
  for (double c : p.cos_coeffs) {
    if (!std::isfinite(c)) throw InputDomainError(std::string(name) + ": non-finite coefficient");
  }
  for (double c : p.sin_coeffs) {
    if (!std::isfinite(c)) throw InputDomainError(std::string(name) + ": non-finite coefficient");
  }
  if (!p.sin_coeffs.empty() && p.sin_coeffs[0] != 0.0) {
    throw InputDomainError(std::string(name) + ": sin coefficient of order 0 must be zero");
  }
  if (p.degree() > ctx.trunc()) throw InputDomainError(std::string(name) + ": degree exceeds the truncation");
}

}  // namespace

ProblemDiagnostics validate(const ProblemSpec& p) {
  if (p.ctx.dim() != 1) throw InputDomainError("problem families are defined on the circle (d = 1)");
  if (!std::isfinite(p.a) || p.a < 0.0) throw InputDomainError("common-noise intensity a must be >= 0");
  if (!std::isfinite(p.T) || p.T <= 0.0) throw InputDomainError("horizon T must be > 0");
  const auto& ham = p.hamiltonian;
  check_poly(ham.drift_kernel, p.ctx, "drift kernel");
  check_poly(ham.running_kernel, p.ctx, "running kernel");
  check_poly(p.terminal.g, p.ctx, "terminal g");
  check_poly(p.terminal.h, p.ctx, "terminal h");
  if (!std::isfinite(ham.lambda) || ham.lambda < 0.0) throw InputDomainError("lambda must be >= 0");
  if (ham.family == HamiltonianFamily::Zero && (!ham.drift_kernel.is_zero() || !ham.running_kernel.is_zero())) {
    throw InputDomainError("the zero Hamiltonian takes no kernels");
  }
  if (ham.family != HamiltonianFamily::QuadraticInP && ham.lambda != 0.0) {
    throw InputDomainError("lambda is only meaningful for the quadratic family");
  }

  ProblemDiagnostics diag;
  diag.drift_sup = ham.drift_kernel.sup_bound();
  diag.running_sup = ham.running_kernel.sup_bound();
  // |dH/dx| and the W_1-Lipschitz modulus in mu of b p + f, for |p| <= 1.
  diag.hamiltonian_lipschitz = 2.0 * (ham.drift_kernel.lipschitz_bound() + ham.running_kernel.lipschitz_bound());
  const MetricOrder star = MetricOrder::star(p.ctx);
  const double g_norm = sobolev_norm(p.terminal.g.fourier(p.ctx), star.k);
  const double h_norm = sobolev_norm(p.terminal.h.fourier(p.ctx), star.k);
  diag.terminal_lipschitz = g_norm + 2.0 * p.terminal.h.sup_bound() * h_norm;
  return diag;
}

Moments moments(std::span<const double> atoms, int degree) {
  Moments m;
  m.c.assign(static_cast<std::size_t>(degree) + 1, 0.0);
  m.s.assign(static_cast<std::size_t>(degree) + 1, 0.0);
  if (atoms.empty()) throw InputDomainError("moments of an empty atom list");
  for (double x : atoms) {
    for (int k = 0; k <= degree; ++k) {
      m.c[static_cast<std::size_t>(k)] += std::cos(k * x);
      m.s[static_cast<std::size_t>(k)] += std::sin(k * x);
    }
  }
  const double inv = 1.0 / static_cast<double>(atoms.size());
  for (auto& v : m.c) v *= inv;
  for (auto& v : m.s) v *= inv;
  return m;
}

double convolve(const TrigPolynomial& kernel, const Moments& m, double x) {
  // cos(k(x - y)) = cos kx cos ky + sin kx sin ky; sin(k(x - y)) = sin kx cos ky - cos kx sin ky.
  double v = kernel.cos_coeff(0);
  const int deg = kernel.degree();
  if (static_cast<std::size_t>(deg) >= m.c.size()) throw InputDomainError("moments too short for kernel");
  for (int k = 1; k <= deg; ++k) {
    const double ck = kernel.cos_coeff(k), sk = kernel.sin_coeff(k);
    if (ck == 0.0 && sk == 0.0) continue;
    const double cx = std::cos(k * x), sx = std::sin(k * x);
    const double mc = m.c[static_cast<std::size_t>(k)], ms = m.s[static_cast<std::size_t>(k)];
    v += ck * (cx * mc + sx * ms) + sk * (sx * mc - cx * ms);
  }
  return v;
}

double self_interaction(const TrigPolynomial& j, const Moments& m) {
  // The odd part integrates to zero against the symmetric product measure.
  double v = j.cos_coeff(0);
  const int deg = j.degree();
  if (static_cast<std::size_t>(deg) >= m.c.size()) throw InputDomainError("moments too short for kernel");
  for (int k = 1; k <= deg; ++k) {
    const double mc = m.c[static_cast<std::size_t>(k)], ms = m.s[static_cast<std::size_t>(k)];
    v += j.cos_coeff(k) * (mc * mc + ms * ms);
  }
  return v;
}

namespace {

double integrate_against(const TrigPolynomial& p, const Moments& m) {
  double v = p.cos_coeff(0);
  for (int k = 1; k <= p.degree(); ++k) {
    v += p.cos_coeff(k) * m.c[static_cast<std::size_t>(k)] + p.sin_coeff(k) * m.s[static_cast<std::size_t>(k)];
  }
  return v;
}

}  // namespace

double terminal_value(const TerminalSpec& term, const Moments& m) {
  const double lin = integrate_against(term.g, m);
  const double q = integrate_against(term.h, m);
  return lin + q * q;
}

double terminal_value(const TerminalSpec& term, std::span<const double> atoms) {
  return terminal_value(term, moments(atoms, std::max(term.g.degree(), term.h.degree())));
}

ProblemSpec null_benchmark(double a, double T) {
  ProblemSpec p;
  p.terminal.g = TrigPolynomial::cosine(1.0);
  p.a = a;
  p.T = T;
  return p;
}

ProblemSpec constant_benchmark(double c, double a, double T) {
  ProblemSpec p;
  p.terminal.g = TrigPolynomial::constant(c);
  p.a = a;
  p.T = T;
  return p;
}

ProblemSpec linear_benchmark(double a, double T) {
  ProblemSpec p;
  p.hamiltonian.family = HamiltonianFamily::LinearInP;
  p.hamiltonian.drift_kernel = TrigPolynomial::sine(-0.5);
  p.hamiltonian.running_kernel = TrigPolynomial::cosine(0.5);
  p.terminal.g = TrigPolynomial::cosine(1.0);
  p.terminal.h = TrigPolynomial::sine(1.0);
  p.a = a;
  p.T = T;
  return p;
}

ProblemSpec quadratic_benchmark(double lambda, double a, double T) {
  ProblemSpec p = linear_benchmark(a, T);
  p.hamiltonian.family = HamiltonianFamily::QuadraticInP;
  p.hamiltonian.lambda = lambda;
  return p;
}

}  // namespace mfrl
