#pragma once

// Problem families for the particle and mean-field HJB equations on the
// circle: Hamiltonians H(x, p, mu) = lambda p^2 / 2 + b(x, mu) p + f(x, mu)
// with convolution-type b and f, and terminal costs
// G(mu) = int g dmu + (int h dmu)^2.

#include <span>
#include <string>
#include <vector>

#include "mfrl/torus_measure.hpp"

namespace mfrl {

// Real trigonometric polynomial p(x) = c_0 + sum_{k>=1} c_k cos(kx) + s_k sin(kx).
// sin_coeffs[0] is ignored and must be zero.
struct TrigPolynomial {
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  static TrigPolynomial zero() { return {}; }
  static TrigPolynomial constant(double c) { return {{c}, {}}; }
  static TrigPolynomial cosine(double amp, int k = 1);
  static TrigPolynomial sine(double amp, int k = 1);

  int degree() const;
  bool is_zero() const;
  double cos_coeff(int k) const;
  double sin_coeff(int k) const;

  double operator()(double x) const;
  double derivative(double x) const;

  // sum |c_k| + |s_k| and sum k (|c_k| + |s_k|): bounds on sup|p| and sup|p'|.
  double sup_bound() const;
  double lipschitz_bound() const;

  // Coefficients F_l(p) = int e_l^* p dx on a d = 1 context.
  FourierVector fourier(const TorusContext& ctx) const;
};

TrigPolynomial operator+(const TrigPolynomial& a, const TrigPolynomial& b);

enum class HamiltonianFamily { Zero, LinearInP, QuadraticInP };

std::string to_string(HamiltonianFamily f);
HamiltonianFamily hamiltonian_family_from_string(const std::string& s);

struct HamiltonianSpec {
  HamiltonianFamily family = HamiltonianFamily::Zero;
  TrigPolynomial drift_kernel;    // K, b(x, mu) = int K(x - y) mu(dy)
  TrigPolynomial running_kernel;  // J, f(x, mu) = int J(x - y) mu(dy)
  double lambda = 0.0;            // quadratic coefficient, QuadraticInP only
};

struct TerminalSpec {
  TrigPolynomial g;
  TrigPolynomial h;
};

struct ProblemSpec {
  HamiltonianSpec hamiltonian;
  TerminalSpec terminal;
  double a = 0.0;  // common-noise intensity
  double T = 1.0;
  TorusContext ctx{1};
};

// Coefficient-derived constants reported by validate(): sup-norm bounds of
// the kernels, a Lipschitz bound C_H for H in (x, mu) on |p| <= 1, and the
// C^{-k_*} Lipschitz constant of G (|G(mu) - G(nu)| <= lip * rho_*(mu, nu)).
struct ProblemDiagnostics {
  double drift_sup = 0.0;
  double running_sup = 0.0;
  double hamiltonian_lipschitz = 0.0;
  double terminal_lipschitz = 0.0;
};

// Throws InputDomainError on invalid parameters (a < 0, T <= 0, d != 1,
// nonzero kernels on the Zero family, lambda on non-quadratic families,
// degrees beyond the truncation, non-finite coefficients).
ProblemDiagnostics validate(const ProblemSpec& p);

// Mean-field moments of an atom cloud: C_k = mean cos(k x_j), S_k = mean sin(k x_j), k = 0..deg.
struct Moments {
  std::vector<double> c;
  std::vector<double> s;
};
Moments moments(std::span<const double> atoms, int degree);

// int K(x - y) mu(dy) from the moments of mu.
double convolve(const TrigPolynomial& k, const Moments& m, double x);
// int int J(x - y) mu(dx) mu(dy) from the moments of mu.
double self_interaction(const TrigPolynomial& j, const Moments& m);

double terminal_value(const TerminalSpec& term, std::span<const double> atoms);
double terminal_value(const TerminalSpec& term, const Moments& m);

// Benchmarks on the circle.
// H == 0, G(mu) = int cos dmu.
ProblemSpec null_benchmark(double a = 0.0, double T = 1.0);
// H == 0, G == c.
ProblemSpec constant_benchmark(double c, double a = 0.0, double T = 1.0);
// Mean interaction: K = -0.5 sin, J = 0.5 cos, g = cos, h = sin.
ProblemSpec linear_benchmark(double a = 0.0, double T = 1.0);
// Linear benchmark plus lambda |p|^2 / 2.
ProblemSpec quadratic_benchmark(double lambda = 0.5, double a = 0.0, double T = 1.0);

}  // namespace mfrl
