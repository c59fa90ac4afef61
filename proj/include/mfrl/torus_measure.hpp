#pragma once

// Probability measures on the flat torus T^d = R^d / (2 pi Z)^d: empirical
// measures, gridded densities (d = 1), their Fourier coefficients, i.i.d.
// sampling and exact 1-Wasserstein distances.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

namespace mfrl {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Complex = std::complex<double>;

// Dimension, Sobolev order k_* = floor(d/2) + 3 and the Fourier truncation
// level L (modes with |l|_inf <= L are retained). Copies share the mode table.
class TorusContext {
 public:
  explicit TorusContext(int dim, int trunc = 0);  // trunc == 0 selects the default

  static int default_trunc(int dim) { return dim == 1 ? 64 : 16; }

  int dim() const { return dim_; }
  int k_star() const { return dim_ / 2 + 3; }
  int trunc() const { return trunc_; }

  std::size_t num_modes() const { return num_modes_; }
  // Integer mode vector l for a flat mode index; modes run lexicographically
  // over [-L, L]^d, so index 0 is (-L, ..., -L).
  std::span<const int> mode(std::size_t idx) const {
    return {modes_->data() + idx * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double mode_norm_sq(std::size_t idx) const { return (*norms_)[idx]; }
  std::size_t zero_mode() const { return num_modes_ / 2; }
  // Flat index of -l given the index of l.
  std::size_t negated(std::size_t idx) const { return num_modes_ - 1 - idx; }

  bool operator==(const TorusContext& other) const {
    return dim_ == other.dim_ && trunc_ == other.trunc_;
  }

 private:
  int dim_;
  int trunc_;
  std::size_t num_modes_;
  std::shared_ptr<const std::vector<int>> modes_;
  std::shared_ptr<const std::vector<double>> norms_;
};

// Canonical representative of a point in [0, 2 pi)^d. Throws InputDomainError
// on non-finite input.
double canonicalize(double x);
std::vector<double> canonicalize(std::span<const double> point);

// Geodesic (arc) distance between two points of T^d.
double torus_distance(std::span<const double> x, std::span<const double> y);
inline double circle_distance(double x, double y) {
  const double diff = std::abs(canonicalize(x) - canonicalize(y));
  return std::min(diff, kTwoPi - diff);
}

// mu^x = (1/N) sum_i delta_{x^i}. Atoms are stored canonicalized and sorted
// lexicographically, so the representation (and every sum over it) does not
// depend on the order in which particles were supplied.
class EmpiricalMeasure {
 public:
  // `coords` holds N points of dimension `dim`, point-major.
  EmpiricalMeasure(int dim, std::span<const double> coords);
  // d = 1 convenience.
  explicit EmpiricalMeasure(std::span<const double> atoms_1d) : EmpiricalMeasure(1, atoms_1d) {}
  EmpiricalMeasure(std::initializer_list<double> atoms_1d)
      : EmpiricalMeasure(1, std::span<const double>(atoms_1d.begin(), atoms_1d.size())) {}

  int dim() const { return dim_; }
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  std::span<const double> atom(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const { return coords_; }

 private:
  int dim_;
  std::vector<double> coords_;
};

// Probability density on the uniform periodic mesh x_j = 2 pi j / m (d = 1).
// Values are normalized so that the rectangle rule (2 pi / m) sum_j v_j is 1.
class GridDensity {
 public:
  explicit GridDensity(std::vector<double> values);

  static GridDensity uniform(std::size_t m);
  // All mass on a single node.
  static GridDensity delta_like(std::size_t m, std::size_t node);

  std::size_t mesh() const { return values_.size(); }
  double spacing() const { return kTwoPi / static_cast<double>(values_.size()); }
  double node(std::size_t j) const { return spacing() * static_cast<double>(j); }
  std::span<const double> values() const { return values_; }
  double mass() const;

  // Inverse-CDF map. Node j carries mass v_j h spread uniformly over the cell
  // [x_j - h/2, x_j + h/2); the CDF is linear inside each cell.
  double inverse_cdf(double u) const;

 private:
  std::vector<double> values_;
  std::vector<double> cdf_;  // cdf_[j] = mass of cells 0..j-1, starting at -h/2
};

using Measure = std::variant<EmpiricalMeasure, GridDensity>;

int measure_dim(const Measure& mu);

// Coefficients F_l(eta) = int e_l^*(x) eta(dx) with e_l(x) = (2 pi)^{-d/2} e^{i l.x},
// for |l|_inf <= trunc, in the context's mode order.
class FourierVector {
 public:
  FourierVector(TorusContext ctx, std::vector<Complex> coeffs);

  const TorusContext& context() const { return ctx_; }
  std::size_t size() const { return coeffs_.size(); }
  const Complex& operator[](std::size_t idx) const { return coeffs_[idx]; }
  Complex& operator[](std::size_t idx) { return coeffs_[idx]; }
  std::span<const Complex> coefficients() const { return coeffs_; }
  // Coefficient for an explicit mode vector; zero outside the truncation.
  Complex at(std::span<const int> l) const;

  FourierVector operator-(const FourierVector& other) const;

 private:
  TorusContext ctx_;
  std::vector<Complex> coeffs_;
};

FourierVector fourier_coefficients(const EmpiricalMeasure& mu, const TorusContext& ctx);
FourierVector fourier_coefficients(const GridDensity& mu, const TorusContext& ctx);
FourierVector fourier_coefficients(const Measure& mu, const TorusContext& ctx);

// n i.i.d. atoms from mu, drawn from CounterRng(seed, 0). Throws on n == 0.
EmpiricalMeasure sample_iid(const GridDensity& mu, std::size_t n, std::uint64_t seed);

// Exact W_1 on the circle of circumference 2 pi (d = 1 only). Equal-size
// empirical measures use the rotation scan over sorted matchings; everything
// else goes through the circular CDF formula W_1 = min_c int |F_mu - F_nu - c|.
double w1_circle(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
double w1_circle(const EmpiricalMeasure& mu, const GridDensity& nu);
// Circular CDF formula for arbitrary d = 1 measures.
double w1_circle_cdf(const Measure& mu, const Measure& nu);

// Exact optimal transport cost with the torus geodesic ground metric, solved as
// a min-cost flow. Requires size(mu) * size(nu) <= 10^4.
double w1_lp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

}  // namespace mfrl
