#pragma once

// Negative-order Sobolev distances between measures on the torus and the
// closed-form measure derivatives of rho_*^2.

#include <cstddef>
#include <span>
#include <vector>

#include "mfrl/torus_measure.hpp"

namespace mfrl {

struct MetricOrder {
  int k = 3;
  static MetricOrder star(const TorusContext& ctx) { return {ctx.k_star()}; }
};

// Per-mode weights (1 + |l|^2)^{-k} on a context, plus the constants
// c1 = sqrt(sum |l|^2 w_l) and c2 = sqrt(sum |l|^4 w_l) over the retained modes.
class MetricWeights {
 public:
  MetricWeights(const TorusContext& ctx, MetricOrder order);

  const TorusContext& context() const { return ctx_; }
  int order() const { return k_; }
  double operator[](std::size_t idx) const { return weights_[idx]; }
  std::span<const double> weights() const { return weights_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }

 private:
  TorusContext ctx_;
  int k_;
  std::vector<double> weights_;
  double c1_;
  double c2_;
};

// rho_{-k}^2 = sum_{|l|_inf <= L} (1 + |l|^2)^{-k} |F_l(mu - nu)|^2.
double rho_sq(const FourierVector& mu, const FourierVector& nu, const MetricWeights& w);
double rho_sq(const Measure& mu, const Measure& nu, MetricOrder order, const TorusContext& ctx);
double rho(const Measure& mu, const Measure& nu, MetricOrder order, const TorusContext& ctx);

// Measure derivative D_nu rho_*^2(mu, nu)(x) at each point of `points`
// (point-major, d coordinates each). Returns point-major d-vectors. The
// derivative with respect to atom i of an N-atom nu is this field at x^i
// divided by N.
std::vector<double> rho_sq_grad(const Measure& mu, const Measure& nu, std::span<const double> points,
                                const TorusContext& ctx);

// Spatial Jacobian D_x D_nu rho_*^2(mu, nu)(x), one row-major d x d matrix per point.
std::vector<double> rho_sq_grad_jacobian(const Measure& mu, const Measure& nu, std::span<const double> points,
                                         const TorusContext& ctx);

// Second measure derivative D^2_nu rho_*^2(mu, nu)(x, y) for pairs (xs[i], ys[i]),
// one row-major d x d matrix per pair. Equals
// 2 (2 pi)^{-d} sum_l w_l l l^T cos(l.(x - y)), which does not depend on mu, nu.
std::vector<double> rho_sq_hess(const Measure& mu, const Measure& nu, std::span<const double> xs,
                                std::span<const double> ys, const TorusContext& ctx);

// ||f||_k = sqrt(sum (1 + |l|^2)^k |F_l(f)|^2); k may be negative.
double sobolev_norm(const FourierVector& f, int k);

// alpha(N): N^{-1/2} for d = 1, N^{-1/2} log N for d = 2, N^{-1/d} for d > 2.
double alpha_rate(std::size_t n, int d);

// Upper bound on the rho_{-k}^2 mass dropped by truncating at |l|_inf <= L for
// probability measures: |F_l(mu - nu)|^2 <= 4 (2 pi)^{-d} for every mode.
double tail_bound(const TorusContext& ctx, MetricOrder order);

// C with rho_*(mu, nu) <= C W_1(mu, nu), from the Lipschitz constant
// (2 pi)^{-d/2} |l| of each Fourier mode: C = (2 pi)^{-d/2} c1.
double rho_w1_constant(const TorusContext& ctx);

}  // namespace mfrl
