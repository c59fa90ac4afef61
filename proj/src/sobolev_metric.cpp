#include "mfrl/sobolev_metric.hpp"

#include <cmath>
#include <string>

#include "mfrl/errors.hpp"

namespace mfrl {

namespace {

constexpr double kImagTolerance = 1e-8;

void check_dim(const Measure& mu, const Measure& nu, const TorusContext& ctx) {
  if (measure_dim(mu) != ctx.dim() || measure_dim(nu) != ctx.dim()) {
    throw InputDomainError("measure dimension does not match the torus context");
  }
}

void check_points(std::span<const double> points, int d) {
  if (points.size() % static_cast<std::size_t>(d) != 0) {
    throw InputDomainError("evaluation points must hold a multiple of d coordinates");
  }
}

double dot(std::span<const int> l, const double* x, int d) {
  double s = 0.0;
  for (int a = 0; a < d; ++a) s += l[static_cast<std::size_t>(a)] * x[a];
  return s;
}

void check_real(double imag, double scale, const char* what) {
  if (std::abs(imag) > kImagTolerance * std::max(1.0, scale)) {
    throw ConsistencyError(std::string(what) + ": imaginary residue " + std::to_string(imag) +
                           " exceeds tolerance");
  }
}

}  // namespace

MetricWeights::MetricWeights(const TorusContext& ctx, MetricOrder order) : ctx_(ctx), k_(order.k) {
  if (k_ < 1) throw InputDomainError("metric order must be >= 1");
  weights_.resize(ctx_.num_modes());
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t idx = 0; idx < weights_.size(); ++idx) {
    const double n2 = ctx_.mode_norm_sq(idx);
    weights_[idx] = std::pow(1.0 + n2, -k_);
    s1 += n2 * weights_[idx];
    s2 += n2 * n2 * weights_[idx];
  }
  c1_ = std::sqrt(s1);
  c2_ = std::sqrt(s2);
}

double rho_sq(const FourierVector& mu, const FourierVector& nu, const MetricWeights& w) {
  if (!(mu.context() == w.context()) || !(nu.context() == w.context())) {
    throw InputDomainError("Fourier vectors and weights live on different contexts");
  }
  double sum = 0.0;
  for (std::size_t idx = 0; idx < w.weights().size(); ++idx) sum += w[idx] * std::norm(mu[idx] - nu[idx]);
  return sum;
}

double rho_sq(const Measure& mu, const Measure& nu, MetricOrder order, const TorusContext& ctx) {
  check_dim(mu, nu, ctx);
  return rho_sq(fourier_coefficients(mu, ctx), fourier_coefficients(nu, ctx), MetricWeights(ctx, order));
}

double rho(const Measure& mu, const Measure& nu, MetricOrder order, const TorusContext& ctx) {
  return std::sqrt(rho_sq(mu, nu, order, ctx));
}

std::vector<double> rho_sq_grad(const Measure& mu, const Measure& nu, std::span<const double> points,
                                const TorusContext& ctx) {
  check_dim(mu, nu, ctx);
  const int d = ctx.dim();
  check_points(points, d);
  const MetricWeights w(ctx, MetricOrder::star(ctx));
  const auto fmu = fourier_coefficients(mu, ctx);
  const auto fnu = fourier_coefficients(nu, ctx);
  const double c = std::pow(kTwoPi, -0.5 * d);
  const std::size_t n_pts = points.size() / static_cast<std::size_t>(d);
  std::vector<double> out(points.size(), 0.0);
  std::vector<Complex> acc(static_cast<std::size_t>(d));
  for (std::size_t p = 0; p < n_pts; ++p) {
    const double* x = points.data() + p * static_cast<std::size_t>(d);
    std::fill(acc.begin(), acc.end(), Complex(0.0, 0.0));
    double scale = 0.0;
    for (std::size_t idx = 0; idx < ctx.num_modes(); ++idx) {
      const auto l = ctx.mode(idx);
      const Complex a = std::conj(fnu[idx] - fmu[idx]);
      if (a == Complex(0.0, 0.0)) continue;
      const Complex term = Complex(0.0, -2.0 * c * w[idx]) * a * std::polar(1.0, -dot(l, x, d));
      for (int ax = 0; ax < d; ++ax) acc[static_cast<std::size_t>(ax)] += static_cast<double>(l[static_cast<std::size_t>(ax)]) * term;
      scale += std::abs(term) * std::sqrt(ctx.mode_norm_sq(idx));
    }
    for (int ax = 0; ax < d; ++ax) {
      check_real(acc[static_cast<std::size_t>(ax)].imag(), scale, "rho_sq_grad");
      out[p * static_cast<std::size_t>(d) + static_cast<std::size_t>(ax)] = acc[static_cast<std::size_t>(ax)].real();
    }
  }
  return out;
}

std::vector<double> rho_sq_grad_jacobian(const Measure& mu, const Measure& nu, std::span<const double> points,
                                         const TorusContext& ctx) {
  check_dim(mu, nu, ctx);
  const int d = ctx.dim();
  check_points(points, d);
  const auto du = static_cast<std::size_t>(d);
  const MetricWeights w(ctx, MetricOrder::star(ctx));
  const auto fmu = fourier_coefficients(mu, ctx);
  const auto fnu = fourier_coefficients(nu, ctx);
  const double c = std::pow(kTwoPi, -0.5 * d);
  const std::size_t n_pts = points.size() / du;
  std::vector<double> out(n_pts * du * du, 0.0);
  std::vector<Complex> acc(du * du);
  for (std::size_t p = 0; p < n_pts; ++p) {
    const double* x = points.data() + p * du;
    std::fill(acc.begin(), acc.end(), Complex(0.0, 0.0));
    double scale = 0.0;
    for (std::size_t idx = 0; idx < ctx.num_modes(); ++idx) {
      const auto l = ctx.mode(idx);
      const Complex a = std::conj(fnu[idx] - fmu[idx]);
      if (a == Complex(0.0, 0.0)) continue;
      const Complex term = -2.0 * c * w[idx] * a * std::polar(1.0, -dot(l, x, d));
      for (std::size_t r = 0; r < du; ++r) {
        for (std::size_t s = 0; s < du; ++s) acc[r * du + s] += static_cast<double>(l[r] * l[s]) * term;
      }
      scale += std::abs(term) * ctx.mode_norm_sq(idx);
    }
    for (std::size_t e = 0; e < du * du; ++e) {
      check_real(acc[e].imag(), scale, "rho_sq_grad_jacobian");
      out[p * du * du + e] = acc[e].real();
    }
  }
  return out;
}

std::vector<double> rho_sq_hess(const Measure& mu, const Measure& nu, std::span<const double> xs,
                                std::span<const double> ys, const TorusContext& ctx) {
  check_dim(mu, nu, ctx);
  const int d = ctx.dim();
  check_points(xs, d);
  if (xs.size() != ys.size()) throw InputDomainError("rho_sq_hess: xs and ys must have equal length");
  const auto du = static_cast<std::size_t>(d);
  const MetricWeights w(ctx, MetricOrder::star(ctx));
  const double c2 = std::pow(kTwoPi, -static_cast<double>(d));
  const std::size_t n_pairs = xs.size() / du;
  std::vector<double> out(n_pairs * du * du, 0.0);
  std::vector<double> diff(du);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    for (std::size_t a = 0; a < du; ++a) diff[a] = xs[p * du + a] - ys[p * du + a];
    double* m = out.data() + p * du * du;
    for (std::size_t idx = 0; idx < ctx.num_modes(); ++idx) {
      const auto l = ctx.mode(idx);
      if (ctx.mode_norm_sq(idx) == 0.0) continue;
      const double term = 2.0 * c2 * w[idx] * std::cos(dot(l, diff.data(), d));
      for (std::size_t r = 0; r < du; ++r) {
        for (std::size_t s = 0; s < du; ++s) m[r * du + s] += static_cast<double>(l[r] * l[s]) * term;
      }
    }
  }
  return out;
}

double sobolev_norm(const FourierVector& f, int k) {
  const auto& ctx = f.context();
  double sum = 0.0;
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    sum += std::pow(1.0 + ctx.mode_norm_sq(idx), k) * std::norm(f[idx]);
  }
  return std::sqrt(sum);
}

double alpha_rate(std::size_t n, int d) {
  if (n == 0) throw InputDomainError("alpha_rate: N must be >= 1");
  if (d < 1) throw InputDomainError("alpha_rate: d must be >= 1");
  const auto nn = static_cast<double>(n);
  if (d == 1) return 1.0 / std::sqrt(nn);
  if (d == 2) return std::log(nn) / std::sqrt(nn);
  return std::pow(nn, -1.0 / d);
}

double tail_bound(const TorusContext& ctx, MetricOrder order) {
  const int d = ctx.dim();
  const int k = order.k;
  if (2 * k <= d) throw InputDomainError("tail_bound: the series diverges for 2k <= d");
  const double per_mode = 4.0 * std::pow(kTwoPi, -static_cast<double>(d));
  // Shell |l|_inf = r holds (2r+1)^d - (2r-1)^d modes, each with |l|^2 >= r^2.
  constexpr long kShells = 200000;
  const long first = ctx.trunc() + 1;
  const long last = first + kShells;
  double sum = 0.0;
  for (long r = last; r >= first; --r) {
    const double rr = static_cast<double>(r);
    const double count = std::pow(2.0 * rr + 1.0, d) - std::pow(2.0 * rr - 1.0, d);
    sum += count * std::pow(1.0 + rr * rr, -k);
  }
  // Remaining shells: count <= 2d 3^{d-1} r^{d-1}, weight <= r^{-2k}.
  const double r0 = static_cast<double>(last);
  sum += 2.0 * d * std::pow(3.0, d - 1) * std::pow(r0, d - 2 * k) / (2.0 * k - d);
  return per_mode * sum;
}

double rho_w1_constant(const TorusContext& ctx) {
  return std::pow(kTwoPi, -0.5 * ctx.dim()) * MetricWeights(ctx, MetricOrder::star(ctx)).c1();
}

}  // namespace mfrl
