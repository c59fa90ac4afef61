#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "mfrl/convolution.hpp"
#include "mfrl/errors.hpp"

using namespace mfrl;

namespace {

std::shared_ptr<const GridValueFunction> small_solution() {
  static const auto v = std::make_shared<const GridValueFunction>(fd_solve(linear_benchmark(0.3), 2, 8));
  return v;
}

std::vector<ConvolutionTarget> some_targets(const GridValueFunction& v) {
  return {
      {v.slice_time(0), 0.0, EmpiricalMeasure{0.0, 1.0}},
      {0.5 * v.horizon(), 2.0, EmpiricalMeasure{0.3, 4.0}},
      {v.horizon(), 5.0, GridDensity::uniform(32)},
  };
}

}  // namespace

TEST_CASE("grid fast path matches the brute-force search") {
  const auto v = small_solution();
  const auto targets = some_targets(*v);
  const std::vector<double> eps{0.05, 0.4};
  GridSearch search;
  search.time_stride = 1;
  search.shift_subdivisions = 2;
  const auto fast = inf_convolve_grid(*v, targets, eps, search);

  ConvolutionConfig cfg;
  cfg.mesh = v->mesh();
  cfg.n_particles = 2;
  for (int k = 0; k < v->num_slices(); ++k) cfg.time_nodes.push_back(v->slice_time(k));
  for (int j = 0; j < 2 * v->mesh(); ++j) cfg.shift_nodes.push_back(j * v->spacing() / 2);
  const auto acc = grid_accessor(v);
  for (std::size_t e = 0; e < eps.size(); ++e) {
    cfg.epsilon = eps[e];
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto slow = inf_convolve(acc, targets[i], cfg);
      CHECK(fast[e][i].value == doctest::Approx(slow.value).epsilon(1e-12));
      CHECK(fast[e][i].s0 == doctest::Approx(slow.s0));
      CHECK(fast[e][i].w0 == doctest::Approx(slow.w0));
      CHECK(fast[e][i].rho_gap == doctest::Approx(slow.rho_gap));
    }
  }
}

TEST_CASE("constant value function: on-grid targets reproduce the constant") {
  ConvolutionConfig cfg;
  cfg.mesh = 8;
  cfg.n_particles = 2;
  cfg.time_nodes = {0.0, 0.5, 1.0};
  cfg.shift_nodes = {0.0, 1.0, 2.0};
  cfg.epsilon = 0.2;
  const double h = kTwoPi / 8;
  const ConvolutionTarget tg{0.5, 1.0, EmpiricalMeasure{h, 5 * h}};
  const auto rec = inf_convolve(constant_accessor(3.0), tg, cfg);
  CHECK(rec.value == doctest::Approx(3.0));
  CHECK(rec.t_gap == 0.0);
  CHECK(rec.z_gap == 0.0);
  CHECK(rec.rho_gap < 1e-7);
}

TEST_CASE("ordering and envelope properties") {
  const auto v = small_solution();
  const double h = v->spacing();
  // On-grid targets, so every gap pays at most the oscillation of V.
  const std::vector<ConvolutionTarget> targets{
      {v->slice_time(0), 0.0, EmpiricalMeasure{0.0, 2 * h}},
      {v->slice_time(v->num_slices() / 2), 3 * h, EmpiricalMeasure{h, 4 * h}},
      {v->horizon(), 5 * h, EmpiricalMeasure{7 * h, 7 * h}},
  };
  const std::vector<double> eps{0.01, 0.03, 0.1, 0.3, 1.0, 100.0};
  const auto res = inf_convolve_grid(*v, targets, eps, GridSearch{});
  const auto vals = v->values();
  const double vmin = *std::min_element(vals.begin(), vals.end());
  const double vmax = *std::max_element(vals.begin(), vals.end());

  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t e = 0; e + 1 < eps.size(); ++e) CHECK(res[e][i].value >= res[e + 1][i].value);
    for (std::size_t e = 0; e < eps.size(); ++e) {
      const auto& r = res[e][i];
      CHECK(r.value >= vmin);
      const double bound = std::sqrt(2 * eps[e] * (vmax - vmin)) + 1e-12;
      CHECK(r.t_gap <= bound);
      CHECK(r.z_gap <= bound);
    }
  }
  // Large epsilon: the minimum of V up to the (small) penalty.
  CHECK(res.back()[0].value <= vmin + (1.0 + std::pow(std::numbers::pi, 2) + 1.0) / 200.0);
}

TEST_CASE("on-grid target value is at most V there") {
  const auto v = small_solution();
  const double h = v->spacing();
  const std::vector<double> x{2 * h, 5 * h};
  const int k = v->num_slices() / 2;
  const ConvolutionTarget tg{v->slice_time(k), 0.0, EmpiricalMeasure(x)};
  const std::vector<ConvolutionTarget> targets{tg};
  const std::vector<double> eps{0.001, 0.1};
  const auto res = inf_convolve_grid(*v, targets, eps, GridSearch{});
  const double here = v->interpolate(tg.t, x);
  for (const auto& row : res) CHECK(row[0].value <= here + 1e-12);
}

TEST_CASE("sup-convolution is semiconvex in the shift") {
  SupConvolutionConfig cfg;
  cfg.epsilon = 0.1;
  cfg.t0 = 0.5;
  cfg.mu0 = EmpiricalMeasure{0.2, 1.1};
  for (int j = 0; j < 128; ++j) cfg.shift_nodes.push_back(kTwoPi * j / 128);
  const auto phi = [](double z) { return std::sin(3 * z) - std::abs(std::cos(z)); };
  const EmpiricalMeasure atoms{0.2, 1.1};

  const int n = 400;
  const double dw = kTwoPi / n;
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) {
    const double w = i * dw;
    f[static_cast<std::size_t>(i)] = sup_convolve_testfn(phi, 0.5, w, atoms, cfg) + w * w / (2 * cfg.epsilon);
  }
  double worst = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    worst = std::min(worst, f[u + 1] - 2 * f[u] + f[u - 1]);
  }
  CHECK(worst >= -1e-9);

  // On a shift node with s = t0 and mu^x = mu0 it dominates phi.
  for (int j = 0; j < 128; j += 9) {
    const double z = cfg.shift_nodes[static_cast<std::size_t>(j)];
    CHECK(sup_convolve_testfn(phi, 0.5, z, atoms, cfg) >= phi(z) - 1e-12);
  }
  // Moving s away from t0 lowers the value by the time penalty.
  CHECK(sup_convolve_testfn(phi, 0.7, 0.0, atoms, cfg) ==
        doctest::Approx(sup_convolve_testfn(phi, 0.5, 0.0, atoms, cfg) - 0.04 / 0.2));
}

TEST_CASE("gap scaling table") {
  const auto v = small_solution();
  const auto targets = some_targets(*v);
  const std::vector<double> eps{0.02, 0.05, 0.1, 0.2};
  const auto table = gap_scaling_probe(*v, targets, eps, GridSearch{});
  REQUIRE(table.rows.size() == 4);
  CHECK(table.rows[0].epsilon == 0.02);
  CHECK(table.rho_constant >= 0.0);
  for (std::size_t e = 0; e + 1 < table.rows.size(); ++e) CHECK(table.rows[e].t_gap <= table.rows[e + 1].t_gap + 1e-12);
}

TEST_CASE("invalid configurations") {
  ConvolutionConfig cfg;
  const ConvolutionTarget tg;
  CHECK_THROWS_AS(inf_convolve(constant_accessor(0.0), tg, cfg), ConfigurationError);
  cfg.time_nodes = {0.0};
  cfg.shift_nodes = {0.0};
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(inf_convolve(constant_accessor(0.0), tg, cfg), InputDomainError);

  const auto v = small_solution();
  const auto targets = some_targets(*v);
  const std::vector<double> two{0.1, 0.2};
  CHECK_THROWS_AS(gap_scaling_probe(*v, targets, two, GridSearch{}), InputDomainError);
  GridSearch bad;
  bad.shift_subdivisions = 0;
  CHECK_THROWS_AS(inf_convolve_grid(*v, targets, two, bad), ConfigurationError);
}
