#include <cmath>
#include <vector>

#include "doctest.h"
#include "mfrl/errors.hpp"
#include "mfrl/mean_field.hpp"
#include "mfrl/sobolev_metric.hpp"

using namespace mfrl;

TEST_CASE("heat flow of a point mass") {
  const auto delta = GridDensity::delta_like(64, 10);
  const double x0 = delta.node(10);
  for (double a : {0.0, 0.5}) {
    const auto p = null_benchmark(a);
    for (double t : {0.0, 0.4, 1.0}) {
      const auto v = mean_field_reference(p, t, Measure(delta));
      CHECK(v.value == doctest::Approx(std::exp(-(1 + a) * (1 - t)) * std::cos(x0)).epsilon(1e-12));
      CHECK(v.std_error == 0.0);
    }
  }
}

TEST_CASE("mode truncation has converged") {
  const auto p = linear_benchmark();
  const Measure mu = EmpiricalMeasure{0.3, 1.0, 2.5, 5.0};
  MeanFieldConfig c;
  const double v256 = mean_field_reference(p, 0.0, mu, c).value;
  c.modes = 512;
  c.max_step = 2.5e-4;
  const double v512 = mean_field_reference(p, 0.0, mu, c).value;
  CHECK(std::abs(v256 - v512) < 1e-9);
}

TEST_CASE("profile matches pointwise solves") {
  const auto p = linear_benchmark(0.4);
  const Measure mu = EmpiricalMeasure{0.3, 1.0, 2.5};
  const double taus[3] = {0.75, 0.0, 0.25};
  const auto prof = mean_field_profile(p, mu, taus);
  for (int i = 0; i < 3; ++i) {
    CHECK(prof[static_cast<std::size_t>(i)] ==
          doctest::Approx(mean_field_reference(p, 1.0 - taus[i], mu).value).epsilon(1e-10));
  }
}

TEST_CASE("agrees with a large particle system") {
  const auto p = linear_benchmark();
  const auto mu = GridDensity({1.0, 2.0, 3.0, 2.0, 1.0, 0.5, 0.5, 0.5});
  const auto atoms = sample_iid(mu, 2048, 77);
  const auto ref = mean_field_reference(p, 0.0, Measure(atoms));
  const auto est = mc_solve_linear(p, 0.0, atoms, 200, 100, 3);
  CHECK(std::abs(ref.value - est.mean) <= 3.0 * est.std_error + std::cbrt(alpha_rate(2048, 1)));
}

TEST_CASE("surrogate reference with common noise") {
  const auto p = linear_benchmark(0.5);
  const auto mu = GridDensity({1.0, 2.0, 3.0, 2.0, 1.0, 0.5, 0.5, 0.5});
  MeanFieldConfig c;
  c.method = ReferenceMethod::Surrogate;
  CHECK_THROWS_AS(mean_field_reference(p, 0.0, Measure(mu), c), ConfigurationError);
  c.m_ref = 256;
  c.n_paths = 400;
  c.n_steps = 100;
  const auto sur = mean_field_reference(p, 0.0, Measure(mu), c);
  CHECK(sur.bias_budget == doctest::Approx(std::cbrt(alpha_rate(256, 1))));
  const auto exact = mean_field_reference(p, 0.0, Measure(mu));
  CHECK(std::abs(sur.value - exact.value) <= 3.0 * sur.std_error + sur.bias_budget);
}

TEST_CASE("unsupported families") {
  CHECK_THROWS_AS(mean_field_reference(quadratic_benchmark(), 0.0, Measure(GridDensity::uniform(8))),
                  UnsupportedError);
}
