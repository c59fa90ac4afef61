#include <cmath>
#include <vector>

#include "doctest.h"
#include "mfrl/errors.hpp"
#include "mfrl/fit.hpp"

using namespace mfrl;

TEST_CASE("exact power law is recovered") {
  const std::vector<double> x{0.5, 0.25, 0.125, 0.0625};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * std::cbrt(v));
  const auto fit = fit_power_law(x, y);
  CHECK(fit.beta == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(fit.C == doctest::Approx(2.0).epsilon(1e-12));
  for (double r : fit.residuals) CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("constant data has zero slope") {
  const std::vector<double> x{1, 2, 4, 8};
  const std::vector<double> y{3, 3, 3, 3};
  const auto fit = fit_power_law(x, y);
  CHECK(std::abs(fit.beta) < 1e-14);
  CHECK(fit.C == doctest::Approx(3.0));
}

TEST_CASE("invalid inputs") {
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(fit_power_law(two, two), InputDomainError);
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> bad{1, 0, 2};
  CHECK_THROWS_AS(fit_power_law(x, bad), InputDomainError);
  const std::vector<double> same{2, 2, 2};
  CHECK_THROWS_AS(fit_power_law(same, x), InputDomainError);
  const std::vector<double> shorter{1, 2, 3, 4};
  CHECK_THROWS_AS(fit_power_law(shorter, x), InputDomainError);
}
