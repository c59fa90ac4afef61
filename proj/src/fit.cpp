#include "mfrl/fit.hpp"

#include <cmath>

#include "mfrl/errors.hpp"

namespace mfrl {

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputDomainError("power-law fit: x and y differ in length");
  if (x.size() < 3) throw InputDomainError("power-law fit needs at least 3 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InputDomainError("power-law fit needs finite positive values");
    }
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw InputDomainError("power-law fit needs at least two distinct x values");
  PowerLawFit fit;
  fit.beta = sxy / sxx;
  const double log_c = my - fit.beta * mx;
  fit.C = std::exp(log_c);
  fit.residuals.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    fit.residuals[i] = std::log(y[i]) - (log_c + fit.beta * std::log(x[i]));
  }
  return fit;
}

}  // namespace mfrl
