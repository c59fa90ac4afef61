#pragma once

#include <span>
#include <vector>

namespace mfrl {

// Ordinary least squares of log y on log x: log y = log C + beta log x.
struct PowerLawFit {
  double beta = 0.0;
  double C = 0.0;
  std::vector<double> residuals;  // log y_i - (log C + beta log x_i)
};

// Needs >= 3 points with x, y > 0 and at least two distinct x.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace mfrl
