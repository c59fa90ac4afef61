#pragma once

// Inf-convolution of the extended particle value function,
//   Vbar^{N,eps}(t, z, mu) = inf_{(s, w, x)} V^N(s, w, x) + |t - s|^2 / 2eps
//                            + |z - w|^2 / 2eps + rho_*^2(mu^x, mu) / 2eps,
// and sup-convolution of test functions in the shift variable, over discrete
// search sets on the circle (d = 1).

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mfrl/fd_solver.hpp"
#include "mfrl/value_access.hpp"

namespace mfrl {

struct ConvolutionTarget {
  double t = 0.0;
  double z = 0.0;
  Measure mu = EmpiricalMeasure{0.0};
};

// Explicit search set: time nodes x shift nodes x the configuration mesh^N.
struct ConvolutionConfig {
  double epsilon = 0.1;
  std::vector<double> time_nodes;
  std::vector<double> shift_nodes;
  int mesh = 16;
  int n_particles = 1;
  TorusContext ctx{1};
};

struct ArgminRecord {
  double value = 0.0;
  double s0 = 0.0;
  double w0 = 0.0;
  std::vector<double> x0;
  double t_gap = 0.0;    // |t - s0|
  double z_gap = 0.0;    // arc distance between z and w0
  double rho_gap = 0.0;  // rho_*(mu^{x0}, mu)
};

// Brute-force minimum over the search set using the accessor. Ties resolve to
// the smallest s, then the smallest w, then the lexicographically smallest x.
ArgminRecord inf_convolve(const ValueAccessor& v, const ConvolutionTarget& target, const ConvolutionConfig& cfg);

// Search set tied to a grid solution: every `time_stride`-th stored slice
// (always including t = T), shifts j h / shift_subdivisions on the mesh
// spacing h, and all mesh nodes as configurations. Off-grid shifts use the
// solution's multilinear interpolation.
struct GridSearch {
  int time_stride = 1;
  int shift_subdivisions = 1;
  TorusContext ctx{1};
};

// Results indexed [epsilon][target]; same tie rule as inf_convolve.
std::vector<std::vector<ArgminRecord>> inf_convolve_grid(const GridValueFunction& v,
                                                         std::span<const ConvolutionTarget> targets,
                                                         std::span<const double> epsilons, const GridSearch& search);

struct SupConvolutionConfig {
  double epsilon = 0.1;
  double t0 = 0.0;
  Measure mu0 = EmpiricalMeasure{0.0};
  std::vector<double> shift_nodes;
  TorusContext ctx{1};
};

// Phi^eps(s, w, x) = max_{z in shift_nodes} { phi(z) - d(w, z)^2 / 2eps }
//                    - |s - t0|^2 / 2eps - rho_*^2(mu^x, mu0) / 2eps,
// where phi(z) = Phi(t0, z, mu0) and d is the arc distance.
double sup_convolve_testfn(const std::function<double(double)>& phi, double s, double w,
                           const EmpiricalMeasure& atoms, const SupConvolutionConfig& cfg);

struct GapRow {
  double epsilon = 0.0;
  double t_gap = 0.0;
  double z_gap = 0.0;
  double rho_gap = 0.0;
};

struct GapTable {
  std::vector<GapRow> rows;  // in the order of the requested epsilons
  // Log-log slopes of each gap column against epsilon; empty when a column
  // has a zero entry.
  std::optional<double> t_slope, z_slope, rho_slope;
  // Smallest C with rho_gap <= C (eps + alpha(N) + sqrt(eps alpha(N))) on every row.
  double rho_constant = 0.0;
};

// Runs inf_convolve_grid for every epsilon and aggregates the maximal gaps
// over the targets. Needs at least 3 epsilons.
GapTable gap_scaling_probe(const GridValueFunction& v, std::span<const ConvolutionTarget> targets,
                           std::span<const double> epsilons, const GridSearch& search);

}  // namespace mfrl
