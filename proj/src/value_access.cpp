#include "mfrl/value_access.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfrl/errors.hpp"
#include "mfrl/rng.hpp"

namespace mfrl {

ValueAccessor constant_accessor(double c) {
  return [c](double, std::span<const double>, std::uint64_t) { return c; };
}

ValueAccessor grid_accessor(std::shared_ptr<const GridValueFunction> v) {
  if (!v) throw InputDomainError("grid_accessor: null value function");
  return [v = std::move(v)](double t, std::span<const double> x, std::uint64_t) { return v->interpolate(t, x); };
}

ValueAccessor mc_accessor(ProblemSpec problem, std::size_t n_paths, int n_steps, std::uint64_t seed) {
  validate(problem);
  return [problem = std::move(problem), n_paths, n_steps, seed](double t, std::span<const double> x,
                                                              std::uint64_t stream) {
    return mc_solve_linear(problem, t, EmpiricalMeasure(x), n_paths, n_steps, mix_stream(seed, stream)).mean;
  };
}

double extend_value(const ValueAccessor& v, double t, std::span<const double> z, const EmpiricalMeasure& atoms,
                    std::uint64_t stream) {
  const auto d = static_cast<std::size_t>(atoms.dim());
  if (z.size() != d) throw InputDomainError("extend_value: shift dimension does not match the atoms");
  std::vector<double> shifted(atoms.coords().begin(), atoms.coords().end());
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = canonicalize(shifted[i] + z[i % d]);
  return v(t, shifted, stream);
}

McEstimate hat_v(const ValueAccessor& v, double t, const Measure& mu, std::size_t n_particles,
                 std::size_t n_resample, std::uint64_t seed) {
  if (n_particles == 0 || n_resample == 0) throw InputDomainError("hat_v: N and n_resample must be positive");
  const auto d = static_cast<std::size_t>(measure_dim(mu));
  const auto* emp = std::get_if<EmpiricalMeasure>(&mu);
  const auto* grid = std::get_if<GridDensity>(&mu);
  RunningStats stats;
  std::vector<double> y(n_particles * d);
  for (std::size_t r = 0; r < n_resample; ++r) {
    CounterRng rng(seed, r);
    for (std::size_t i = 0; i < n_particles; ++i) {
      if (emp != nullptr) {
        const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(emp->size()));
        const auto atom = emp->atom(pick);
        std::copy(atom.begin(), atom.end(), y.begin() + static_cast<std::ptrdiff_t>(i * d));
      } else {
        y[i] = grid->inverse_cdf(rng.uniform());
      }
    }
    stats.add(v(t, y, mix_stream(seed, r)));
  }
  return {stats.mean(), stats.std_error(), n_resample, seed};
}

LipschitzReport lipschitz_probe(const GridValueFunction& v, int time_points, std::size_t n_pairs,
                                std::uint64_t seed) {
  if (time_points < 1) throw InputDomainError("lipschitz_probe: need at least one time interval");
  const int n = v.particles();
  const std::size_t nodes = v.num_nodes();
  const auto m = static_cast<std::size_t>(v.mesh());
  const double h = v.spacing();
  LipschitzReport rep;

  for (int k = 0; k < v.num_slices(); ++k) {
    const auto s = v.slice(k);
    for (std::size_t node = 0; node < nodes; ++node) {
      for (int p = 0; p < n; ++p) {
        const std::size_t stride = v.stride(p);
        const auto c = static_cast<std::size_t>(v.coordinate(node, p));
        const std::size_t plus = c + 1 < m ? node + stride : node - (m - 1) * stride;
        const std::size_t minus = c > 0 ? node - stride : node + (m - 1) * stride;
        rep.gradient = std::max(rep.gradient, n * std::abs(s[plus] - s[minus]) / (2.0 * h));
      }
    }
  }

  // Slices on the fixed lattice, linear in time between stored slices.
  std::vector<std::vector<double>> lattice(static_cast<std::size_t>(time_points) + 1, std::vector<double>(nodes));
  for (int q = 0; q <= time_points; ++q) {
    const double t = v.horizon() * q / time_points;
    const double ts = t / v.horizon() * v.intervals();
    const int k0 = std::min(static_cast<int>(std::floor(ts)), v.intervals() - 1);
    const double w = ts - k0;
    const auto a = v.slice(k0), b = v.slice(k0 + 1);
    auto& out = lattice[static_cast<std::size_t>(q)];
    for (std::size_t node = 0; node < nodes; ++node) out[node] = (1.0 - w) * a[node] + w * b[node];
  }
  for (int q = 0; q <= time_points; ++q) {
    for (int r = q + 1; r <= time_points; ++r) {
      const double root = std::sqrt(v.horizon() * (r - q) / time_points);
      const auto& a = lattice[static_cast<std::size_t>(q)];
      const auto& b = lattice[static_cast<std::size_t>(r)];
      for (std::size_t node = 0; node < nodes; ++node) {
        rep.time_holder = std::max(rep.time_holder, std::abs(a[node] - b[node]) / root);
      }
    }
  }

  CounterRng rng(seed, 0);
  for (std::size_t pair = 0; pair < n_pairs; ++pair) {
    const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(nodes));
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(nodes));
    const auto& slice = lattice[pair % lattice.size()];
    const double w1 = w1_circle(EmpiricalMeasure(v.node_point(i)), EmpiricalMeasure(v.node_point(j)));
    if (w1 <= 0.0) continue;
    rep.w1_lipschitz = std::max(rep.w1_lipschitz, std::abs(slice[i] - slice[j]) / w1);
  }
  return rep;
}

}  // namespace mfrl
