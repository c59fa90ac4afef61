#pragma once

// Uniform access to particle value functions v^N(t, x), the shift extension
// V^N(t, z, x) = v^N(t, z + x), the resampling estimator
// v_hat^N(t, mu) = int v^N(t, y) mu^{(x)N}(dy), and regularity probes.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>

#include "mfrl/fd_solver.hpp"
#include "mfrl/mc_solver.hpp"

namespace mfrl {

// v^N(t, x) for a flat configuration x (N points of dimension d). `stream`
// selects independent randomness for stochastic accessors; deterministic
// accessors ignore it.
using ValueAccessor = std::function<double(double t, std::span<const double> x, std::uint64_t stream)>;

ValueAccessor constant_accessor(double c);
// Multilinear/linear interpolation of a grid solution.
ValueAccessor grid_accessor(std::shared_ptr<const GridValueFunction> v);
// Fresh Feynman-Kac estimate per call, seeded from (seed, stream) so that
// calls sharing a stream use common random numbers.
ValueAccessor mc_accessor(ProblemSpec problem, std::size_t n_paths, int n_steps, std::uint64_t seed);

// V^N(t, z, x) = v^N(t, z + x) with z a d-vector added to every atom.
double extend_value(const ValueAccessor& v, double t, std::span<const double> z, const EmpiricalMeasure& atoms,
                    std::uint64_t stream = 0);

// Monte Carlo average of v^N(t, y) over n_resample i.i.d. N-tuples y drawn
// from mu; tuple r draws from CounterRng(seed, r) and evaluates the accessor
// on stream mix_stream(seed, r).
McEstimate hat_v(const ValueAccessor& v, double t, const Measure& mu, std::size_t n_particles,
                 std::size_t n_resample, std::uint64_t seed);

struct LipschitzReport {
  double gradient = 0.0;     // max_{t, x, i} N |D_{x^i} v^N| (central differences)
  double time_holder = 0.0;  // max |v^N(t, x) - v^N(s, x)| / sqrt|t - s| over a fixed time lattice
  double w1_lipschitz = 0.0; // max |v^N(t, x) - v^N(t, y)| / W_1(mu^x, mu^y) over sampled node pairs
};

// The time lattice is t_q = q T / time_points, q = 0..time_points, so the
// Hoelder estimate is comparable across meshes.
LipschitzReport lipschitz_probe(const GridValueFunction& v, int time_points = 16, std::size_t n_pairs = 4000,
                                std::uint64_t seed = 0);

}  // namespace mfrl
