#pragma once

// Explicit finite-difference solver for the N-particle HJB equation on the
// circle (d = 1), with value storage, interpolation and binary persistence.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfrl/problem.hpp"

namespace mfrl {

// Values on {saved time slices} x (mesh)^N. Node coordinates are 2 pi j / mesh;
// the flat node index is row-major with particle 0 slowest. Saved slices are
// uniform in time: slice k sits at t = k T / intervals().
class GridValueFunction {
 public:
  GridValueFunction(int n_particles, int mesh, int intervals, double T, std::vector<double> values);

  int particles() const { return n_; }
  int mesh() const { return mesh_; }
  int intervals() const { return intervals_; }
  double horizon() const { return T_; }
  double spacing() const;
  double slice_time(int k) const { return T_ * static_cast<double>(k) / intervals_; }
  std::size_t num_nodes() const { return nodes_; }
  int num_slices() const { return intervals_ + 1; }

  std::span<const double> slice(int k) const;
  double at(int k, std::size_t node) const { return values_[static_cast<std::size_t>(k) * nodes_ + node]; }
  std::span<const double> values() const { return values_; }

  std::size_t stride(int particle) const;
  int coordinate(std::size_t node, int particle) const;
  std::size_t node_index(std::span<const int> coords) const;
  // Node coordinates as points on the circle.
  std::vector<double> node_point(std::size_t node) const;

  // Multilinear in space (periodic), linear in time. t is clamped into [0, T].
  double interpolate(double t, std::span<const double> x) const;

 private:
  int n_;
  int mesh_;
  int intervals_;
  double T_;
  std::size_t nodes_;
  std::vector<double> values_;
};

struct FdOptions {
  int n_t = 0;         // time steps; 0 picks the smallest stable count
  int save_every = 0;  // keep every k-th slice; 0 keeps as many as fit the storage cap
  double cfl = 0.9;
  std::size_t max_stored_values = std::size_t{1} << 24;
};

inline constexpr std::size_t kMaxStateNodes = 10'000'000;

// Smallest n_t with T / n_t within the explicit-scheme stability bound
// dt <= cfl / ((2N + 2a) / h^2 + sum of upwind transport rates / h).
int required_time_steps(const ProblemSpec& problem, int n_particles, int mesh, double cfl = 0.9);

// Backward explicit Euler sweep from v(T) = G. Central differences for the
// gradient with a nodewise switch to upwinding where the local transport
// speed would break monotonicity; the common-noise term uses the diagonal
// shift stencil. Throws ConfigurationError (state budget, unstable n_t,
// monotonicity lost at run time) and DivergenceError (non-finite values).
GridValueFunction fd_solve(const ProblemSpec& problem, int n_particles, int mesh, const FdOptions& opts = {});

// Binary value file: "MFRL1", u32 version, u32 N, u32 d, u32 mesh, u32 n_t,
// f64 T, then (n_t + 1) * mesh^N little-endian f64 values.
inline constexpr std::uint32_t kValueFileVersion = 1;
void write_value_file(const GridValueFunction& v, const std::string& path);
GridValueFunction read_value_file(const std::string& path);

}  // namespace mfrl
