#include "mfrl/fd_solver.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "mfrl/errors.hpp"

namespace mfrl {

namespace {

constexpr int kMaxParticles = 16;

std::size_t checked_nodes(int n, int mesh) {
  if (n < 1) throw InputDomainError("particle count must be >= 1");
  if (mesh < 4) throw InputDomainError("mesh must have at least 4 nodes per axis");
  std::size_t nodes = 1;
  for (int p = 0; p < n; ++p) {
    if (nodes > kMaxStateNodes / static_cast<std::size_t>(mesh)) {
      throw ConfigurationError("state count mesh^N = " + std::to_string(mesh) + "^" + std::to_string(n) +
                               " exceeds the budget of " + std::to_string(kMaxStateNodes) + " nodes");
    }
    nodes *= static_cast<std::size_t>(mesh);
  }
  if (n > kMaxParticles) throw ConfigurationError("at most 16 particles are supported by the grid solver");
  return nodes;
}

double sorted_sum(double* begin, double* end) {
  std::sort(begin, end);
  double s = 0.0;
  for (double* it = begin; it != end; ++it) s += *it;
  return s;
}

// Bound on |N D_{x^i} v| used to size the upwind transport rate of the quadratic term.
double gradient_scale(const ProblemSpec& p) {
  const auto& t = p.terminal;
  const double lg = t.g.lipschitz_bound() + 2.0 * t.h.sup_bound() * t.h.lipschitz_bound();
  return 2.0 * (lg + p.T * p.hamiltonian.running_kernel.lipschitz_bound());
}

}  // namespace

GridValueFunction::GridValueFunction(int n_particles, int mesh, int intervals, double T, std::vector<double> values)
    : n_(n_particles), mesh_(mesh), intervals_(intervals), T_(T), nodes_(checked_nodes(n_particles, mesh)),
      values_(std::move(values)) {
  if (intervals_ < 1) throw InputDomainError("a value function needs at least one time interval");
  if (!(T_ > 0.0)) throw InputDomainError("horizon must be positive");
  if (values_.size() != nodes_ * static_cast<std::size_t>(intervals_ + 1)) {
    throw InputDomainError("value array size does not match (n_t + 1) * mesh^N");
  }
}

double GridValueFunction::spacing() const { return kTwoPi / mesh_; }

std::span<const double> GridValueFunction::slice(int k) const {
  return {values_.data() + static_cast<std::size_t>(k) * nodes_, nodes_};
}

std::size_t GridValueFunction::stride(int particle) const {
  std::size_t s = 1;
  for (int p = particle + 1; p < n_; ++p) s *= static_cast<std::size_t>(mesh_);
  return s;
}

int GridValueFunction::coordinate(std::size_t node, int particle) const {
  return static_cast<int>((node / stride(particle)) % static_cast<std::size_t>(mesh_));
}

std::size_t GridValueFunction::node_index(std::span<const int> coords) const {
  if (static_cast<int>(coords.size()) != n_) throw InputDomainError("node_index: wrong coordinate count");
  std::size_t idx = 0;
  for (int c : coords) {
    const int r = ((c % mesh_) + mesh_) % mesh_;
    idx = idx * static_cast<std::size_t>(mesh_) + static_cast<std::size_t>(r);
  }
  return idx;
}

std::vector<double> GridValueFunction::node_point(std::size_t node) const {
  std::vector<double> x(static_cast<std::size_t>(n_));
  for (int p = n_ - 1; p >= 0; --p) {
    x[static_cast<std::size_t>(p)] = spacing() * static_cast<double>(node % static_cast<std::size_t>(mesh_));
    node /= static_cast<std::size_t>(mesh_);
  }
  return x;
}

double GridValueFunction::interpolate(double t, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_) throw InputDomainError("interpolate: configuration has the wrong size");
  const double tc = std::clamp(t, 0.0, T_);
  double ts = tc / T_ * intervals_;
  if (std::abs(ts - std::round(ts)) < 1e-10) ts = std::round(ts);
  int k0 = std::min(static_cast<int>(std::floor(ts)), intervals_ - 1);
  const double wt = ts - k0;

  const double h = spacing();
  std::array<std::size_t, kMaxParticles> lo{}, hi{};
  std::array<double, kMaxParticles> theta{};
  for (int p = 0; p < n_; ++p) {
    double u = canonicalize(x[static_cast<std::size_t>(p)]) / h;
    // Points that are nodes up to rounding hit the node value exactly.
    if (std::abs(u - std::round(u)) < 1e-10) u = std::round(u);
    auto i0 = static_cast<std::size_t>(std::floor(u));
    double th = u - static_cast<double>(i0);
    if (i0 >= static_cast<std::size_t>(mesh_)) {
      i0 = 0;
      th = 0.0;
    }
    const std::size_t s = stride(p);
    lo[static_cast<std::size_t>(p)] = i0 * s;
    hi[static_cast<std::size_t>(p)] = ((i0 + 1) % static_cast<std::size_t>(mesh_)) * s;
    theta[static_cast<std::size_t>(p)] = th;
  }
  double acc0 = 0.0, acc1 = 0.0;
  const std::size_t corners = std::size_t{1} << n_;
  const auto s0 = slice(k0), s1 = slice(k0 + 1);
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    for (int p = 0; p < n_; ++p) {
      const auto pu = static_cast<std::size_t>(p);
      if ((c >> pu) & 1U) {
        w *= theta[pu];
        idx += hi[pu];
      } else {
        w *= 1.0 - theta[pu];
        idx += lo[pu];
      }
    }
    if (w == 0.0) continue;
    acc0 += w * s0[idx];
    acc1 += w * s1[idx];
  }
  return (1.0 - wt) * acc0 + wt * acc1;
}

int required_time_steps(const ProblemSpec& problem, int n_particles, int mesh, double cfl) {
  validate(problem);
  checked_nodes(n_particles, mesh);
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InputDomainError("cfl factor must lie in (0, 1]");
  const double h = kTwoPi / mesh;
  const double n = n_particles;
  const auto& ham = problem.hamiltonian;
  double rate = (2.0 * n + 2.0 * problem.a) / (h * h);
  const double drift = ham.family == HamiltonianFamily::Zero ? 0.0 : ham.drift_kernel.sup_bound();
  const double speed = drift + ham.lambda * gradient_scale(problem);
  // Upwinding only kicks in where the transport speed exceeds 2 / h.
  if (speed * h > 2.0 || ham.lambda > 0.0) rate += n * (drift + 2.0 * ham.lambda * gradient_scale(problem)) / h;
  const double dt = cfl / rate;
  return std::max(1, static_cast<int>(std::ceil(problem.T / dt - 1e-9)));
}

GridValueFunction fd_solve(const ProblemSpec& problem, int n_particles, int mesh, const FdOptions& opts) {
  validate(problem);
  const std::size_t nodes = checked_nodes(n_particles, mesh);
  const int needed = required_time_steps(problem, n_particles, mesh, opts.cfl);
  int n_t = opts.n_t == 0 ? needed : opts.n_t;
  if (n_t < needed) {
    throw ConfigurationError("n_t = " + std::to_string(n_t) + " violates the explicit stability bound; requires n_t >= " +
                             std::to_string(needed));
  }
  int save_every = opts.save_every;
  if (save_every <= 0) {
    save_every = 1;
    while ((static_cast<std::size_t>(n_t / save_every) + 1) * nodes > opts.max_stored_values) ++save_every;
  }
  n_t = (n_t + save_every - 1) / save_every * save_every;
  const int intervals = n_t / save_every;
  if ((static_cast<std::size_t>(intervals) + 1) * nodes > std::max(opts.max_stored_values, nodes * 2)) {
    throw ResourceError("stored slices exceed the value budget; raise save_every");
  }

  const int n = n_particles;
  const double h = kTwoPi / mesh;
  const double inv_h2 = 1.0 / (h * h);
  const double dt = problem.T / n_t;
  const double a = problem.a;
  const auto& ham = problem.hamiltonian;
  const bool has_h = ham.family != HamiltonianFamily::Zero;
  const double lambda = ham.lambda;
  const double nd = n;

  // Kernel values on mesh differences: K((i - j) h).
  std::vector<double> k_tab(static_cast<std::size_t>(mesh)), j_tab(static_cast<std::size_t>(mesh));
  for (int r = 0; r < mesh; ++r) {
    k_tab[static_cast<std::size_t>(r)] = has_h ? ham.drift_kernel(r * h) : 0.0;
    j_tab[static_cast<std::size_t>(r)] = has_h ? ham.running_kernel(r * h) : 0.0;
  }

  std::vector<std::size_t> strides(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    std::size_t s = 1;
    for (int q = p + 1; q < n; ++q) s *= static_cast<std::size_t>(mesh);
    strides[static_cast<std::size_t>(p)] = s;
  }

  std::vector<double> values((static_cast<std::size_t>(intervals) + 1) * nodes);
  std::vector<double> cur(nodes), next(nodes);

  // Terminal slice from sorted node coordinates.
  for (std::size_t node = 0; node < nodes; ++node) {
    std::array<double, kMaxParticles> pts{};
    std::size_t rem = node;
    for (int p = n - 1; p >= 0; --p) {
      pts[static_cast<std::size_t>(p)] = h * static_cast<double>(rem % static_cast<std::size_t>(mesh));
      rem /= static_cast<std::size_t>(mesh);
    }
    std::sort(pts.begin(), pts.begin() + n);
    cur[node] = terminal_value(problem.terminal, std::span<const double>(pts.data(), static_cast<std::size_t>(n)));
  }
  std::copy(cur.begin(), cur.end(), values.begin() + static_cast<std::ptrdiff_t>(intervals * nodes));

  const std::size_t m = static_cast<std::size_t>(mesh);
  const double center_base = (2.0 * nd + 2.0 * a) * inv_h2;
  for (int step = n_t - 1; step >= 0; --step) {
    bool finite = true;
    bool monotone = true;
#pragma omp parallel for schedule(static) reduction(&& : finite, monotone)
    for (std::ptrdiff_t sn = 0; sn < static_cast<std::ptrdiff_t>(nodes); ++sn) {
      const auto node = static_cast<std::size_t>(sn);
      std::array<std::size_t, kMaxParticles> coord{};
      std::size_t rem = node;
      for (int p = n - 1; p >= 0; --p) {
        coord[static_cast<std::size_t>(p)] = rem % m;
        rem /= m;
      }
      const double center = cur[node];
      std::array<double, kMaxParticles> contrib{};
      std::array<double, kMaxParticles> terms{};
      double upwind_rate = 0.0;
      std::size_t diag_plus = 0, diag_minus = 0;
      for (int p = 0; p < n; ++p) {
        const auto pu = static_cast<std::size_t>(p);
        const std::size_t c = coord[pu];
        const std::size_t s = strides[pu];
        const std::size_t plus = c + 1 < m ? node + s : node - (m - 1) * s;
        const std::size_t minus = c > 0 ? node - s : node + (m - 1) * s;
        diag_plus += (c + 1 < m ? c + 1 : 0) * s;
        diag_minus += (c > 0 ? c - 1 : m - 1) * s;
        const double vp = cur[plus], vm = cur[minus];
        double value = (vp - 2.0 * center + vm) * inv_h2;
        if (has_h) {
          for (int q = 0; q < n; ++q) {
            terms[static_cast<std::size_t>(q)] = k_tab[(c + m - coord[static_cast<std::size_t>(q)]) % m];
          }
          const double b = sorted_sum(terms.data(), terms.data() + n) / nd;
          for (int q = 0; q < n; ++q) {
            terms[static_cast<std::size_t>(q)] = j_tab[(c + m - coord[static_cast<std::size_t>(q)]) % m];
          }
          const double f = sorted_sum(terms.data(), terms.data() + n) / nd;
          const double pc = (vp - vm) / (2.0 * h);
          const double speed = lambda * nd * pc + b;
          if (std::abs(speed) * h > 2.0) {
            const double pf = (vp - center) / h;
            const double pb = (center - vm) / h;
            const double pfp = std::max(pf, 0.0), pbm = std::min(pb, 0.0);
            value += 0.5 * lambda * nd * (pfp * pfp + pbm * pbm) + std::max(b, 0.0) * pf + std::min(b, 0.0) * pb;
            upwind_rate += (lambda * nd * (pfp - pbm) + std::abs(b)) / h;
          } else {
            value += 0.5 * lambda * nd * pc * pc + b * pc;
          }
          value += f / nd;
        }
        contrib[pu] = value;
      }
      double rhs = sorted_sum(contrib.data(), contrib.data() + n);
      if (a > 0.0) rhs += a * (cur[diag_plus] - 2.0 * center + cur[diag_minus]) * inv_h2;
      const double out = center + dt * rhs;
      next[node] = out;
      finite = finite && std::isfinite(out);
      monotone = monotone && (1.0 - dt * (center_base + upwind_rate) >= -1e-12);
    }
    if (!finite) throw DivergenceError("non-finite value at time step " + std::to_string(step));
    if (!monotone) {
      throw ConfigurationError("monotonicity lost at time step " + std::to_string(step) +
                               "; increase n_t beyond " + std::to_string(n_t));
    }
    cur.swap(next);
    if (step % save_every == 0) {
      std::copy(cur.begin(), cur.end(), values.begin() + static_cast<std::ptrdiff_t>((step / save_every) * nodes));
    }
  }
  return GridValueFunction(n, mesh, intervals, problem.T, std::move(values));
}

namespace {

constexpr char kMagic[5] = {'M', 'F', 'R', 'L', '1'};

template <typename U>
void put_le(std::ostream& os, U value) {
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFFU);
  os.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename U>
U get_le(std::istream& is) {
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(U))) throw SchemaError("value file truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_value_file(const GridValueFunction& v, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ResourceError("cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(os, kValueFileVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(v.particles()));
  put_le<std::uint32_t>(os, 1U);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(v.mesh()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(v.intervals()));
  put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v.horizon()));
  for (double x : v.values()) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(x));
  if (!os) throw ResourceError("failed writing '" + path + "'");
}

GridValueFunction read_value_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ResourceError("cannot open '" + path + "'");
  char magic[5];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw SchemaError("'" + path + "' is not an MFRL1 value file");
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kValueFileVersion) throw SchemaError("unsupported value file version " + std::to_string(version));
  const auto n = get_le<std::uint32_t>(is);
  const auto d = get_le<std::uint32_t>(is);
  const auto mesh = get_le<std::uint32_t>(is);
  const auto n_t = get_le<std::uint32_t>(is);
  const double T = std::bit_cast<double>(get_le<std::uint64_t>(is));
  if (d != 1) throw SchemaError("value files hold d = 1 solutions only");
  const std::size_t nodes = checked_nodes(static_cast<int>(n), static_cast<int>(mesh));
  std::vector<double> values((static_cast<std::size_t>(n_t) + 1) * nodes);
  for (auto& x : values) x = std::bit_cast<double>(get_le<std::uint64_t>(is));
  return GridValueFunction(static_cast<int>(n), static_cast<int>(mesh), static_cast<int>(n_t), T, std::move(values));
}

}  // namespace mfrl
