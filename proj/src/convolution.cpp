#include "mfrl/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfrl/errors.hpp"
#include "mfrl/fit.hpp"
#include "mfrl/sobolev_metric.hpp"

namespace mfrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// rho_*^2(mu^x, mu) for every node x of the configuration mesh^N.
std::vector<double> node_rho_sq(int mesh, int n, std::size_t nodes, const Measure& mu, const TorusContext& ctx) {
  if (ctx.dim() != 1) throw UnsupportedError("convolution search sets are implemented for d = 1");
  const MetricWeights w(ctx, MetricOrder::star(ctx));
  const auto target = fourier_coefficients(mu, ctx);
  const double h = kTwoPi / mesh;
  std::vector<double> out(nodes);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::size_t node = 0; node < nodes; ++node) {
    std::size_t rem = node;
    for (int p = n - 1; p >= 0; --p) {
      x[static_cast<std::size_t>(p)] = h * static_cast<double>(rem % static_cast<std::size_t>(mesh));
      rem /= static_cast<std::size_t>(mesh);
    }
    out[node] = rho_sq(fourier_coefficients(EmpiricalMeasure(x), ctx), target, w);
  }
  return out;
}

std::size_t mesh_nodes(int mesh, int n) {
  if (mesh < 1 || n < 1) throw ConfigurationError("empty configuration grid");
  std::size_t nodes = 1;
  for (int p = 0; p < n; ++p) {
    if (nodes > kMaxStateNodes / static_cast<std::size_t>(mesh)) {
      throw ConfigurationError("configuration grid exceeds the state budget");
    }
    nodes *= static_cast<std::size_t>(mesh);
  }
  return nodes;
}

std::vector<double> node_coords(std::size_t node, int mesh, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  const double h = kTwoPi / mesh;
  for (int p = n - 1; p >= 0; --p) {
    x[static_cast<std::size_t>(p)] = h * static_cast<double>(node % static_cast<std::size_t>(mesh));
    node /= static_cast<std::size_t>(mesh);
  }
  return x;
}

}  // namespace

ArgminRecord inf_convolve(const ValueAccessor& v, const ConvolutionTarget& target, const ConvolutionConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw InputDomainError("epsilon must be positive");
  if (cfg.time_nodes.empty() || cfg.shift_nodes.empty()) throw ConfigurationError("empty search grid");
  const std::size_t nodes = mesh_nodes(cfg.mesh, cfg.n_particles);
  const auto rho2 = node_rho_sq(cfg.mesh, cfg.n_particles, nodes, target.mu, cfg.ctx);

  auto times = cfg.time_nodes;
  auto shifts = cfg.shift_nodes;
  for (auto& w : shifts) w = canonicalize(w);
  std::sort(times.begin(), times.end());
  std::sort(shifts.begin(), shifts.end());
  const double inv = 1.0 / (2.0 * cfg.epsilon);

  double best = kInf;
  std::size_t best_s = 0, best_w = 0, best_x = 0;
  std::vector<double> shifted(static_cast<std::size_t>(cfg.n_particles));
  for (std::size_t si = 0; si < times.size(); ++si) {
    const double dt = target.t - times[si];
    const double tpen = dt * dt * inv;
    for (std::size_t wi = 0; wi < shifts.size(); ++wi) {
      const double dz = circle_distance(target.z, shifts[wi]);
      const double zpen = dz * dz * inv;
      for (std::size_t node = 0; node < nodes; ++node) {
        const auto x = node_coords(node, cfg.mesh, cfg.n_particles);
        for (std::size_t p = 0; p < x.size(); ++p) shifted[p] = canonicalize(x[p] + shifts[wi]);
        const double value = v(times[si], shifted, 0) + tpen + zpen + rho2[node] * inv;
        if (value < best) {
          best = value;
          best_s = si;
          best_w = wi;
          best_x = node;
        }
      }
    }
  }
  ArgminRecord rec;
  rec.value = best;
  rec.s0 = times[best_s];
  rec.w0 = shifts[best_w];
  rec.x0 = node_coords(best_x, cfg.mesh, cfg.n_particles);
  rec.t_gap = std::abs(target.t - rec.s0);
  rec.z_gap = circle_distance(target.z, rec.w0);
  rec.rho_gap = std::sqrt(rho2[best_x]);
  return rec;
}

std::vector<std::vector<ArgminRecord>> inf_convolve_grid(const GridValueFunction& v,
                                                         std::span<const ConvolutionTarget> targets,
                                                         std::span<const double> epsilons, const GridSearch& search) {
  if (search.time_stride < 1 || search.shift_subdivisions < 1) throw ConfigurationError("empty search grid");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw InputDomainError("epsilon must be positive");
  }
  const int n = v.particles();
  const int mesh = v.mesh();
  const auto m = static_cast<std::size_t>(mesh);
  const std::size_t nodes = v.num_nodes();
  const int sub = search.shift_subdivisions;
  const double h = v.spacing();

  std::vector<int> slices;
  for (int k = 0; k <= v.intervals(); k += search.time_stride) slices.push_back(k);
  if (slices.back() != v.intervals()) slices.push_back(v.intervals());

  // Distinct (t, eps) pairs share the time minimisation.
  std::vector<double> times;
  for (const auto& tg : targets) times.push_back(tg.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const std::size_t n_pairs = times.size() * epsilons.size();
  const auto pair_of = [&](double t, std::size_t e) {
    return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin()) *
               epsilons.size() + e;
  };

  // best_a[pair][j][y] = min_s V(s, y + j h / sub) + |t - s|^2 / 2eps, and the minimising slice.
  const std::size_t block = static_cast<std::size_t>(sub) * nodes;
  std::vector<double> best_a(n_pairs * block, kInf);
  std::vector<int> best_s(n_pairs * block, 0);

  std::vector<std::size_t> corner_offsets;  // per node, filled lazily per corner
  std::vector<double> shifted(nodes);
  const std::size_t corners = std::size_t{1} << n;
  for (int j = 0; j < sub; ++j) {
    const double theta = static_cast<double>(j) / sub;
    for (int k : slices) {
      const auto s = v.slice(k);
      if (j == 0) {
        std::copy(s.begin(), s.end(), shifted.begin());
      } else {
        for (std::size_t node = 0; node < nodes; ++node) {
          double acc = 0.0;
          for (std::size_t c = 0; c < corners; ++c) {
            std::size_t idx = 0;
            int bits = 0;
            std::size_t rem = node;
            std::size_t stride = 1;
            for (int p = n - 1; p >= 0; --p) {
              std::size_t coord = rem % m;
              rem /= m;
              if ((c >> static_cast<std::size_t>(p)) & 1U) {
                coord = (coord + 1) % m;
                ++bits;
              }
              idx += coord * stride;
              stride *= m;
            }
            acc += std::pow(theta, bits) * std::pow(1.0 - theta, n - bits) * s[idx];
          }
          shifted[node] = acc;
        }
      }
      const double sk = v.slice_time(k);
      for (std::size_t ti = 0; ti < times.size(); ++ti) {
        for (std::size_t e = 0; e < epsilons.size(); ++e) {
          const double dt = times[ti] - sk;
          const double tpen = dt * dt / (2.0 * epsilons[e]);
          double* a = best_a.data() + (ti * epsilons.size() + e) * block + static_cast<std::size_t>(j) * nodes;
          int* sidx = best_s.data() + (ti * epsilons.size() + e) * block + static_cast<std::size_t>(j) * nodes;
          for (std::size_t node = 0; node < nodes; ++node) {
            const double val = shifted[node] + tpen;
            if (val < a[node]) {
              a[node] = val;
              sidx[node] = k;
            }
          }
        }
      }
    }
  }

  // Diagonal shift by k mesh cells.
  const auto diag_shift = [&](std::size_t node, std::size_t k) {
    std::size_t idx = 0, stride = 1, rem = node;
    for (int p = n - 1; p >= 0; --p) {
      idx += ((rem % m + k) % m) * stride;
      rem /= m;
      stride *= m;
    }
    return idx;
  };

  std::vector<std::vector<ArgminRecord>> out(epsilons.size(), std::vector<ArgminRecord>(targets.size()));
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const auto& tg = targets[ti];
    const auto rho2 = node_rho_sq(mesh, n, nodes, tg.mu, search.ctx);
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      const double inv = 1.0 / (2.0 * epsilons[e]);
      const std::size_t pr = pair_of(tg.t, e);
      double best = kInf;
      int bs = 0;
      double bw = 0.0;
      std::size_t bx = 0;
      for (std::size_t k = 0; k < m; ++k) {
        for (int j = 0; j < sub; ++j) {
          const double w = (static_cast<double>(k) + static_cast<double>(j) / sub) * h;
          const double dz = circle_distance(tg.z, w);
          const double zpen = dz * dz * inv;
          const double* a = best_a.data() + pr * block + static_cast<std::size_t>(j) * nodes;
          const int* sidx = best_s.data() + pr * block + static_cast<std::size_t>(j) * nodes;
          for (std::size_t x = 0; x < nodes; ++x) {
            const std::size_t y = diag_shift(x, k);
            const double val = a[y] + zpen + rho2[x] * inv;
            if (val < best || (val == best && sidx[y] < bs)) {
              best = val;
              bs = sidx[y];
              bw = w;
              bx = x;
            }
          }
        }
      }
      ArgminRecord rec;
      rec.value = best;
      rec.s0 = v.slice_time(bs);
      rec.w0 = bw;
      rec.x0 = node_coords(bx, mesh, n);
      rec.t_gap = std::abs(tg.t - rec.s0);
      rec.z_gap = circle_distance(tg.z, bw);
      rec.rho_gap = std::sqrt(rho2[bx]);
      out[e][ti] = std::move(rec);
    }
  }
  return out;
}

double sup_convolve_testfn(const std::function<double(double)>& phi, double s, double w,
                           const EmpiricalMeasure& atoms, const SupConvolutionConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw InputDomainError("epsilon must be positive");
  if (cfg.shift_nodes.empty()) throw ConfigurationError("empty shift grid");
  const double inv = 1.0 / (2.0 * cfg.epsilon);
  double best = -kInf;
  for (double z : cfg.shift_nodes) {
    const double d = circle_distance(w, z);
    best = std::max(best, phi(z) - d * d * inv);
  }
  const double dt = s - cfg.t0;
  const double r2 = rho_sq(Measure(atoms), cfg.mu0, MetricOrder::star(cfg.ctx), cfg.ctx);
  return best - dt * dt * inv - r2 * inv;
}

GapTable gap_scaling_probe(const GridValueFunction& v, std::span<const ConvolutionTarget> targets,
                           std::span<const double> epsilons, const GridSearch& search) {
  if (epsilons.size() < 3) throw InputDomainError("gap_scaling_probe needs at least 3 epsilon values to fit");
  if (targets.empty()) throw InputDomainError("gap_scaling_probe needs targets");
  const auto records = inf_convolve_grid(v, targets, epsilons, search);
  GapTable table;
  const double alpha = alpha_rate(static_cast<std::size_t>(v.particles()), 1);
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    GapRow row;
    row.epsilon = epsilons[e];
    for (const auto& rec : records[e]) {
      row.t_gap = std::max(row.t_gap, rec.t_gap);
      row.z_gap = std::max(row.z_gap, rec.z_gap);
      row.rho_gap = std::max(row.rho_gap, rec.rho_gap);
    }
    const double scale = row.epsilon + alpha + std::sqrt(row.epsilon * alpha);
    table.rho_constant = std::max(table.rho_constant, row.rho_gap / scale);
    table.rows.push_back(row);
  }
  const auto slope = [&](auto member) -> std::optional<double> {
    std::vector<double> xs, ys;
    for (const auto& r : table.rows) {
      if (!(r.*member > 0.0)) return std::nullopt;
      xs.push_back(r.epsilon);
      ys.push_back(r.*member);
    }
    return fit_power_law(xs, ys).beta;
  };
  table.t_slope = slope(&GapRow::t_gap);
  table.z_slope = slope(&GapRow::z_gap);
  table.rho_slope = slope(&GapRow::rho_gap);
  return table;
}

}  // namespace mfrl
