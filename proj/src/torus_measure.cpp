#include "mfrl/torus_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "mfrl/errors.hpp"
#include "mfrl/rng.hpp"

namespace mfrl {

TorusContext::TorusContext(int dim, int trunc) : dim_(dim), trunc_(trunc == 0 ? default_trunc(dim) : trunc) {
  if (dim_ < 1) throw InputDomainError("torus dimension must be positive");
  if (trunc_ < 1) throw InputDomainError("Fourier truncation level must be >= 1");
  const std::size_t side = static_cast<std::size_t>(2 * trunc_ + 1);
  num_modes_ = 1;
  for (int a = 0; a < dim_; ++a) num_modes_ *= side;
  auto modes = std::make_shared<std::vector<int>>(num_modes_ * static_cast<std::size_t>(dim_));
  auto norms = std::make_shared<std::vector<double>>(num_modes_);
  for (std::size_t idx = 0; idx < num_modes_; ++idx) {
    std::size_t rem = idx;
    double norm = 0.0;
    for (int a = dim_ - 1; a >= 0; --a) {
      const int l = static_cast<int>(rem % side) - trunc_;
      rem /= side;
      (*modes)[idx * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(a)] = l;
      norm += static_cast<double>(l) * l;
    }
    (*norms)[idx] = norm;
  }
  modes_ = std::move(modes);
  norms_ = std::move(norms);
}

double canonicalize(double x) {
  if (!std::isfinite(x)) throw InputDomainError("non-finite coordinate");
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number plus 2 pi can round up to 2 pi itself.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

std::vector<double> canonicalize(std::span<const double> point) {
  std::vector<double> out(point.size());
  std::transform(point.begin(), point.end(), out.begin(), [](double x) { return canonicalize(x); });
  return out;
}

double torus_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputDomainError("torus_distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double g = circle_distance(x[a], y[a]);
    sum += g * g;
  }
  return std::sqrt(sum);
}

EmpiricalMeasure::EmpiricalMeasure(int dim, std::span<const double> coords) : dim_(dim) {
  if (dim_ < 1) throw InputDomainError("empirical measure dimension must be positive");
  const auto d = static_cast<std::size_t>(dim_);
  if (coords.empty() || coords.size() % d != 0) {
    throw InputDomainError("empirical measure needs N >= 1 atoms of dimension " + std::to_string(dim_));
  }
  const std::size_t n = coords.size() / d;
  std::vector<std::vector<double>> points(n);
  for (std::size_t i = 0; i < n; ++i) points[i] = canonicalize(coords.subspan(i * d, d));
  std::sort(points.begin(), points.end());
  coords_.reserve(coords.size());
  for (const auto& p : points) coords_.insert(coords_.end(), p.begin(), p.end());
}

GridDensity::GridDensity(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InputDomainError("grid density needs at least one node");
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw InputDomainError("grid density values must be finite and >= 0");
    sum += v;
  }
  if (sum <= 0.0) throw InputDomainError("grid density has zero mass");
  const double h = spacing();
  for (double& v : values_) v /= sum * h;
  cdf_.resize(values_.size() + 1);
  cdf_[0] = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j) cdf_[j + 1] = cdf_[j] + values_[j] * h;
}

GridDensity GridDensity::uniform(std::size_t m) { return GridDensity(std::vector<double>(m, 1.0)); }

GridDensity GridDensity::delta_like(std::size_t m, std::size_t node) {
  if (node >= m) throw InputDomainError("delta_like: node outside the mesh");
  std::vector<double> v(m, 0.0);
  v[node] = 1.0;
  return GridDensity(std::move(v));
}

double GridDensity::mass() const {
  return spacing() * std::accumulate(values_.begin(), values_.end(), 0.0);
}

double GridDensity::inverse_cdf(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw InputDomainError("inverse_cdf: u must lie in [0, 1)");
  const double target = u * cdf_.back();
  // First cell whose upper cumulative mass exceeds the target; empty cells are skipped.
  auto it = std::upper_bound(cdf_.begin() + 1, cdf_.end(), target);
  if (it == cdf_.end()) --it;
  const auto j = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  const double h = spacing();
  const double cell_mass = cdf_[j + 1] - cdf_[j];
  const double frac = cell_mass > 0.0 ? (target - cdf_[j]) / cell_mass : 0.0;
  return canonicalize(node(j) - 0.5 * h + h * std::clamp(frac, 0.0, 1.0));
}

int measure_dim(const Measure& mu) {
  return std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, EmpiricalMeasure>) {
          return m.dim();
        } else {
          return 1;
        }
      },
      mu);
}

FourierVector::FourierVector(TorusContext ctx, std::vector<Complex> coeffs)
    : ctx_(std::move(ctx)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != ctx_.num_modes()) throw InputDomainError("Fourier vector size does not match context");
}

Complex FourierVector::at(std::span<const int> l) const {
  if (static_cast<int>(l.size()) != ctx_.dim()) throw InputDomainError("mode dimension mismatch");
  const int trunc = ctx_.trunc();
  const auto side = static_cast<std::size_t>(2 * trunc + 1);
  std::size_t idx = 0;
  for (int la : l) {
    if (la < -trunc || la > trunc) return {0.0, 0.0};
    idx = idx * side + static_cast<std::size_t>(la + trunc);
  }
  return coeffs_[idx];
}

FourierVector FourierVector::operator-(const FourierVector& other) const {
  if (!(ctx_ == other.ctx_)) throw InputDomainError("Fourier vectors live on different contexts");
  std::vector<Complex> diff(coeffs_.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = coeffs_[i] - other.coeffs_[i];
  return {ctx_, std::move(diff)};
}

FourierVector fourier_coefficients(const EmpiricalMeasure& mu, const TorusContext& ctx) {
  if (mu.dim() != ctx.dim()) throw InputDomainError("measure dimension does not match context");
  const int d = ctx.dim();
  const int trunc = ctx.trunc();
  const auto side = static_cast<std::size_t>(2 * trunc + 1);
  const std::size_t n_modes = ctx.num_modes();
  std::vector<Complex> acc(n_modes, Complex(0.0, 0.0));
  std::vector<Complex> phase(side * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto x = mu.atom(i);
    for (int a = 0; a < d; ++a) {
      for (int l = -trunc; l <= trunc; ++l) {
        phase[static_cast<std::size_t>(a) * side + static_cast<std::size_t>(l + trunc)] =
            std::polar(1.0, -static_cast<double>(l) * x[static_cast<std::size_t>(a)]);
      }
    }
    for (std::size_t idx = 0; idx < n_modes; ++idx) {
      const auto l = ctx.mode(idx);
      Complex term = phase[static_cast<std::size_t>(l[0] + trunc)];
      for (int a = 1; a < d; ++a) {
        term *= phase[static_cast<std::size_t>(a) * side + static_cast<std::size_t>(l[static_cast<std::size_t>(a)] + trunc)];
      }
      acc[idx] += term;
    }
  }
  const double scale = std::pow(kTwoPi, -0.5 * d) / static_cast<double>(mu.size());
  for (auto& c : acc) c *= scale;
  return {ctx, std::move(acc)};
}

FourierVector fourier_coefficients(const GridDensity& mu, const TorusContext& ctx) {
  if (ctx.dim() != 1) throw InputDomainError("grid densities are one-dimensional");
  const int trunc = ctx.trunc();
  std::vector<Complex> acc(ctx.num_modes(), Complex(0.0, 0.0));
  const auto values = mu.values();
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] == 0.0) continue;
    const double x = mu.node(j);
    for (int l = -trunc; l <= trunc; ++l) {
      acc[static_cast<std::size_t>(l + trunc)] += values[j] * std::polar(1.0, -static_cast<double>(l) * x);
    }
  }
  const double scale = mu.spacing() / std::sqrt(kTwoPi);
  for (auto& c : acc) c *= scale;
  return {ctx, std::move(acc)};
}

FourierVector fourier_coefficients(const Measure& mu, const TorusContext& ctx) {
  return std::visit([&](const auto& m) { return fourier_coefficients(m, ctx); }, mu);
}

EmpiricalMeasure sample_iid(const GridDensity& mu, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputDomainError("sample_iid: n must be positive");
  CounterRng rng(seed, 0);
  std::vector<double> atoms(n);
  for (auto& x : atoms) x = mu.inverse_cdf(rng.uniform());
  return EmpiricalMeasure(atoms);
}

namespace {

void require_circle(int dim) {
  if (dim != 1) throw UnsupportedError("w1_circle handles d = 1 only; use w1_lp for d > 1");
}

// F_mu - F_nu on [0, 2 pi) as a list of linear pieces.
struct LinearPiece {
  double length;
  double start;
  double slope;
};

struct CircleMass {
  std::vector<std::pair<double, double>> atoms;  // (position, mass)
  const GridDensity* density = nullptr;

  double density_at(double theta) const {
    if (density == nullptr) return 0.0;
    const double h = density->spacing();
    auto j = static_cast<std::size_t>(std::floor((theta + 0.5 * h) / h));
    j %= density->mesh();
    return density->values()[j];
  }
};

CircleMass circle_mass(const Measure& mu) {
  CircleMass out;
  if (const auto* emp = std::get_if<EmpiricalMeasure>(&mu)) {
    require_circle(emp->dim());
    const double w = 1.0 / static_cast<double>(emp->size());
    for (std::size_t i = 0; i < emp->size(); ++i) out.atoms.emplace_back(emp->atom(i)[0], w);
  } else {
    out.density = &std::get<GridDensity>(mu);
  }
  return out;
}

std::vector<LinearPiece> cdf_difference(const CircleMass& a, const CircleMass& b) {
  std::vector<double> cuts{0.0, kTwoPi};
  for (const auto* m : {&a, &b}) {
    for (const auto& [x, w] : m->atoms) cuts.push_back(x);
    if (m->density != nullptr) {
      const double h = m->density->spacing();
      for (std::size_t j = 0; j < m->density->mesh(); ++j) cuts.push_back((static_cast<double>(j) + 0.5) * h);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Atom masses keyed by position, merged across both measures with signs.
  std::vector<std::pair<double, double>> jumps;
  for (const auto& [x, w] : a.atoms) jumps.emplace_back(x, w);
  for (const auto& [x, w] : b.atoms) jumps.emplace_back(x, -w);
  std::sort(jumps.begin(), jumps.end());

  std::vector<LinearPiece> pieces;
  pieces.reserve(cuts.size());
  double level = 0.0;
  std::size_t next_jump = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    while (next_jump < jumps.size() && jumps[next_jump].first <= lo) level += jumps[next_jump++].second;
    const double mid = 0.5 * (lo + hi);
    const double slope = a.density_at(mid) - b.density_at(mid);
    pieces.push_back({hi - lo, level, slope});
    level += slope * (hi - lo);
  }
  return pieces;
}

double measure_below(const std::vector<LinearPiece>& pieces, double c) {
  double total = 0.0;
  for (const auto& p : pieces) {
    const double end = p.start + p.slope * p.length;
    const double lo = std::min(p.start, end);
    const double hi = std::max(p.start, end);
    if (c <= lo) continue;
    if (c >= hi || hi == lo) {
      total += (c > lo) ? p.length : 0.0;
    } else {
      total += p.length * (c - lo) / (hi - lo);
    }
  }
  return total;
}

double abs_integral(const LinearPiece& p, double c) {
  const double f0 = p.start - c;
  const double f1 = p.start + p.slope * p.length - c;
  if ((f0 >= 0.0 && f1 >= 0.0) || (f0 <= 0.0 && f1 <= 0.0)) return 0.5 * std::abs(f0 + f1) * p.length;
  const double root = p.length * f0 / (f0 - f1);
  return 0.5 * std::abs(f0) * root + 0.5 * std::abs(f1) * (p.length - root);
}

double circle_w1_from_pieces(const std::vector<LinearPiece>& pieces) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : pieces) {
    const double end = p.start + p.slope * p.length;
    lo = std::min({lo, p.start, end});
    hi = std::max({hi, p.start, end});
  }
  // Any median of the difference under Lebesgue measure minimizes the L1 gap.
  const double half = 0.5 * kTwoPi;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (measure_below(pieces, mid) < half) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double c = 0.5 * (lo + hi);
  double total = 0.0;
  for (const auto& p : pieces) total += abs_integral(p, c);
  return total;
}

}  // namespace

double w1_circle_cdf(const Measure& mu, const Measure& nu) {
  const auto a = circle_mass(mu);
  const auto b = circle_mass(nu);
  return circle_w1_from_pieces(cdf_difference(a, b));
}

double w1_circle(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require_circle(mu.dim());
  require_circle(nu.dim());
  // Evaluate in a canonical argument order so the result is exactly symmetric.
  const auto before = [](const EmpiricalMeasure& x, const EmpiricalMeasure& y) {
    return std::lexicographical_compare(x.coords().begin(), x.coords().end(), y.coords().begin(), y.coords().end());
  };
  if (before(nu, mu)) return w1_circle(nu, mu);
  const std::size_t n = mu.size();
  if (nu.size() != n) return w1_circle_cdf(Measure(mu), Measure(nu));
  const auto a = mu.coords();
  const auto b = nu.coords();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t shift = 0; shift < n; ++shift) {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = std::abs(a[i] - b[(i + shift) % n]);
      cost += std::min(diff, kTwoPi - diff);
    }
    best = std::min(best, cost);
  }
  return best / static_cast<double>(n);
}

double w1_circle(const EmpiricalMeasure& mu, const GridDensity& nu) {
  require_circle(mu.dim());
  return w1_circle_cdf(Measure(mu), Measure(nu));
}

namespace {

// Successive shortest paths with Dijkstra and Johnson potentials.
class MinCostFlow {
 public:
  explicit MinCostFlow(std::size_t n) : graph_(n), potential_(n, 0.0) {}

  void add_edge(std::size_t from, std::size_t to, long long cap, double cost) {
    graph_[from].push_back({to, graph_[to].size(), cap, cost});
    graph_[to].push_back({from, graph_[from].size() - 1, 0, -cost});
  }

  double solve(std::size_t source, std::size_t sink, long long demand) {
    const std::size_t n = graph_.size();
    double total = 0.0;
    std::vector<double> dist(n);
    std::vector<std::size_t> prev_node(n), prev_edge(n);
    using Item = std::pair<double, std::size_t>;
    while (demand > 0) {
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      dist[source] = 0.0;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      heap.emplace(0.0, source);
      while (!heap.empty()) {
        const auto [du, u] = heap.top();
        heap.pop();
        if (du > dist[u]) continue;
        for (std::size_t e = 0; e < graph_[u].size(); ++e) {
          const auto& edge = graph_[u][e];
          if (edge.cap <= 0) continue;
          // Reduced costs are nonnegative up to rounding.
          const double reduced = std::max(0.0, edge.cost + potential_[u] - potential_[edge.to]);
          if (dist[u] + reduced < dist[edge.to]) {
            dist[edge.to] = dist[u] + reduced;
            prev_node[edge.to] = u;
            prev_edge[edge.to] = e;
            heap.emplace(dist[edge.to], edge.to);
          }
        }
      }
      if (!std::isfinite(dist[sink])) throw ConsistencyError("transport network is disconnected");
      for (std::size_t v = 0; v < n; ++v) {
        if (std::isfinite(dist[v])) potential_[v] += dist[v];
      }
      long long push = demand;
      for (std::size_t v = sink; v != source; v = prev_node[v]) {
        push = std::min(push, graph_[prev_node[v]][prev_edge[v]].cap);
      }
      for (std::size_t v = sink; v != source; v = prev_node[v]) {
        auto& edge = graph_[prev_node[v]][prev_edge[v]];
        edge.cap -= push;
        graph_[v][edge.rev].cap += push;
        total += static_cast<double>(push) * edge.cost;
      }
      demand -= push;
    }
    return total;
  }

 private:
  struct Edge {
    std::size_t to;
    std::size_t rev;
    long long cap;
    double cost;
  };
  std::vector<std::vector<Edge>> graph_;
  std::vector<double> potential_;
};

}  // namespace

double w1_lp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.dim() != nu.dim()) throw InputDomainError("w1_lp: dimension mismatch");
  const std::size_t n = mu.size();
  const std::size_t m = nu.size();
  if (n * m > 10000) {
    throw ResourceError("w1_lp: support product " + std::to_string(n * m) + " exceeds the budget 10^4");
  }
  const auto g = std::gcd(n, m);
  const auto supply = static_cast<long long>(m / g);
  const auto demand = static_cast<long long>(n / g);
  const std::size_t source = n + m;
  const std::size_t sink = n + m + 1;
  MinCostFlow flow(n + m + 2);
  for (std::size_t i = 0; i < n; ++i) flow.add_edge(source, i, supply, 0.0);
  for (std::size_t j = 0; j < m; ++j) flow.add_edge(n + j, sink, demand, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      flow.add_edge(i, n + j, supply, torus_distance(mu.atom(i), nu.atom(j)));
    }
  }
  const long long total = supply * static_cast<long long>(n);
  return flow.solve(source, sink, total) / static_cast<double>(total);
}

}  // namespace mfrl
