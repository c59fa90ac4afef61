#include "mfrl/rate_lab.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdio>

#include "mfrl/errors.hpp"
#include "mfrl/mc_solver.hpp"
#include "mfrl/rng.hpp"
#include "mfrl/sobolev_metric.hpp"

namespace mfrl {

namespace {

std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* method_name(ReferenceMethod m) { return m == ReferenceMethod::Spectral ? "spectral" : "surrogate"; }

std::optional<double> slope_against(const std::vector<double>& x, const std::vector<double>& y) {
  for (double v : y) {
    if (!(v > 0.0)) return std::nullopt;
  }
  return fit_power_law(x, y).beta;
}

}  // namespace

void validate(const ExperimentPlan& plan) {
  validate(plan.problem);
  if (plan.n_list.size() < 3) throw InputDomainError("N_list needs at least 3 entries");
  for (std::size_t i = 0; i < plan.n_list.size(); ++i) {
    if (plan.n_list[i] < 1) throw InputDomainError("N_list entries must be positive");
    if (i > 0 && plan.n_list[i] <= plan.n_list[i - 1]) throw InputDomainError("N_list must be strictly increasing");
  }
  if (plan.time_points < 1 || plan.configs_per_n < 1) throw InputDomainError("sampling sizes must be positive");
  if (plan.n_paths < 2) throw InputDomainError("n_paths must be at least 2");
  if (plan.n_steps < 1 || plan.n_steps % plan.time_points != 0) {
    throw InputDomainError("n_steps must be a positive multiple of time_points");
  }
  if (!(plan.false_alarm > 0.0 && plan.false_alarm < 1.0)) throw InputDomainError("false_alarm must lie in (0, 1)");
  if (plan.problem.ctx.dim() != 1) throw UnsupportedError("rate experiments are implemented for d = 1");
}

PowerLawFit fit_rate(std::span<const double> alpha, std::span<const double> error) {
  return fit_power_law(alpha, error);
}

RateReport run_rate_experiment(const ExperimentPlan& plan) {
  validate(plan);
  const auto& p = plan.problem;
  if (p.hamiltonian.family == HamiltonianFamily::QuadraticInP) {
    throw UnsupportedError("no reference solver for Hamiltonians quadratic in p");
  }

  RateReport rep;
  rep.seed = plan.seed;
  rep.n_paths = plan.n_paths;
  rep.n_steps = plan.n_steps;
  rep.time_points = plan.time_points;
  rep.configs_per_n = plan.configs_per_n;
  rep.reference = method_name(plan.reference);
  rep.truncation_tail = tail_bound(p.ctx, MetricOrder::star(p.ctx));

  MeanFieldConfig ref_cfg;
  ref_cfg.method = plan.reference;
  ref_cfg.modes = plan.reference_modes;
  if (plan.reference == ReferenceMethod::Surrogate) {
    ref_cfg.m_ref = plan.m_ref > 0 ? plan.m_ref : 32 * static_cast<std::size_t>(plan.n_list.back());
    ref_cfg.n_paths = plan.n_paths;
    ref_cfg.n_steps = plan.n_steps;
    rep.m_ref = ref_cfg.m_ref;
    rep.reference_bias = std::cbrt(alpha_rate(ref_cfg.m_ref, 1));
  }

  std::vector<double> durations;
  for (int j = 0; j < plan.time_points; ++j) {
    durations.push_back(p.T - p.T * static_cast<double>(j) / plan.time_points);
  }
  const std::size_t n_samples = static_cast<std::size_t>(plan.configs_per_n) * durations.size();
  const boost::math::normal standard;
  const double kappa = boost::math::quantile(standard, 1.0 - plan.false_alarm / static_cast<double>(n_samples));

  for (int n : plan.n_list) {
    RateRow row;
    row.n = n;
    row.alpha = alpha_rate(static_cast<std::size_t>(n), 1);
    row.alpha_cbrt = std::cbrt(row.alpha);
    const std::uint64_t key = mix_stream(plan.seed, static_cast<std::uint64_t>(n));
    double max_se = 0.0;
    double best = -1.0;
    std::vector<double> atoms(static_cast<std::size_t>(n));
    for (int c = 0; c < plan.configs_per_n; ++c) {
      CounterRng rng(key, static_cast<std::uint64_t>(c));
      for (auto& x : atoms) x = kTwoPi * rng.uniform();
      const EmpiricalMeasure mu(atoms);
      const auto mc = mc_profile_linear(p, mu, durations, plan.n_paths, plan.n_steps,
                                        mix_stream(key, 1'000'000ull + static_cast<std::uint64_t>(c)));
      std::vector<double> ref(durations.size());
      std::vector<double> ref_se(durations.size(), 0.0);
      if (plan.reference == ReferenceMethod::Spectral) {
        ref = mean_field_profile(p, Measure(mu), durations, ref_cfg);
      } else {
        for (std::size_t j = 0; j < durations.size(); ++j) {
          auto cfg = ref_cfg;
          cfg.seed = mix_stream(key, 2'000'000ull + static_cast<std::uint64_t>(c));
          const auto r = mean_field_reference(p, p.T - durations[j], Measure(mu), cfg);
          ref[j] = r.value;
          ref_se[j] = r.std_error;
        }
      }
      for (std::size_t j = 0; j < durations.size(); ++j) {
        const double se = std::hypot(mc[j].std_error, ref_se[j]);
        max_se = std::max(max_se, se);
        const double err = std::abs(mc[j].mean - ref[j]);
        if (err > best) {
          best = err;
          row.sup_error = err;
          row.mc_std = se;
          row.t_argmax = p.T - durations[j];
        }
      }
    }
    row.noise_budget = kappa * max_se + rep.reference_bias;
    rep.rows.push_back(row);
  }

  std::vector<double> alpha, err;
  for (const auto& r : rep.rows) {
    alpha.push_back(r.alpha);
    err.push_back(r.sup_error);
  }
  if (std::all_of(err.begin(), err.end(), [](double e) { return e > 0.0; })) rep.fit = fit_rate(alpha, err);

  rep.c_fit = rep.rows.front().sup_error / rep.rows.front().alpha_cbrt;
  rep.bound_holds = true;
  for (auto& r : rep.rows) {
    if (r.sup_error > rep.c_fit * r.alpha_cbrt + r.noise_budget) {
      rep.bound_holds = false;
      r.notes = "above C_fit alpha^(1/3) + budget";
      rep.flags.push_back("N=" + std::to_string(r.n) + " exceeds the fitted bound");
    }
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    auto& r = rep.rows[i];
    const auto& prev = rep.rows[i - 1];
    if (r.sup_error > prev.sup_error + prev.noise_budget + r.noise_budget) {
      rep.monotone = false;
      r.notes += r.notes.empty() ? "non-monotone" : "; non-monotone";
      rep.flags.push_back("sup_error increases from N=" + std::to_string(prev.n) + " to N=" + std::to_string(r.n));
    }
  }
  return rep;
}

void write_rate_csv(const RateReport& report, std::ostream& out) {
  out << "N,alpha,alpha_cbrt,sup_error,mc_std,notes\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << fmt_g(r.alpha) << ',' << fmt_g(r.alpha_cbrt) << ',' << fmt_g(r.sup_error) << ','
        << fmt_g(r.mc_std) << ',' << r.notes << '\n';
  }
}

nlohmann::json rate_report_json(const RateReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"N", r.n},
                    {"alpha", r.alpha},
                    {"alpha_cbrt", r.alpha_cbrt},
                    {"sup_error", r.sup_error},
                    {"mc_std", r.mc_std},
                    {"noise_budget", r.noise_budget},
                    {"t_argmax", r.t_argmax},
                    {"notes", r.notes}});
  }
  nlohmann::json j{{"rows", rows},
                   {"c_fit", report.c_fit},
                   {"bound_holds", report.bound_holds},
                   {"monotone", report.monotone},
                   {"flags", report.flags},
                   {"provenance",
                    {{"seed", report.seed},
                     {"n_paths", report.n_paths},
                     {"n_steps", report.n_steps},
                     {"time_points", report.time_points},
                     {"configs_per_n", report.configs_per_n},
                     {"reference", report.reference},
                     {"m_ref", report.m_ref},
                     {"reference_bias", report.reference_bias},
                     {"truncation_tail", report.truncation_tail}}}};
  if (report.fit) {
    j["fit"] = {{"beta", report.fit->beta}, {"C", report.fit->C}, {"residuals", report.fit->residuals}};
  } else {
    j["fit"] = nullptr;
  }
  return j;
}

ComplexityTable sample_complexity_experiment(const GridDensity& mu, const std::vector<int>& n_list, int n_trials,
                                             std::uint64_t seed, const TorusContext& ctx) {
  if (n_trials < 100) throw InputDomainError("sample complexity needs at least 100 trials");
  if (n_list.size() < 3) throw InputDomainError("sample complexity needs at least 3 sample sizes");
  for (int n : n_list) {
    if (n < 1) throw InputDomainError("sample sizes must be positive");
  }
  if (ctx.dim() != 1) throw UnsupportedError("exact W_1 is implemented for d = 1");

  ComplexityTable table;
  table.trials = n_trials;
  const MetricWeights weights(ctx, MetricOrder::star(ctx));
  const auto target = fourier_coefficients(mu, ctx);
  std::vector<double> ns, w1s, rhos;
  for (int n : n_list) {
    RunningStats w1_stats, rho_stats;
    const std::uint64_t key = mix_stream(seed, static_cast<std::uint64_t>(n));
    for (int r = 0; r < n_trials; ++r) {
      const auto sample = sample_iid(mu, static_cast<std::size_t>(n), mix_stream(key, static_cast<std::uint64_t>(r)));
      const double w1 = w1_circle(sample, mu);
      const double rho = std::sqrt(rho_sq(fourier_coefficients(sample, ctx), target, weights));
      w1_stats.add(w1);
      rho_stats.add(rho);
      if (w1 > 0.0) table.max_rho_w1_ratio = std::max(table.max_rho_w1_ratio, rho / w1);
    }
    table.rows.push_back({n, w1_stats.mean(), w1_stats.std_error(), rho_stats.mean(), rho_stats.std_error()});
    ns.push_back(n);
    w1s.push_back(w1_stats.mean());
    rhos.push_back(rho_stats.mean());
  }
  table.w1_slope = slope_against(ns, w1s);
  table.rho_slope = slope_against(ns, rhos);
  return table;
}

void write_complexity_csv(const ComplexityTable& table, std::ostream& out) {
  out << "N,w1_mean,w1_se,rho_mean,rho_se\n";
  for (const auto& r : table.rows) {
    out << r.n << ',' << fmt_g(r.w1_mean) << ',' << fmt_g(r.w1_se) << ',' << fmt_g(r.rho_mean) << ','
        << fmt_g(r.rho_se) << '\n';
  }
}

}  // namespace mfrl
