// mfrl: solvers, metrics, convolution probes and rate experiments from JSON plans.
//
// Exit codes: 0 success, 1 internal error, 2 schema or argument error,
// 3 precondition / unsupported / resource error, 4 numerical divergence.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "mfrl/convolution.hpp"
#include "mfrl/errors.hpp"
#include "mfrl/fd_solver.hpp"
#include "mfrl/mc_solver.hpp"
#include "mfrl/plan_io.hpp"
#include "mfrl/rate_lab.hpp"
#include "mfrl/sobolev_metric.hpp"

using namespace mfrl;
using nlohmann::json;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("MFRL_LOG");
  const std::string_view s = env != nullptr ? env : "warn";
  if (s == "error") return Level::Error;
  if (s == "info") return Level::Info;
  if (s == "debug") return Level::Debug;
  return Level::Warn;
}

void log(Level lvl, const std::string& msg) {
  static const Level threshold = log_level();
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  if (lvl <= threshold) std::cerr << "[mfrl " << names[static_cast<int>(lvl)] << "] " << msg << '\n';
}

struct Common {
  std::string plan;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c, bool needs_out) {
  cmd->add_option("--plan", c.plan, "JSON plan file")->required()->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", c.out, "output path");
  if (needs_out) out->required();
  cmd->add_option("--seed", c.seed, "overrides the plan seed");
  cmd->add_option("--threads", c.threads, "worker thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--format", c.format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + path);
  out << text;
  if (!out) throw ResourceError("write failed for " + path);
}

std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int cmd_solve(const Common& c) {
  auto plan = solve_plan_from_json(read_json_file(c.plan));
  if (c.seed) plan.seed = *c.seed;
  json summary;
  if (plan.solver == "fd") {
    log(Level::Info, "fd_solve N=" + std::to_string(plan.n_particles) + " mesh=" + std::to_string(plan.mesh));
    const auto v = fd_solve(plan.problem, plan.n_particles, plan.mesh, plan.fd);
    write_value_file(v, c.out);
    summary = {{"solver", "fd"},     {"N", v.particles()},       {"mesh", v.mesh()},
               {"intervals", v.intervals()}, {"T", v.horizon()}, {"value_file", c.out}};
    write_text(c.out + ".json", summary.dump(2) + "\n");
  } else {
    const auto est = mc_solve_linear(plan.problem, plan.t, EmpiricalMeasure(plan.atoms), plan.n_paths, plan.n_steps,
                                     plan.seed);
    summary = {{"solver", "mc"}, {"N", plan.n_particles}, {"t", plan.t},         {"mean", est.mean},
               {"std_error", est.std_error}, {"n_paths", est.n_paths}, {"seed", est.seed}};
    if (c.format == "csv") {
      write_text(c.out, "t,mean,std_error,n_paths,seed\n" + g17(plan.t) + "," + g17(est.mean) + "," +
                            g17(est.std_error) + "," + std::to_string(est.n_paths) + "," + std::to_string(est.seed) +
                            "\n");
    } else {
      write_text(c.out, summary.dump(2) + "\n");
    }
  }
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_rate(const Common& c) {
  auto plan = rate_plan_from_json(read_json_file(c.plan));
  if (c.seed) plan.seed = *c.seed;
  const auto rep = run_rate_experiment(plan);
  for (const auto& f : rep.flags) log(Level::Warn, f);
  std::ostringstream csv;
  write_rate_csv(rep, csv);
  const std::string js = rate_report_json(rep).dump(2) + "\n";
  if (c.format == "csv") {
    write_text(c.out, csv.str());
    write_text(c.out + ".json", js);
  } else {
    write_text(c.out, js);
    write_text(c.out + ".csv", csv.str());
  }
  std::cout << csv.str();
  return 0;
}

int cmd_probe(const Common& c) {
  const auto plan = probe_plan_from_json(read_json_file(c.plan));
  const auto v = fd_solve(plan.problem, plan.n_particles, plan.mesh);
  const auto table = gap_scaling_probe(v, plan.targets, plan.epsilons, plan.search);
  std::ostringstream csv;
  csv << "epsilon,t_gap,z_gap,rho_gap,fit_slope\n";
  for (const auto& r : table.rows) {
    csv << g17(r.epsilon) << ',' << g17(r.t_gap) << ',' << g17(r.z_gap) << ',' << g17(r.rho_gap) << ",\n";
  }
  // Summary rows: the column name in place of epsilon, the fitted slope last.
  const auto slope_row = [&](const char* name, const std::optional<double>& s) {
    csv << name << ",,,," << (s ? g17(*s) : std::string("nan")) << '\n';
  };
  slope_row("t_gap", table.t_slope);
  slope_row("z_gap", table.z_slope);
  slope_row("rho_gap", table.rho_slope);

  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"epsilon", r.epsilon}, {"t_gap", r.t_gap}, {"z_gap", r.z_gap}, {"rho_gap", r.rho_gap}});
  }
  const auto opt = [](const std::optional<double>& s) { return s ? json(*s) : json(nullptr); };
  const json js{{"rows", rows},
                {"t_slope", opt(table.t_slope)},
                {"z_slope", opt(table.z_slope)},
                {"rho_slope", opt(table.rho_slope)},
                {"rho_constant", table.rho_constant}};
  const std::string body = c.format == "csv" ? csv.str() : js.dump(2) + "\n";
  if (!c.out.empty()) write_text(c.out, body);
  std::cout << body;
  return 0;
}

int cmd_complexity(const Common& c) {
  auto plan = complexity_plan_from_json(read_json_file(c.plan));
  if (c.seed) plan.seed = *c.seed;
  const auto table = sample_complexity_experiment(plan.density, plan.n_list, plan.n_trials, plan.seed);
  std::ostringstream csv;
  write_complexity_csv(table, csv);
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"N", r.n}, {"w1_mean", r.w1_mean}, {"w1_se", r.w1_se}, {"rho_mean", r.rho_mean},
                    {"rho_se", r.rho_se}});
  }
  const auto opt = [](const std::optional<double>& s) { return s ? json(*s) : json(nullptr); };
  const json js{{"rows", rows},
                {"w1_slope", opt(table.w1_slope)},
                {"rho_slope", opt(table.rho_slope)},
                {"max_rho_w1_ratio", table.max_rho_w1_ratio},
                {"trials", table.trials}};
  const std::string body = c.format == "csv" ? csv.str() : js.dump(2) + "\n";
  if (!c.out.empty()) write_text(c.out, body);
  std::cout << body;
  return 0;
}

int cmd_metric(const std::string& a, const std::string& b, std::optional<int> order, int trunc) {
  const auto mu = measure_from_json(read_json_file(a));
  const auto nu = measure_from_json(read_json_file(b));
  const int d = measure_dim(mu);
  if (d != measure_dim(nu)) throw SchemaError("measures have different dimensions");
  const TorusContext ctx(d, trunc);
  const MetricOrder k = order ? MetricOrder{*order} : MetricOrder::star(ctx);
  std::printf("%.12g\n", rho(mu, nu, k, ctx));
  return 0;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const SchemaError& e) {
    log(Level::Error, e.what());
    return 2;
  } catch (const DivergenceError& e) {
    log(Level::Error, e.what());
    return 4;
  } catch (const InputDomainError& e) {
    log(Level::Error, e.what());
    return 3;
  } catch (const ConfigurationError& e) {
    log(Level::Error, e.what());
    return 3;
  } catch (const UnsupportedError& e) {
    log(Level::Error, e.what());
    return 3;
  } catch (const ResourceError& e) {
    log(Level::Error, e.what());
    return 3;
  } catch (const std::exception& e) {
    log(Level::Error, e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle approximation lab for second-order HJB equations on Wasserstein space"};
  app.require_subcommand(1);

  Common solve_opts, rate_opts, probe_opts, complexity_opts;
  auto* solve = app.add_subcommand("solve", "finite-difference or Monte Carlo solve of the particle equation");
  add_common(solve, solve_opts, true);
  auto* rate = app.add_subcommand("rate", "convergence-rate experiment");
  add_common(rate, rate_opts, true);
  auto* probe = app.add_subcommand("probe", "inf-convolution gap scaling probe");
  add_common(probe, probe_opts, false);
  auto* complexity = app.add_subcommand("complexity", "sample complexity of empirical measures");
  add_common(complexity, complexity_opts, false);

  std::string mu_path, nu_path;
  std::optional<int> order;
  int trunc = 0;
  auto* metric = app.add_subcommand("metric", "print rho_{-k}(mu, nu) for two measure files");
  metric->add_option("mu", mu_path, "first measure (JSON)")->required()->check(CLI::ExistingFile);
  metric->add_option("nu", nu_path, "second measure (JSON)")->required()->check(CLI::ExistingFile);
  metric->add_option("--order", order, "Sobolev order k (default k_*)");
  metric->add_option("--trunc", trunc, "Fourier truncation L (0 = default)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*solve) return guarded([&] { apply_threads(solve_opts.threads); return cmd_solve(solve_opts); });
  if (*rate) return guarded([&] { apply_threads(rate_opts.threads); return cmd_rate(rate_opts); });
  if (*probe) return guarded([&] { apply_threads(probe_opts.threads); return cmd_probe(probe_opts); });
  if (*complexity) {
    return guarded([&] { apply_threads(complexity_opts.threads); return cmd_complexity(complexity_opts); });
  }
  return guarded([&] { return cmd_metric(mu_path, nu_path, order, trunc); });
}
