#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "s1mk/harness.hpp"
#include "s1mk/john_ellipse.hpp"
#include "s1mk/measures.hpp"
#include "s1mk/serialization.hpp"
#include "s1mk/solver.hpp"

using namespace s1mk;

namespace {

constexpr int kOk = 0;
constexpr int kInvariant = 2;
constexpr int kStagnation = 3;
constexpr int kUsage = 64;

struct Globals {
  int grid = 256;
  std::uint64_t seed = 0;
  std::string config;
  std::string out = "out";
  bool trace = false;
};

void note(const std::string& msg) { std::cerr << msg << '\n'; }

int cmd_solve(const Globals& g, double p, double q, std::optional<double> f_const, const std::string& f_kind,
              double lambda, const std::string& initial_path) {
  const Grid grid(g.grid);
  PeriodicSamples f = f_const ? PeriodicSamples::constant(grid, *f_const)
                              : gen_f(f_kind_from_string(f_kind), lambda, g.seed, grid);
  const auto params = f_const ? ProblemParams::make(p, q, f) : ProblemParams::make(p, q, f, lambda);
  std::optional<SupportFunction> initial;
  if (!initial_path.empty()) initial = resampled(body_from_json(read_json_file(initial_path)), grid);

  const std::filesystem::path out(g.out);
  try {
    const auto rep = solve(params, initial);
    write_json_file(out / "solution.json", to_json(rep, g.trace));
    write_json_file(out / "body.json", to_json(rep.body));
    std::cout << "residual " << format_double(rep.residual_sup) << " max_h " << format_double(rep.body.max_h())
              << " min_h " << format_double(rep.min_h) << (rep.converged ? " converged" : " not converged")
              << '\n';
    return rep.converged ? kOk : kStagnation;
  } catch (const StagnationError& e) {
    write_json_file(out / "solution.json", to_json(e.report(), g.trace));
    note(std::string("stagnation: ") + e.what());
    return kStagnation;
  }
}

int cmd_measures(const Globals& g, const std::string& body_path, double p, double q) {
  const auto body = body_from_json(read_json_file(body_path));
  const std::vector<MeasureDensity> ms{surface_density(body), lp_surface_density(body, p),
                                       dual_curvature_density(body, q), lp_dual_density(body, p, q)};
  const std::filesystem::path out(g.out);
  for (const auto& m : ms) measure_csv(m).write(out / (std::string("density_") + to_string(m.kind) + ".csv"));
  const Json j{{"measures", measure_totals_json(ms)},
               {"dual_volume", dual_volume(body, q)},
               {"area", area(body)},
               {"perimeter", perimeter(body)},
               {"diameter", diameter(body)},
               {"p", p},
               {"q", q}};
  write_json_file(out / "measures.json", j);
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_john(const Globals& g, const std::string& body_path, bool at_centroid) {
  const auto body = body_from_json(read_json_file(body_path));
  const auto res = at_centroid ? john_centroid(body) : john(body);
  const Json j{{"ellipse", to_json(res.ellipse)},
               {"certificate", to_json(res.certificate)},
               {"iterations", res.iterations},
               {"centered_at_centroid", at_centroid}};
  write_json_file(std::filesystem::path(g.out) / "john.json", j);
  std::cout << j.dump(2) << '\n';
  return res.certificate.e_in_k && (at_centroid || res.certificate.k_in_2e) ? kOk : kInvariant;
}

int report_sweep(const SweepResult& r) {
  std::cout << r.summary.dump(2) << '\n';
  note("wrote " + r.csv_path.string() + " and " + r.summary_path.string());
  return r.passed ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar L_p dual Minkowski toolkit: solver, measures, John ellipse and sweeps"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--grid", g.grid, "grid size (even, >= 16)");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--config", g.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--trace", g.trace, "include the Newton trace in solver output");

  double p = 0.5, q = 2.0, lambda = 1.0;
  std::optional<double> f_const;
  std::string f_kind = "trig", body_path, initial_path;

  auto* solve_cmd = app.add_subcommand("solve", "solve the planar L_p dual Minkowski equation");
  solve_cmd->add_option("--p", p)->required();
  solve_cmd->add_option("--q", q)->required();
  solve_cmd->add_option("--f-const", f_const, "constant data f");
  solve_cmd->add_option("--f-kind", f_kind, "generated data: trig, bump or piecewise-smoothed");
  solve_cmd->add_option("--lambda", lambda, "bounds 1/lambda <= f <= lambda for generated data");
  solve_cmd->add_option("--initial", initial_path, "initial body JSON")->check(CLI::ExistingFile);

  auto* measures_cmd = app.add_subcommand("measures", "curvature measures of a body");
  measures_cmd->add_option("--body", body_path)->required()->check(CLI::ExistingFile);
  measures_cmd->add_option("--p", p);
  measures_cmd->add_option("--q", q);

  bool at_centroid = false;
  auto* john_cmd = app.add_subcommand("john", "maximal inscribed ellipse with containment certificate");
  john_cmd->add_option("--body", body_path)->required()->check(CLI::ExistingFile);
  john_cmd->add_flag("--centroid", at_centroid, "pin the center at the centroid");

  auto* variational_cmd = app.add_subcommand("verify-variational", "finite-difference check of the variational formulas");

  std::string kind;
  int n_samples = 0, starts = 0;
  bool battery = false, no_doubling = false;
  std::vector<double> eps_grid;
  auto* sweep_cmd = app.add_subcommand("sweep", "seeded verification sweep");
  sweep_cmd->add_option("kind", kind, "sandwich, diameter, uniqueness, maxprinciple or variational")->required();
  auto* sweep_p = sweep_cmd->add_option("--p", p);
  auto* sweep_q = sweep_cmd->add_option("--q", q);
  auto* sweep_lambda = sweep_cmd->add_option("--lambda", lambda);
  auto* sweep_n = sweep_cmd->add_option("--n", n_samples, "number of samples");
  auto* sweep_kind = sweep_cmd->add_option("--f-kind", f_kind);
  auto* sweep_battery = sweep_cmd->add_flag("--battery", battery, "append the eccentric-ellipse battery");
  auto* sweep_no_doubling = sweep_cmd->add_flag("--no-doubling", no_doubling, "skip the second diameter batch");
  auto* sweep_starts = sweep_cmd->add_option("--starts", starts, "multi-start count for uniqueness");
  auto* sweep_eps = sweep_cmd->add_option("--eps", eps_grid, "closeness levels for uniqueness");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(g, p, q, f_const, f_kind, lambda, initial_path);
    if (*measures_cmd) return cmd_measures(g, body_path, p, q);
    if (*john_cmd) return cmd_john(g, body_path, at_centroid);

    ExperimentConfig config;
    if (!g.config.empty()) config = ExperimentConfig::from_json(read_json_file(g.config));
    auto* grid_opt = app.get_option("--grid");
    auto* seed_opt = app.get_option("--seed");
    auto* out_opt = app.get_option("--out");
    if (grid_opt->count() || g.config.empty()) config.grid = g.grid;
    if (seed_opt->count() || g.config.empty()) config.seed = g.seed;
    if (out_opt->count() || g.config.empty()) config.out = g.out;

    if (*variational_cmd) {
      config.kind = SweepKind::variational;
      return report_sweep(run_sweep(config));
    }
    if (*sweep_cmd) {
      config.kind = sweep_kind_from_string(kind);
      if (sweep_p->count()) config.p = p;
      if (sweep_q->count()) config.q = q;
      if (sweep_lambda->count()) config.lambda = lambda;
      if (sweep_n->count()) config.n_samples = n_samples;
      if (sweep_kind->count()) config.f_kind = f_kind_from_string(f_kind);
      if (sweep_battery->count()) config.battery = battery;
      if (sweep_no_doubling->count()) config.doubling = !no_doubling;
      if (sweep_starts->count()) config.starts = starts;
      if (sweep_eps->count()) config.eps_grid = eps_grid;
      config.validate();
      return report_sweep(run_sweep(config));
    }
  } catch (const Error& e) {
    note(std::string(to_string(e.code())) + ": " + e.what());
    switch (e.code()) {
      case ErrorCode::invalid_argument:
      case ErrorCode::io:
        return kUsage;
      case ErrorCode::stagnation:
        return kStagnation;
      default:
        return kInvariant;
    }
  }
  return kUsage;
}
