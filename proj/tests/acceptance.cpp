// Acceptance suite: one PASS/FAIL line per criterion, at the stated
// tolerances. Usage: acceptance [output-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "s1mk/harness.hpp"
#include "s1mk/john_ellipse.hpp"
#include "s1mk/measures.hpp"
#include "s1mk/solver.hpp"

using namespace s1mk;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void run(int id, const std::string& name, const std::function<Outcome()>& body) {
  try {
    report(id, name, body());
  } catch (const std::exception& e) {
    report(id, name, {false, std::string("exception: ") + e.what()});
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double json_number(const Json& j) { return j.is_number() ? j.get<double>() : NAN; }

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "acceptance_out";
  std::filesystem::remove_all(out);

  ExperimentConfig base;
  base.grid = 256;
  base.seed = 20240601;

  // Solution-measure identity, collected across every sweep that solves.
  double worst_total_error = 0.0;
  int solve_sweeps = 0;
  auto note_totals = [&](double v) {
    ++solve_sweeps;
    if (!std::isfinite(v)) worst_total_error = INFINITY;
    worst_total_error = std::max(worst_total_error, v);
  };

  run(1, "round solution", [] {
    const auto t0 = Clock::now();
    const Grid g(256);
    const auto rep = solve(ProblemParams::make(0.5, 2.0, PeriodicSamples::constant(g, 1.0)), std::nullopt);
    const double secs = seconds_since(t0);
    const double err = (rep.body.h().array() - 1.0).abs().maxCoeff();
    return Outcome{rep.converged && err <= 1e-8 && secs < 1.0,
                   "sup|h-1| = " + fmt("%.2e", err) + ", " + fmt("%.3f", secs) + " s"};
  });

  run(2, "linearization at the round solution", [] {
    const Grid g(256);
    double worst = 0.0;
    for (double p : {0.0, 0.25, 0.5, 0.75, 0.99}) {
      const auto params = ProblemParams::make(p, 2.0, PeriodicSamples::constant(g, 1.0));
      const Eigen::MatrixXd j = jacobian(PeriodicSamples::constant(g, 1.0), params);
      for (int k = 0; k <= 8; ++k) {
        for (int phase = 0; phase < 2; ++phase) {
          const auto v = PeriodicSamples::from_function(
              g, [k, phase](double t) { return phase == 0 ? std::cos(k * t) : std::sin(k * t); });
          const Eigen::VectorXd expect = (2.0 - p - k * k) * v.values();
          worst = std::max(worst, (j * v.values() - expect).lpNorm<Eigen::Infinity>());
        }
      }
    }
    return Outcome{worst <= 1e-10, "max mode error " + fmt("%.2e", worst)};
  });

  run(3, "variational formulas", [&] {
    auto c = base;
    c.kind = SweepKind::variational;
    c.out = out / "variational";
    const auto t0 = Clock::now();
    const auto res = run_variational(c);
    const double secs = seconds_since(t0);
    const double worst = json_number(res.summary.at("max_rel_error"));
    return Outcome{res.passed && worst <= 1e-5 && secs < 10.0,
                   std::to_string(res.summary.at("rows").get<int>()) + " checks, max rel error " +
                       fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + " s"};
  });

  SweepResult sandwich;
  run(4, "sandwich upper bound", [&] {
    auto c = base;
    c.kind = SweepKind::sandwich;
    c.n_samples = 200;
    c.battery = true;
    c.p = 0.0;
    c.q = 2.0;
    for (double p : {0.0, 0.5, 1.0}) {
      for (double q : {2.0, 3.0, 4.0}) c.pairs.emplace_back(p, q);
    }
    c.out = out / "sandwich";
    const auto t0 = Clock::now();
    sandwich = run_sandwich(c);
    const double secs = seconds_since(t0);
    const auto& s = sandwich.summary;
    const int violations = s.at("upper_violations");
    const int fails = s.at("failures");
    const double min_ratio = json_number(s.at("min_ratio"));
    return Outcome{violations == 0 && fails == 0 && min_ratio > 0.0 && secs < 120.0,
                   std::to_string(s.at("rows").get<int>()) + " rows, " + std::to_string(violations) +
                       " violations, min ratio " + fmt("%.4g", min_ratio) + ", " + fmt("%.1f", secs) + " s"};
  });

  run(5, "maximum principle", [&] {
    auto c = base;
    c.kind = SweepKind::maxprinciple;
    c.p = 3.0;
    c.q = 2.0;
    c.lambda = 2.0;
    c.n_samples = 20;
    c.out = out / "maxprinciple";
    const auto res = run_maxprinciple(c);
    const auto& s = res.summary;
    note_totals(json_number(s.at("max_total_rel_error")));

    const Grid g(256);
    double worst_const = 0.0;
    for (double f0 : {0.5, 2.0, 8.0}) {
      const auto rep = solve(ProblemParams::make(3.0, 2.0, PeriodicSamples::constant(g, f0)), std::nullopt);
      worst_const = std::max(worst_const, std::abs(rep.body.max_h() - std::pow(f0, 1.0 / (2.0 - 3.0))));
    }
    const bool ok = res.passed && s.at("converged") == 20 && worst_const <= 1e-8;
    return Outcome{ok, std::to_string(s.at("converged").get<int>()) + "/20 converged, " +
                           std::to_string(s.at("violations").get<int>()) + " violations, max excess " +
                           fmt("%.2e", json_number(s.at("max_excess"))) + ", constant-data gap " +
                           fmt("%.2e", worst_const)};
  });

  run(6, "uniqueness near constant data", [&] {
    auto c = base;
    c.kind = SweepKind::uniqueness;
    c.p = 0.5;
    c.q = 2.0;
    c.n_samples = 10;
    c.starts = 20;
    c.eps_grid = {0.05};
    c.out = out / "uniqueness";
    const auto t0 = Clock::now();
    const auto res = run_uniqueness(c);
    const double secs = seconds_since(t0);
    const auto& row = res.summary.at("sweep").at(0);
    note_totals(json_number(row.at("max_total_rel_error")));
    const double pair = json_number(row.at("max_pairwise"));
    const double min_h = json_number(row.at("min_h"));
    const double proxy = json_number(row.at("max_proxy"));
    const bool ok = row.at("all_agree").get<bool>() && row.at("nonconverged_starts") == 0 && pair <= 1e-6 &&
                    min_h >= 0.5 && proxy <= 0.05 + 1e-12 && secs < 120.0;
    return Outcome{ok, "max pairwise " + fmt("%.2e", pair) + ", min h " + fmt("%.4f", min_h) + ", proxy " +
                           fmt("%.3g", proxy) + ", " + fmt("%.1f", secs) + " s"};
  });

  run(7, "diameter boundedness", [&] {
    std::string detail;
    bool ok = true;
    for (double q : {2.0, 3.0}) {
      auto c = base;
      c.kind = SweepKind::diameter;
      c.p = 0.5;
      c.q = q;
      c.lambda = 2.0;
      c.n_samples = 50;
      c.doubling = true;
      c.out = out / ("diameter_q" + std::to_string(static_cast<int>(q)));
      const auto res = run_diameter(c);
      const auto& s = res.summary;
      note_totals(json_number(s.at("max_total_rel_error")));
      ok = ok && res.passed;
      detail += "q=" + fmt("%g", q) + ": max h " + fmt("%.4f", json_number(s.at("max_h"))) + " (baseline " +
                fmt("%.3g", json_number(s.at("baseline_max_h"))) + "), growth " +
                fmt("%.2e", json_number(s.at("doubling_growth"))) + ", converged " +
                std::to_string(s.at("converged").get<int>()) + "/100; ";
    }
    return Outcome{ok, detail.substr(0, detail.size() - 2)};
  });

  run(8, "measure identities", [&] {
    const Grid g(256);
    double vol = 0.0;
    bool bitwise = true;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto body = random_body(g, derive_seed(base.seed, seed));
      vol = std::max(vol, std::abs(dual_volume(body, 2.0) - area(body)) / area(body));
      for (double p : {0.0, 0.5, 1.0, 2.0}) {
        bitwise = bitwise && (lp_dual_density(body, p, 2.0).density.values().array() ==
                              lp_surface_density(body, p).density.values().array())
                                 .all();
      }
    }
    const bool totals = solve_sweeps > 0 && worst_total_error <= 1e-8;
    return Outcome{vol <= 1e-8 && bitwise && totals,
                   "dual volume vs area " + fmt("%.2e", vol) + ", q=2 densities bitwise " +
                       (bitwise ? "equal" : "different") + ", total vs integral of f " +
                       fmt("%.2e", worst_total_error) + " over " + std::to_string(solve_sweeps) + " sweeps"};
  });

  run(9, "John ellipse", [&] {
    const Grid g(256);
    const auto d = john(disk(g, 1.0)).ellipse;
    const auto e = john(ellipse(g, 2.0, 1.0)).ellipse;
    const double err = std::max({d.center.norm(), std::abs(d.r1 - 1.0), std::abs(d.r2 - 1.0), e.center.norm(),
                                 std::abs(e.r1 - 2.0) / 2.0, std::abs(e.r2 - 1.0),
                                 std::min(std::abs(e.angle), std::abs(kPi - e.angle))});
    int uncertified = 0;
    if (sandwich.summary.is_null()) {
      uncertified = -1;
    } else {
      uncertified = sandwich.summary.at("uncertified_rows");
    }
    return Outcome{err <= 1e-6 && uncertified == 0, "self-recovery error " + fmt("%.2e", err) + ", " +
                                                        std::to_string(uncertified) +
                                                        " uncertified bodies in the sandwich sweep"};
  });

  run(10, "determinism", [&] {
    bool same = true;
    std::string detail;
    for (auto kind : {SweepKind::sandwich, SweepKind::maxprinciple}) {
      auto c = base;
      c.kind = kind;
      c.n_samples = kind == SweepKind::sandwich ? 40 : 5;
      if (kind == SweepKind::maxprinciple) {
        c.p = 3.0;
        c.q = 2.0;
        c.lambda = 2.0;
      }
      std::string files[2];
      for (int r = 0; r < 2; ++r) {
        c.out = out / ("determinism_" + std::string(to_string(kind)) + std::to_string(r));
        setenv("S1MK_THREADS", r == 0 ? "1" : "3", 1);
        files[r] = slurp(run_sweep(c).csv_path);
      }
      unsetenv("S1MK_THREADS");
      same = same && !files[0].empty() && files[0] == files[1];
      detail += std::string(to_string(kind)) + (files[0] == files[1] ? " identical; " : " differs; ");
    }
    return Outcome{same, detail.substr(0, detail.size() - 2)};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
