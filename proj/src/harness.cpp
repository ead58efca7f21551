#include "s1mk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "s1mk/john_ellipse.hpp"
#include "s1mk/measures.hpp"
#include "s1mk/solver.hpp"

namespace s1mk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kAgreementTol = 1e-6;
constexpr double kMaxPrincipleSlack = 1e-6;
constexpr double kVariationalTol = 1e-5;
constexpr double kEnvelopeFactor = 10.0;
constexpr double kDoublingGrowth = 0.05;

std::string num(double v) { return format_double(v); }
std::string num(long long v) { return std::to_string(v); }
std::string flag(bool b) { return b ? "true" : "false"; }

void invalid(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

std::string error_name(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const Error& e) {
    return to_string(e.code());
  } catch (const std::exception&) {
    return "exception";
  }
}

double sup_dev_from_one(const PeriodicSamples& f) { return (f.values().array() - 1.0).abs().maxCoeff(); }

/// Rows are produced into slots indexed by sample id, so thread scheduling
/// never affects the order of the file.
CsvTable collect(std::vector<std::string> header, std::vector<std::vector<std::string>> rows) {
  CsvTable t(std::move(header));
  for (auto& r : rows) t.add_row(std::move(r));
  return t;
}

SweepResult finish(const ExperimentConfig& config, const std::filesystem::path& csv, Json summary) {
  summary["config"] = config.to_json();
  SweepResult res;
  res.csv_path = csv;
  res.summary_path = config.out / (std::string(to_string(config.kind)) + "_summary.json");
  res.passed = summary.at("passed").get<bool>();
  res.summary = std::move(summary);
  write_json_file(res.summary_path, res.summary);
  return res;
}

std::filesystem::path csv_path(const ExperimentConfig& config, const std::string& stem) {
  return config.out / (stem + ".csv");
}

double finite_max(double a, double b) {
  if (std::isnan(a)) return b;
  if (std::isnan(b)) return a;
  return std::max(a, b);
}

double finite_min(double a, double b) {
  if (std::isnan(a)) return b;
  if (std::isnan(b)) return a;
  return std::min(a, b);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

const char* to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::sandwich: return "sandwich";
    case SweepKind::diameter: return "diameter";
    case SweepKind::uniqueness: return "uniqueness";
    case SweepKind::maxprinciple: return "maxprinciple";
    case SweepKind::variational: return "variational";
  }
  return "unknown";
}

SweepKind sweep_kind_from_string(const std::string& name) {
  for (auto k : {SweepKind::sandwich, SweepKind::diameter, SweepKind::uniqueness, SweepKind::maxprinciple,
                 SweepKind::variational}) {
    if (name == to_string(k)) return k;
  }
  invalid("unknown sweep kind '" + name + "'");
  return SweepKind::sandwich;
}

std::vector<std::pair<double, double>> ExperimentConfig::all_pairs() const {
  std::vector<std::pair<double, double>> out{{p, q}};
  for (const auto& pq : pairs) {
    if (std::find(out.begin(), out.end(), pq) == out.end()) out.push_back(pq);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (n_samples < 1) invalid("n_samples must be >= 1");
  if (grid < 16 || grid % 2 != 0) invalid("grid must be even and >= 16");
  if (!(lambda >= 1.0)) invalid("lambda must be >= 1");
  if (!std::isfinite(p) || !std::isfinite(q)) invalid("p and q must be finite");
  switch (kind) {
    case SweepKind::sandwich:
      for (auto [pp, qq] : all_pairs()) {
        if (!(pp >= 0.0 && pp <= 1.0 && qq >= 2.0)) invalid("sandwich requires p in [0, 1] and q >= 2");
      }
      break;
    case SweepKind::diameter:
      if (!(p > 0.0 && p < 1.0 && q >= 2.0)) invalid("diameter requires p in (0, 1) and q >= 2");
      break;
    case SweepKind::uniqueness:
      if (!(p > 0.0 && p < 1.0 && q == 2.0)) invalid("uniqueness requires p in (0, 1) and q = 2");
      if (starts < 1) invalid("starts must be >= 1");
      if (eps_grid.empty()) invalid("eps_grid must not be empty");
      for (double e : eps_grid) {
        if (!(e >= 0.0 && e < 1.0)) invalid("eps values must lie in [0, 1)");
      }
      break;
    case SweepKind::maxprinciple:
      if (!(p > q)) invalid("maxprinciple requires p > q");
      break;
    case SweepKind::variational:
      break;
  }
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  if (!j.is_object()) invalid("config must be a JSON object");
  static const std::set<std::string> known{"kind", "p",     "q",        "lambda",   "n_samples", "seed",
                                           "grid", "out",   "f_kind",   "pairs",    "battery",   "doubling",
                                           "eps_grid", "starts"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) invalid("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (j.contains("kind")) c.kind = sweep_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("p")) c.p = j.at("p").get<double>();
    if (j.contains("q")) c.q = j.at("q").get<double>();
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("n_samples")) c.n_samples = j.at("n_samples").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid")) c.grid = j.at("grid").get<int>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("f_kind")) c.f_kind = f_kind_from_string(j.at("f_kind").get<std::string>());
    if (j.contains("pairs")) {
      c.pairs.clear();
      for (const auto& pq : j.at("pairs")) {
        if (!pq.is_array() || pq.size() != 2) invalid("pairs entries must be [p, q]");
        c.pairs.emplace_back(pq[0].get<double>(), pq[1].get<double>());
      }
    }
    if (j.contains("battery")) c.battery = j.at("battery").get<bool>();
    if (j.contains("doubling")) c.doubling = j.at("doubling").get<bool>();
    if (j.contains("eps_grid")) c.eps_grid = j.at("eps_grid").get<std::vector<double>>();
    if (j.contains("starts")) c.starts = j.at("starts").get<int>();
  } catch (const Json::exception& e) {
    invalid(std::string("malformed config: ") + e.what());
  }
  return c;
}

Json ExperimentConfig::to_json() const {
  Json pj = Json::array();
  for (auto [pp, qq] : pairs) pj.push_back({pp, qq});
  return Json{{"kind", to_string(kind)},
              {"p", p},
              {"q", q},
              {"lambda", lambda},
              {"n_samples", n_samples},
              {"seed", seed},
              {"grid", grid},
              {"out", out.string()},
              {"f_kind", to_string(f_kind)},
              {"pairs", pj},
              {"battery", battery},
              {"doubling", doubling},
              {"eps_grid", eps_grid},
              {"starts", starts}};
}

int worker_count() {
  if (const char* env = std::getenv("S1MK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, const std::function<void(int)>& body) {
  const int workers = std::min(worker_count(), std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto run = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

SweepResult run_sweep(const ExperimentConfig& config) {
  switch (config.kind) {
    case SweepKind::sandwich: return run_sandwich(config);
    case SweepKind::diameter: return run_diameter(config);
    case SweepKind::uniqueness: return run_uniqueness(config);
    case SweepKind::maxprinciple: return run_maxprinciple(config);
    case SweepKind::variational: return run_variational(config);
  }
  invalid("unknown sweep kind");
  return {};
}

// ---------------------------------------------------------------- sandwich

SweepResult run_sandwich(const ExperimentConfig& config) {
  config.validate();
  const Grid grid(config.grid);
  const auto pairs = config.all_pairs();
  const auto battery = config.battery ? ellipse_battery(config.grid) : std::vector<EllipseSpec>{};
  const int n_bodies = config.n_samples + static_cast<int>(battery.size());

  std::vector<std::vector<std::vector<std::string>>> slots(n_bodies);
  parallel_for(n_bodies, [&](int id) {
    const bool from_battery = id >= config.n_samples;
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(id));
    std::string source = from_battery ? "battery" : "random";
    std::string error;
    std::optional<SupportFunction> body;
    std::optional<JohnResult> jr;
    double centroid_factor = kNaN, aspect = kNaN;
    try {
      if (from_battery) {
        const auto& spec = battery[id - config.n_samples];
        aspect = spec.aspect;
        body = make_battery_ellipse(spec);
      } else {
        body = random_body(grid, seed);
      }
      jr = john(*body);
      centroid_factor = john_centroid(*body).certificate.containment_factor;
    } catch (...) {
      error = error_name(std::current_exception());
    }
    for (auto [p, q] : pairs) {
      SandwichReport r;
      bool ok = jr.has_value();
      if (ok) {
        try {
          r = sandwich_ratio(*body, jr->ellipse, p, q);
        } catch (...) {
          ok = false;
          error = error_name(std::current_exception());
        }
      }
      slots[id].push_back({num(static_cast<long long>(id)), source, std::to_string(seed), num(p), num(q),
                           num(aspect), num(ok ? r.r1 : kNaN), num(ok ? r.r2 : kNaN),
                           num(ok ? r.r1 / r.r2 : kNaN), num(body ? diameter(*body) : kNaN),
                           num(ok ? r.total : kNaN), num(ok ? r.denominator : kNaN),
                           num(ok ? r.ratio : kNaN), num(sandwich_upper_constant(p, q)),
                           flag(ok && r.upper_ok), flag(ok && r.lower_ok),
                           num(jr ? jr->certificate.containment_factor : kNaN), num(centroid_factor),
                           flag(jr && jr->certificate.e_in_k && jr->certificate.k_in_2e), flag(ok), error});
    }
  });

  std::vector<std::vector<std::string>> rows;
  for (auto& s : slots) {
    for (auto& r : s) rows.push_back(std::move(r));
  }
  const auto path = csv_path(config, "sandwich");
  collect({"id", "source", "seed", "p", "q", "battery_aspect", "r1", "r2", "eccentricity", "diameter", "total",
           "denominator", "ratio", "c2", "upper_ok", "lower_ok", "containment_factor", "centroid_containment_factor",
           "certified", "converged", "error"},
          std::move(rows))
      .write(path);
  return finish(config, path, summarize_sandwich(CsvTable::read(path)));
}

Json summarize_sandwich(const CsvTable& t) {
  struct Acc {
    double min_ratio = kNaN, max_ratio = kNaN, c2 = kNaN, min_ecc_ratio = kNaN;
    int rows = 0, violations = 0, failures = 0, below_floor = 0;
  };
  std::map<std::pair<double, double>, Acc> by_pair;
  double max_centroid_factor = kNaN, max_factor = kNaN;
  int uncertified = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto& a = by_pair[{t.number(i, "p"), t.number(i, "q")}];
    ++a.rows;
    a.c2 = t.number(i, "c2");
    if (!t.flag(i, "converged")) {
      ++a.failures;
      continue;
    }
    const double r = t.number(i, "ratio");
    a.min_ratio = finite_min(a.min_ratio, r);
    a.max_ratio = finite_max(a.max_ratio, r);
    if (!t.flag(i, "upper_ok")) ++a.violations;
    if (!t.flag(i, "lower_ok")) ++a.below_floor;
    if (!t.flag(i, "certified")) ++uncertified;
    max_factor = finite_max(max_factor, t.number(i, "containment_factor"));
    max_centroid_factor = finite_max(max_centroid_factor, t.number(i, "centroid_containment_factor"));
  }
  Json pairs = Json::array();
  int violations = 0, failures = 0;
  double min_ratio = kNaN;
  for (const auto& [pq, a] : by_pair) {
    violations += a.violations;
    failures += a.failures;
    min_ratio = finite_min(min_ratio, a.min_ratio);
    pairs.push_back({{"p", pq.first},
                     {"q", pq.second},
                     {"rows", a.rows},
                     {"c2", a.c2},
                     {"min_ratio", number_or_null(a.min_ratio)},
                     {"max_ratio", number_or_null(a.max_ratio)},
                     {"upper_violations", a.violations},
                     {"below_lower_floor", a.below_floor},
                     {"failures", a.failures}});
  }
  return Json{{"rows", t.size()},
              {"pairs", pairs},
              {"upper_violations", violations},
              {"failures", failures},
              {"min_ratio", number_or_null(min_ratio)},
              {"uncertified_rows", uncertified},
              {"max_containment_factor", number_or_null(max_factor)},
              {"max_centroid_containment_factor", number_or_null(max_centroid_factor)},
              {"passed", violations == 0 && failures == 0 && min_ratio > 0.0}};
}

// ---------------------------------------------------------------- diameter

namespace {

struct SolveRow {
  std::vector<std::string> cells;
  std::optional<SolveReport> report;
  bool converged = false;
};

double total_rel_error(const SolveReport& rep, const ProblemParams& params) {
  const double total = lp_dual_density(rep.body, params.p, params.q).total;
  const double expect = integrate(params.f);
  return std::abs(total - expect) / std::abs(expect);
}

CsvTable diameter_batch(const ExperimentConfig& config, int first_id, int count) {
  const Grid grid(config.grid);
  std::vector<std::vector<std::string>> rows(count);
  parallel_for(count, [&](int k) {
    const int id = first_id + k;
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(id));
    const auto f = gen_f(config.f_kind, config.lambda, seed, grid);
    const auto params = ProblemParams::make(config.p, config.q, f, config.lambda);
    std::string error;
    std::optional<SolveReport> rep;
    try {
      rep = solve(params, std::nullopt);
    } catch (const StagnationError& e) {
      rep = e.report();
      error = to_string(e.code());
    } catch (...) {
      error = error_name(std::current_exception());
    }
    const bool converged = rep && rep->converged;
    double r1 = kNaN, r2 = kNaN, rel = kNaN;
    if (converged) {
      rel = total_rel_error(*rep, params);
      try {
        const auto e = john(rep->body).ellipse;
        r1 = e.r1;
        r2 = e.r2;
      } catch (...) {
        error = error_name(std::current_exception());
      }
    }
    rows[k] = {num(static_cast<long long>(id)),
               std::to_string(seed),
               to_string(config.f_kind),
               num(config.lambda),
               num(sup_dev_from_one(f)),
               num(f.min()),
               num(f.max()),
               num(rep ? rep->body.max_h() : kNaN),
               num(rep ? rep->min_h : kNaN),
               num(converged ? diameter(rep->body) : kNaN),
               num(r1),
               num(r2),
               num(r1 / r2),
               num(converged ? lp_dual_density(rep->body, config.p, config.q).total : kNaN),
               num(integrate(f)),
               num(rel),
               num(rep ? rep->residual_sup : kNaN),
               flag(converged),
               error};
  });
  return collect({"id", "seed", "f_kind", "lambda", "f_sup_dev", "f_min", "f_max", "max_h", "min_h", "diameter",
                  "r1", "r2", "eccentricity", "total", "integral_f", "total_rel_error", "residual_sup",
                  "converged", "error"},
                 std::move(rows));
}

}  // namespace

SweepResult run_diameter(const ExperimentConfig& config) {
  config.validate();
  const Grid grid(config.grid);
  const auto path = csv_path(config, "diameter");
  const auto second_path = csv_path(config, "diameter_doubling");
  diameter_batch(config, 0, config.n_samples).write(path);
  CsvTable second;
  if (config.doubling) {
    diameter_batch(config, config.n_samples, config.n_samples).write(second_path);
    second = CsvTable::read(second_path);
  }
  const auto round = solve(ProblemParams::make(config.p, config.q, PeriodicSamples::constant(grid, 1.0)),
                           std::nullopt);
  return finish(config, path, summarize_diameter(CsvTable::read(path), second, round.body.max_h()));
}

Json summarize_diameter(const CsvTable& first, const CsvTable& second, double baseline_max_h) {
  auto scan = [](const CsvTable& t, double& max_h, int& converged, double& max_rel) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t.flag(i, "converged")) continue;
      ++converged;
      max_h = finite_max(max_h, t.number(i, "max_h"));
      max_rel = finite_max(max_rel, t.number(i, "total_rel_error"));
    }
  };
  double max_first = kNaN, max_second = kNaN, max_rel = kNaN;
  int conv_first = 0, conv_second = 0;
  scan(first, max_first, conv_first, max_rel);
  scan(second, max_second, conv_second, max_rel);
  const bool doubled = second.size() > 0;
  const double max_all = finite_max(max_first, max_second);
  const double growth = doubled ? (max_all - max_first) / max_first : 0.0;
  const double envelope = kEnvelopeFactor * baseline_max_h;
  const int rows = static_cast<int>(first.size() + second.size());
  const int converged = conv_first + conv_second;
  const bool all_converged = converged == rows;
  const bool finite = std::isfinite(max_all);
  return Json{{"rows", first.size()},
              {"doubling_rows", second.size()},
              {"converged", converged},
              {"convergence_rate", rows > 0 ? double(converged) / rows : 0.0},
              {"baseline_max_h", baseline_max_h},
              {"envelope", envelope},
              {"max_h", number_or_null(max_first)},
              {"max_h_doubled", number_or_null(max_all)},
              {"doubling_growth", number_or_null(growth)},
              {"max_total_rel_error", number_or_null(max_rel)},
              {"within_envelope", finite && max_all <= envelope},
              {"stable_under_doubling", growth <= kDoublingGrowth},
              {"passed", all_converged && finite && max_all <= envelope && growth <= kDoublingGrowth}};
}

// ---------------------------------------------------------------- uniqueness

SweepResult run_uniqueness(const ExperimentConfig& config) {
  config.validate();
  const Grid grid(config.grid);
  const int n_eps = static_cast<int>(config.eps_grid.size());
  const int total = n_eps * config.n_samples;
  std::vector<std::vector<std::string>> rows(total);
  parallel_for(total, [&](int id) {
    const int e_idx = id / config.n_samples;
    const int inst = id % config.n_samples;
    const double eps = config.eps_grid[e_idx];
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(inst));
    const PeriodicSamples u = unit_perturbation(seed, grid);
    const PeriodicSamples f(grid, (1.0 + eps * u.values().array()).matrix());
    const auto params = ProblemParams::make(config.p, config.q, f);

    std::vector<SupportFunction> limits;
    double min_h = kNaN, max_rel = kNaN;
    std::string error;
    for (int s = 0; s < config.starts; ++s) {
      std::optional<SupportFunction> start;
      if (s > 0) start = random_body(grid, derive_seed(seed, static_cast<std::uint64_t>(s)));
      try {
        const auto rep = solve(params, start);
        if (!rep.converged) continue;
        limits.push_back(rep.body);
        min_h = finite_min(min_h, rep.min_h);
        max_rel = finite_max(max_rel, total_rel_error(rep, params));
      } catch (...) {
        if (error.empty()) error = error_name(std::current_exception());
      }
    }
    double max_pair = limits.empty() ? kNaN : 0.0;
    for (std::size_t a = 0; a < limits.size(); ++a) {
      for (std::size_t b = a + 1; b < limits.size(); ++b) {
        max_pair = std::max(max_pair, (limits[a].h() - limits[b].h()).lpNorm<Eigen::Infinity>());
      }
    }
    const bool agree = !limits.empty() && max_pair <= kAgreementTol && min_h > 0.0;
    rows[id] = {num(static_cast<long long>(id)),
                num(eps),
                num(static_cast<long long>(inst)),
                std::to_string(seed),
                num(c_alpha_proxy(PeriodicSamples(grid, (f.values().array() - 1.0).matrix()))),
                num(sup_dev_from_one(f)),
                num(static_cast<long long>(config.starts)),
                num(static_cast<long long>(limits.size())),
                num(max_pair),
                num(min_h),
                num(max_rel),
                flag(agree),
                error};
  });
  const auto path = csv_path(config, "uniqueness");
  collect({"id", "eps", "instance", "seed", "proxy", "f_sup_dev", "starts", "converged_starts", "max_pairwise",
           "min_h", "max_total_rel_error", "agree", "error"},
          std::move(rows))
      .write(path);
  return finish(config, path, summarize_uniqueness(CsvTable::read(path)));
}

Json summarize_uniqueness(const CsvTable& t) {
  struct Acc {
    int instances = 0, agreeing = 0, nonconverged_starts = 0;
    double max_pair = kNaN, min_h = kNaN, max_proxy = kNaN, max_rel = kNaN;
  };
  std::map<double, Acc> by_eps;
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto& a = by_eps[t.number(i, "eps")];
    ++a.instances;
    a.agreeing += t.flag(i, "agree");
    a.nonconverged_starts += static_cast<int>(t.number(i, "starts") - t.number(i, "converged_starts"));
    a.max_pair = finite_max(a.max_pair, t.number(i, "max_pairwise"));
    a.min_h = finite_min(a.min_h, t.number(i, "min_h"));
    a.max_proxy = finite_max(a.max_proxy, t.number(i, "proxy"));
    a.max_rel = finite_max(a.max_rel, t.number(i, "max_total_rel_error"));
  }
  Json sweep = Json::array();
  std::optional<double> radius;
  bool still_agreeing = true;
  for (const auto& [eps, a] : by_eps) {
    const bool all = a.agreeing == a.instances;
    still_agreeing = still_agreeing && all;
    if (still_agreeing) radius = eps;
    sweep.push_back({{"eps", eps},
                     {"instances", a.instances},
                     {"agreeing", a.agreeing},
                     {"all_agree", all},
                     {"nonconverged_starts", a.nonconverged_starts},
                     {"max_pairwise", number_or_null(a.max_pair)},
                     {"min_h", number_or_null(a.min_h)},
                     {"max_proxy", number_or_null(a.max_proxy)},
                     {"max_total_rel_error", number_or_null(a.max_rel)}});
  }
  return Json{{"rows", t.size()},
              {"sweep", sweep},
              {"agreement_tol", kAgreementTol},
              {"empirical_radius", radius ? Json(*radius) : Json(nullptr)},
              {"passed", radius.has_value()}};
}

// ---------------------------------------------------------------- max principle

SweepResult run_maxprinciple(const ExperimentConfig& config) {
  config.validate();
  const Grid grid(config.grid);
  std::vector<std::vector<std::string>> rows(config.n_samples);
  parallel_for(config.n_samples, [&](int id) {
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(id));
    const auto f = gen_f(config.f_kind, config.lambda, seed, grid);
    const auto params = ProblemParams::make(config.p, config.q, f, config.lambda);
    const double bound = std::pow(f.min(), 1.0 / (config.q - config.p));
    std::string error;
    std::optional<SolveReport> rep;
    try {
      rep = solve(params, std::nullopt);
    } catch (const StagnationError& e) {
      rep = e.report();
      error = to_string(e.code());
    } catch (...) {
      error = error_name(std::current_exception());
    }
    const bool converged = rep && rep->converged;
    const double max_h = rep ? rep->body.max_h() : kNaN;
    const bool ok = !converged || max_h <= bound + kMaxPrincipleSlack;
    if (!ok) {
      write_json_file(config.out / ("maxprinciple_violation_" + std::to_string(id) + ".json"),
                      Json{{"id", id},
                           {"seed", seed},
                           {"p", config.p},
                           {"q", config.q},
                           {"bound", bound},
                           {"max_h", max_h},
                           {"f", std::vector<double>(f.values().data(), f.values().data() + f.size())},
                           {"solution", to_json(*rep, false)}});
    }
    rows[id] = {num(static_cast<long long>(id)),
                std::to_string(seed),
                to_string(config.f_kind),
                num(config.lambda),
                num(f.min()),
                num(f.max()),
                num(bound),
                num(max_h),
                num(max_h - bound),
                num(converged ? total_rel_error(*rep, params) : kNaN),
                flag(converged),
                flag(ok),
                error};
  });
  const auto path = csv_path(config, "maxprinciple");
  collect({"id", "seed", "f_kind", "lambda", "f_min", "f_max", "bound", "max_h", "excess", "total_rel_error",
           "converged", "ok", "error"},
          std::move(rows))
      .write(path);
  return finish(config, path, summarize_maxprinciple(CsvTable::read(path)));
}

Json summarize_maxprinciple(const CsvTable& t) {
  int converged = 0, violations = 0;
  double max_excess = kNaN, max_rel = kNaN;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.flag(i, "converged")) continue;
    ++converged;
    if (!t.flag(i, "ok")) ++violations;
    max_excess = finite_max(max_excess, t.number(i, "excess"));
    max_rel = finite_max(max_rel, t.number(i, "total_rel_error"));
  }
  return Json{{"rows", t.size()},
              {"converged", converged},
              {"nonconverged", static_cast<int>(t.size()) - converged},
              {"violations", violations},
              {"slack", kMaxPrincipleSlack},
              {"max_excess", number_or_null(max_excess)},
              {"max_total_rel_error", number_or_null(max_rel)},
              {"passed", violations == 0}};
}

// ---------------------------------------------------------------- variational

SweepResult run_variational(const ExperimentConfig& config) {
  config.validate();
  const Grid g(config.grid);
  const auto unit = disk(g, 1.0);
  const auto e21 = ellipse(g, 2.0, 1.0);
  const auto shift3 = disk(g, 1.0, Vec2(0.3, 0.0));
  const auto shift2 = disk(g, 1.0, Vec2(0.2, 0.0));

  struct Case {
    std::string formula, k_name, l_name;
    double p, q;
    std::function<VariationalReport()> run;
  };
  const std::vector<Case> cases{
      {"aleksandrov", "disk(1)", "disk(1)", 1, 2, [&] { return check_aleksandrov(unit, unit); }},
      {"aleksandrov", "disk(1)", "ellipse(2,1)", 1, 2, [&] { return check_aleksandrov(unit, e21); }},
      {"aleksandrov", "ellipse(2,1)", "disk(1)+(0.3,0)", 1, 2, [&] { return check_aleksandrov(e21, shift3); }},
      {"lp", "ellipse(2,1)", "ellipse(2,1)", 1, 2, [&] { return check_lp_variational(e21, e21, 1.0); }},
      {"lp", "ellipse(2,1)", "ellipse(2,1)", 2, 2, [&] { return check_lp_variational(e21, e21, 2.0); }},
      {"lp", "ellipse(2,1)", "ellipse(2,1)", 3, 2, [&] { return check_lp_variational(e21, e21, 3.0); }},
      {"lp", "disk(2)", "disk(1)", 2, 2, [&] { return check_lp_variational(disk(g, 2.0), unit, 2.0); }},
      {"lp", "ellipse(2,1)", "disk(1)", 3, 2, [&] { return check_lp_variational(e21, unit, 3.0); }},
      {"dual", "disk(1)", "disk(1)", 0, 2, [&] { return check_dual_variational(unit, unit, 2.0); }},
      {"dual", "disk(1.5)", "disk(1)", 0, 3, [&] { return check_dual_variational(disk(g, 1.5), unit, 3.0); }},
      {"dual", "disk(1)+(0.3,0)", "disk(1)", 0, 2, [&] { return check_dual_variational(shift3, unit, 2.0); }},
      {"dual", "ellipse(2,1)", "disk(1)+(0.2,0)", 0, 3,
       [&] { return check_dual_variational(e21, shift2, 3.0); }},
  };

  const int n = static_cast<int>(cases.size());
  std::vector<std::vector<std::string>> rows(n);
  parallel_for(n, [&](int id) {
    const auto& c = cases[id];
    VariationalReport r;
    std::string error;
    try {
      r = c.run();
    } catch (...) {
      error = error_name(std::current_exception());
      r.fd_slope = r.formula_value = r.rel_error = kNaN;
    }
    rows[id] = {num(static_cast<long long>(id)), c.formula,      c.k_name,
                c.l_name,                         num(c.p),       num(c.q),
                num(r.fd_slope),                  num(r.formula_value), num(r.rel_error),
                flag(error.empty() && r.rel_error <= kVariationalTol), error};
  });
  const auto path = csv_path(config, "variational");
  collect({"id", "formula", "k", "l", "p", "q", "fd_slope", "formula_value", "rel_error", "ok", "error"},
          std::move(rows))
      .write(path);
  return finish(config, path, summarize_variational(CsvTable::read(path), kVariationalTol));
}

Json summarize_variational(const CsvTable& t, double tolerance) {
  int failures = 0;
  double worst = kNaN;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.flag(i, "ok")) ++failures;
    worst = finite_max(worst, t.number(i, "rel_error"));
  }
  return Json{{"rows", t.size()},
              {"tolerance", tolerance},
              {"max_rel_error", number_or_null(worst)},
              {"failures", failures},
              {"passed", failures == 0 && t.size() > 0}};
}

}  // namespace s1mk
