#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "s1mk/harness.hpp"
#include "s1mk/john_ellipse.hpp"

using namespace s1mk;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "s1mk_harness_test" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig config_for(SweepKind kind, const std::string& dir) {
  ExperimentConfig c;
  c.kind = kind;
  c.out = scratch(dir);
  c.grid = 128;
  c.seed = 11;
  return c;
}

struct ThreadsEnv {
  explicit ThreadsEnv(const char* v) { setenv("S1MK_THREADS", v, 1); }
  ~ThreadsEnv() { unsetenv("S1MK_THREADS"); }
};

}  // namespace

TEST_CASE("config validation per kind") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_samples = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.n_samples = 3;

  c.kind = SweepKind::sandwich;
  c.p = 1.2;
  CHECK_THROWS_AS(c.validate(), Error);
  c.p = 0.5;
  c.pairs = {{0.0, 1.5}};
  CHECK_THROWS_AS(c.validate(), Error);
  c.pairs.clear();

  c.kind = SweepKind::diameter;
  c.p = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.p = 0.5;
  c.lambda = 0.9;
  CHECK_THROWS_AS(c.validate(), Error);
  c.lambda = 2.0;
  CHECK_NOTHROW(c.validate());

  c.kind = SweepKind::uniqueness;
  c.q = 3.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.q = 2.0;
  CHECK_NOTHROW(c.validate());

  c.kind = SweepKind::maxprinciple;
  CHECK_THROWS_AS(c.validate(), Error);
  c.p = 3.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig c;
  c.kind = SweepKind::uniqueness;
  c.p = 0.25;
  c.seed = 0xFFFFFFFFFFFFFFFFull;
  c.pairs = {{0.0, 3.0}};
  c.eps_grid = {0.05};
  c.f_kind = FKind::bump;
  const auto back = ExperimentConfig::from_json(Json::parse(c.to_json().dump()));
  CHECK(back.to_json() == c.to_json());
  CHECK(back.seed == c.seed);

  CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"kind", "sandwich"}, {"bogus", 1}}), Error);
  CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"kind", "nope"}}), Error);
  CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"p", "half"}}), Error);
  CHECK_THROWS_AS(ExperimentConfig::from_json(Json::array()), Error);
}

TEST_CASE("worker count and parallel loop") {
  {
    ThreadsEnv env("3");
    CHECK(worker_count() == 3);
    std::vector<int> hits(100, 0);
    parallel_for(100, [&](int i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, [](int i) {
                      if (i == 7) throw Error(ErrorCode::io, "boom");
                    }),
                    Error);
  }
  ThreadsEnv bad("zero");
  CHECK(worker_count() >= 1);
}

TEST_CASE("sandwich sweep rows and summary") {
  auto c = config_for(SweepKind::sandwich, "sandwich");
  c.n_samples = 6;
  c.p = 1.0;
  c.q = 2.0;
  c.pairs = {{0.5, 3.0}};
  const auto res = run_sandwich(c);
  const auto t = CsvTable::read(res.csv_path);
  CHECK(t.size() == 12);
  CHECK(res.passed);
  CHECK(res.summary.at("upper_violations") == 0);

  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.flag(i, "converged"));
    if (t.number(i, "p") != 1.0) continue;
    const auto body = random_body(Grid(c.grid), std::stoull(t.cell(i, "seed")));
    const double expect = perimeter(body) / std::hypot(t.number(i, "r1"), t.number(i, "r2"));
    CHECK(t.number(i, "ratio") == doctest::Approx(expect).epsilon(1e-12));
  }

  auto again = summarize_sandwich(CsvTable::read(res.csv_path));
  again["config"] = c.to_json();
  CHECK(again == read_json_file(res.summary_path));
}

TEST_CASE("sandwich battery rows stay below the constant") {
  auto c = config_for(SweepKind::sandwich, "battery");
  c.n_samples = 1;
  c.battery = true;
  const auto res = run_sandwich(c);
  const auto t = CsvTable::read(res.csv_path);
  CHECK(t.size() == 1 + ellipse_battery(c.grid).size());
  int battery_rows = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.cell(i, "source") != "battery") continue;
    ++battery_rows;
    CHECK(t.number(i, "ratio") > 0.0);
    CHECK(t.number(i, "ratio") <= t.number(i, "c2"));
    CHECK(t.number(i, "eccentricity") == doctest::Approx(t.number(i, "battery_aspect")).epsilon(1e-4));
  }
  CHECK(battery_rows == 14);
  CHECK(res.passed);
}

TEST_CASE("sweep output does not depend on the worker count") {
  auto c = config_for(SweepKind::sandwich, "det_a");
  c.n_samples = 8;
  std::string a, b;
  {
    ThreadsEnv env("1");
    a = slurp(run_sandwich(c).csv_path);
  }
  {
    ThreadsEnv env("4");
    c.out = scratch("det_b");
    b = slurp(run_sandwich(c).csv_path);
  }
  CHECK(a == b);
  CHECK(!a.empty());
}

TEST_CASE("diameter sweep at lambda one is round") {
  auto c = config_for(SweepKind::diameter, "diameter");
  c.n_samples = 3;
  c.lambda = 1.0;
  const auto res = run_diameter(c);
  const auto t = CsvTable::read(res.csv_path);
  REQUIRE(t.size() == 3);
  CHECK(CsvTable::read(c.out / "diameter_doubling.csv").size() == 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.flag(i, "converged"));
    CHECK(t.number(i, "max_h") == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(t.number(i, "total_rel_error") <= 1e-8);
  }
  CHECK(res.summary.at("baseline_max_h").get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.summary.at("doubling_growth").get<double>() <= 1e-8);
  CHECK(res.passed);
}

TEST_CASE("diameter summary flags growth and failures") {
  CsvTable first({"max_h", "total_rel_error", "converged"});
  first.add_row({"1.0", "0", "true"});
  first.add_row({"nan", "nan", "false"});
  CsvTable second({"max_h", "total_rel_error", "converged"});
  second.add_row({"1.2", "0", "true"});
  const auto s = summarize_diameter(first, second, 1.0);
  CHECK(s.at("converged") == 2);
  CHECK(s.at("doubling_growth").get<double>() == doctest::Approx(0.2));
  CHECK_FALSE(s.at("stable_under_doubling").get<bool>());
  CHECK_FALSE(s.at("passed").get<bool>());
}

TEST_CASE("uniqueness sweep") {
  auto c = config_for(SweepKind::uniqueness, "uniqueness");
  c.n_samples = 2;
  c.starts = 4;
  c.eps_grid = {0.0, 0.05};
  const auto res = run_uniqueness(c);
  const auto t = CsvTable::read(res.csv_path);
  REQUIRE(t.size() == 4);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.number(i, "converged_starts") == 4);
    CHECK(t.flag(i, "agree"));
    CHECK(t.number(i, "proxy") == doctest::Approx(t.number(i, "eps")).epsilon(1e-12));
    if (t.number(i, "eps") == 0.0) CHECK(t.number(i, "min_h") == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(res.summary.at("empirical_radius").get<double>() == 0.05);
  CHECK(res.passed);
}

TEST_CASE("uniqueness radius stops at the first disagreement") {
  CsvTable t({"eps", "agree", "starts", "converged_starts", "max_pairwise", "min_h", "proxy",
              "max_total_rel_error"});
  t.add_row({"0.1", "true", "2", "2", "0", "1", "0.1", "0"});
  t.add_row({"0.2", "false", "2", "2", "0.5", "1", "0.2", "0"});
  t.add_row({"0.4", "true", "2", "2", "0", "1", "0.4", "0"});
  CHECK(summarize_uniqueness(t).at("empirical_radius") == 0.1);
}

TEST_CASE("maximum principle sweep") {
  auto c = config_for(SweepKind::maxprinciple, "maxprinciple");
  c.p = 3.0;
  c.q = 2.0;
  c.lambda = 2.0;
  c.n_samples = 3;
  const auto res = run_maxprinciple(c);
  const auto t = CsvTable::read(res.csv_path);
  REQUIRE(t.size() == 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.flag(i, "converged"));
    CHECK(t.number(i, "max_h") <= t.number(i, "bound") + 1e-6);
  }
  CHECK(res.summary.at("violations") == 0);
  CHECK(res.passed);

  CsvTable bad({"converged", "ok", "excess", "total_rel_error"});
  bad.add_row({"true", "false", "0.1", "0"});
  bad.add_row({"false", "true", "nan", "nan"});
  const auto s = summarize_maxprinciple(bad);
  CHECK(s.at("violations") == 1);
  CHECK(s.at("nonconverged") == 1);
  CHECK_FALSE(s.at("passed").get<bool>());
}

TEST_CASE("variational sweep") {
  auto c = config_for(SweepKind::variational, "variational");
  c.grid = 256;
  const auto res = run_sweep(c);
  const auto t = CsvTable::read(res.csv_path);
  CHECK(t.size() == 12);
  CHECK(res.summary.at("max_rel_error").get<double>() <= 1e-5);
  CHECK(res.passed);
}
