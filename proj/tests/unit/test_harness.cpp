#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mlcsbm/cycle_stats.hpp"
#include "mlcsbm/errors.hpp"
#include "mlcsbm/harness.hpp"

using namespace mlcsbm;

TEST_CASE("grids") {
  const auto g = linear_grid(0.5, 4.0, 10);
  REQUIRE(g.size() == 10);
  CHECK(g.front() == 0.5);
  CHECK(g.back() == 4.0);
  CHECK(g[1] - g[0] == doctest::Approx(3.5 / 9));
  const auto r = random_grid(0.5, 4.0, 10, 3);
  CHECK(std::is_sorted(r.begin(), r.end()));
  CHECK(r.front() > 0.5);
  CHECK(r.back() < 4.0);
  CHECK(random_grid(0.5, 4.0, 10, 3) == r);
}

TEST_CASE("grid values map to the effective SNR") {
  ExperimentConfig c;
  c.snr_grid = {2.0};
  for (double t : {0.5, 1.0, 2.7, 4.0}) {
    CHECK(effective_snr(point_params(c, t)) == doctest::Approx(t).epsilon(1e-12));
  }
  c.ratios = {0.5, 0.2, 0.2, 0.1};
  const auto p = point_params(c, 2.0);
  CHECK(p.lambda[0] * p.lambda[0] == doctest::Approx(1.0));
  CHECK(p.mu * p.mu / p.gamma == doctest::Approx(0.2));
  c.parametrization = Parametrization::kLiteral;
  const auto q = point_params(c, 2.0);
  CHECK(q.lambda[0] == doctest::Approx(1.0));
  CHECK(q.mu == doctest::Approx(0.1 * 2.0 * c.n / c.p));
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.snr_grid = {1.0};
  CHECK_NOTHROW(validate_config(c));
  c.ratios = {0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(validate_config(c), InvalidArgument);
  c.ratios = {0.25, 0.25, 0.25};
  CHECK_THROWS_AS(validate_config(c), InvalidArgument);
  c.ratios.clear();
  c.replicas = 0;
  CHECK_THROWS_AS(validate_config(c), InvalidArgument);
  c.replicas = 1;
  c.snr_grid.clear();
  CHECK_THROWS_AS(validate_config(c), InvalidArgument);
}

TEST_CASE("power curve is deterministic and thread independent") {
  ExperimentConfig c;
  c.n = 120;
  c.p = 180;
  c.t_max = 10;
  c.replicas = 6;
  c.snr_grid = {0.0, 3.0};
  c.seed = 17;
  const auto a = run_power_curve(c, Method::kBp);
  c.threads = 3;
  const auto b = run_power_curve(c, Method::kBp);
  CHECK(curve_csv(a) == curve_csv(b));
  REQUIRE(a.size() == 2);
  CHECK(a[0].failures == 0);
  CHECK(a[0].power >= 0.0);
  CHECK(a[0].power <= 1.0);
  CHECK(a[1].overlap > a[0].overlap);
  const auto csv = curve_csv(a);
  CHECK(csv.rfind("snr,method,power,power_se,overlap,overlap_se,replicas,failures\n", 0) == 0);
}

TEST_CASE("failed replicas are counted, not dropped") {
  ExperimentConfig c;
  c.n = 100;
  c.p = 100;
  c.m = 1;
  c.d = {3.0};
  c.replicas = 4;
  c.snr_grid = {0.0};  // no composition can be selected at zero signal
  const auto pts = run_power_curve(c, Method::kCycle);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].failures == 4);
  CHECK(std::isnan(pts[0].power));
  CHECK(std::isnan(pts[0].overlap));
  const auto csv = curve_csv(pts);
  CHECK(csv.find("0,cycle,nan,nan,nan,nan,4,4") != std::string::npos);
}

TEST_CASE("cycle and saw methods fill their own columns") {
  ExperimentConfig c;
  c.n = 40;
  c.p = 30;
  c.m = 1;
  c.d = {3.0};
  c.replicas = 3;
  c.pilot_replicas = 2;
  c.snr_grid = {2.0};
  c.k_total = 3;
  c.saw_comp = WedgeComposition{{1}, 1};
  const auto cyc = run_power_curve(c, Method::kCycle);
  CHECK(cyc[0].failures == 0);
  CHECK(std::isnan(cyc[0].overlap));
  const auto saw = run_power_curve(c, Method::kSaw);
  CHECK(saw[0].failures == 0);
  CHECK(std::isnan(saw[0].power));
  CHECK(saw[0].overlap >= 0.0);
}

TEST_CASE("moment suite: degenerate layer") {
  ModelParams p = build_params({0.0, 0.0}, 0.0, {3.0, 3.0}, 200, 50);
  p.d[0] = 0.0;
  p.a[0] = p.b[0] = 0.0;
  const auto rows = run_moment_suite(p, {{{1, 2}, 0}, {{1, 0}, 1}}, 5, 1);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.theoretical_mean == 0.0);
    CHECK(r.empirical_mean == 0.0);
    CHECK(r.empirical_var == 0.0);
    CHECK_FALSE(r.flagged);
  }
}

TEST_CASE("moment suite: triangles under the null") {
  const auto p = build_params({0.0}, 0.0, {2.0}, 1000, 10);
  const auto rows = run_moment_suite(p, {{{3}, 0}}, 300, 5, 2);
  CHECK(rows[0].theoretical_mean == doctest::Approx(4.0 / 3.0));
  CHECK(std::abs(rows[0].z_mean) < 4.0);
  const auto again = run_moment_suite(p, {{{3}, 0}}, 300, 5, 1);
  CHECK(moment_csv(rows) == moment_csv(again));
}
