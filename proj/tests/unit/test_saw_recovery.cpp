#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "../oracles/reference_oracles.hpp"
#include "mlcsbm/errors.hpp"
#include "mlcsbm/saw_recovery.hpp"
#include "support.hpp"

using namespace mlcsbm;

namespace {

ModelParams ab_params(int n) {
  // d = 2, lambda = 1/sqrt(2): a = 3, b = 1
  return build_params({1.0 / std::sqrt(2.0)}, 1.0, {2.0}, n, 10);
}

}  // namespace

TEST_CASE("layer normalization: values and conditional means") {
  const auto p = ab_params(100);
  REQUIRE(p.a[0] == doctest::Approx(3.0));
  REQUIRE(p.b[0] == doctest::Approx(1.0));
  const double one = normalize_layer_entry(p, 0, 1);
  const double zero = normalize_layer_entry(p, 0, 0);
  CHECK(one == doctest::Approx(98.0));
  CHECK(zero == doctest::Approx(-2.0));
  // same community: edge probability a/n; different: b/n
  CHECK(p.a[0] / 100 * one + (1 - p.a[0] / 100) * zero == doctest::Approx(1.0));
  CHECK(p.b[0] / 100 * one + (1 - p.b[0] / 100) * zero == doctest::Approx(-1.0));
  CHECK_THROWS_AS(normalize_layer_entry(build_params({0.0}, 1.0, {2.0}, 100, 10), 0, 1), InvalidArgument);
}

TEST_CASE("layer normalization: variance n / lambda^2") {
  const int n = 10000;
  const auto p = build_params({1.0}, 0.0, {4.0}, n, 10);
  const double one = normalize_layer_entry(p, 0, 1);
  const double zero = normalize_layer_entry(p, 0, 0);
  // Var(Â | sigma) for a same-community and a cross-community pair, then
  // averaged over a uniformly random pair.
  double avg = 0.0;
  for (double q : {p.a[0] / n, p.b[0] / n}) {
    const double mean = q * one + (1 - q) * zero;
    avg += 0.5 * (q * one * one + (1 - q) * zero * zero - mean * mean);
  }
  CHECK(avg == doctest::Approx(n / (p.lambda[0] * p.lambda[0])).epsilon(0.05));

  Stream rng(4);
  double sum = 0.0, sq = 0.0;
  const int R = 20000000;
  for (int r = 0; r < R; ++r) {
    const double q = (r % 2 == 0) ? p.a[0] / n : p.b[0] / n;
    const double x = normalize_layer_entry(p, 0, rng.uniform() < q ? 1 : 0) - (r % 2 == 0 ? 1.0 : -1.0);
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / R) < 4.0 * std::sqrt(sq / R / R));
  CHECK(sq / R == doctest::Approx(n / (p.lambda[0] * p.lambda[0])).epsilon(0.05));
}

TEST_CASE("covariate normalization") {
  const auto p = ab_params(50);
  RowMatrixXd B = RowMatrixXd::Zero(50, 10);
  CHECK(normalize_covariate_wedge(p, B, 0, 1, 3) == 0.0);
  B(0, 3) = 2.0;
  B(1, 3) = -0.5;
  CHECK(normalize_covariate_wedge(p, B, 0, 1, 3) == doctest::Approx(-50.0));
  CHECK_THROWS_AS(normalize_covariate_wedge(p, B, 1, 1, 3), InvalidArgument);
  CHECK_THROWS_AS(normalize_covariate_wedge(build_params({1.0}, 0.0, {2.0}, 50, 10), B, 0, 1, 3),
                  InvalidArgument);
}

TEST_CASE("covariate normalization: conditional mean sigma sigma") {
  // E[(n/mu) B_1j B_2j | sigma] = (n/mu)(mu/n) sigma_1 sigma_2 E[u_j^2]
  const int n = 40;
  const auto params = build_params({0.0}, 1.5, {2.0}, n, 3);
  CommunityAssignment sigma = CommunityAssignment::Ones(n);
  sigma(1) = -1;
  const int R = 40000;
  double sum = 0.0, sq = 0.0;
  for (int r = 0; r < R; ++r) {
    const auto ds = sample_dataset_given(params, sigma, derive_seed(5, "rep", r));
    const double w = normalize_covariate_wedge(params, ds.covariates.B, 0, 1, 0);
    sum += w;
    sq += w * w;
  }
  const double mean = sum / R;
  const double se = std::sqrt((sq / R - mean * mean) / R);
  CHECK(std::abs(mean - (-1.0)) < 4 * se);
}

TEST_CASE("single-wedge estimate is the normalized entry") {
  auto params = ab_params(100);
  Stream rng(1);
  auto ds = testing::random_instance(100, 10, 1, 0.0, rng);
  ds.params = params;
  ds.layers[0] = LayerGraph(0, 100, {{3, 7}});
  const auto sh = estimate_sigma_matrix(ds, {{1}, 0}, SawMode::exact(), 0);
  CHECK(sh.values(3, 7) == doctest::Approx(98.0));
  CHECK(sh.values(7, 3) == sh.values(3, 7));
  CHECK(sh.values(0, 1) == doctest::Approx(-2.0));
  CHECK(sh.coverage(3, 7) == 1);
  CHECK(sh.values(4, 4) == 0.0);
}

TEST_CASE("exact estimate matches the brute-force oracle") {
  Stream rng(77);
  for (int inst = 0; inst < 25; ++inst) {
    const int n = 3 + static_cast<int>(rng.below(5));
    const int p = 1 + static_cast<int>(rng.below(3));
    const int m = 1 + static_cast<int>(rng.below(2));
    const auto ds = testing::random_instance(n, p, m, 0.5, rng);
    WedgeComposition comp{std::vector<int>(m, 0), 0};
    const int total = 1 + static_cast<int>(rng.below(3));
    for (int s = 0; s < total; ++s) {
      const int slot = static_cast<int>(rng.below(m + 1));
      (slot == m ? comp.ell : comp.k[slot])++;
    }
    const auto fast = estimate_sigma_matrix(ds, comp, SawMode::exact(), 0);
    const Eigen::MatrixXd brute = oracle::brute_sigma_hat(ds, comp);
    INFO("comp " << comp.to_string() << " n=" << n << " p=" << p);
    CHECK((fast.values - brute).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, brute.cwiseAbs().maxCoeff()));
    CHECK(fast.values == fast.values.transpose());
  }
}

TEST_CASE("path weight multiplies wedge weights") {
  auto params = ab_params(100);
  Stream rng(1);
  auto ds = testing::random_instance(100, 10, 1, 0.0, rng);
  ds.params = params;
  ds.layers[0] = LayerGraph(0, 100, {{0, 5}});
  SelfAvoidingWalk w{0, 9, {5}, {0, kCovariateWedge}, {4}};
  const double expect = 98.0 * (100.0 / params.mu) * ds.covariates.B(5, 4) * ds.covariates.B(9, 4);
  CHECK(path_weight(w, ds, params) == doctest::Approx(expect));
  SelfAvoidingWalk single{0, 5, {}, {0}, {}};
  CHECK(path_weight(single, ds, params) == doctest::Approx(98.0));
}

TEST_CASE("sampled estimate approaches the exact one") {
  Stream rng(12);
  const auto ds = testing::random_instance(9, 3, 1, 0.4, rng);
  const WedgeComposition comp{{2}, 1};
  const auto exact = estimate_sigma_matrix(ds, comp, SawMode::exact(), 0);
  const int N = 4000;
  const auto sampled = estimate_sigma_matrix(ds, comp, SawMode::sampled(N), 5);
  CHECK(sampled.coverage(0, 1) == static_cast<std::uint64_t>(N));
  // per-entry sampling sd from the exact walk-weight spread
  int far = 0;
  for (int i = 0; i < 9; ++i) {
    for (int j = i + 1; j < 9; ++j) {
      double sq = 0.0;
      std::uint64_t cnt = 0;
      enumerate_saws(ds, i, j, comp, [&](const SelfAvoidingWalk& w) {
        const double x = path_weight(w, ds, ds.params);
        sq += x * x;
        ++cnt;
      });
      const double var = sq / cnt - exact.values(i, j) * exact.values(i, j);
      const double sd = std::sqrt(std::max(var, 0.0) / N);
      if (std::abs(sampled.values(i, j) - exact.values(i, j)) > 3 * sd) ++far;
    }
  }
  CHECK(far <= 2);  // 36 entries; ~0.1 expected beyond 3 sd
}

TEST_CASE("estimates are thread-count independent") {
  const auto params = build_params({1.2}, 0.8, {3.0}, 40, 30);
  const auto ds = sample_dataset(params, 4);
  const auto a = estimate_sigma_matrix(ds, {{1}, 1}, SawMode::sampled(50), 9, 1);
  const auto b = estimate_sigma_matrix(ds, {{1}, 1}, SawMode::sampled(50), 9, 3);
  CHECK(a.values == b.values);
  const auto c = estimate_sigma_matrix(ds, {{2}, 0}, SawMode::exact(), 0, 1);
  const auto d = estimate_sigma_matrix(ds, {{2}, 0}, SawMode::exact(), 0, 4);
  CHECK(c.values == d.values);
}

TEST_CASE("estimator inputs are validated") {
  const auto params = build_params({0.0, 1.0}, 0.0, {3.0, 3.0}, 30, 10);
  const auto ds = sample_dataset(params, 1);
  CHECK_THROWS_AS(estimate_sigma_matrix(ds, {{1, 0}, 0}, SawMode::exact(), 0), InvalidArgument);
  CHECK_THROWS_AS(estimate_sigma_matrix(ds, {{0, 1}, 1}, SawMode::exact(), 0), InvalidArgument);
  CHECK_THROWS_AS(estimate_sigma_matrix(ds, {{0, 5}, 0}, SawMode::exact(), 0), CapExceeded);
  CHECK_NOTHROW(estimate_sigma_matrix(ds, {{0, 2}, 0}, SawMode::exact(), 0));
}

TEST_CASE("PSD program: s s^T instance") {
  const int n = 12;
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s(i) = (i % 3 == 0) ? -1.0 : 1.0;
  const Eigen::MatrixXd S = s * s.transpose();
  const auto fit = fit_psd_correlation(S, 0.5);
  REQUIRE(fit.status == PsdStatus::kOptimal);
  const auto report = oracle::check_psd_solution(fit.values, S, 0.5);
  INFO(report.describe());
  CHECK(report.all());
  CHECK(fit.values.norm() <= n + 1e-9);
  CHECK(0.5 * fit.values.squaredNorm() <= oracle::psd_dual_bound(S, 0.5) * (1 + 1e-4) + 1e-9);
}

TEST_CASE("PSD program: vacuous constraint returns the identity") {
  const Eigen::MatrixXd S = Eigen::MatrixXd::Zero(6, 6);
  const auto fit = fit_psd_correlation(S, 0.3);
  CHECK(fit.status == PsdStatus::kOptimal);
  CHECK(fit.values == Eigen::MatrixXd::Identity(6, 6));
  CHECK(fit.values.norm() == doctest::Approx(std::sqrt(6.0)));
}

TEST_CASE("PSD program: infeasible delta is reported") {
  Stream rng(3);
  Eigen::MatrixXd S(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) S(i, j) = rng.normal();
  S = 0.5 * (S + S.transpose()).eval();
  S.diagonal().setZero();
  const auto fit = fit_psd_correlation(S, 5.0);
  CHECK(fit.status == PsdStatus::kInfeasible);
  CHECK_FALSE(fit.message.empty());
  CHECK_THROWS_AS(fit_psd_correlation(S, 0.0), InvalidArgument);
}

TEST_CASE("PSD program: random feasible instances are optimal") {
  Stream rng(21);
  for (int inst = 0; inst < 8; ++inst) {
    const int n = 5 + static_cast<int>(rng.below(11));
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s(i) = rng.sign();
    Eigen::MatrixXd noise(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) noise(i, j) = rng.normal();
    Eigen::MatrixXd S = s * s.transpose() + 1.5 * (noise + noise.transpose());
    S.diagonal().setZero();
    const double delta = 0.5 * s.dot(S * s) / (n * S.norm());
    REQUIRE(delta > 0);
    const auto fit = fit_psd_correlation(S, delta);
    REQUIRE(fit.status == PsdStatus::kOptimal);
    const auto report = oracle::check_psd_solution(fit.values, S, delta);
    INFO(report.describe());
    CHECK(report.all());
    const double primal = 0.5 * fit.values.squaredNorm();
    const double dual = oracle::psd_dual_bound(S, delta);
    CHECK(dual <= primal * (1 + 1e-9));
    CHECK(primal - dual <= 1e-4 * primal);
  }
}

TEST_CASE("Gaussian rounding") {
  const int n = 10;
  Eigen::VectorXd s(n);
  CommunityAssignment si(n);
  for (int i = 0; i < n; ++i) {
    si(i) = (i % 2 == 0) ? 1 : -1;
    s(i) = si(i);
  }
  const Eigen::MatrixXd psi = s * s.transpose() + 1e-12 * Eigen::MatrixXd::Identity(n, n);
  Stream a(5), b(5);
  const auto x = gaussian_rounding(psi, a);
  CHECK(overlap(x, si) == 1.0);
  CHECK(gaussian_rounding(psi, b) == x);

  // Ψ = I: E overlap ~ sqrt(2 / (pi n)) for large n
  const int N = 400;
  const CommunityAssignment truth = CommunityAssignment::Ones(N);
  Stream r(6);
  double sum = 0.0;
  for (int rep = 0; rep < 400; ++rep) sum += overlap(gaussian_rounding(Eigen::MatrixXd::Identity(N, N), r), truth);
  CHECK(sum / 400 == doctest::Approx(std::sqrt(2.0 / (M_PI * N))).epsilon(0.1));
}

TEST_CASE("overlap") {
  CommunityAssignment s(4), t(4);
  s << 1, -1, 1, -1;
  t << 1, 1, -1, -1;
  CHECK(overlap(s, s) == 1.0);
  CHECK(overlap(s, -s) == 1.0);
  CHECK(overlap(s, t) == 0.0);
  CHECK_THROWS_AS(overlap(s, CommunityAssignment::Ones(3)), InvalidArgument);
}

TEST_CASE("pipeline is deterministic and sign-symmetric in the truth") {
  const auto params = build_params({1.5}, 0.0, {3.0}, 40, 10);
  auto ds = sample_dataset(params, 8);
  const auto sh = estimate_sigma_matrix(ds, {{2}, 0}, SawMode::exact(), 0);
  const double delta = std::max(0.5 * pilot_delta(sh.values, ds.sigma), 1e-3);
  const auto a = weak_recovery_pipeline(ds, {{2}, 0}, delta, SawMode::exact(), 3);
  const auto b = weak_recovery_pipeline(ds, {{2}, 0}, delta, SawMode::exact(), 3);
  CHECK(a.sigma_hat == b.sigma_hat);
  REQUIRE(a.overlap.has_value());
  ds.sigma = -ds.sigma;
  const auto c = weak_recovery_pipeline(ds, {{2}, 0}, delta, SawMode::exact(), 3);
  CHECK(*c.overlap == *a.overlap);
  CHECK(a.mode == "exact");
}
