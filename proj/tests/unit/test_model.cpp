#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mlcsbm/errors.hpp"
#include "mlcsbm/model.hpp"

using namespace mlcsbm;

TEST_CASE("build_params derives a, b, gamma") {
  const auto p = build_params({1.0, 0.0}, 0.5, {4.0, 3.0}, 300, 450);
  CHECK(p.m == 2);
  CHECK(p.a[0] == doctest::Approx(6.0));
  CHECK(p.b[0] == doctest::Approx(2.0));
  CHECK(p.a[1] == p.b[1]);
  CHECK(p.gamma == doctest::Approx(300.0 / 450.0));
  CHECK(effective_snr(p) == doctest::Approx(1.0 + 0.25 * 1.5));
  CHECK_FALSE(is_null_model(p));
  CHECK(is_null_model(build_params({0.0}, 0.0, {3.0}, 50, 50)));
}

TEST_CASE("build_params rejects bad input") {
  CHECK_THROWS_AS(build_params({1.0}, 0.5, {3.0, 3.0}, 100, 100), InvalidArgument);
  CHECK_THROWS_AS(build_params({}, 0.5, {}, 100, 100), InvalidArgument);
  CHECK_THROWS_AS(build_params({3.0}, 0.5, {4.0}, 100, 100), InvalidArgument);  // lambda > sqrt(d)
  CHECK_THROWS_AS(build_params({-1.0}, 0.5, {4.0}, 100, 100), InvalidArgument);
  CHECK_THROWS_AS(build_params({1.0}, -0.5, {4.0}, 100, 100), InvalidArgument);
  CHECK_THROWS_AS(build_params({1.0}, 0.5, {1.0}, 100, 100), InvalidArgument);
  CHECK_THROWS_AS(build_params({1.0}, 0.5, {4.0}, 5, 100), InvalidArgument);    // a >= n
  CHECK_THROWS_AS(build_params({1.0}, 0.5, {4.0}, 100, 1), InvalidArgument);
  CHECK_NOTHROW(build_params({2.0}, 0.5, {4.0}, 100, 100));                      // b = 0
}

TEST_CASE("LayerGraph normalizes and indexes") {
  LayerGraph g(0, 5, {{3, 1}, {0, 4}, {1, 2}});
  REQUIRE(g.num_edges() == 3);
  CHECK(g.edges()[0].u == 0);
  CHECK(g.edges()[1].u == 1);
  CHECK(g.edges()[1].v == 2);
  CHECK(g.has_edge(1, 3));
  CHECK(g.has_edge(3, 1));
  CHECK_FALSE(g.has_edge(0, 1));
  CHECK(g.degree(1) == 2);
  CHECK(g.neighbor_slot(1, 3) == 1);
  CHECK(g.neighbor_slot(1, 4) == -1);
  CHECK_THROWS_AS(LayerGraph(0, 5, {{1, 1}}), InvalidArgument);
  CHECK_THROWS_AS(LayerGraph(0, 5, {{1, 2}, {2, 1}}), InvalidArgument);
  CHECK_THROWS_AS(LayerGraph(0, 5, {{1, 5}}), InvalidArgument);
}

TEST_CASE("sampled layers match the planted edge rates") {
  const int n = 2000;
  const auto params = build_params({1.5}, 0.0, {4.0}, n, 10);
  double within = 0, across = 0, within_pairs = 0, across_pairs = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto ds = sample_dataset(params, 100 + rep);
    const auto& s = ds.sigma;
    const double plus = (s.array() > 0).count();
    within_pairs += plus * (plus - 1) / 2 + (n - plus) * (n - plus - 1) / 2;
    across_pairs += plus * (n - plus);
    for (const auto& e : ds.layers[0].edges()) (s(e.u) == s(e.v) ? within : across) += 1;
  }
  const double a_hat = within / within_pairs * n;
  const double b_hat = across / across_pairs * n;
  CHECK(a_hat == doctest::Approx(params.a[0]).epsilon(0.03));
  CHECK(b_hat == doctest::Approx(params.b[0]).epsilon(0.05));
}

TEST_CASE("covariates tilt toward sigma u") {
  const int n = 400, p = 300;
  const auto params = build_params({0.0}, 2.0, {3.0}, n, p);
  const auto ds = sample_dataset(params, 5);
  const auto& cov = ds.covariates;
  REQUIRE(cov.B.rows() == n);
  REQUIRE(cov.u.size() == p);
  // E[B_ij | sigma, u] = sqrt(mu/n) sigma_i u_j
  const Eigen::MatrixXd mean =
      std::sqrt(params.mu / n) * ds.sigma.cast<double>() * cov.u.transpose();
  const Eigen::MatrixXd resid = cov.B - mean;
  CHECK(resid.mean() == doctest::Approx(0.0).epsilon(0.01));
  CHECK(resid.array().square().mean() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("substreams are independent per component") {
  const auto params = build_params({1.0, 1.0}, 1.0, {3.0, 3.0}, 200, 100);
  const auto a = sample_dataset(params, 9);
  const auto b = sample_dataset(params, 9);
  CHECK(a.sigma == b.sigma);
  CHECK(a.layers == b.layers);
  CHECK(a.covariates.B == b.covariates.B);

  SubstreamLabels other;
  other.covariates = "covariates/alt";
  const auto c = sample_dataset(params, 9, other);
  CHECK(c.layers == a.layers);
  CHECK(c.covariates.B != a.covariates.B);

  const auto given = sample_dataset_given(params, a.sigma, 9);
  CHECK(given.layers == a.layers);
  CHECK(given.covariates.B == a.covariates.B);
  CHECK(sample_dataset(params, 10).layers != a.layers);
}

TEST_CASE("null layers have no community structure") {
  const auto params = build_params({0.0}, 0.0, {3.0}, 3000, 5);
  const auto ds = sample_dataset(params, 77);
  const double mean_degree = 2.0 * ds.layers[0].num_edges() / 3000.0;
  CHECK(mean_degree == doctest::Approx(3.0).epsilon(0.05));
}
