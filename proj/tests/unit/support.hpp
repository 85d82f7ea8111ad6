#pragma once

#include <vector>

#include "mlcsbm/model.hpp"
#include "mlcsbm/rng.hpp"

namespace mlcsbm::testing {

// A small instance with arbitrary edge density, independent of the model
// sampler. params only carries the values normalization needs.
inline Dataset random_instance(int n, int p, int m, double density, Stream& rng,
                               double lambda = 1.0, double mu = 1.0, double d = 2.0) {
  Dataset ds;
  ds.params = build_params(std::vector<double>(m, lambda), mu, std::vector<double>(m, d),
                           std::max(n, 20), std::max(p, 2));
  ds.params.p = p;
  ds.params.n = n;
  ds.params.gamma = static_cast<double>(n) / p;
  ds.sigma = sample_assignment(n, rng);
  for (int k = 0; k < m; ++k) {
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (rng.uniform() < density) edges.push_back({u, v});
      }
    }
    ds.layers.emplace_back(k, n, std::move(edges));
  }
  ds.covariates.B = RowMatrixXd(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) ds.covariates.B(i, j) = rng.normal();
  }
  return ds;
}

}  // namespace mlcsbm::testing
