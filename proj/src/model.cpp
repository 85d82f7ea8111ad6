#include "mlcsbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mlcsbm/errors.hpp"

namespace mlcsbm {

ModelParams build_params(std::vector<double> lambda, double mu, std::vector<double> d, int n,
                         int p) {
  if (lambda.empty() || lambda.size() != d.size()) {
    throw InvalidArgument("lambda and d must be non-empty and of equal length");
  }
  if (n < 2 || p < 2) throw InvalidArgument("n and p must be at least 2");
  if (!std::isfinite(mu) || mu < 0.0) throw InvalidArgument("mu must be finite and >= 0");

  ModelParams params;
  params.n = n;
  params.p = p;
  params.m = static_cast<int>(lambda.size());
  params.mu = mu;
  params.gamma = static_cast<double>(n) / static_cast<double>(p);
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double dk = d[k];
    const double lk = lambda[k];
    std::ostringstream where;
    where << "layer " << (k + 1) << ": ";
    if (!std::isfinite(dk) || dk <= 1.0) throw InvalidArgument(where.str() + "d must be > 1");
    if (!std::isfinite(lk) || lk < 0.0) throw InvalidArgument(where.str() + "lambda must be >= 0");
    const double root = std::sqrt(dk);
    if (lk > root) {
      throw InvalidArgument(where.str() + "lambda exceeds sqrt(d), so b would be negative");
    }
    const double ak = dk + lk * root;
    const double bk = std::max(0.0, dk - lk * root);
    if (ak >= static_cast<double>(n)) {
      throw InvalidArgument(where.str() + "a = d + lambda sqrt(d) must be < n");
    }
    params.a.push_back(ak);
    params.b.push_back(bk);
  }
  params.lambda = std::move(lambda);
  params.d = std::move(d);
  return params;
}

double effective_snr(const ModelParams& params) {
  double total = 0.0;
  for (double l : params.lambda) total += l * l;
  return total + params.mu * params.mu / params.gamma;
}

bool is_null_model(const ModelParams& params) {
  return params.mu == 0.0 &&
         std::all_of(params.lambda.begin(), params.lambda.end(), [](double l) { return l == 0.0; });
}

LayerGraph::LayerGraph(int layer_index, int n, std::vector<Edge> edges)
    : layer_index_(layer_index), n_(n), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.u == e.v) throw InvalidArgument("self-loop in layer graph");
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u < 0 || e.v >= n) throw InvalidArgument("node id out of range in layer graph");
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw InvalidArgument("duplicate edge in layer graph");
  }
  std::vector<int> degree(n, 0);
  for (const auto& e : edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_[n]);
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adjacency_[fill[e.u]++] = e.v;
    adjacency_[fill[e.v]++] = e.u;
  }
  for (int i = 0; i < n; ++i) {
    std::sort(adjacency_.begin() + offsets_[i], adjacency_.begin() + offsets_[i + 1]);
  }
}

bool LayerGraph::has_edge(int i, int j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::ptrdiff_t LayerGraph::neighbor_slot(int i, int j) const {
  const auto nb = neighbors(i);
  const auto it = std::lower_bound(nb.begin(), nb.end(), j);
  if (it == nb.end() || *it != j) return -1;
  return it - nb.begin();
}

std::string SubstreamLabels::layer_label(int k) const {
  const auto idx = static_cast<std::size_t>(k - 1);
  if (idx < layers.size() && !layers[idx].empty()) return layers[idx];
  return "layer/" + std::to_string(k);
}

CommunityAssignment sample_assignment(int n, Stream& rng) {
  CommunityAssignment sigma(n);
  for (int i = 0; i < n; ++i) sigma[i] = rng.sign();
  return sigma;
}

namespace {

// Visits the indices of a Bernoulli(q) subset of [0, count) in increasing
// order by geometric skipping.
template <typename Emit>
void bernoulli_indices(std::uint64_t count, double q, Stream& rng, Emit&& emit) {
  if (count == 0 || q <= 0.0) return;
  std::uint64_t idx = rng.geometric(q);
  while (idx < count) {
    emit(idx);
    const std::uint64_t skip = rng.geometric(q);
    if (skip >= count - idx) break;
    idx += skip + 1;
  }
}

// Inverse of t = c (c - 1) / 2 + r with 0 <= r < c.
std::pair<std::uint64_t, std::uint64_t> unrank_pair(std::uint64_t t) {
  auto c = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(t))) / 2.0);
  while (c * (c - 1) / 2 > t) --c;
  while ((c + 1) * c / 2 <= t) ++c;
  return {t - c * (c - 1) / 2, c};
}

}  // namespace

LayerGraph sample_layer(const ModelParams& params, int k, const CommunityAssignment& sigma,
                        Stream& rng) {
  if (k < 1 || k > params.m) throw InvalidArgument("layer index out of range");
  const int n = params.n;
  const double q_in = params.a[k - 1] / n;
  const double q_out = params.b[k - 1] / n;

  std::vector<int> plus, minus;
  for (int i = 0; i < n; ++i) (sigma[i] > 0 ? plus : minus).push_back(i);

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(params.d[k - 1] * n / 2.0 * 1.2) + 16);
  for (const auto* group : {&plus, &minus}) {
    const auto s = static_cast<std::uint64_t>(group->size());
    bernoulli_indices(s * (s - (s > 0 ? 1 : 0)) / 2, q_in, rng, [&](std::uint64_t t) {
      const auto [r, c] = unrank_pair(t);
      edges.push_back({(*group)[r], (*group)[c]});
    });
  }
  const auto s_minus = static_cast<std::uint64_t>(minus.size());
  bernoulli_indices(plus.size() * s_minus, q_out, rng, [&](std::uint64_t t) {
    const int x = plus[t / s_minus];
    const int y = minus[t % s_minus];
    edges.push_back({std::min(x, y), std::max(x, y)});
  });
  return LayerGraph(k - 1, n, std::move(edges));
}

CovariateMatrix sample_covariates(const ModelParams& params, const CommunityAssignment& sigma,
                                  Stream& rng) {
  const int n = params.n;
  const int p = params.p;
  CovariateMatrix cov;
  cov.u.resize(p);
  for (int j = 0; j < p; ++j) cov.u[j] = rng.normal();
  cov.B.resize(n, p);
  const double scale = std::sqrt(params.mu / n);
  for (int i = 0; i < n; ++i) {
    const double shift = scale * sigma[i];
    for (int j = 0; j < p; ++j) cov.B(i, j) = shift * cov.u[j] + rng.normal();
  }
  return cov;
}

Dataset sample_dataset_given(const ModelParams& params, const CommunityAssignment& sigma,
                             std::uint64_t seed, const SubstreamLabels& labels) {
  if (sigma.size() != params.n) throw InvalidArgument("sigma length must equal n");
  Dataset ds;
  ds.params = params;
  ds.sigma = sigma;
  ds.seed = seed;
  ds.layers.reserve(params.m);
  for (int k = 1; k <= params.m; ++k) {
    Stream rng(seed, labels.layer_label(k));
    ds.layers.push_back(sample_layer(params, k, sigma, rng));
  }
  Stream cov_rng(seed, labels.covariates);
  ds.covariates = sample_covariates(params, sigma, cov_rng);
  return ds;
}

Dataset sample_dataset(const ModelParams& params, std::uint64_t seed,
                       const SubstreamLabels& labels) {
  Stream sigma_rng(seed, labels.sigma);
  return sample_dataset_given(params, sample_assignment(params.n, sigma_rng), seed, labels);
}

}  // namespace mlcsbm
