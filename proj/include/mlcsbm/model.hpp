#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlcsbm/rng.hpp"

namespace mlcsbm {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Labels in {-1, +1}.
using CommunityAssignment = Eigen::VectorXi;

/// Scalar parameters of the multilayer contextual SBM.
///
/// Layer k has within-community edge probability a_k/n and cross-community
/// probability b_k/n with a_k = d_k + lambda_k sqrt(d_k) and
/// b_k = d_k - lambda_k sqrt(d_k). Covariate rows are
/// B_i = sqrt(mu/n) sigma_i u + R_i, and gamma = n/p.
struct ModelParams {
  int n = 0;
  int p = 0;
  int m = 0;
  std::vector<double> lambda;
  double mu = 0.0;
  std::vector<double> d;
  std::vector<double> a;
  std::vector<double> b;
  double gamma = 0.0;

  bool operator==(const ModelParams&) const = default;
};

/// Validates and fills the derived fields. Throws InvalidArgument.
ModelParams build_params(std::vector<double> lambda, double mu, std::vector<double> d, int n,
                         int p);

/// Sum of lambda_k^2 plus mu^2/gamma.
double effective_snr(const ModelParams& params);

/// True when every lambda_k and mu are zero.
bool is_null_model(const ModelParams& params);

struct Edge {
  int u = 0;  // u < v
  int v = 0;
  auto operator<=>(const Edge&) const = default;
};

/// One undirected simple graph on n nodes, stored as a sorted edge list plus
/// CSR adjacency with sorted neighbor lists.
class LayerGraph {
 public:
  LayerGraph() = default;

  /// Normalizes each pair to u < v and sorts. Throws on self-loops,
  /// duplicates, or out-of-range ids.
  LayerGraph(int layer_index, int n, std::vector<Edge> edges);

  int layer_index() const { return layer_index_; }
  int num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const int> neighbors(int i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  int degree(int i) const { return offsets_[i + 1] - offsets_[i]; }
  bool has_edge(int i, int j) const;

  /// Position of j within neighbors(i), or -1. Used as a directed-edge id
  /// offset by message-passing code.
  std::ptrdiff_t neighbor_slot(int i, int j) const;
  int offset(int i) const { return offsets_[i]; }

  bool operator==(const LayerGraph& o) const {
    return layer_index_ == o.layer_index_ && n_ == o.n_ && edges_ == o.edges_;
  }

 private:
  int layer_index_ = 0;
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> offsets_{0};
  std::vector<int> adjacency_;
};

struct CovariateMatrix {
  RowMatrixXd B;      // n x p
  Eigen::VectorXd u;  // latent direction; empty when loaded from disk
};

/// One sampled instance. Inference code reads params, layers and
/// covariates.B only; sigma and covariates.u are ground truth.
struct Dataset {
  ModelParams params;
  CommunityAssignment sigma;
  std::vector<LayerGraph> layers;
  CovariateMatrix covariates;
  std::uint64_t seed = 0;
};

/// Substream labels used by sample_dataset. Tests override individual
/// labels to check that components are drawn independently.
struct SubstreamLabels {
  std::string sigma = "sigma";
  std::vector<std::string> layers;  // empty entry or missing -> "layer/<k>"
  std::string covariates = "covariates";

  std::string layer_label(int k) const;
};

CommunityAssignment sample_assignment(int n, Stream& rng);

/// k is 1-based.
LayerGraph sample_layer(const ModelParams& params, int k, const CommunityAssignment& sigma,
                        Stream& rng);

CovariateMatrix sample_covariates(const ModelParams& params, const CommunityAssignment& sigma,
                                  Stream& rng);

Dataset sample_dataset(const ModelParams& params, std::uint64_t seed,
                       const SubstreamLabels& labels = {});

/// Layers and covariates drawn for a caller-supplied sigma, using the same
/// substreams as sample_dataset.
Dataset sample_dataset_given(const ModelParams& params, const CommunityAssignment& sigma,
                             std::uint64_t seed, const SubstreamLabels& labels = {});

}  // namespace mlcsbm
