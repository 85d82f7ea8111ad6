#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mlcsbm/model.hpp"

namespace mlcsbm {

/// Row inner products G(a, b) = sum_j B(a, j) B(b, j), either precomputed
/// as a dense n x n matrix or evaluated on demand.
class CovariateGram {
 public:
  CovariateGram(const RowMatrixXd& B, bool precompute);

  double operator()(int a, int b) const {
    return dense_ ? gram_(a, b) : B_.row(a).dot(B_.row(b));
  }
  const RowMatrixXd& B() const { return B_; }

 private:
  const RowMatrixXd& B_;
  bool dense_;
  Eigen::MatrixXd gram_;
};

using NodePair = std::pair<int, int>;

/// Sum over pairwise-distinct covariate indices j_1..j_L of
/// prod_s B(u_s, j_s) B(v_s, j_s), for L = wedges.size() <= 4.
///
/// Evaluated by Moebius inversion over set partitions of the L slots: each
/// block contributes sum_j prod_{s in block} B(u_s, j) B(v_s, j), and
/// singleton blocks are Gram lookups.
double distinct_factor_sum(const CovariateGram& gram, std::span<const NodePair> wedges);

}  // namespace mlcsbm
