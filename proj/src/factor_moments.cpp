#include "mlcsbm/factor_moments.hpp"

#include <array>

#include "mlcsbm/errors.hpp"

namespace mlcsbm {

CovariateGram::CovariateGram(const RowMatrixXd& B, bool precompute) : B_(B), dense_(precompute) {
  if (dense_) {
    gram_.resize(B.rows(), B.rows());
    gram_.triangularView<Eigen::Lower>() = B * B.transpose();
    gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  }
}

namespace {

struct Partition {
  std::vector<std::vector<int>> blocks;
  double moebius = 1.0;  // prod over blocks of (-1)^(|b|-1) (|b|-1)!
};

void grow(int next, int size, std::vector<std::vector<int>>& blocks, std::vector<Partition>& out) {
  if (next == size) {
    Partition part{blocks, 1.0};
    for (const auto& b : blocks) {
      double f = 1.0;
      for (std::size_t i = 1; i < b.size(); ++i) f *= -static_cast<double>(i);
      part.moebius *= f;
    }
    out.push_back(std::move(part));
    return;
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].push_back(next);
    grow(next + 1, size, blocks, out);
    blocks[b].pop_back();
  }
  blocks.push_back({next});
  grow(next + 1, size, blocks, out);
  blocks.pop_back();
}

const std::vector<Partition>& partitions(int size) {
  static const std::array<std::vector<Partition>, 5> table = [] {
    std::array<std::vector<Partition>, 5> t;
    for (int s = 0; s < 5; ++s) {
      std::vector<std::vector<int>> blocks;
      grow(0, s, blocks, t[s]);
    }
    return t;
  }();
  return table[size];
}

}  // namespace

double distinct_factor_sum(const CovariateGram& gram, std::span<const NodePair> wedges) {
  const int slots = static_cast<int>(wedges.size());
  if (slots > 4) throw CapExceeded("at most 4 covariate wedges are supported");
  if (slots == 0) return 1.0;
  const auto& B = gram.B();
  if (slots > B.cols()) return 0.0;
  if (slots == 1) return gram(wedges[0].first, wedges[0].second);

  double total = 0.0;
  for (const auto& part : partitions(slots)) {
    double term = part.moebius;
    for (const auto& block : part.blocks) {
      if (block.size() == 1) {
        term *= gram(wedges[block[0]].first, wedges[block[0]].second);
        continue;
      }
      Eigen::ArrayXd prod = Eigen::ArrayXd::Ones(B.cols());
      for (int s : block) {
        prod *= B.row(wedges[s].first).transpose().array() *
                B.row(wedges[s].second).transpose().array();
      }
      term *= prod.sum();
    }
    total += term;
  }
  return total;
}

}  // namespace mlcsbm
