#include "mlcsbm/saw_recovery.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "mlcsbm/errors.hpp"
#include "mlcsbm/factor_moments.hpp"
#include "mlcsbm/parallel.hpp"

namespace mlcsbm {

double normalize_layer_entry(const ModelParams& params, int layer, int a_present) {
  if (layer < 0 || layer >= params.m) throw InvalidArgument("layer index out of range");
  if (a_present != 0 && a_present != 1) throw InvalidArgument("edge indicator must be 0 or 1");
  const double a = params.a[layer];
  const double b = params.b[layer];
  if (a == b) {
    throw InvalidArgument("layer " + std::to_string(layer + 1) +
                          " has lambda = 0; its wedges cannot be normalized");
  }
  const double n = params.n;
  return 2.0 * n / (a - b) * (a_present - (a + b) / (2.0 * n));
}

double normalize_covariate_wedge(const ModelParams& params, const RowMatrixXd& B, int i1, int i2,
                                 int j) {
  if (params.mu == 0.0) throw InvalidArgument("covariate wedges need mu > 0");
  if (i1 == i2) throw InvalidArgument("covariate wedge endpoints must differ");
  return params.n / params.mu * B(i1, j) * B(i2, j);
}

double path_weight(const SelfAvoidingWalk& walk, const Dataset& dataset, const ModelParams& params) {
  const auto nodes = walk.nodes();
  const int k = static_cast<int>(walk.wedge_types.size());
  double w = 1.0;
  int slot = 0;
  for (int s = 0; s < k; ++s) {
    const int u = nodes[s];
    const int v = nodes[s + 1];
    const int t = walk.wedge_types[s];
    if (t == kCovariateWedge) {
      if (slot >= static_cast<int>(walk.b_factors.size())) {
        throw InvalidArgument("walk has no covariate index for a covariate wedge");
      }
      w *= normalize_covariate_wedge(params, dataset.covariates.B, u, v, walk.b_factors[slot++]);
    } else {
      w *= normalize_layer_entry(params, t, dataset.layers[t].has_edge(u, v) ? 1 : 0);
    }
  }
  return w;
}

std::string SawMode::to_string() const {
  return kind == Kind::kExact ? "exact" : "sampled:" + std::to_string(n_samples);
}

namespace {

void check_recovery_comp(const ModelParams& params, const WedgeComposition& comp) {
  validate_composition(comp, params.m);
  if (comp.total() < 1) throw InvalidArgument("composition needs at least one wedge");
  for (int j = 0; j < params.m; ++j) {
    if (comp.k[j] > 0 && params.a[j] == params.b[j]) {
      throw InvalidArgument("layer " + std::to_string(j + 1) +
                            " has lambda = 0 and must carry no wedges");
    }
  }
  if (comp.ell > 0 && params.mu == 0.0) {
    throw InvalidArgument("covariate wedges need mu > 0");
  }
}

double falling(double n, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= n - i;
  return out;
}

// Sum of path weights over W(i1, i2) with covariate indices summed out.
struct ExactPairSum {
  const Dataset& ds;
  const std::vector<Eigen::MatrixXd>& ahat;
  const CovariateGram* gram;
  double b_scale;
  std::vector<std::vector<int>> orders;
  int k;

  double operator()(int i1, int i2) const {
    std::vector<int> nodes{i1};
    std::vector<char> used(ds.params.n, 0);
    used[i1] = used[i2] = 1;
    std::vector<NodePair> pairs;
    double total = 0.0;
    for (const auto& order : orders) {
      std::function<void(int, double)> walk = [&](int s, double w) {
        const int cur = nodes.back();
        const int t = order[s];
        if (s == k - 1) {
          nodes.push_back(i2);
          double weight = w;
          if (t != kCovariateWedge) weight *= ahat[t](cur, i2);
          if (gram != nullptr) {
            pairs.clear();
            for (int r = 0; r < k; ++r) {
              if (order[r] == kCovariateWedge) pairs.emplace_back(nodes[r], nodes[r + 1]);
            }
            weight *= b_scale * distinct_factor_sum(*gram, pairs);
          }
          total += weight;
          nodes.pop_back();
          return;
        }
        for (int v = 0; v < ds.params.n; ++v) {
          if (used[v]) continue;
          const double step = t == kCovariateWedge ? 1.0 : ahat[t](cur, v);
          used[v] = 1;
          nodes.push_back(v);
          walk(s + 1, w * step);
          nodes.pop_back();
          used[v] = 0;
        }
      };
      walk(0, 1.0);
    }
    return total;
  }
};

}  // namespace

SigmaHatMatrix estimate_sigma_matrix(const Dataset& dataset, const WedgeComposition& comp,
                                     const SawMode& mode, std::uint64_t seed, int threads,
                                     const EnumerationCaps& caps) {
  const auto& params = dataset.params;
  check_recovery_comp(params, comp);
  const int n = params.n;
  const int k = comp.total();
  SigmaHatMatrix out;
  out.comp = comp;
  out.values = Eigen::MatrixXd::Zero(n, n);
  out.coverage = CoverageMatrix::Zero(n, n);
  if (n < 2) return out;
  const std::uint64_t walks = count_saws(dataset, 0, 1, comp, caps);
  if (walks == 0) return out;

  if (mode.kind == SawMode::Kind::kExact) {
    if (k > caps.max_saw_total) {
      throw CapExceeded("exact estimation of " + comp.to_string() + " exceeds the walk cap (total <= " +
                        std::to_string(caps.max_saw_total) + "); use sampled mode");
    }
    const double cost = 0.5 * n * (n - 1.0) * falling(n - 2.0, k - 1) *
                        static_cast<double>(count_wedge_orderings(comp));
    if (cost > kExactWalkBudget) {
      throw CapExceeded("exact estimation of " + comp.to_string() + " at n = " + std::to_string(n) +
                        " visits " + std::to_string(cost) + " walks; use sampled mode");
    }
    std::vector<Eigen::MatrixXd> ahat(params.m);
    for (int r = 0; r < params.m; ++r) {
      if (comp.k[r] == 0) continue;
      const double w0 = normalize_layer_entry(params, r, 0);
      const double w1 = normalize_layer_entry(params, r, 1);
      ahat[r] = Eigen::MatrixXd::Constant(n, n, w0);
      for (const auto& e : dataset.layers[r].edges()) ahat[r](e.u, e.v) = ahat[r](e.v, e.u) = w1;
    }
    std::optional<CovariateGram> gram;
    if (comp.ell > 0) gram.emplace(dataset.covariates.B, comp.ell == 1);
    const ExactPairSum pair_sum{dataset,
                                ahat,
                                gram ? &*gram : nullptr,
                                std::pow(n / params.mu, comp.ell),
                                wedge_orderings(comp),
                                k};
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
      const int i1 = static_cast<int>(row);
      for (int i2 = i1 + 1; i2 < n; ++i2) {
        out.values(i1, i2) = pair_sum(i1, i2) / static_cast<double>(walks);
        out.coverage(i1, i2) = walks;
      }
    });
  } else {
    if (mode.n_samples < 1) throw InvalidArgument("sampled mode needs at least one sample");
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t row) {
      const int i1 = static_cast<int>(row);
      for (int i2 = i1 + 1; i2 < n; ++i2) {
        Stream rng(derive_seed(seed, "saw/pair", static_cast<std::uint64_t>(i1) * n + i2));
        double sum = 0.0;
        for (const auto& w : sample_saws(dataset, i1, i2, comp, mode.n_samples, rng)) {
          sum += path_weight(w, dataset, params);
        }
        out.values(i1, i2) = sum / mode.n_samples;
        out.coverage(i1, i2) = static_cast<std::uint64_t>(mode.n_samples);
      }
    });
  }
  out.values.triangularView<Eigen::StrictlyLower>() = out.values.transpose();
  out.coverage.triangularView<Eigen::StrictlyLower>() = out.coverage.transpose();
  return out;
}

double pilot_delta(const Eigen::MatrixXd& sigma_hat, const CommunityAssignment& sigma) {
  const double norm = sigma_hat.norm();
  if (norm == 0.0) return 0.0;
  const Eigen::VectorXd s = sigma.cast<double>();
  return s.dot(sigma_hat * s) / (static_cast<double>(sigma.size()) * norm);
}

namespace {

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& y) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (y + y.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in PSD projection");
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

struct DykstraOutcome {
  Eigen::MatrixXd psi;
  int iterations = 0;
};

DykstraOutcome dykstra(const Eigen::MatrixXd& S, double target, const PsdOptions& opt) {
  const Eigen::Index n = S.rows();
  const double s_sq = S.squaredNorm();
  const double scale = std::max(1.0, target);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd p_half = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd p_psd = Eigen::MatrixXd::Zero(n, n);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    // Affine diagonal set: no correction term needed.
    x.diagonal().setOnes();
    Eigen::MatrixXd y = x + p_half;
    const double gap = target - (S.array() * y.array()).sum();
    Eigen::MatrixXd h = gap > 0.0 ? Eigen::MatrixXd(y + (gap / s_sq) * S) : y;
    p_half = y - h;
    y = h + p_psd;
    Eigen::MatrixXd next = project_psd(y);
    p_psd = y - next;

    const double change = (next - x).norm();
    x = std::move(next);
    const double diag_err = (x.diagonal().array() - 1.0).abs().maxCoeff();
    const double viol = std::max(0.0, target - (S.array() * x.array()).sum()) / scale;
    if (diag_err < opt.tolerance && viol < opt.tolerance &&
        change < opt.tolerance * std::max(1.0, x.norm())) {
      ++it;
      break;
    }
  }
  return {x, it};
}

Eigen::MatrixXd unit_diagonal(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd d = x.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd out = d.asDiagonal() * x * d.asDiagonal();
  out = 0.5 * (out + out.transpose());
  out.diagonal().setOnes();
  return out;
}

}  // namespace

PsdCorrelation fit_psd_correlation(const Eigen::MatrixXd& sigma_hat, double delta,
                                   const PsdOptions& options) {
  if (sigma_hat.rows() != sigma_hat.cols() || sigma_hat.rows() == 0) {
    throw InvalidArgument("Σ̂ must be a non-empty square matrix");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be positive");
  if (!sigma_hat.allFinite()) throw InvalidArgument("Σ̂ has non-finite entries");
  const Eigen::MatrixXd S = 0.5 * (sigma_hat + sigma_hat.transpose());
  const auto n = static_cast<double>(S.rows());
  const double target = delta * n * S.norm();

  PsdCorrelation out;
  out.delta_used = delta;
  if (S.trace() >= target) {
    out.values = Eigen::MatrixXd::Identity(S.rows(), S.cols());
    out.achieved_inner = S.trace();
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  const double lam_max = es.eigenvalues().maxCoeff();
  if (target > n * lam_max * (1.0 + 1e-12)) {
    out.status = PsdStatus::kInfeasible;
    out.message = "infeasible: delta n ||Σ̂||_F = " + std::to_string(target) +
                  " exceeds n lambda_max(Σ̂) = " + std::to_string(n * lam_max);
    out.values = Eigen::MatrixXd::Identity(S.rows(), S.cols());
    out.achieved_inner = S.trace();
    return out;
  }

  const double tol = 1e-7 * std::max(1.0, target);
  double goal = target;
  for (int attempt = 0; attempt < 3; ++attempt) {
    auto run = dykstra(S, goal, options);
    out.iterations += run.iterations;
    Eigen::MatrixXd psi = unit_diagonal(run.psi);
    const double inner = (S.array() * psi.array()).sum();
    if (inner >= target - tol) {
      out.values = std::move(psi);
      out.achieved_inner = inner;
      return out;
    }
    goal = goal + (target - inner) + 1e-9 * std::max(1.0, target);
  }
  out.status = PsdStatus::kInfeasible;
  out.message = "no feasible point found after " + std::to_string(out.iterations) +
                " alternating-projection sweeps; delta is likely too large";
  out.values = Eigen::MatrixXd::Identity(S.rows(), S.cols());
  out.achieved_inner = S.trace();
  return out;
}

CommunityAssignment gaussian_rounding(const Eigen::MatrixXd& psi, Stream& rng) {
  const Eigen::Index n = psi.rows();
  if (psi.cols() != n) throw InvalidArgument("Ψ must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(psi);
  if (es.info() != Eigen::Success) {
    es.compute(psi + 1e-10 * Eigen::MatrixXd::Identity(n, n));
    if (es.info() != Eigen::Success) throw NumericalError("factorization of Ψ failed");
  }
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = rng.normal();
  const Eigen::VectorXd z =
      es.eigenvectors() * (es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * g);
  CommunityAssignment out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = z(i) < 0.0 ? -1 : 1;
  return out;
}

double overlap(const CommunityAssignment& sigma_hat, const CommunityAssignment& sigma) {
  if (sigma_hat.size() != sigma.size()) throw InvalidArgument("label vectors differ in length");
  if (sigma.size() == 0) throw InvalidArgument("empty label vectors");
  return std::abs(static_cast<double>(sigma_hat.dot(sigma))) / static_cast<double>(sigma.size());
}

RecoveryResult weak_recovery_pipeline(const Dataset& dataset, const WedgeComposition& comp,
                                      double delta, const SawMode& mode, std::uint64_t seed,
                                      int threads) {
  const auto sigma_hat = estimate_sigma_matrix(dataset, comp, mode, derive_seed(seed, "saw/sigma"), threads);
  const auto psi = fit_psd_correlation(sigma_hat.values, delta);
  if (psi.status != PsdStatus::kOptimal) throw NumericalError(psi.message);
  Stream rng(seed, "saw/rounding");
  RecoveryResult r;
  r.sigma_hat = gaussian_rounding(psi.values, rng);
  if (dataset.sigma.size() == dataset.params.n) r.overlap = overlap(r.sigma_hat, dataset.sigma);
  r.delta_used = psi.delta_used;
  r.comp = comp;
  r.mode = mode.to_string();
  r.iterations = psi.iterations;
  r.walks = sigma_hat.coverage.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().sum();
  return r;
}

}  // namespace mlcsbm
