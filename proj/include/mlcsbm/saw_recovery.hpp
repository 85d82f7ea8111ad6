#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "mlcsbm/factor_graph.hpp"
#include "mlcsbm/model.hpp"
#include "mlcsbm/rng.hpp"

namespace mlcsbm {

/// Â = (2n/(a-b)) (A - (a+b)/(2n)) for layer `layer` (0-based). Throws when a == b.
double normalize_layer_entry(const ModelParams& params, int layer, int a_present);

/// B̂^j = (n/mu) B(i1, j) B(i2, j). Throws when mu == 0 or i1 == i2.
double normalize_covariate_wedge(const ModelParams& params, const RowMatrixXd& B, int i1, int i2,
                                 int j);

/// Product of normalized wedge weights along the walk. Walks with implicit
/// covariate indices are rejected.
double path_weight(const SelfAvoidingWalk& walk, const Dataset& dataset, const ModelParams& params);

struct SawMode {
  enum class Kind { kExact, kSampled };
  Kind kind = Kind::kExact;
  int n_samples = 0;

  static SawMode exact() { return {}; }
  static SawMode sampled(int n) { return {Kind::kSampled, n}; }
  std::string to_string() const;
};

using CoverageMatrix = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct SigmaHatMatrix {
  Eigen::MatrixXd values;
  WedgeComposition comp;
  CoverageMatrix coverage;
};

/// Largest n^2 (n-2)_{k-1} an exact estimate may touch.
inline constexpr double kExactWalkBudget = 2e9;

/// Σ̂(i1, i2) = mean of path_weight over W(i1, i2, comp), exactly or over
/// uniform samples drawn from per-pair substreams of `seed`. Covariate
/// indices are summed out in exact mode. Diagonal and empty-W entries are 0.
SigmaHatMatrix estimate_sigma_matrix(const Dataset& dataset, const WedgeComposition& comp,
                                     const SawMode& mode, std::uint64_t seed, int threads = 1,
                                     const EnumerationCaps& caps = {});

/// <Σ̂, σσᵀ> / (n ‖Σ̂‖_F); 0 when Σ̂ vanishes.
double pilot_delta(const Eigen::MatrixXd& sigma_hat, const CommunityAssignment& sigma);

struct PsdOptions {
  int max_iterations = 20000;
  double tolerance = 1e-10;
};

enum class PsdStatus { kOptimal, kInfeasible };

struct PsdCorrelation {
  Eigen::MatrixXd values;
  double achieved_inner = 0.0;
  double delta_used = 0.0;
  int iterations = 0;
  PsdStatus status = PsdStatus::kOptimal;
  std::string message;
};

/// minimize ‖Ψ‖_F  s.t.  diag(Ψ) = 1,  <Σ̂, Ψ> >= δ n ‖Σ̂‖_F,  Ψ ⪰ 0.
///
/// The minimizer is the projection of 0 onto the intersection of the three
/// sets, computed by Dykstra's alternating projections and polished by a
/// diagonal rescaling. Infeasible programs come back with kInfeasible.
PsdCorrelation fit_psd_correlation(const Eigen::MatrixXd& sigma_hat, double delta,
                                   const PsdOptions& options = {});

/// sign(Z) for Z ~ N(0, Ψ), sign(0) = +1.
CommunityAssignment gaussian_rounding(const Eigen::MatrixXd& psi, Stream& rng);

/// |<σ̂, σ>| / n
double overlap(const CommunityAssignment& sigma_hat, const CommunityAssignment& sigma);

struct RecoveryResult {
  CommunityAssignment sigma_hat;
  std::optional<double> overlap;
  double delta_used = 0.0;
  WedgeComposition comp;
  std::string mode;
  int iterations = 0;
  std::uint64_t walks = 0;
};

/// Σ̂ -> Ψ̂ -> rounding. Overlap is filled in when the dataset carries σ.
/// Throws NumericalError when the program is infeasible.
RecoveryResult weak_recovery_pipeline(const Dataset& dataset, const WedgeComposition& comp,
                                      double delta, const SawMode& mode, std::uint64_t seed,
                                      int threads = 1);

}  // namespace mlcsbm
