#pragma once

#include <span>
#include <vector>

#include "mlcsbm/factor_graph.hpp"
#include "mlcsbm/model.hpp"

namespace mlcsbm {

/// The parameter values the limiting moments depend on. Built from
/// ModelParams; also constructible directly so formulas can be evaluated at
/// parameter values the sampler rejects (e.g. d_j = 0).
struct MomentInputs {
  std::vector<double> d;
  std::vector<double> lambda;
  double mu = 0.0;
  double gamma = 1.0;

  static MomentInputs from(const ModelParams& params);
};

/// Null Poisson mean of Y_{k;0}: (1/2k) k!/prod k_j! prod d_j^{k_j}.
double h0_poisson_mean(const WedgeComposition& comp, const MomentInputs& in);
double h0_poisson_mean(const WedgeComposition& comp, const ModelParams& params);

/// Alternative Poisson mean: adds (1/2k) k!/prod k_j! prod (lambda_j sqrt(d_j))^{k_j}.
double h1_poisson_mean(const WedgeComposition& comp, const MomentInputs& in);
double h1_poisson_mean(const WedgeComposition& comp, const ModelParams& params);

enum class Hypothesis { kNull, kAlternative };

struct GaussianMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Limiting normal law of Y_{k;ell} for ell >= 1. The variance
/// (1/(2k gamma^ell)) k!/(ell! prod k_j!) prod d_j^{k_j} is shared by both
/// hypotheses; the alternative mean is
/// (1/2k) k!/(ell! prod k_j!) prod (lambda_j sqrt(d_j))^{k_j} (mu/gamma)^ell.
GaussianMoments gaussian_moments(const WedgeComposition& comp, const MomentInputs& in,
                                 Hypothesis hypothesis);
GaussianMoments gaussian_moments(const WedgeComposition& comp, const ModelParams& params,
                                 Hypothesis hypothesis);

/// prod_j ((a_j - b_j)/(a_j + b_j))^{k_j} = prod_j (lambda_j / sqrt(d_j))^{k_j}.
double delta_coeff(const WedgeComposition& comp, const MomentInputs& in);
double delta_coeff(const WedgeComposition& comp, const ModelParams& params);

/// Whether cycles of this composition can exist in the factor graph: at
/// least two wedges, and two wedges on one node pair may not share a layer.
bool is_cycle_composition(const WedgeComposition& comp);

/// Y_{k;ell} = n^-ell * sum over cycles of (layer edge indicators) x
/// (covariate entries on both legs of every covariate wedge), with
/// pairwise-distinct covariate indices. Exact.
double cycle_statistic(const Dataset& dataset, const WedgeComposition& comp,
                       const EnumerationCaps& caps = {});

struct CycleStatReport {
  WedgeComposition comp;
  double y = 0.0;
  bool poisson = true;       // ell == 0
  double h0_mean = 0.0;      // Poisson mean, or 0 for the normal branch
  double h0_variance = 0.0;  // Poisson mean, or sigma^2
  double h1_mean = 0.0;      // mean under the parameters supplied
  double score = 0.0;        // standardized under H0
};

/// Observed statistic with its limiting moments under params.
CycleStatReport cycle_stat_report(const Dataset& dataset, const WedgeComposition& comp,
                                  const ModelParams& params);

/// floor(lambda_j^2 k / snr) wedges per layer, the rest covariate wedges.
WedgeComposition select_composition(const ModelParams& params, int k_total);

struct DetectionResult {
  bool reject = false;
  double score = 0.0;
  double threshold = 0.0;
  WedgeComposition comp;
  double y = 0.0;
};

/// One-sided test of the null model against params_alt at level alpha.
DetectionResult detection_test(const Dataset& dataset, const ModelParams& params_alt,
                               int k_total, double alpha);

/// Compositions with total wedges in [2, max_total] that carry cycles.
std::vector<WedgeComposition> cycle_compositions(int m, int max_total);

/// Truncated expansion of log dQ/dP over compositions of total <= K:
/// sum Y log(1+delta) - lambda_c delta over ell = 0 compositions plus
/// (2 mu_c Y - mu_c^2) / (2 sigma_c^2) over ell >= 1 compositions.
/// Compositions whose coefficient vanishes are skipped without computing Y.
double truncated_log_lr(const Dataset& dataset, const ModelParams& params, int K,
                        const EnumerationCaps& caps = {});

}  // namespace mlcsbm
