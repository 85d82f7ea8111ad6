#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlcsbm/factor_graph.hpp"
#include "mlcsbm/model.hpp"
#include "mlcsbm/saw_recovery.hpp"

namespace mlcsbm {

enum class Method { kBp, kSaw, kCycle };

std::string to_string(Method method);
Method parse_method(std::string_view text);

/// How a grid value t maps to (lambda, mu) given ratios r_1..r_{m+1}.
enum class Parametrization {
  /// lambda_i = sqrt(r_i t), mu = sqrt(r_{m+1} gamma t): effective SNR equals t.
  kEffectiveSnr,
  /// lambda_i = r_i t, mu = r_{m+1} gamma t.
  kLiteral,
};

struct ExperimentConfig {
  int n = 300;
  int p = 450;
  int m = 3;
  std::vector<double> d{3.0, 3.0, 3.0};
  std::vector<double> snr_grid;
  std::vector<double> ratios;  // empty: equal split over m + 1
  Parametrization parametrization = Parametrization::kEffectiveSnr;
  int replicas = 100;
  std::uint64_t seed = 0;
  int threads = 1;

  int t_max = 50;                           // bp
  int k_total = 4;                          // cycle
  double alpha = 0.05;                      // cycle
  WedgeComposition saw_comp;                // saw; empty: one wedge per informative layer
  SawMode saw_mode = SawMode::exact();      // saw
  int pilot_replicas = 10;                  // saw
};

/// count equally spaced points in [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int count);
/// count sorted uniform draws from (lo, hi).
std::vector<double> random_grid(double lo, double hi, int count, std::uint64_t seed);

/// Checks dims, ratios (sum to 1 within 1e-12, non-negative) and counts.
void validate_config(const ExperimentConfig& config);

/// Model parameters at grid value t.
ModelParams point_params(const ExperimentConfig& config, double t);

struct CurvePoint {
  double snr = 0.0;
  Method method = Method::kBp;
  double power = 0.0;  // NaN when the method has no test
  double power_se = 0.0;
  double overlap = 0.0;  // NaN when the method has no estimator
  double overlap_se = 0.0;
  int replicas = 0;
  int failures = 0;
};

/// Replicas per grid point, aggregated in replica order. Replica r at grid
/// index i uses seed derive_seed(seed, "point/<i>/replica", r). Replicas that
/// throw are counted in `failures` and excluded from the aggregates.
std::vector<CurvePoint> run_power_curve(const ExperimentConfig& config, Method method);

/// Header plus one row per point: snr,method,power,power_se,overlap,overlap_se,replicas,failures
std::string curve_csv(const std::vector<CurvePoint>& points);

struct MomentRow {
  WedgeComposition comp;
  int replicas = 0;
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double theoretical_mean = 0.0;
  double theoretical_var = 0.0;
  double z_mean = 0.0;
  double z_var = 0.0;
  bool flagged = false;  // |z| > 4 for either moment
};

/// Monte Carlo moments of Y for each composition against the limiting law
/// under params (Poisson for ell = 0, normal otherwise). The formulas reduce
/// to the null values when lambda and mu vanish. params is used as given,
/// so degenerate values such as d_j = 0 are allowed.
std::vector<MomentRow> run_moment_suite(const ModelParams& params,
                                        const std::vector<WedgeComposition>& comps, int replicas,
                                        std::uint64_t seed, int threads = 1);

/// Header plus one row per composition.
std::string moment_csv(const std::vector<MomentRow>& rows);

}  // namespace mlcsbm
