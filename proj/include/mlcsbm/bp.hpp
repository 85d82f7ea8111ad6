#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mlcsbm/model.hpp"

namespace mlcsbm {

/// f(z; rho) = 1/2 log(cosh(z + rho) / cosh(z - rho)).
double f_tilt(double z, double rho);

/// atanh(lambda / sqrt(d)) for layer `layer` (0-based).
double rho_layer(const ModelParams& params, int layer);
/// atanh(lambda sqrt(d) / (n - d)).
double rho_layer_far(const ModelParams& params, int layer);

/// Iterates of the linearized BP at time t.
///
/// Directed messages of layer l live in flat vectors indexed like the
/// layer's CSR adjacency: entry offset(i) + s belongs to i -> neighbors(i)[s].
/// S_dir holds S_{i->j}, eta_dir holds eta_{k->i} (sender first).
struct BPState {
  int t = 0;
  std::vector<Eigen::VectorXd> S_dir;
  Eigen::MatrixXd S_node;  // n x m
  std::vector<Eigen::VectorXd> eta_dir;
  Eigen::VectorXd eta_node;
  Eigen::VectorXd tau;     // p
  Eigen::VectorXd m_fac;   // m^t
  Eigen::VectorXd m_prev;  // m^{t-1}
  Eigen::VectorXd T_node;  // n

  bool operator==(const BPState&) const = default;
};

struct BPConfig {
  enum class Init { kRandom, kZero };
  int t_max = 50;
  Init init = Init::kRandom;
  std::uint64_t seed = 0;
};

/// Random init: S, m, T at t = 0 and t = -1 ~ N(0, 0.01), tau ~ U(0.9, 1.3);
/// eta^0 follows from the eta update applied to T^{-1} and S^0.
/// Zero init: everything 0 except tau = 1.
BPState bp_initial_state(const Dataset& dataset, const BPConfig& config);

/// One synchronous update t -> t+1. Throws NumericalError on non-finite
/// values, non-positive tau, or ||eta|| > 1e8.
BPState bp_step(const BPState& state, const Dataset& dataset, const ModelParams& params);

struct BPRun {
  std::vector<double> eta_norm;  // ||eta^t||_2 for t = 0..t_max
  BPState final_state;
};

BPRun run_bp(const Dataset& dataset, const ModelParams& params, const BPConfig& config);

/// sign(eta^t), sign(0) = +1.
CommunityAssignment bp_estimate(const BPState& state);

struct BPTestResult {
  bool reject = false;
  double stat = 0.0;
};

/// stat = ||eta^{t_max}|| / ||eta^0||; rejects when stat > 1.
BPTestResult bp_test(const BPRun& run);
BPTestResult bp_test(const Dataset& dataset, const ModelParams& params, const BPConfig& config);

}  // namespace mlcsbm
