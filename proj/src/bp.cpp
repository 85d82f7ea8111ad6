#include "mlcsbm/bp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mlcsbm/errors.hpp"

namespace mlcsbm {

namespace {

// log cosh(x) without overflow.
double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double sech2(double z) {
  if (std::abs(z) > 20.0) return 0.0;
  const double s = 1.0 / std::cosh(z);
  return s * s;
}

}  // namespace

double f_tilt(double z, double rho) {
  if (std::abs(z) > 20.0 + std::abs(rho)) return z > 0.0 ? rho : -rho;
  if (std::abs(z) >= std::abs(rho)) {
    const double tail = std::log1p(std::exp(-2.0 * std::abs(z + rho))) -
                        std::log1p(std::exp(-2.0 * std::abs(z - rho)));
    return (z > 0.0 ? rho : -rho) + 0.5 * tail;
  }
  return 0.5 * (log_cosh(z + rho) - log_cosh(z - rho));
}

double rho_layer(const ModelParams& params, int layer) {
  if (layer < 0 || layer >= params.m) throw InvalidArgument("layer index out of range");
  const double x = params.lambda[layer] / std::sqrt(params.d[layer]);
  if (!(std::abs(x) < 1.0)) throw InvalidArgument("rho: lambda must be below sqrt(d)");
  return std::atanh(x);
}

double rho_layer_far(const ModelParams& params, int layer) {
  if (layer < 0 || layer >= params.m) throw InvalidArgument("layer index out of range");
  const double x = params.lambda[layer] * std::sqrt(params.d[layer]) / (params.n - params.d[layer]);
  if (!(std::abs(x) < 1.0)) throw InvalidArgument("rho_n: atanh argument must be below 1");
  return std::atanh(x);
}

namespace {

// Index of k -> i given the index of i -> k.
std::vector<int> reverse_ids(const LayerGraph& g) {
  std::vector<int> rev(2 * g.num_edges());
  for (int i = 0; i < g.num_nodes(); ++i) {
    const auto nb = g.neighbors(i);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      rev[g.offset(i) + s] = g.offset(nb[s]) + static_cast<int>(g.neighbor_slot(nb[s], i));
    }
  }
  return rev;
}

void check_shapes(const BPState& st, const Dataset& ds) {
  const int n = ds.params.n;
  const int m = ds.params.m;
  const int p = ds.params.p;
  bool ok = static_cast<int>(st.S_dir.size()) == m && static_cast<int>(st.eta_dir.size()) == m &&
            st.S_node.rows() == n && st.S_node.cols() == m && st.eta_node.size() == n &&
            st.T_node.size() == n && st.tau.size() == p && st.m_fac.size() == p &&
            st.m_prev.size() == p;
  for (int l = 0; ok && l < m; ++l) {
    const auto e = static_cast<Eigen::Index>(2 * ds.layers[l].num_edges());
    ok = st.S_dir[l].size() == e && st.eta_dir[l].size() == e;
  }
  if (!ok) throw InvalidArgument("BP state dimensions do not match the dataset");
}

void guard(const BPState& st) {
  auto bad = [](const Eigen::VectorXd& v) { return !v.allFinite(); };
  bool finite = !bad(st.eta_node) && !bad(st.T_node) && !bad(st.tau) && !bad(st.m_fac) &&
                st.S_node.allFinite();
  for (const auto& v : st.S_dir) finite = finite && !bad(v);
  for (const auto& v : st.eta_dir) finite = finite && !bad(v);
  const std::string where = " at iteration " + std::to_string(st.t);
  if (!finite) throw NumericalError("BP produced non-finite values" + where);
  if (st.tau.size() > 0 && st.tau.minCoeff() <= 0.0) {
    throw NumericalError("BP produced a non-positive tau" + where);
  }
  if (st.eta_node.norm() > 1e8) throw NumericalError("BP diverged: ||eta|| > 1e8" + where);
}

}  // namespace

BPState bp_initial_state(const Dataset& dataset, const BPConfig& config) {
  const int n = dataset.params.n;
  const int m = dataset.params.m;
  const int p = dataset.params.p;
  BPState st;
  st.S_dir.resize(m);
  st.eta_dir.resize(m);
  if (config.init == BPConfig::Init::kZero) {
    for (int l = 0; l < m; ++l) {
      const auto e = static_cast<Eigen::Index>(2 * dataset.layers[l].num_edges());
      st.S_dir[l] = Eigen::VectorXd::Zero(e);
      st.eta_dir[l] = Eigen::VectorXd::Zero(e);
    }
    st.S_node = Eigen::MatrixXd::Zero(n, m);
    st.eta_node = Eigen::VectorXd::Zero(n);
    st.tau = Eigen::VectorXd::Ones(p);
    st.m_fac = st.m_prev = Eigen::VectorXd::Zero(p);
    st.T_node = Eigen::VectorXd::Zero(n);
    return st;
  }

  Stream rng(config.seed, "bp/init");
  auto normals = [&](Eigen::Index size) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = rng.normal(0.0, 0.1);
    return v;
  };
  for (int l = 0; l < m; ++l) {
    const auto e = static_cast<Eigen::Index>(2 * dataset.layers[l].num_edges());
    st.S_dir[l] = normals(e);
    normals(e);  // S^{-1}_{i->j}: not referenced by the updates
  }
  st.S_node.resize(n, m);
  for (int l = 0; l < m; ++l) st.S_node.col(l) = normals(n);
  for (int l = 0; l < m; ++l) normals(n);  // S^{-1}_{i}
  st.m_fac = normals(p);
  st.m_prev = normals(p);
  st.T_node = normals(n);
  const Eigen::VectorXd T_before = normals(n);
  st.tau.resize(p);
  for (int q = 0; q < p; ++q) st.tau(q) = rng.uniform(0.9, 1.3);
  for (int q = 0; q < p; ++q) rng.uniform(0.9, 1.3);  // tau^{-1}

  st.eta_node.resize(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int r = 0; r < m; ++r) s += st.S_node(k, r);
    st.eta_node(k) = T_before(k) + s;
  }
  for (int l = 0; l < m; ++l) {
    const auto& g = dataset.layers[l];
    st.eta_dir[l].resize(st.S_dir[l].size());
    for (int k = 0; k < n; ++k) {
      double others = 0.0;
      for (int r = 0; r < m; ++r) {
        if (r != l) others += st.S_node(k, r);
      }
      for (int s = 0; s < g.degree(k); ++s) {
        const int id = g.offset(k) + s;
        st.eta_dir[l](id) = T_before(k) + others + st.S_dir[l](id);
      }
    }
  }
  return st;
}

BPState bp_step(const BPState& state, const Dataset& dataset, const ModelParams& params) {
  check_shapes(state, dataset);
  const int n = dataset.params.n;
  const int m = dataset.params.m;
  const int p = dataset.params.p;
  const auto& B = dataset.covariates.B;
  const double mu = params.mu;
  const double gamma = params.gamma;

  BPState next;
  next.t = state.t + 1;
  next.S_dir.resize(m);
  next.eta_dir.resize(m);
  next.S_node.resize(n, m);

  for (int l = 0; l < m; ++l) {
    const auto& g = dataset.layers[l];
    const double rho = rho_layer(params, l);
    const double rho_far = rho_layer_far(params, l);
    double global = 0.0;
    for (int k = 0; k < n; ++k) global += f_tilt(state.eta_node(k), rho_far);
    const auto rev = reverse_ids(g);
    next.S_dir[l].resize(state.S_dir[l].size());
    for (int i = 0; i < n; ++i) {
      const auto nb = g.neighbors(i);
      double node_sum = 0.0;
      for (std::size_t s = 0; s < nb.size(); ++s) {
        node_sum += f_tilt(state.eta_dir[l](rev[g.offset(i) + s]), rho);
      }
      next.S_node(i, l) = node_sum - global;
      for (std::size_t sj = 0; sj < nb.size(); ++sj) {
        double sum = 0.0;
        for (std::size_t s = 0; s < nb.size(); ++s) {
          if (s == sj) continue;
          sum += f_tilt(state.eta_dir[l](rev[g.offset(i) + s]), rho);
        }
        next.S_dir[l](g.offset(i) + sj) = sum - global;
      }
    }
  }

  next.eta_node.resize(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int r = 0; r < m; ++r) s += next.S_node(k, r);
    next.eta_node(k) = state.T_node(k) + s;
  }
  for (int l = 0; l < m; ++l) {
    const auto& g = dataset.layers[l];
    next.eta_dir[l].resize(next.S_dir[l].size());
    for (int k = 0; k < n; ++k) {
      double others = 0.0;
      for (int r = 0; r < m; ++r) {
        if (r != l) others += next.S_node(k, r);
      }
      for (int s = 0; s < g.degree(k); ++s) {
        const int id = g.offset(k) + s;
        next.eta_dir[l](id) = state.T_node(k) + others + next.S_dir[l](id);
      }
    }
  }

  Eigen::VectorXd th(n), sh(n);
  for (int j = 0; j < n; ++j) {
    th(j) = std::tanh(state.eta_node(j));
    sh(j) = sech2(state.eta_node(j));
  }
  const RowMatrixXd Bsq = B.array().square().matrix();
  const double sp = std::sqrt(static_cast<double>(p));
  const Eigen::VectorXd b_tanh = B.transpose() * th;   // sum_j B_qj tanh(eta_j)
  const Eigen::VectorXd b_sech = Bsq.transpose() * sh; // sum_j B_qj^2 sech^2(eta_j)

  next.tau = (1.0 + mu - mu / (p * gamma) * b_sech.array()).inverse().matrix();
  const double c = std::sqrt(mu / gamma);
  next.m_fac = (c / next.tau.array() * (b_tanh.array() / sp) -
                mu / (gamma * next.tau.array()) * (b_sech.array() / p) * state.m_prev.array())
                   .matrix();
  next.m_prev = state.m_fac;

  const Eigen::VectorXd inv_tau = next.tau.cwiseInverse();
  next.T_node = (c * (B * next.m_fac).array() / sp -
                 mu / (p * gamma) * (Bsq * inv_tau).array() * th.array())
                    .matrix();
  guard(next);
  return next;
}

BPRun run_bp(const Dataset& dataset, const ModelParams& params, const BPConfig& config) {
  if (config.t_max < 1) throw InvalidArgument("t_max must be at least 1");
  BPRun run;
  run.final_state = bp_initial_state(dataset, config);
  run.eta_norm.push_back(run.final_state.eta_node.norm());
  for (int t = 0; t < config.t_max; ++t) {
    run.final_state = bp_step(run.final_state, dataset, params);
    run.eta_norm.push_back(run.final_state.eta_node.norm());
  }
  return run;
}

CommunityAssignment bp_estimate(const BPState& state) {
  CommunityAssignment out(state.eta_node.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = state.eta_node(i) < 0.0 ? -1 : 1;
  return out;
}

BPTestResult bp_test(const BPRun& run) {
  BPTestResult r;
  r.stat = run.eta_norm.back() / std::max(run.eta_norm.front(), 1e-300);
  r.reject = r.stat > 1.0;
  return r;
}

BPTestResult bp_test(const Dataset& dataset, const ModelParams& params, const BPConfig& config) {
  return bp_test(run_bp(dataset, params, config));
}

}  // namespace mlcsbm
