#include "mlcsbm/cycle_stats.hpp"

#include <cmath>
#include <cstdint>
#include <functional>

#include <boost/math/distributions/normal.hpp>

#include "mlcsbm/errors.hpp"
#include "mlcsbm/factor_moments.hpp"

namespace mlcsbm {

MomentInputs MomentInputs::from(const ModelParams& params) {
  return MomentInputs{params.d, params.lambda, params.mu, params.gamma};
}

namespace {

void check_inputs(const WedgeComposition& comp, const MomentInputs& in) {
  if (in.d.size() != comp.k.size() || in.lambda.size() != comp.k.size()) {
    throw InvalidArgument("composition has " + std::to_string(comp.k.size()) +
                          " layer entries but parameters have " + std::to_string(in.d.size()));
  }
  if (comp.ell < 0) throw InvalidArgument("ell must be non-negative");
  for (int kj : comp.k) {
    if (kj < 0) throw InvalidArgument("wedge counts must be non-negative");
  }
  if (comp.total() < 1) throw InvalidArgument("composition must have at least one wedge");
}

// k! / (ell! prod k_j!) / (2k)
double prefactor(const WedgeComposition& comp) {
  const int k = comp.total();
  double log_c = std::lgamma(k + 1.0) - std::lgamma(comp.ell + 1.0);
  for (int kj : comp.k) log_c -= std::lgamma(kj + 1.0);
  return std::exp(log_c) / (2.0 * k);
}

double layer_product(const WedgeComposition& comp, const std::vector<double>& base) {
  double prod = 1.0;
  for (std::size_t j = 0; j < comp.k.size(); ++j) prod *= std::pow(base[j], comp.k[j]);
  return prod;
}

std::vector<double> signal(const MomentInputs& in) {
  std::vector<double> s(in.d.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = in.lambda[j] * std::sqrt(in.d[j]);
  return s;
}

}  // namespace

double h0_poisson_mean(const WedgeComposition& comp, const MomentInputs& in) {
  check_inputs(comp, in);
  if (comp.ell != 0) throw InvalidArgument("Poisson moments need ell = 0");
  return prefactor(comp) * layer_product(comp, in.d);
}

double h0_poisson_mean(const WedgeComposition& comp, const ModelParams& params) {
  return h0_poisson_mean(comp, MomentInputs::from(params));
}

double h1_poisson_mean(const WedgeComposition& comp, const MomentInputs& in) {
  return h0_poisson_mean(comp, in) + prefactor(comp) * layer_product(comp, signal(in));
}

double h1_poisson_mean(const WedgeComposition& comp, const ModelParams& params) {
  return h1_poisson_mean(comp, MomentInputs::from(params));
}

GaussianMoments gaussian_moments(const WedgeComposition& comp, const MomentInputs& in,
                                 Hypothesis hypothesis) {
  check_inputs(comp, in);
  if (comp.ell < 1) throw InvalidArgument("Gaussian moments need ell >= 1");
  if (!(in.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  const double c = prefactor(comp);
  GaussianMoments out;
  out.variance = c * layer_product(comp, in.d) / std::pow(in.gamma, comp.ell);
  if (hypothesis == Hypothesis::kAlternative) {
    out.mean = c * layer_product(comp, signal(in)) * std::pow(in.mu / in.gamma, comp.ell);
  }
  return out;
}

GaussianMoments gaussian_moments(const WedgeComposition& comp, const ModelParams& params,
                                 Hypothesis hypothesis) {
  return gaussian_moments(comp, MomentInputs::from(params), hypothesis);
}

double delta_coeff(const WedgeComposition& comp, const MomentInputs& in) {
  check_inputs(comp, in);
  double prod = 1.0;
  for (std::size_t j = 0; j < comp.k.size(); ++j) {
    if (comp.k[j] == 0) continue;
    if (!(in.d[j] > 0.0)) throw InvalidArgument("delta needs d_j > 0 on used layers");
    prod *= std::pow(in.lambda[j] / std::sqrt(in.d[j]), comp.k[j]);
  }
  return prod;
}

double delta_coeff(const WedgeComposition& comp, const ModelParams& params) {
  return delta_coeff(comp, MomentInputs::from(params));
}

bool is_cycle_composition(const WedgeComposition& comp) {
  if (comp.total() < 2) return false;
  if (comp.total() == 2) {
    for (int kj : comp.k) {
      if (kj == 2) return false;
    }
  }
  return true;
}

double cycle_statistic(const Dataset& dataset, const WedgeComposition& comp,
                       const EnumerationCaps& caps) {
  validate_composition(comp, dataset.params.m);
  const int k = comp.total();
  if (k < 2) throw InvalidArgument("cycle statistic needs at least two wedges");
  if (k > caps.max_cycle_total || comp.ell > caps.max_cycle_ell) {
    throw CapExceeded("composition " + comp.to_string() + " exceeds the cycle cap (total <= " +
                      std::to_string(caps.max_cycle_total) + ", ell <= " +
                      std::to_string(caps.max_cycle_ell) + "); enumeration costs O(n^" +
                      std::to_string(k) + ")");
  }
  if (!is_cycle_composition(comp)) return 0.0;

  if (comp.ell == 0) {
    std::uint64_t reps = 0;
    detail::visit_cycle_representations(dataset, comp, detail::CycleAnchor::kMinNode,
                                         [&](std::span<const int>, std::span<const int>) { ++reps; });
    return static_cast<double>(reps / 2);
  }

  const CovariateGram gram(dataset.covariates.B, comp.ell >= 2);
  std::vector<NodePair> pairs;
  pairs.reserve(comp.ell);
  double sum = 0.0;
  detail::visit_cycle_representations(
      dataset, comp, detail::CycleAnchor::kCovariateLast,
      [&](std::span<const int> nodes, std::span<const int> types) {
        pairs.clear();
        for (int s = 0; s < k; ++s) {
          if (types[s] == kCovariateWedge) pairs.emplace_back(nodes[s], nodes[(s + 1) % k]);
        }
        sum += distinct_factor_sum(gram, pairs);
      });
  return sum / (2.0 * comp.ell) / std::pow(static_cast<double>(dataset.params.n), comp.ell);
}

CycleStatReport cycle_stat_report(const Dataset& dataset, const WedgeComposition& comp,
                                  const ModelParams& params) {
  CycleStatReport r;
  r.comp = comp;
  r.y = cycle_statistic(dataset, comp);
  r.poisson = comp.ell == 0;
  if (r.poisson) {
    r.h0_mean = h0_poisson_mean(comp, params);
    r.h0_variance = r.h0_mean;
    r.h1_mean = h1_poisson_mean(comp, params);
    r.score = r.h0_mean > 0.0 ? (r.y - r.h0_mean) / std::sqrt(r.h0_mean) : 0.0;
  } else {
    r.h0_variance = gaussian_moments(comp, params, Hypothesis::kNull).variance;
    r.h1_mean = gaussian_moments(comp, params, Hypothesis::kAlternative).mean;
    r.score = r.h0_variance > 0.0 ? r.y / std::sqrt(r.h0_variance) : 0.0;
  }
  return r;
}

WedgeComposition select_composition(const ModelParams& params, int k_total) {
  if (k_total < 1) throw InvalidArgument("k_total must be positive");
  const double snr = effective_snr(params);
  if (!(snr > 0.0)) throw InvalidArgument("composition selection needs a positive effective SNR");
  WedgeComposition comp;
  int used = 0;
  for (double l : params.lambda) {
    const int kj = static_cast<int>(std::floor(l * l * k_total / snr + 1e-9));
    comp.k.push_back(kj);
    used += kj;
  }
  comp.ell = k_total - used;
  return comp;
}

DetectionResult detection_test(const Dataset& dataset, const ModelParams& params_alt,
                               int k_total, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (params_alt.m != dataset.params.m) {
    throw InvalidArgument("alternative parameters have a different number of layers");
  }
  DetectionResult res;
  res.comp = select_composition(params_alt, k_total);
  if (!is_cycle_composition(res.comp)) {
    throw InvalidArgument("selected composition " + res.comp.to_string() + " carries no cycles");
  }
  res.y = cycle_statistic(dataset, res.comp);
  if (res.comp.ell == 0) {
    const double lam = h0_poisson_mean(res.comp, params_alt);
    res.score = (res.y - lam) / std::sqrt(lam);
  } else {
    const double var = gaussian_moments(res.comp, params_alt, Hypothesis::kNull).variance;
    res.score = res.y / std::sqrt(var);
  }
  res.threshold = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha);
  res.reject = res.score > res.threshold;
  return res;
}

std::vector<WedgeComposition> cycle_compositions(int m, int max_total) {
  std::vector<WedgeComposition> out;
  std::vector<int> parts(m + 1, 0);
  for (int r = 2; r <= max_total; ++r) {
    std::function<void(int, int)> fill = [&](int slot, int left) {
      if (slot == m) {
        parts[m] = left;
        WedgeComposition c{std::vector<int>(parts.begin(), parts.begin() + m), left};
        if (is_cycle_composition(c)) out.push_back(std::move(c));
        return;
      }
      for (int v = left; v >= 0; --v) {
        parts[slot] = v;
        fill(slot + 1, left - v);
      }
    };
    fill(0, r);
  }
  return out;
}

double truncated_log_lr(const Dataset& dataset, const ModelParams& params, int K,
                        const EnumerationCaps& caps) {
  if (params.m != dataset.params.m) throw InvalidArgument("parameter/dataset layer mismatch");
  double total = 0.0;
  for (const auto& comp : cycle_compositions(params.m, K)) {
    if (comp.ell == 0) {
      const double delta = delta_coeff(comp, params);
      if (delta == 0.0) continue;
      const double y = cycle_statistic(dataset, comp, caps);
      total += y * std::log1p(delta) - h0_poisson_mean(comp, params) * delta;
    } else {
      const auto g = gaussian_moments(comp, params, Hypothesis::kAlternative);
      if (g.mean == 0.0) continue;
      const double y = cycle_statistic(dataset, comp, caps);
      total += (2.0 * g.mean * y - g.mean * g.mean) / (2.0 * g.variance);
    }
  }
  return total;
}

}  // namespace mlcsbm
