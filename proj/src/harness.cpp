#include "mlcsbm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "mlcsbm/bp.hpp"
#include "mlcsbm/cycle_stats.hpp"
#include "mlcsbm/errors.hpp"
#include "mlcsbm/format.hpp"
#include "mlcsbm/parallel.hpp"

namespace mlcsbm {

std::string to_string(Method method) {
  switch (method) {
    case Method::kBp: return "bp";
    case Method::kSaw: return "saw";
    case Method::kCycle: return "cycle";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  if (text == "bp") return Method::kBp;
  if (text == "saw") return Method::kSaw;
  if (text == "cycle") return Method::kCycle;
  throw InvalidArgument("unknown method '" + std::string(text) + "' (expected bp, saw or cycle)");
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) throw InvalidArgument("grid needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
  g.back() = hi;
  return g;
}

std::vector<double> random_grid(double lo, double hi, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("grid needs at least one point");
  Stream rng(seed, "grid");
  std::vector<double> g(count);
  for (auto& x : g) x = lo + (hi - lo) * rng.uniform_pos();
  std::sort(g.begin(), g.end());
  return g;
}

namespace {

std::vector<double> effective_ratios(const ExperimentConfig& c) {
  if (!c.ratios.empty()) return c.ratios;
  return std::vector<double>(c.m + 1, 1.0 / (c.m + 1));
}

}  // namespace

void validate_config(const ExperimentConfig& c) {
  if (c.m < 1) throw InvalidArgument("m must be at least 1");
  if (static_cast<int>(c.d.size()) != c.m) throw InvalidArgument("--d needs one value per layer");
  if (c.snr_grid.empty()) throw InvalidArgument("the SNR grid is empty");
  if (c.replicas < 1) throw InvalidArgument("replicas must be at least 1");
  const auto r = effective_ratios(c);
  if (static_cast<int>(r.size()) != c.m + 1) throw InvalidArgument("--ratios needs m + 1 values");
  double sum = 0.0;
  for (double x : r) {
    if (!(x >= 0.0)) throw InvalidArgument("ratios must be non-negative");
    sum += x;
  }
  if (c.ratios.empty() ? std::abs(sum - 1.0) > 1e-9 : std::abs(sum - 1.0) > 1e-12) {
    throw InvalidArgument("ratios must sum to 1");
  }
  for (double t : c.snr_grid) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("grid values must be non-negative");
  }
  if (c.t_max < 1) throw InvalidArgument("t_max must be at least 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
}

ModelParams point_params(const ExperimentConfig& c, double t) {
  const auto r = effective_ratios(c);
  const double gamma = static_cast<double>(c.n) / c.p;
  std::vector<double> lambda(c.m);
  double mu = 0.0;
  if (c.parametrization == Parametrization::kEffectiveSnr) {
    for (int i = 0; i < c.m; ++i) lambda[i] = std::sqrt(r[i] * t);
    mu = std::sqrt(r[c.m] * gamma * t);
  } else {
    for (int i = 0; i < c.m; ++i) lambda[i] = r[i] * t;
    mu = r[c.m] * gamma * t;
  }
  return build_params(lambda, mu, c.d, c.n, c.p);
}

namespace {

struct ReplicaOutcome {
  bool ok = false;
  double reject = 0.0;
  double overlap = 0.0;
};

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mean = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1) / v.size());
}

double saw_delta(const ExperimentConfig& c, const ModelParams& params,
                 const WedgeComposition& comp, std::size_t point) {
  double sum = 0.0;
  const std::string label = "point/" + std::to_string(point) + "/pilot";
  for (int r = 0; r < c.pilot_replicas; ++r) {
    const std::uint64_t seed = derive_seed(c.seed, label, r);
    const Dataset ds = sample_dataset(params, seed);
    const auto sh = estimate_sigma_matrix(ds, comp, c.saw_mode, derive_seed(seed, "saw/sigma"));
    sum += pilot_delta(sh.values, ds.sigma);
  }
  const double delta = 0.5 * sum / std::max(1, c.pilot_replicas);
  return std::max(delta, 1e-6);
}

}  // namespace

std::vector<CurvePoint> run_power_curve(const ExperimentConfig& c, Method method) {
  validate_config(c);
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < c.snr_grid.size(); ++i) {
    const double t = c.snr_grid[i];
    CurvePoint pt;
    pt.snr = t;
    pt.method = method;
    pt.replicas = c.replicas;

    std::optional<ModelParams> params;
    std::optional<WedgeComposition> comp;
    double delta = 0.0;
    try {
      params = point_params(c, t);
      if (method == Method::kSaw) {
        comp = c.saw_comp.k.empty() ? select_composition(*params, 2) : c.saw_comp;
        delta = saw_delta(c, *params, *comp, i);
      }
    } catch (const std::exception&) {
      params.reset();
    }

    std::vector<ReplicaOutcome> results(c.replicas);
    if (params) {
      const std::string label = "point/" + std::to_string(i) + "/replica";
      parallel_for(static_cast<std::size_t>(c.replicas), c.threads, [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(c.seed, label, r);
        ReplicaOutcome& o = results[r];
        try {
          const Dataset ds = sample_dataset(*params, seed);
          switch (method) {
            case Method::kBp: {
              BPConfig cfg;
              cfg.t_max = c.t_max;
              cfg.seed = derive_seed(seed, "bp");
              const auto run = run_bp(ds, *params, cfg);
              o.reject = bp_test(run).reject ? 1.0 : 0.0;
              o.overlap = overlap(bp_estimate(run.final_state), ds.sigma);
              break;
            }
            case Method::kCycle:
              o.reject = detection_test(ds, *params, c.k_total, c.alpha).reject ? 1.0 : 0.0;
              break;
            case Method::kSaw:
              o.overlap = *weak_recovery_pipeline(ds, *comp, delta, c.saw_mode, seed).overlap;
              break;
          }
          o.ok = true;
        } catch (const std::exception&) {
          o.ok = false;
        }
      });
    }

    std::vector<double> rejects, overlaps;
    for (const auto& o : results) {
      if (!o.ok) {
        ++pt.failures;
        continue;
      }
      rejects.push_back(o.reject);
      overlaps.push_back(o.overlap);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (method == Method::kSaw) {
      pt.power = pt.power_se = nan;
    } else {
      pt.power = mean_of(rejects);
      pt.power_se = rejects.empty() ? nan : std::sqrt(pt.power * (1.0 - pt.power) / rejects.size());
    }
    if (method == Method::kCycle) {
      pt.overlap = pt.overlap_se = nan;
    } else {
      pt.overlap = mean_of(overlaps);
      pt.overlap_se = se_of(overlaps);
    }
    out.push_back(pt);
  }
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
  std::ostringstream os;
  os << "snr,method,power,power_se,overlap,overlap_se,replicas,failures\n";
  for (const auto& p : points) {
    os << format_double(p.snr) << ',' << to_string(p.method) << ',' << format_double(p.power) << ','
       << format_double(p.power_se) << ',' << format_double(p.overlap) << ','
       << format_double(p.overlap_se) << ',' << p.replicas << ',' << p.failures << '\n';
  }
  return os.str();
}

std::vector<MomentRow> run_moment_suite(const ModelParams& params,
                                        const std::vector<WedgeComposition>& comps, int replicas,
                                        std::uint64_t seed, int threads) {
  if (replicas < 2) throw InvalidArgument("moment suite needs at least two replicas");
  if (comps.empty()) throw InvalidArgument("no compositions given");
  const EnumerationCaps caps;
  for (const auto& comp : comps) {
    validate_composition(comp, params.m);
    if (comp.total() > caps.max_cycle_total || comp.ell > caps.max_cycle_ell) {
      throw CapExceeded("composition " + comp.to_string() + " exceeds the cycle cap");
    }
  }
  std::vector<std::vector<double>> ys(comps.size(), std::vector<double>(replicas));
  parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
    const Dataset ds = sample_dataset(params, derive_seed(seed, "moments/replica", r));
    for (std::size_t c = 0; c < comps.size(); ++c) ys[c][r] = cycle_statistic(ds, comps[c]);
  });

  std::vector<MomentRow> rows;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    MomentRow row;
    row.comp = comps[c];
    row.replicas = replicas;
    row.empirical_mean = mean_of(ys[c]);
    double ss = 0.0;
    for (double y : ys[c]) ss += (y - row.empirical_mean) * (y - row.empirical_mean);
    row.empirical_var = ss / (replicas - 1);
    const auto in = MomentInputs::from(params);
    if (comps[c].ell == 0) {
      row.theoretical_mean = is_cycle_composition(comps[c]) ? h1_poisson_mean(comps[c], in) : 0.0;
      row.theoretical_var = row.theoretical_mean;
    } else {
      const auto g = gaussian_moments(comps[c], in, Hypothesis::kAlternative);
      row.theoretical_mean = g.mean;
      row.theoretical_var = g.variance;
    }
    const double se_mean = std::sqrt(row.empirical_var / replicas);
    const double se_var = row.empirical_var * std::sqrt(2.0 / (replicas - 1));
    auto z = [](double diff, double se) { return se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY); };
    row.z_mean = z(row.empirical_mean - row.theoretical_mean, se_mean);
    row.z_var = z(row.empirical_var - row.theoretical_var, se_var);
    row.flagged = std::abs(row.z_mean) > 4.0 || std::abs(row.z_var) > 4.0;
    rows.push_back(row);
  }
  return rows;
}

std::string moment_csv(const std::vector<MomentRow>& rows) {
  std::ostringstream os;
  os << "comp,replicas,empirical_mean,empirical_var,theoretical_mean,theoretical_var,z_mean,z_var,"
        "flagged\n";
  for (const auto& r : rows) {
    os << '"' << r.comp.to_string() << "\"," << r.replicas << ',' << format_double(r.empirical_mean)
       << ',' << format_double(r.empirical_var) << ',' << format_double(r.theoretical_mean) << ','
       << format_double(r.theoretical_var) << ',' << format_double(r.z_mean) << ','
       << format_double(r.z_var) << ',' << (r.flagged ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace mlcsbm
