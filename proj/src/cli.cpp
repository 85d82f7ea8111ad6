#include "mlcsbm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"

#include "mlcsbm/bp.hpp"
#include "mlcsbm/cycle_stats.hpp"
#include "mlcsbm/errors.hpp"
#include "mlcsbm/harness.hpp"
#include "mlcsbm/io.hpp"
#include "mlcsbm/saw_recovery.hpp"

namespace fs = std::filesystem;

namespace mlcsbm {

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out = "-";
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output path ('-' for stdout)")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

struct ModelFlags {
  int n = 0;
  int p = 0;
  int m = 0;
  std::vector<double> lambda;
  double mu = 0.0;
  std::vector<double> d;
};

void add_model(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--n", f.n, "Number of nodes")->required();
  cmd->add_option("--p", f.p, "Covariate dimension")->required();
  cmd->add_option("--m", f.m, "Number of layers (defaults to the length of --lambda)");
  cmd->add_option("--lambda", f.lambda, "Per-layer signal strengths")->delimiter(',')->required();
  cmd->add_option("--mu", f.mu, "Covariate signal strength")->required();
  cmd->add_option("--d", f.d, "Per-layer average degrees")->delimiter(',')->required();
}

ModelParams model_params(const ModelFlags& f) {
  if (f.m != 0 && f.m != static_cast<int>(f.lambda.size())) {
    throw InvalidArgument("--m is " + std::to_string(f.m) + " but --lambda has " +
                          std::to_string(f.lambda.size()) + " values");
  }
  return build_params(f.lambda, f.mu, f.d, f.n, f.p);
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Multilayer contextual SBM toolkit"};
  app.require_subcommand(1);
  Common common;

  // generate
  ModelFlags gen;
  auto* generate = app.add_subcommand("generate", "Sample a dataset into a directory");
  add_model(generate, gen);
  add_common(generate, common);

  // cycle-stats
  std::string data_dir;
  std::vector<std::string> comp_texts;
  auto* cycle = app.add_subcommand("cycle-stats", "Cycle statistic with its limiting moments");
  cycle->add_option("--data", data_dir, "Dataset directory")->required();
  cycle->add_option("--comp", comp_texts, "Composition 'k1,...,km;ell' (repeatable)")->required();
  add_common(cycle, common);

  // detect
  int k_total = 4;
  double alpha = 0.05;
  std::vector<double> alt_lambda;
  std::optional<double> alt_mu;
  auto* detect = app.add_subcommand("detect", "Cycle-based detection test");
  detect->add_option("--data", data_dir, "Dataset directory")->required();
  detect->add_option("--k-total", k_total, "Total wedges in the test composition")->capture_default_str();
  detect->add_option("--alpha", alpha, "Test level")->capture_default_str();
  detect->add_option("--lambda", alt_lambda, "Alternative lambda (defaults to params.json)")->delimiter(',');
  detect->add_option("--mu", alt_mu, "Alternative mu (defaults to params.json)");
  add_common(detect, common);

  // recover-saw
  std::string saw_comp;
  double delta = 0.0;
  int samples = 0;
  auto* saw = app.add_subcommand("recover-saw", "Self-avoiding-walk weak recovery");
  saw->add_option("--data", data_dir, "Dataset directory")->required();
  saw->add_option("--comp", saw_comp, "Walk composition 'k1,...,km;ell'")->required();
  saw->add_option("--delta", delta, "Inner-product margin of the PSD program")->required();
  saw->add_option("--samples", samples, "Walks sampled per pair (0: exact)")->capture_default_str();
  add_common(saw, common);

  // recover-bp
  int t_max = 50;
  std::string init = "random";
  auto* bp = app.add_subcommand("recover-bp", "Linearized belief propagation");
  bp->add_option("--data", data_dir, "Dataset directory")->required();
  bp->add_option("--tmax", t_max, "Iterations")->capture_default_str();
  bp->add_option("--init", init, "random or zero")->check(CLI::IsMember({"random", "zero"}))->capture_default_str();
  add_common(bp, common);

  // experiment
  ExperimentConfig exp;
  exp.d.clear();
  std::vector<std::string> methods{"bp"};
  double grid_min = 0.5, grid_max = 4.0;
  int grid_points = 10;
  bool random = false, literal = false;
  std::string exp_saw_comp;
  int exp_samples = 0;
  auto* experiment = app.add_subcommand("experiment", "Power and overlap against effective SNR");
  experiment->add_option("--n", exp.n)->capture_default_str();
  experiment->add_option("--p", exp.p)->capture_default_str();
  experiment->add_option("--m", exp.m)->capture_default_str();
  experiment->add_option("--d", exp.d, "Per-layer degrees (default 3 each)")->delimiter(',');
  experiment->add_option("--grid", exp.snr_grid, "Explicit grid values")->delimiter(',');
  experiment->add_option("--grid-min", grid_min)->capture_default_str();
  experiment->add_option("--grid-max", grid_max)->capture_default_str();
  experiment->add_option("--grid-points", grid_points)->capture_default_str();
  experiment->add_flag("--random-grid", random, "Draw grid values uniformly instead of spacing them");
  experiment->add_option("--ratios", exp.ratios, "r_1..r_{m+1} (default equal)")->delimiter(',');
  experiment->add_flag("--literal-ratios", literal, "lambda_i = r_i t, mu = r_{m+1} gamma t");
  experiment->add_option("--replicas", exp.replicas)->capture_default_str();
  experiment->add_option("--methods", methods, "bp, saw, cycle")->delimiter(',')->capture_default_str();
  experiment->add_option("--tmax", exp.t_max)->capture_default_str();
  experiment->add_option("--k-total", exp.k_total)->capture_default_str();
  experiment->add_option("--alpha", exp.alpha)->capture_default_str();
  experiment->add_option("--saw-comp", exp_saw_comp, "Walk composition (default from the grid point)");
  experiment->add_option("--saw-samples", exp_samples, "Walks per pair (0: exact)")->capture_default_str();
  experiment->add_option("--pilot", exp.pilot_replicas, "Pilot replicas for delta")->capture_default_str();
  add_common(experiment, common);

  // verify-moments
  ModelFlags vm;
  int replicas = 200;
  auto* verify = app.add_subcommand("verify-moments", "Monte Carlo check of cycle-statistic moments");
  add_model(verify, vm);
  verify->add_option("--comp", comp_texts, "Composition 'k1,...,km;ell' (repeatable)")->required();
  verify->add_option("--replicas", replicas)->capture_default_str();
  add_common(verify, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      err << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (generate->parsed()) {
      const auto params = model_params(gen);
      if (common.out.empty() || common.out == "-") throw InvalidArgument("generate needs --out DIR");
      save_dataset(sample_dataset(params, common.seed), common.out);
    } else if (cycle->parsed()) {
      const auto ds = load_dataset(data_dir);
      std::vector<WedgeComposition> comps;
      for (const auto& t : comp_texts) comps.push_back(WedgeComposition::parse(t));
      for (const auto& c : comps) validate_composition(c, ds.params.m);
      nlohmann::json out = nlohmann::json::array();
      for (const auto& c : comps) out.push_back(to_json(cycle_stat_report(ds, c, ds.params)));
      write_output(common.out, dump(comps.size() == 1 ? out[0] : out));
    } else if (detect->parsed()) {
      const auto ds = load_dataset(data_dir);
      const auto alt = build_params(alt_lambda.empty() ? ds.params.lambda : alt_lambda,
                                    alt_mu.value_or(ds.params.mu), ds.params.d, ds.params.n,
                                    ds.params.p);
      write_output(common.out, dump(to_json(detection_test(ds, alt, k_total, alpha))));
    } else if (saw->parsed()) {
      const auto comp = WedgeComposition::parse(saw_comp);
      if (samples < 0) throw InvalidArgument("--samples must be non-negative");
      const auto ds = load_dataset(data_dir);
      const auto mode = samples == 0 ? SawMode::exact() : SawMode::sampled(samples);
      const auto r = weak_recovery_pipeline(ds, comp, delta, mode, common.seed, common.threads);
      write_output(common.out, dump(to_json(r)));
    } else if (bp->parsed()) {
      if (common.out.empty() || common.out == "-") throw InvalidArgument("recover-bp needs --out DIR");
      const auto ds = load_dataset(data_dir);
      BPConfig cfg;
      cfg.t_max = t_max;
      cfg.seed = common.seed;
      cfg.init = init == "zero" ? BPConfig::Init::kZero : BPConfig::Init::kRandom;
      const auto run = run_bp(ds, ds.params, cfg);
      RecoveryResult r;
      r.sigma_hat = bp_estimate(run.final_state);
      if (ds.sigma.size() == ds.params.n) r.overlap = overlap(r.sigma_hat, ds.sigma);
      r.mode = "bp";
      r.iterations = t_max;
      auto j = to_json(r);
      const auto test = bp_test(run);
      j["reject"] = test.reject;
      j["stat"] = test.stat;
      const fs::path dir(common.out);
      write_output((dir / "result.json").string(), dump(j));
      write_output((dir / "trace.csv").string(), trace_csv(run.eta_norm));
    } else if (experiment->parsed()) {
      if (exp.d.empty()) exp.d.assign(std::max(exp.m, 0), 3.0);
      if (exp.snr_grid.empty()) {
        exp.snr_grid = random ? random_grid(grid_min, grid_max, grid_points, common.seed)
                              : linear_grid(grid_min, grid_max, grid_points);
      }
      exp.parametrization = literal ? Parametrization::kLiteral : Parametrization::kEffectiveSnr;
      exp.seed = common.seed;
      exp.threads = common.threads;
      if (!exp_saw_comp.empty()) exp.saw_comp = WedgeComposition::parse(exp_saw_comp);
      exp.saw_mode = exp_samples == 0 ? SawMode::exact() : SawMode::sampled(exp_samples);
      std::vector<Method> ms;
      for (const auto& m : methods) ms.push_back(parse_method(m));
      validate_config(exp);
      std::vector<CurvePoint> points;
      for (Method m : ms) {
        auto curve = run_power_curve(exp, m);
        points.insert(points.end(), curve.begin(), curve.end());
      }
      write_output(common.out, curve_csv(points));
    } else if (verify->parsed()) {
      const auto params = model_params(vm);
      std::vector<WedgeComposition> comps;
      for (const auto& t : comp_texts) comps.push_back(WedgeComposition::parse(t));
      write_output(common.out, moment_csv(run_moment_suite(params, comps, replicas, common.seed,
                                                           common.threads)));
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace mlcsbm
