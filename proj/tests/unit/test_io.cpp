#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "mlcsbm/cli.hpp"
#include "mlcsbm/errors.hpp"
#include "mlcsbm/io.hpp"

using namespace mlcsbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mlcsbm_io_" + name);
  fs::remove_all(p);
  return p;
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream err;
  const int code = dispatch(args, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("dataset round trip is exact") {
  const auto params = build_params({1.0, 0.5}, 0.7, {3.0, 2.5}, 150, 90);
  const auto ds = sample_dataset(params, 123);
  const auto dir = scratch("roundtrip");
  save_dataset(ds, dir);
  const auto back = load_dataset(dir);
  CHECK(back.params == ds.params);
  CHECK(back.seed == 123);
  CHECK(back.sigma == ds.sigma);
  CHECK(back.layers == ds.layers);
  CHECK(back.covariates.B == ds.covariates.B);
  CHECK(back.covariates.u.size() == 0);
  fs::remove_all(dir);
}

TEST_CASE("malformed dataset files are rejected") {
  const auto params = build_params({1.0}, 0.7, {3.0}, 30, 5);
  const auto dir = scratch("bad");
  save_dataset(sample_dataset(params, 1), dir);
  write_output((dir / "layer_1.edges").string(), "0 1\n1 0\n");
  CHECK_THROWS_AS(load_dataset(dir), InvalidArgument);
  write_output((dir / "layer_1.edges").string(), "0 x\n");
  CHECK_THROWS_AS(load_dataset(dir), InvalidArgument);
  write_output((dir / "layer_1.edges").string(), "");
  CHECK_NOTHROW(load_dataset(dir));
  write_output((dir / "sigma.csv").string(), "1\n2\n");
  CHECK_THROWS_AS(load_dataset(dir), InvalidArgument);
  fs::remove(dir / "sigma.csv");
  CHECK(load_dataset(dir).sigma.size() == 0);
  write_output((dir / "B.csv").string(), "1,2\n");
  CHECK_THROWS_AS(load_dataset(dir), InvalidArgument);
  CHECK_THROWS_AS(load_dataset(dir / "missing"), InvalidArgument);
  fs::remove_all(dir);
}

TEST_CASE("result serialization keys") {
  RecoveryResult r;
  r.sigma_hat = CommunityAssignment::Ones(3);
  r.overlap = 0.5;
  r.comp = {{2}, 0};
  r.mode = "exact";
  const auto j = to_json(r);
  for (const char* key : {"sigma_hat", "overlap", "delta_used", "comp", "mode", "iterations"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["comp"] == "2;0");
  DetectionResult d;
  d.comp = {{1, 1}, 0};
  const auto jd = to_json(d);
  CHECK(jd.contains("reject"));
  CHECK(jd.contains("score"));
  CHECK(jd["comp"] == "1,1;0");
  CHECK(trace_csv({1.0, 0.5}) == "t,eta_norm\n0,1\n1,0.5\n");
}

TEST_CASE("command line: workflow and exit codes") {
  const auto dir = scratch("cli");
  const auto data = (dir / "run1").string();
  CHECK(run({"generate", "--n", "60", "--p", "90", "--m", "3", "--lambda", "1,1,1", "--mu", "0.5",
             "--d", "3,3,3", "--seed", "7", "--out", data}) == kExitOk);
  CHECK(fs::exists(fs::path(data) / "layer_3.edges"));

  const auto det = (dir / "det.json").string();
  CHECK(run({"detect", "--data", data, "--k-total", "4", "--alpha", "0.05", "--out", det}) == kExitOk);
  const auto j = nlohmann::json::parse(read_file(det));
  CHECK(j.contains("reject"));
  CHECK(j["comp"] == "1,1,1;1");

  const auto bp = (dir / "bp").string();
  CHECK(run({"recover-bp", "--data", data, "--tmax", "5", "--out", bp}) == kExitOk);
  CHECK(read_file(fs::path(bp) / "trace.csv").rfind("t,eta_norm\n", 0) == 0);

  std::string err;
  CHECK(run({"generate", "--n", "60"}, &err) == kExitUsage);
  CHECK(run({"frobnicate"}) == kExitUsage);
  CHECK(run({"generate", "--n", "60", "--p", "90", "--lambda", "9", "--mu", "0.5", "--d", "3",
             "--out", (dir / "bad").string()}, &err) == kExitUsage);
  CHECK(err.find("lambda") != std::string::npos);
  CHECK(run({"cycle-stats", "--data", data, "--comp", "3,3,3;0", "--out", (dir / "c.json").string()},
            &err) == kExitCap);
  CHECK(run({"recover-saw", "--data", data, "--comp", "2,0,0;0", "--delta", "50", "--out",
             (dir / "s.json").string()}, &err) == kExitNumerical);
  CHECK(run({"recover-saw", "--data", data, "--comp", "2,0,0;0", "--delta", "0.01", "--out",
             (dir / "s.json").string()}) == kExitOk);
  fs::remove_all(dir);
}
