#include "mlcsbm/io.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mlcsbm/errors.hpp"
#include "mlcsbm/format.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mlcsbm {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << text;
}

json params_json(const ModelParams& params, std::uint64_t seed) {
  json j;
  j["n"] = params.n;
  j["p"] = params.p;
  j["m"] = params.m;
  j["lambda"] = params.lambda;
  j["mu"] = params.mu;
  j["d"] = params.d;
  j["seed"] = seed;
  return j;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  write_output((dir / "params.json").string(), params_json(ds.params, ds.seed).dump(2) + "\n");

  std::string sigma;
  for (Eigen::Index i = 0; i < ds.sigma.size(); ++i) sigma += ds.sigma(i) > 0 ? "1\n" : "-1\n";
  write_output((dir / "sigma.csv").string(), sigma);

  for (std::size_t k = 0; k < ds.layers.size(); ++k) {
    std::string text;
    for (const auto& e : ds.layers[k].edges()) {
      text += std::to_string(e.u) + ' ' + std::to_string(e.v) + '\n';
    }
    write_output((dir / ("layer_" + std::to_string(k + 1) + ".edges")).string(), text);
  }

  std::string b;
  const auto& B = ds.covariates.B;
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      if (j > 0) b += ',';
      b += format_double(B(i, j));
    }
    b += '\n';
  }
  write_output((dir / "B.csv").string(), b);
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

template <typename T>
T parse_number(std::string_view tok, const std::string& where) {
  while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
  while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
  T value{};
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw InvalidArgument(where + ": cannot parse '" + std::string(tok) + "'");
  }
  return value;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("dataset directory " + dir.string() + " not found");
  json j;
  try {
    j = json::parse(read_file(dir / "params.json"));
  } catch (const json::exception& e) {
    throw InvalidArgument("params.json: " + std::string(e.what()));
  }
  Dataset ds;
  try {
    ds.params = build_params(j.at("lambda").get<std::vector<double>>(), j.at("mu").get<double>(),
                             j.at("d").get<std::vector<double>>(), j.at("n").get<int>(),
                             j.at("p").get<int>());
    if (j.contains("m") && j.at("m").get<int>() != ds.params.m) {
      throw InvalidArgument("params.json: m disagrees with the lambda list");
    }
    ds.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw InvalidArgument("params.json: " + std::string(e.what()));
  }
  const int n = ds.params.n;
  const int p = ds.params.p;

  if (fs::exists(dir / "sigma.csv")) {
    const auto text = read_file(dir / "sigma.csv");
    const auto lines = split_lines(text);
    if (static_cast<int>(lines.size()) != n) throw InvalidArgument("sigma.csv must have n lines");
    ds.sigma.resize(n);
    for (int i = 0; i < n; ++i) {
      const int s = parse_number<int>(lines[i], "sigma.csv");
      if (s != 1 && s != -1) throw InvalidArgument("sigma.csv: labels must be +1 or -1");
      ds.sigma(i) = s;
    }
  }

  for (int k = 0; k < ds.params.m; ++k) {
    const std::string name = "layer_" + std::to_string(k + 1) + ".edges";
    const auto text = read_file(dir / name);
    std::vector<Edge> edges;
    for (auto line : split_lines(text)) {
      const auto sp = line.find(' ');
      if (sp == std::string_view::npos) throw InvalidArgument(name + ": expected 'i j'");
      edges.push_back({parse_number<int>(line.substr(0, sp), name),
                       parse_number<int>(line.substr(sp + 1), name)});
    }
    ds.layers.emplace_back(k, n, std::move(edges));
  }

  const auto text = read_file(dir / "B.csv");
  const auto lines = split_lines(text);
  if (static_cast<int>(lines.size()) != n) throw InvalidArgument("B.csv must have n rows");
  ds.covariates.B.resize(n, p);
  for (int i = 0; i < n; ++i) {
    std::string_view line = lines[i];
    for (int c = 0; c < p; ++c) {
      const auto comma = line.find(',');
      if ((comma == std::string_view::npos) != (c == p - 1)) {
        throw InvalidArgument("B.csv: row " + std::to_string(i + 1) + " must have p values");
      }
      ds.covariates.B(i, c) = parse_number<double>(line.substr(0, comma), "B.csv");
      if (comma != std::string_view::npos) line.remove_prefix(comma + 1);
    }
  }
  return ds;
}

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json to_json(const CycleStatReport& r) {
  json j;
  j["comp"] = r.comp.to_string();
  j["y"] = r.y;
  j["law"] = r.poisson ? "poisson" : "normal";
  j["h0_mean"] = r.h0_mean;
  j["h0_var"] = r.h0_variance;
  j["h1_mean"] = r.h1_mean;
  j["score"] = number_or_null(r.score);
  return j;
}

json to_json(const DetectionResult& r) {
  json j;
  j["reject"] = r.reject;
  j["score"] = number_or_null(r.score);
  j["threshold"] = r.threshold;
  j["comp"] = r.comp.to_string();
  j["y"] = r.y;
  return j;
}

json to_json(const RecoveryResult& r) {
  json j;
  std::vector<int> labels(r.sigma_hat.data(), r.sigma_hat.data() + r.sigma_hat.size());
  j["sigma_hat"] = labels;
  j["overlap"] = r.overlap ? json(*r.overlap) : json(nullptr);
  j["delta_used"] = r.delta_used;
  j["comp"] = r.comp.k.empty() && r.comp.ell == 0 ? json(nullptr) : json(r.comp.to_string());
  j["mode"] = r.mode;
  j["iterations"] = r.iterations;
  j["walks"] = r.walks;
  return j;
}

std::string trace_csv(const std::vector<double>& eta_norm) {
  std::string out = "t,eta_norm\n";
  for (std::size_t t = 0; t < eta_norm.size(); ++t) {
    out += std::to_string(t) + ',' + format_double(eta_norm[t]) + '\n';
  }
  return out;
}

}  // namespace mlcsbm
