#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "mlcsbm/bp.hpp"
#include "mlcsbm/cycle_stats.hpp"
#include "mlcsbm/model.hpp"
#include "mlcsbm/saw_recovery.hpp"

namespace mlcsbm {

/// Dataset directory layout:
///   params.json      {n, p, m, lambda, mu, d, seed}
///   sigma.csv        one label per line (optional on load)
///   layer_<k>.edges  "i j" per line, i < j, sorted, k = 1..m
///   B.csv            n rows of p comma-separated values
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

nlohmann::json params_json(const ModelParams& params, std::uint64_t seed);

nlohmann::json to_json(const CycleStatReport& report);
nlohmann::json to_json(const DetectionResult& result);
nlohmann::json to_json(const RecoveryResult& result);

/// "t,eta_norm" rows.
std::string trace_csv(const std::vector<double>& eta_norm);

/// Writes text to path, or to stdout when path is "-" or empty.
void write_output(const std::string& path, const std::string& text);

std::string read_file(const std::filesystem::path& path);

}  // namespace mlcsbm
