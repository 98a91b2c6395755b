#pragma once

#include <string>

#include "mmfg/harness.hpp"
#include "mmfg/lq_model.hpp"
#include "mmfg/master_solver.hpp"
#include "mmfg/nash_solver.hpp"
#include "mmfg/simulator.hpp"

namespace mmfg {

struct LoadedConfig {
  LqSpec spec;
  SimConfig sim;
};

/// Strict JSON config parsing: the full key set is d, d0, T, Q, A, B, b, QT,
/// AT, BT, bT, Q0, A0, b0, Q0T, A0T, b0T, mu0, x0_init, dt, paths, seed,
/// cloud_size. Unknown keys are rejected by name; missing cost blocks default
/// to zero matrices of the declared shape. Matrices are row-major nested
/// arrays, vectors flat arrays. Throws ConfigError.
LoadedConfig parse_config(const std::string& json_text);
LoadedConfig load_config(const std::string& path);

/// Inverse of parse_config: serializes every key explicitly, so the result
/// reloads to an identical configuration.
std::string config_to_json(const LqSpec& spec, const SimConfig& sim);

std::string master_to_json(const MasterSolution& sol);
std::string nash_to_json(const NashSolution& sol);
std::string report_to_json(const VerifyReport& rep);

/// CSV with header row; numbers printed with 17 significant digits so the
/// text round-trips to the in-memory doubles.
std::string table_to_csv(const ConvergenceTable& table);
std::string bundle_to_csv(const PathBundle& bundle);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mmfg
