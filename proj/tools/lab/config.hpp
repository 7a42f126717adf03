#pragma once

#include "pimsner/lift.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace pimsner::lab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kPresetVersion = 1;
inline constexpr const char* kDefaultCreated = "1970-01-01T00:00:00Z";

struct AutomorphismData {
  std::vector<int> perm;
  // One square matrix per block; empty means identity.
  std::vector<Mat> unitaries;
};

struct RunConfig {
  std::string preset = "custom";
  std::vector<int> algebra;
  int n = 1;
  // U[i][j][s]: block s of entry (i, j).
  std::vector<std::vector<std::vector<Mat>>> U;
  std::vector<AutomorphismData> automorphisms;

  // Negative values are resolved from n by resolve().
  int M = -1;
  int two_sided = -1;
  int N_lo = 1;
  int N_hi = -1;
  int band = 4;
  int levels = 3;
  int max_degree = -1;
  Tolerances tol;
  std::uint64_t seed = 1;
  int choi_cap = kDefaultChoiCap;
  int probe_trials = 50;
  std::string out;
  std::string format = "json";
  std::string created = kDefaultCreated;

  // Fills defaults and checks ranges; throws ConfigError naming the field.
  void resolve();
  CorrespondencePtr build() const;
  FockWindow one_sided_window() const { return FockWindow::one_sided(M); }
  FockWindow bilateral_window() const { return FockWindow::bilateral(M); }
  bool bilateral() const { return n == 1 && two_sided == 1; }
};

const std::vector<std::string>& preset_names();
// Throws ConfigError for unknown names.
RunConfig make_preset(const std::string& name);

// Overlays the keys present in `j` onto `base`.
RunConfig parse_config(const nlohmann::ordered_json& j, RunConfig base = {});
RunConfig load_config_file(const std::string& path);

// "a..b" or "a".
std::pair<int, int> parse_range(const std::string& text);

nlohmann::ordered_json complex_matrix_json(const Mat& m);
Mat complex_matrix_from_json(const nlohmann::ordered_json& j, int rows, int cols, const std::string& field);
nlohmann::ordered_json spec_json(const RunConfig& cfg, const Correspondence& corr);

}  // namespace pimsner::lab
