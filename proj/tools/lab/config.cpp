#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace pimsner::lab {

using json = nlohmann::ordered_json;

namespace {

std::vector<std::vector<std::vector<Mat>>> scalar_identity_U(int n, const std::vector<int>& algebra) {
  std::vector<std::vector<std::vector<Mat>>> U(static_cast<size_t>(n), std::vector<std::vector<Mat>>(static_cast<size_t>(n)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int d : algebra) U[i][j].push_back(i == j ? Mat(Mat::Identity(d, d)) : Mat(Mat::Zero(d, d)));
    }
  }
  return U;
}

AutomorphismData plain(std::vector<int> perm) { return AutomorphismData{std::move(perm), {}}; }

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"cuntz2", "crossed-z3", "twisted2", "rotation-m2"};
  return names;
}

RunConfig make_preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "cuntz2") {
    c.algebra = {1};
    c.n = 2;
    c.U = scalar_identity_U(2, c.algebra);
    c.automorphisms = {plain({0}), plain({0})};
  } else if (name == "crossed-z3") {
    c.algebra = {1, 1, 1};
    c.n = 1;
    c.U = scalar_identity_U(1, c.algebra);
    c.automorphisms = {plain({1, 2, 0})};
  } else if (name == "twisted2") {
    // C^2 with a seeded unitary U in M_2(C^2), alpha_1 = id, alpha_2 = flip.
    c.algebra = {1, 1};
    c.n = 2;
    std::mt19937_64 rng(20231);
    const Mat W0 = random_unitary(2, rng);
    const Mat W1 = random_unitary(2, rng);
    c.U.assign(2, std::vector<std::vector<Mat>>(2));
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        c.U[i][j] = {Mat::Constant(1, 1, W0(i, j)), Mat::Constant(1, 1, W1(i, j))};
      }
    }
    c.automorphisms = {plain({0, 1}), plain({1, 0})};
  } else if (name == "rotation-m2") {
    // M_2 with alpha = Ad V, V seeded.
    c.algebra = {2};
    c.n = 1;
    c.U = scalar_identity_U(1, c.algebra);
    std::mt19937_64 rng(7);
    c.automorphisms = {AutomorphismData{{0}, {random_unitary(2, rng)}}};
  } else {
    throw ConfigError("preset: unknown preset '" + name + "'");
  }
  return c;
}

void RunConfig::resolve() {
  if (algebra.empty()) throw ConfigError("algebra: missing or empty");
  for (int d : algebra) {
    if (d < 1) throw ConfigError("algebra: block dimensions must be >= 1");
  }
  if (n < 1) throw ConfigError("n: must be >= 1");
  if (static_cast<int>(U.size()) != n) throw ConfigError("U: expected " + std::to_string(n) + " rows");
  for (const auto& row : U) {
    if (static_cast<int>(row.size()) != n) throw ConfigError("U: expected " + std::to_string(n) + " columns");
    for (const auto& entry : row) {
      if (entry.size() != algebra.size()) throw ConfigError("U: each entry needs one matrix per algebra block");
      for (size_t s = 0; s < entry.size(); ++s) {
        if (entry[s].rows() != algebra[s] || entry[s].cols() != algebra[s]) {
          throw ConfigError("U: block " + std::to_string(s) + " has wrong size");
        }
      }
    }
  }
  if (static_cast<int>(automorphisms.size()) != n) {
    throw ConfigError("automorphisms: expected " + std::to_string(n) + " entries");
  }
  if (max_degree < 0) max_degree = default_max_degree(n);
  if (M < 0) M = FockWindow::default_hi(n);
  if (M > max_degree) {
    throw ConfigError("M: window " + std::to_string(M) + " exceeds max_degree " + std::to_string(max_degree));
  }
  if (two_sided < 0) two_sided = n == 1 ? 1 : 0;
  if (two_sided == 1 && n != 1) throw ConfigError("window.two_sided: two-sided windows need n = 1");
  if (N_hi < 0) N_hi = M;
  if (N_lo < 0 || N_lo > N_hi) throw ConfigError("N: empty or negative range");
  if (N_hi > M) {
    throw ConfigError("N: upper bound " + std::to_string(N_hi) + " exceeds window M = " + std::to_string(M));
  }
  if (band < 0) throw ConfigError("band: must be >= 0");
  if (levels < 0 || levels + 1 > max_degree) throw ConfigError("levels: must lie in [0, max_degree - 1]");
  if (choi_cap < 1) throw ConfigError("choi_cap: must be >= 1");
  if (probe_trials < 1) throw ConfigError("probe_trials: must be >= 1");
  if (format != "json" && format != "csv") throw ConfigError("format: expected json or csv");
  try {
    tol.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("tolerances: ") + e.what());
  }
}

CorrespondencePtr RunConfig::build() const {
  const AlgebraSpec spec(algebra);
  std::vector<AElement> entries;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) entries.emplace_back(spec, U[i][j]);
  }
  AMatrix Umat = AMatrix::from_entries(spec, n, n, entries);
  std::vector<Automorphism> alphas;
  for (size_t i = 0; i < automorphisms.size(); ++i) {
    const auto& a = automorphisms[i];
    try {
      if (a.unitaries.empty()) {
        alphas.push_back(Automorphism::permutation(spec, a.perm));
      } else {
        alphas.emplace_back(spec, a.perm, a.unitaries, tol);
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError("automorphisms[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return std::make_shared<const Correspondence>(spec, n, std::move(Umat), std::move(alphas), max_degree, tol);
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    size_t used = 0;
    if (dots == std::string::npos) {
      const int v = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing");
      return {v, v};
    }
    const std::string a = text.substr(0, dots);
    const std::string b = text.substr(dots + 2);
    const int lo = std::stoi(a, &used);
    if (used != a.size()) throw std::invalid_argument("trailing");
    const int hi = std::stoi(b, &used);
    if (used != b.size()) throw std::invalid_argument("trailing");
    return {lo, hi};
  } catch (const std::exception&) {
    throw ConfigError("N: cannot parse range '" + text + "' (expected a..b)");
  }
}

json complex_matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(row);
  }
  return rows;
}

Mat complex_matrix_from_json(const json& j, int rows, int cols, const std::string& field) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ConfigError(field + ": expected " + std::to_string(rows) + " rows");
  }
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw ConfigError(field + ": expected " + std::to_string(cols) + " columns");
    }
    for (int c = 0; c < cols; ++c) {
      const json& z = row[static_cast<size_t>(c)];
      if (z.is_number()) {
        m(r, c) = cplx(z.get<double>(), 0.0);
      } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
        m(r, c) = cplx(z[0].get<double>(), z[1].get<double>());
      } else {
        throw ConfigError(field + ": complex entries are [re, im]");
      }
    }
  }
  return m;
}

namespace {

int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field + ": expected an integer");
  return j.get<int>();
}

double get_double(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field + ": expected a number");
  return j.get<double>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field + ": expected a string");
  return j.get<std::string>();
}

}  // namespace

RunConfig parse_config(const json& j, RunConfig base) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> known{"preset", "algebra", "n", "U", "automorphisms", "window", "M",
                                           "N", "band", "levels", "max_degree", "tolerances", "seed",
                                           "choi_cap", "probe_trials", "out", "format", "created"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError(k + ": unknown configuration key");
  }
  RunConfig c = j.contains("preset") ? make_preset(get_string(j["preset"], "preset")) : std::move(base);
  if (j.contains("algebra")) {
    const json& a = j["algebra"];
    if (!a.is_array()) throw ConfigError("algebra: expected a list of block dimensions");
    c.algebra.clear();
    for (const auto& d : a) c.algebra.push_back(get_int(d, "algebra"));
    if (!j.contains("preset")) c.preset = "custom";
  }
  if (j.contains("n")) c.n = get_int(j["n"], "n");
  if (j.contains("U")) {
    const json& u = j["U"];
    if (!u.is_array() || static_cast<int>(u.size()) != c.n) throw ConfigError("U: expected n rows");
    c.U.assign(static_cast<size_t>(c.n), {});
    for (int i = 0; i < c.n; ++i) {
      const json& row = u[static_cast<size_t>(i)];
      if (!row.is_array() || static_cast<int>(row.size()) != c.n) throw ConfigError("U: expected n columns");
      for (int jj = 0; jj < c.n; ++jj) {
        const json& entry = row[static_cast<size_t>(jj)];
        if (!entry.is_array() || entry.size() != c.algebra.size()) {
          throw ConfigError("U: each entry needs one matrix per algebra block");
        }
        std::vector<Mat> blocks;
        for (size_t s = 0; s < c.algebra.size(); ++s) {
          blocks.push_back(complex_matrix_from_json(entry[s], c.algebra[s], c.algebra[s], "U"));
        }
        c.U[static_cast<size_t>(i)].push_back(std::move(blocks));
      }
    }
  }
  if (j.contains("automorphisms")) {
    const json& as = j["automorphisms"];
    if (!as.is_array()) throw ConfigError("automorphisms: expected a list");
    c.automorphisms.clear();
    for (size_t i = 0; i < as.size(); ++i) {
      const std::string field = "automorphisms[" + std::to_string(i) + "]";
      const json& a = as[i];
      if (!a.is_object() || !a.contains("perm")) throw ConfigError(field + ": needs a perm");
      AutomorphismData d;
      for (const auto& p : a["perm"]) d.perm.push_back(get_int(p, field + ".perm"));
      if (a.contains("unitaries")) {
        const json& us = a["unitaries"];
        if (!us.is_array() || us.size() != c.algebra.size()) {
          throw ConfigError(field + ".unitaries: one matrix per algebra block");
        }
        for (size_t s = 0; s < us.size(); ++s) {
          d.unitaries.push_back(complex_matrix_from_json(us[s], c.algebra[s], c.algebra[s], field + ".unitaries"));
        }
      }
      c.automorphisms.push_back(std::move(d));
    }
  }
  if (j.contains("window")) {
    const json& w = j["window"];
    if (!w.is_object()) throw ConfigError("window: expected an object");
    if (w.contains("M")) c.M = get_int(w["M"], "window.M");
    if (w.contains("two_sided")) {
      if (!w["two_sided"].is_boolean()) throw ConfigError("window.two_sided: expected a boolean");
      c.two_sided = w["two_sided"].get<bool>() ? 1 : 0;
    }
  }
  if (j.contains("M")) c.M = get_int(j["M"], "M");
  if (j.contains("N")) {
    const json& nn = j["N"];
    if (nn.is_string()) {
      std::tie(c.N_lo, c.N_hi) = parse_range(nn.get<std::string>());
    } else if (nn.is_number_integer()) {
      c.N_lo = c.N_hi = nn.get<int>();
    } else if (nn.is_array() && nn.size() == 2) {
      c.N_lo = get_int(nn[0], "N");
      c.N_hi = get_int(nn[1], "N");
    } else {
      throw ConfigError("N: expected \"a..b\", an integer or [a, b]");
    }
  }
  if (j.contains("band")) c.band = get_int(j["band"], "band");
  if (j.contains("levels")) c.levels = get_int(j["levels"], "levels");
  if (j.contains("max_degree")) c.max_degree = get_int(j["max_degree"], "max_degree");
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances: expected an object");
    for (const auto& [k, v] : t.items()) {
      if (k == "eq_tol") c.tol.eq_tol = get_double(v, "tolerances.eq_tol");
      else if (k == "psd_tol") c.tol.psd_tol = get_double(v, "tolerances.psd_tol");
      else if (k == "norm_rel_tol") c.tol.norm_rel_tol = get_double(v, "tolerances.norm_rel_tol");
      else throw ConfigError("tolerances." + k + ": unknown tolerance");
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("choi_cap")) c.choi_cap = get_int(j["choi_cap"], "choi_cap");
  if (j.contains("probe_trials")) c.probe_trials = get_int(j["probe_trials"], "probe_trials");
  if (j.contains("out")) c.out = get_string(j["out"], "out");
  if (j.contains("format")) c.format = get_string(j["format"], "format");
  if (j.contains("created")) c.created = get_string(j["created"], "created");
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  return parse_config(j);
}

json spec_json(const RunConfig& cfg, const Correspondence& corr) {
  json s;
  s["preset"] = cfg.preset;
  s["preset_version"] = kPresetVersion;
  s["algebra"] = cfg.algebra;
  s["n"] = cfg.n;
  json u = json::array();
  for (const auto& row : cfg.U) {
    json jr = json::array();
    for (const auto& entry : row) {
      json je = json::array();
      for (const auto& b : entry) je.push_back(complex_matrix_json(b));
      jr.push_back(je);
    }
    u.push_back(jr);
  }
  s["U"] = u;
  json as = json::array();
  for (const auto& a : cfg.automorphisms) {
    json ja;
    ja["perm"] = a.perm;
    json us = json::array();
    for (const auto& m : a.unitaries) us.push_back(complex_matrix_json(m));
    ja["unitaries"] = us;
    as.push_back(ja);
  }
  s["automorphisms"] = as;
  s["max_degree"] = corr.max_degree();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(spec_fingerprint(corr)));
  s["fingerprint"] = buf;
  return s;
}

}  // namespace pimsner::lab
