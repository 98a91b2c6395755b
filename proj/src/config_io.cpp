#include "mmfg/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mmfg/errors.hpp"
#include "json.hpp"

namespace mmfg {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at \"" + path + "\": " + what);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k))
      fail(path.empty() ? k : path + "." + k, "unknown key");
}

Eigen::VectorXd parse_vector(const json& j, const std::string& path, int n) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  if (static_cast<int>(j.size()) != n)
    fail(path, "expected " + std::to_string(n) + " entries, got " +
                   std::to_string(j.size()));
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_number()) fail(path, "non-numeric entry");
    v[i] = j[i].get<double>();
  }
  return v;
}

// Accepts a nested row-major array, or a bare number when rows = cols = 1.
Eigen::MatrixXd parse_matrix(const json& j, const std::string& path, int rows,
                             int cols) {
  if (j.is_number() && rows == 1 && cols == 1) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = j.get<double>();
    return m;
  }
  if (!j.is_array()) fail(path, "expected a nested array");
  if (static_cast<int>(j.size()) != rows)
    fail(path, "expected " + std::to_string(rows) + " rows, got " +
                   std::to_string(j.size()));
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      fail(path + "[" + std::to_string(r) + "]",
           "expected a row of " + std::to_string(cols) + " numbers");
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        fail(path + "[" + std::to_string(r) + "]", "non-numeric entry");
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

double parse_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int parse_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

Mu0 parse_mu0(const json& j, int d) {
  if (!j.is_object()) fail("mu0", "expected an object");
  if (!j.contains("type")) fail("mu0.type", "missing");
  const std::string type = j.at("type").get<std::string>();
  if (type == "uniform") {
    check_keys(j, "mu0", {"type", "low", "high"});
    Eigen::VectorXd lo = -Eigen::VectorXd::Ones(d);
    Eigen::VectorXd hi = Eigen::VectorXd::Ones(d);
    if (j.contains("low")) lo = parse_vector(j.at("low"), "mu0.low", d);
    if (j.contains("high")) hi = parse_vector(j.at("high"), "mu0.high", d);
    return Mu0::UniformBox(lo, hi);
  }
  if (type == "gaussian") {
    check_keys(j, "mu0", {"type", "mean", "std"});
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    double std_dev = 1.0;
    if (j.contains("mean")) mean = parse_vector(j.at("mean"), "mu0.mean", d);
    if (j.contains("std")) std_dev = parse_number(j.at("std"), "mu0.std");
    return Mu0::GaussianIso(mean, std_dev);
  }
  fail("mu0.type", "expected \"uniform\" or \"gaussian\", got \"" + type +
                       "\"");
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json form_to_json(const QuadraticForm& q) {
  return json{{"M", matrix_to_json(q.M)}, {"l", vector_to_json(q.l)},
              {"c", q.c}};
}

}  // namespace

LoadedConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config error: top level not an object");

  static const std::set<std::string> kTop = {
      "d",   "d0", "T",   "Q",  "A",  "B",   "b",       "QT",
      "AT",  "BT", "bT",  "Q0", "A0", "b0",  "Q0T",     "A0T",
      "b0T", "mu0", "x0_init", "dt", "paths", "seed", "cloud_size"};
  check_keys(j, "", kTop);

  const int d = j.contains("d") ? parse_int(j.at("d"), "d") : 1;
  const int d0 = j.contains("d0") ? parse_int(j.at("d0"), "d0") : 1;
  if (d < 1) fail("d", "must be >= 1");
  if (d0 < 1) fail("d0", "must be >= 1");
  const double T = j.contains("T") ? parse_number(j.at("T"), "T") : 1.0;

  LqSpec spec = LqSpec::Zero(d, d0, T);
  auto mat = [&](const char* key, Eigen::MatrixXd& dst, int r, int c) {
    if (j.contains(key)) dst = parse_matrix(j.at(key), key, r, c);
  };
  auto vec = [&](const char* key, Eigen::VectorXd& dst, int n) {
    if (j.contains(key)) dst = parse_vector(j.at(key), key, n);
  };
  mat("Q", spec.Q, d, d);
  mat("A", spec.A, d, d);
  mat("B", spec.B, d, d0);
  vec("b", spec.b, d);
  mat("QT", spec.Q_T, d, d);
  mat("AT", spec.A_T, d, d);
  mat("BT", spec.B_T, d, d0);
  vec("bT", spec.b_T, d);
  mat("Q0", spec.Q0, d0, d0);
  mat("A0", spec.A0, d0, d);
  vec("b0", spec.b0, d0);
  mat("Q0T", spec.Q0_T, d0, d0);
  mat("A0T", spec.A0_T, d0, d);
  vec("b0T", spec.b0_T, d0);
  spec.validate();

  SimConfig sim;
  sim.mu0 = j.contains("mu0")
                ? parse_mu0(j.at("mu0"), d)
                : Mu0::UniformBox(-Eigen::VectorXd::Ones(d),
                                  Eigen::VectorXd::Ones(d));
  sim.x0_init = Eigen::VectorXd::Zero(d0);
  vec("x0_init", sim.x0_init, d0);
  if (j.contains("dt")) sim.dt = parse_number(j.at("dt"), "dt");
  if (j.contains("paths")) sim.paths = parse_int(j.at("paths"), "paths");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) fail("seed", "expected an integer");
    sim.seed = j.at("seed").get<uint64_t>();
  }
  if (j.contains("cloud_size"))
    sim.cloud_size = parse_int(j.at("cloud_size"), "cloud_size");
  sim.validate(d, d0);
  return {std::move(spec), std::move(sim)};
}

LoadedConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

std::string config_to_json(const LqSpec& spec, const SimConfig& sim) {
  json mu0;
  if (sim.mu0.type == Mu0::Type::Uniform)
    mu0 = json{{"type", "uniform"},
               {"low", vector_to_json(sim.mu0.low)},
               {"high", vector_to_json(sim.mu0.high)}};
  else
    mu0 = json{{"type", "gaussian"},
               {"mean", vector_to_json(sim.mu0.mean)},
               {"std", sim.mu0.std}};
  const json j{{"d", spec.d},
               {"d0", spec.d0},
               {"T", spec.T},
               {"Q", matrix_to_json(spec.Q)},
               {"A", matrix_to_json(spec.A)},
               {"B", matrix_to_json(spec.B)},
               {"b", vector_to_json(spec.b)},
               {"QT", matrix_to_json(spec.Q_T)},
               {"AT", matrix_to_json(spec.A_T)},
               {"BT", matrix_to_json(spec.B_T)},
               {"bT", vector_to_json(spec.b_T)},
               {"Q0", matrix_to_json(spec.Q0)},
               {"A0", matrix_to_json(spec.A0)},
               {"b0", vector_to_json(spec.b0)},
               {"Q0T", matrix_to_json(spec.Q0_T)},
               {"A0T", matrix_to_json(spec.A0_T)},
               {"b0T", vector_to_json(spec.b0_T)},
               {"mu0", mu0},
               {"x0_init", vector_to_json(sim.x0_init)},
               {"dt", sim.dt},
               {"paths", sim.paths},
               {"seed", sim.seed},
               {"cloud_size", sim.cloud_size}};
  return j.dump(2) + "\n";
}

std::string master_to_json(const MasterSolution& sol) {
  json grid = json::array(), u = json::array(), u0 = json::array();
  for (int k = 0; k <= sol.nt(); ++k) {
    grid.push_back(sol.grid_time(k));
    u.push_back(form_to_json(sol.u_at(k)));
    u0.push_back(form_to_json(sol.u0_at(k)));
  }
  SimConfig echo_sim;
  echo_sim.mu0 = Mu0::UniformBox(-Eigen::VectorXd::Ones(sol.d()),
                                 Eigen::VectorXd::Ones(sol.d()));
  echo_sim.x0_init = Eigen::VectorXd::Zero(sol.d0());
  const json j{{"kind", "master"},
               {"spec", json::parse(config_to_json(sol.spec(), echo_sim))},
               {"d", sol.d()},
               {"d0", sol.d0()},
               {"T", sol.T()},
               {"nt", sol.nt()},
               {"grid", grid},
               {"U", u},
               {"U0", u0}};
  return j.dump() + "\n";
}

std::string nash_to_json(const NashSolution& sol) {
  json grid = json::array(), players = json::array();
  for (int k = 0; k < sol.stored_points(); ++k)
    grid.push_back(sol.stored_time(k));
  for (int i = 0; i <= sol.N(); ++i) {
    json coeffs = json::array();
    for (int k = 0; k < sol.stored_points(); ++k)
      coeffs.push_back(form_to_json(sol.coeff_at(k, i)));
    players.push_back(coeffs);
  }
  const json j{{"kind", "nash"}, {"N", sol.N()},   {"d", sol.spec().d},
               {"d0", sol.spec().d0}, {"T", sol.T()}, {"nt", sol.nt()},
               {"grid", grid},    {"players", players}};
  return j.dump() + "\n";
}

std::string report_to_json(const VerifyReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back(json{{"name", c.name},
                          {"pass", c.pass},
                          {"skipped", c.skipped},
                          {"measured", c.measured},
                          {"threshold", c.threshold},
                          {"note", c.note}});
  return json{{"all_pass", rep.all_pass()}, {"checks", checks}}.dump(2) +
         "\n";
}

std::string table_to_csv(const ConvergenceTable& table) {
  std::ostringstream out;
  out << "N,sample_id,e_minor,e_major,m1,e_minor_norm,e_major_norm\n";
  for (const auto& r : table.rows)
    out << r.N << ',' << r.sample_id << ',' << fmt17(r.e_minor) << ','
        << fmt17(r.e_major) << ',' << fmt17(r.m1) << ','
        << fmt17(r.e_minor_norm) << ',' << fmt17(r.e_major_norm) << '\n';
  return out.str();
}

std::string bundle_to_csv(const PathBundle& bundle) {
  std::ostringstream out;
  out << "t,path_id";
  for (const auto& c : bundle.columns) out << ',' << c;
  out << '\n';
  for (size_t p = 0; p < bundle.paths.size(); ++p) {
    const Eigen::MatrixXd& traj = bundle.paths[p];
    for (size_t k = 0; k < bundle.times.size(); ++k) {
      out << fmt17(bundle.times[k]) << ',' << p;
      for (int c = 0; c < traj.cols(); ++c) out << ',' << fmt17(traj(k, c));
      out << '\n';
    }
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open \"" + path + "\" for writing");
  out << content;
  if (!out) throw ConfigError("write failed for \"" + path + "\"");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace mmfg
