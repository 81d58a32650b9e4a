#pragma once

#include "fgap/domains.hpp"
#include "fgap/eigensolver.hpp"
#include "fgap/jacobi.hpp"
#include "fgap/mesh.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <map>
#include <optional>

namespace fgap {

// ---------------------------------------------------------------- INI text

// "section.key" -> value. Keys outside any section are rejected.
struct IniDocument {
  std::map<std::string, std::string> values;
  std::map<std::string, int> line_of;
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace detail

inline IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::istringstream is(text);
  std::string line, section;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    // Comments start with # or ; at line start or after whitespace.
    for (std::size_t i = 0; i < line.size(); ++i)
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) fail(ErrorCode::validation, where + "malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::validation, where + "expected key = value");
    if (section.empty()) fail(ErrorCode::validation, where + "key outside any section");
    const std::string key = section + "." + detail::trim(line.substr(0, eq));
    if (doc.values.count(key)) fail(ErrorCode::validation, where + "duplicate key " + key);
    doc.values[key] = detail::trim(line.substr(eq + 1));
    doc.line_of[key] = no;
  }
  return doc;
}

// ---------------------------------------------------------------- config

inline const std::vector<std::string>& preset_ids() {
  static const std::vector<std::string> ids = {"euclidean-control", "hyperbolic-2d", "pinched-2d", "mixed-3d"};
  return ids;
}

struct ExperimentConfig {
  std::string preset;
  std::uint64_t seed = 1;
  MetricSpec metric;
  double L = 4;
  std::vector<double> r;
  double tube_radius = 0.7;
  std::optional<double> rho;           // 3D; empty: choose_rho
  std::optional<double> family_lo;     // 2D: fraction of L; 3D: alpha. Empty: default range
  std::optional<double> family_hi;
  std::optional<double> cutoff_delta;  // empty: half the fitted neck rate
  double wectangle_delta = 0.01;
  double lambda1_slack = 0.02;
  double variational_slack = 0.02;
  double f_tol = 1e-3;
  int max_bisections = 60;
  SlabMeshOptions slab;
  HullMeshOptions hull;
  double solver_tol = 1e-10;
  double cluster_tol = 1e-9;
  int max_iterations = 400;
  int convexity_pairs = 24;
  int flattening_trials = 100;
  int sturm_trials = 100;
  int alpha_grid = 11;
  double sandwich_c = 1.0;
  std::string out_dir = "out";
  bool export_matrices = false;
  bool cache = true;

  int dim() const { return metric.dim; }
  double lo() const { return family_lo.value_or(dim() == 3 ? 10.0 / 11.0 : 1.0 / 9.0); }
  double hi() const { return family_hi.value_or(dim() == 3 ? 11.0 / 10.0 : 8.0 / 9.0); }
  EigenOptions eigen_options() const {
    EigenOptions o;
    o.tol = solver_tol;
    o.cluster_tol = cluster_tol;
    o.max_iterations = max_iterations;
    o.seed = seed;
    return o;
  }
};

inline ExperimentConfig preset_config(const std::string& id) {
  ExperimentConfig c;
  c.preset = id;
  c.r = {0.1, 0.07, 0.05, 0.035};
  if (id == "euclidean-control") {
    c.metric = MetricSpec::euclidean(2);
    c.r = {0.5, 0.3, 0.2, 0.1};
    c.cutoff_delta = 0.85;
  } else if (id == "hyperbolic-2d") {
    c.metric = MetricSpec::hyperbolic();
  } else if (id == "pinched-2d") {
    c.metric = MetricSpec::pinched(1.0, 0.2);
  } else if (id == "mixed-3d") {
    c.metric = MetricSpec::mixed(1.0, 0.5);
    c.L = 0.3;
    c.cutoff_delta = 0.5;
  } else {
    fail(ErrorCode::validation, "unknown preset '" + id + "'");
  }
  return c;
}

namespace detail {
inline double parse_double(const std::string& key, const std::string& v) {
  double x = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(x))
    fail(ErrorCode::validation, key + ": '" + v + "' is not a finite number");
  return x;
}
inline long long parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) fail(ErrorCode::validation, key + ": '" + v + "' is not an integer");
  return x;
}
inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::validation, key + ": '" + v + "' is not a boolean");
}
inline std::optional<double> parse_auto(const std::string& key, const std::string& v) {
  if (v == "auto") return std::nullopt;
  return parse_double(key, v);
}
inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::istringstream is(v);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
inline std::string num_auto(const std::optional<double>& x) { return x ? num(*x) : "auto"; }
}  // namespace detail

// Full key = value listing in a fixed order. Parsing it reproduces the config.
inline std::string to_ini(const ExperimentConfig& c, bool with_output = true) {
  using detail::num;
  std::ostringstream os;
  os << "[experiment]\npreset = " << c.preset << "\nseed = " << c.seed << "\n\n";
  os << "[metric]\nfamily = " << c.metric.id() << "\nk_base = " << num(c.metric.k_base)
     << "\nk_amp = " << num(c.metric.k_amp) << "\nk_freq = " << num(c.metric.k_freq)
     << "\nk_phase = " << num(c.metric.k_phase) << "\na = " << num(c.metric.a) << "\nb = " << num(c.metric.b)
     << "\n\n";
  os << "[geometry]\nL = " << num(c.L) << "\nr = ";
  for (std::size_t i = 0; i < c.r.size(); ++i) os << (i ? ", " : "") << num(c.r[i]);
  os << "\ntube_radius = " << num(c.tube_radius) << "\nrho = " << detail::num_auto(c.rho) << "\n\n";
  os << "[family]\nlo = " << detail::num_auto(c.family_lo) << "\nhi = " << detail::num_auto(c.family_hi) << "\n\n";
  os << "[analysis]\ncutoff_delta = " << detail::num_auto(c.cutoff_delta)
     << "\nwectangle_delta = " << num(c.wectangle_delta) << "\nlambda1_slack = " << num(c.lambda1_slack)
     << "\nvariational_slack = " << num(c.variational_slack) << "\nf_tol = " << num(c.f_tol)
     << "\nmax_bisections = " << c.max_bisections << "\n\n";
  os << "[mesh]\nslab_ny = " << c.slab.ny << "\nslab_aspect = " << num(c.slab.aspect) << "\nhull_nx = " << c.hull.nx
     << "\nhull_ny = " << c.hull.ny << "\nhull_nz = " << c.hull.nz << "\n\n";
  os << "[solver]\ntol = " << num(c.solver_tol) << "\ncluster_tol = " << num(c.cluster_tol)
     << "\nmax_iterations = " << c.max_iterations << "\n\n";
  os << "[audit]\nconvexity_pairs = " << c.convexity_pairs << "\nflattening_trials = " << c.flattening_trials
     << "\nsturm_trials = " << c.sturm_trials << "\nalpha_grid = " << c.alpha_grid
     << "\nsandwich_c = " << num(c.sandwich_c) << "\n";
  if (with_output)
    os << "\n[output]\ndir = " << c.out_dir << "\nexport_matrices = " << (c.export_matrices ? "true" : "false")
       << "\ncache = " << (c.cache ? "true" : "false") << "\n";
  return os.str();
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::io_failure, "SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

// Output location and caching never change results, so they stay out of the hash.
inline std::string config_hash(const ExperimentConfig& c) { return sha256_hex(to_ini(c, false)); }

// Quantities derived while validating: curvature bounds and the 3D gates.
struct ResolvedConfig {
  CurvatureBounds bounds;
  double K = 0;  // max |sectional curvature| on the tube
  // 3D only
  double kappa2_0 = 0;
  double rho = 0;
  RhoChoice rho_choice;
  LengthGate gate;
};

inline ResolvedConfig validate(const ExperimentConfig& c) {
  auto bad = [](const std::string& m) { fail(ErrorCode::validation, m); };
  const auto& ids = preset_ids();
  if (std::find(ids.begin(), ids.end(), c.preset) == ids.end()) bad("unknown preset '" + c.preset + "'");
  const MetricFamily expected = c.preset == "euclidean-control" ? MetricFamily::euclidean
                                : c.preset == "hyperbolic-2d"   ? MetricFamily::hyperbolic_const
                                : c.preset == "pinched-2d"      ? MetricFamily::pinched_surface
                                                                : MetricFamily::mixed_3d;
  if (c.metric.family != expected) bad("preset " + c.preset + " needs metric family " + family_id(expected));
  if (c.dim() != (expected == MetricFamily::mixed_3d ? 3 : 2)) bad("metric dimension does not match the preset");
  if (!(c.L > 0)) bad("geometry.L must be positive");
  if (c.r.empty()) bad("geometry.r is empty");
  for (std::size_t i = 0; i < c.r.size(); ++i) {
    if (!(c.r[i] > 0)) bad("geometry.r entries must be positive");
    if (i && !(c.r[i] < c.r[i - 1])) bad("geometry.r must be strictly decreasing");
  }
  if (c.metric.family == MetricFamily::pinched_surface && !(c.metric.k_base >= 1 && c.metric.k_amp >= 0))
    bad("pinched metric needs k_base >= 1 and k_amp >= 0 so curvature stays in [-K^2, -1]");
  if (c.metric.family == MetricFamily::mixed_3d && !(c.metric.a > 0 && c.metric.b > 0))
    bad("mixed metric needs a > 0 and b > 0");
  if (!(c.lo() < c.hi())) bad("family range needs lo < hi");
  if (c.dim() == 2) {
    if (!(c.r.front() < c.tube_radius)) bad("every r must be below the tube radius");
    if (!(c.lo() > 0 && c.hi() < 1)) bad("2D family range is a fraction of L inside (0, 1)");
  } else {
    const double a0 = 10.0 / 11.0, a1 = 11.0 / 10.0;
    if (c.lo() < a0 - 1e-15 || c.hi() > a1 + 1e-15) bad("alpha range must lie in [10/11, 11/10]");
  }
  if (c.cutoff_delta && !(*c.cutoff_delta > 0)) bad("analysis.cutoff_delta must be positive");
  if (!(c.wectangle_delta > 0 && c.wectangle_delta < 0.5)) bad("analysis.wectangle_delta must be in (0, 1/2)");
  if (!(c.lambda1_slack >= 0 && c.variational_slack >= 0)) bad("slacks must be nonnegative");
  if (!(c.f_tol > 0 && c.f_tol < 1)) bad("analysis.f_tol must be in (0, 1)");
  if (c.max_bisections < 1) bad("analysis.max_bisections must be positive");
  if (c.slab.ny < 4 || c.slab.ny % 2 || !(c.slab.aspect > 0)) bad("mesh.slab_ny must be even and >= 4, slab_aspect > 0");
  if (c.hull.nx < 4 || c.hull.ny < 2 || c.hull.nz < 2) bad("hull mesh needs nx >= 4, ny >= 2, nz >= 2");
  if (!(c.solver_tol > 0 && c.cluster_tol > 0) || c.max_iterations < 1) bad("solver tolerances must be positive");
  if (c.convexity_pairs < 1 || c.flattening_trials < 1 || c.sturm_trials < 1 || c.alpha_grid < 2)
    bad("audit counts must be positive (alpha_grid >= 2)");
  if (!(c.sandwich_c > 0)) bad("audit.sandwich_c must be positive");

  ResolvedConfig R;
  try {
    if (c.dim() == 2) {
      R.bounds = tube_bounds(c.metric, c.L, c.tube_radius);
      R.K = R.bounds.K;
      return R;
    }
    // Gates for the 3D construction are checked before any compute.
    R.bounds = tube_bounds(c.metric, c.L, c.r.front());
    R.K = R.bounds.K;
    R.kappa2_0 = R.bounds.kappa2_0;
    if (!R.bounds.pinching_gate) bad("pinching gate 9 kappa2(0)/8 < k2 <= K2 < 7 kappa2(0)/8 < 0 fails");
    R.rho_choice = choose_rho(std::sqrt(R.K), -std::sqrt(std::abs(R.bounds.K2_dir)), c.L);
    R.rho = c.rho.value_or(R.rho_choice.rho);
    if (R.rho < R.rho_choice.rho)
      bad("geometry.rho = " + detail::num(R.rho) + " is below the admissible " + detail::num(R.rho_choice.rho));
    R.gate = length_gate(R.kappa2_0, std::sqrt(R.K), R.rho, [](double) { return 0.0; }, c.L);
    if (!R.gate.passes())
      bad("length gate fails at L = " + detail::num(c.L) + " (max admissible " + detail::num(R.gate.max_admissible_L) + ")");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::validation) throw;
    fail(ErrorCode::validation, e.what());
  }
  return R;
}

// Preset defaults overridden by the file. Unknown keys are errors.
inline ExperimentConfig load_config(const std::string& text) {
  const IniDocument doc = parse_ini(text);
  auto it = doc.values.find("experiment.preset");
  if (it == doc.values.end()) fail(ErrorCode::validation, "experiment.preset is required");
  ExperimentConfig c = preset_config(it->second);
  using namespace detail;
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> set = {
      {"experiment.preset", [](auto&, auto&) {}},
      {"experiment.seed", [&](auto& k, auto& v) { c.seed = std::uint64_t(parse_int(k, v)); }},
      {"metric.family", [&](auto& k, auto& v) {
         if (v != c.metric.id()) fail(ErrorCode::validation, k + ": preset " + c.preset + " uses " + c.metric.id());
       }},
      {"metric.k_base", [&](auto& k, auto& v) { c.metric.k_base = parse_double(k, v); }},
      {"metric.k_amp", [&](auto& k, auto& v) { c.metric.k_amp = parse_double(k, v); }},
      {"metric.k_freq", [&](auto& k, auto& v) { c.metric.k_freq = parse_double(k, v); }},
      {"metric.k_phase", [&](auto& k, auto& v) { c.metric.k_phase = parse_double(k, v); }},
      {"metric.a", [&](auto& k, auto& v) { c.metric.a = parse_double(k, v); }},
      {"metric.b", [&](auto& k, auto& v) { c.metric.b = parse_double(k, v); }},
      {"geometry.L", [&](auto& k, auto& v) { c.L = parse_double(k, v); }},
      {"geometry.r", [&](auto& k, auto& v) { c.r = parse_list(k, v); }},
      {"geometry.tube_radius", [&](auto& k, auto& v) { c.tube_radius = parse_double(k, v); }},
      {"geometry.rho", [&](auto& k, auto& v) { c.rho = parse_auto(k, v); }},
      {"family.lo", [&](auto& k, auto& v) { c.family_lo = parse_auto(k, v); }},
      {"family.hi", [&](auto& k, auto& v) { c.family_hi = parse_auto(k, v); }},
      {"analysis.cutoff_delta", [&](auto& k, auto& v) { c.cutoff_delta = parse_auto(k, v); }},
      {"analysis.wectangle_delta", [&](auto& k, auto& v) { c.wectangle_delta = parse_double(k, v); }},
      {"analysis.lambda1_slack", [&](auto& k, auto& v) { c.lambda1_slack = parse_double(k, v); }},
      {"analysis.variational_slack", [&](auto& k, auto& v) { c.variational_slack = parse_double(k, v); }},
      {"analysis.f_tol", [&](auto& k, auto& v) { c.f_tol = parse_double(k, v); }},
      {"analysis.max_bisections", [&](auto& k, auto& v) { c.max_bisections = int(parse_int(k, v)); }},
      {"mesh.slab_ny", [&](auto& k, auto& v) { c.slab.ny = int(parse_int(k, v)); }},
      {"mesh.slab_aspect", [&](auto& k, auto& v) { c.slab.aspect = parse_double(k, v); }},
      {"mesh.hull_nx", [&](auto& k, auto& v) { c.hull.nx = int(parse_int(k, v)); }},
      {"mesh.hull_ny", [&](auto& k, auto& v) { c.hull.ny = int(parse_int(k, v)); }},
      {"mesh.hull_nz", [&](auto& k, auto& v) { c.hull.nz = int(parse_int(k, v)); }},
      {"solver.tol", [&](auto& k, auto& v) { c.solver_tol = parse_double(k, v); }},
      {"solver.cluster_tol", [&](auto& k, auto& v) { c.cluster_tol = parse_double(k, v); }},
      {"solver.max_iterations", [&](auto& k, auto& v) { c.max_iterations = int(parse_int(k, v)); }},
      {"audit.convexity_pairs", [&](auto& k, auto& v) { c.convexity_pairs = int(parse_int(k, v)); }},
      {"audit.flattening_trials", [&](auto& k, auto& v) { c.flattening_trials = int(parse_int(k, v)); }},
      {"audit.sturm_trials", [&](auto& k, auto& v) { c.sturm_trials = int(parse_int(k, v)); }},
      {"audit.alpha_grid", [&](auto& k, auto& v) { c.alpha_grid = int(parse_int(k, v)); }},
      {"audit.sandwich_c", [&](auto& k, auto& v) { c.sandwich_c = parse_double(k, v); }},
      {"output.dir", [&](auto&, auto& v) { c.out_dir = v; }},
      {"output.export_matrices", [&](auto& k, auto& v) { c.export_matrices = parse_bool(k, v); }},
      {"output.cache", [&](auto& k, auto& v) { c.cache = parse_bool(k, v); }},
  };
  for (const auto& [key, value] : doc.values) {
    auto s = set.find(key);
    if (s == set.end())
      fail(ErrorCode::validation, "line " + std::to_string(doc.line_of.at(key)) + ": unknown key " + key);
    s->second(key, value);
  }
  return c;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::validation, "cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return load_config(ss.str());
}

}  // namespace fgap
