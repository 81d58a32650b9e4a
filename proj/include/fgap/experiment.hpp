#pragma once

#include "fgap/config.hpp"
#include "fgap/gap_analysis.hpp"

#include <chrono>
#include <filesystem>
#include <mutex>

namespace fgap {

// ---------------------------------------------------------------- eigenpair cache

// Binary layout: magic[8], u32 version, u32 key length, key, u64 n, u32 k,
// i32 iterations, i32 ground cluster, f64 shift, then k x (lambda, residual, h[n]).
constexpr std::uint32_t kCacheVersion = 1;
inline constexpr char kCacheMagic[8] = {'F', 'G', 'A', 'P', 'E', 'I', 'G', '\0'};

inline void write_eigen_cache(const std::string& path, const std::string& key, const EigenResult& R) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::io_failure, "cannot write " + tmp);
    auto put = [&os](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
    os.write(kCacheMagic, sizeof kCacheMagic);
    put(kCacheVersion);
    put(std::uint32_t(key.size()));
    os.write(key.data(), std::streamsize(key.size()));
    const std::uint64_t n = R.pairs.empty() ? 0 : std::uint64_t(R.pairs[0].h.size());
    put(n);
    put(std::uint32_t(R.pairs.size()));
    put(std::int32_t(R.iterations));
    put(std::int32_t(R.ground_cluster));
    put(R.shift);
    for (const auto& p : R.pairs) {
      put(p.lambda);
      put(p.residual);
      os.write(reinterpret_cast<const char*>(p.h.data()), std::streamsize(sizeof(double) * n));
    }
    if (!os) fail(ErrorCode::io_failure, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::io_failure, "cannot move " + tmp + " to " + path);
}

inline EigenResult read_eigen_cache(const std::string& path, const std::string& key) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::io_failure, "cannot read " + path);
  auto get = [&is, &path](auto& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) fail(ErrorCode::cache_mismatch, path + " is truncated");
  };
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) fail(ErrorCode::cache_mismatch, path + " is not a cache file");
  std::uint32_t version = 0, klen = 0, k = 0;
  get(version);
  if (version != kCacheVersion)
    fail(ErrorCode::cache_mismatch, path + " has version " + std::to_string(version) + ", expected " +
                                        std::to_string(kCacheVersion));
  get(klen);
  if (klen > 4096) fail(ErrorCode::cache_mismatch, path + " has a corrupt key");
  std::string stored(klen, '\0');
  is.read(stored.data(), klen);
  if (!is || stored != key) fail(ErrorCode::cache_mismatch, path + " was written for a different key");
  std::uint64_t n = 0;
  std::int32_t iterations = 0, cluster = 0;
  EigenResult R;
  get(n);
  get(k);
  get(iterations);
  get(cluster);
  get(R.shift);
  R.iterations = iterations;
  R.ground_cluster = cluster;
  for (std::uint32_t j = 0; j < k; ++j) {
    EigenPair p;
    get(p.lambda);
    get(p.residual);
    p.h.resize(Eigen::Index(n));
    is.read(reinterpret_cast<char*>(p.h.data()), std::streamsize(sizeof(double) * n));
    if (!is) fail(ErrorCode::cache_mismatch, path + " is truncated");
    R.pairs.push_back(std::move(p));
  }
  return R;
}

struct CacheStats {
  std::size_t memory_hits = 0, disk_hits = 0, misses = 0, mismatches = 0;
};

// Solves keyed by the SHA-256 of their canonical description. A file that
// fails to load as this key is recomputed and overwritten.
class EigenCache {
 public:
  EigenCache(std::string dir, bool use_disk) : dir_(std::move(dir)), disk_(use_disk) {
    if (disk_) std::filesystem::create_directories(dir_);
  }

  EigenResult get(const std::string& description, std::size_t n, const std::function<EigenResult()>& solve) {
    const std::string key = sha256_hex("v" + std::to_string(kCacheVersion) + "|" + description);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = mem_.find(key);
      if (it != mem_.end()) {
        ++stats_.memory_hits;
        return it->second;
      }
    }
    const std::string path = dir_ + "/" + key + ".bin";
    if (disk_ && std::filesystem::exists(path)) {
      try {
        EigenResult R = read_eigen_cache(path, key);
        for (const auto& p : R.pairs)
          if (std::size_t(p.h.size()) != n) fail(ErrorCode::cache_mismatch, path + " has the wrong size");
        std::lock_guard<std::mutex> lock(mu_);
        ++stats_.disk_hits;
        return mem_[key] = R;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::cache_mismatch) throw;
        std::lock_guard<std::mutex> lock(mu_);
        ++stats_.mismatches;
      }
    }
    EigenResult R = solve();
    if (disk_) write_eigen_cache(path, key, R);
    std::lock_guard<std::mutex> lock(mu_);
    ++stats_.misses;
    return mem_[key] = R;
  }

  CacheStats stats() const {
    std::lock_guard<std::mutex> lock(mu_);
    return stats_;
  }

 private:
  std::string dir_;
  bool disk_;
  mutable std::mutex mu_;
  std::map<std::string, EigenResult> mem_;
  CacheStats stats_;
};

// ---------------------------------------------------------------- records

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct GapRow {
  double r = kNaN, param = kNaN;
  std::string status = "ok", error;
  double lambda1 = kNaN, lambda2 = kNaN, gap = kNaN, D = kNaN, gap_D2 = kNaN;
  double gap_bound = kNaN, bound_D2 = kNaN, R_psih = kNaN, R_orth = kNaN, F_rel = kNaN;
  int evaluations = 0;
  double lipschitz = kNaN;
  bool monotone = false;
  double I = kNaN, II = kNaN, B_over_r2 = kNaN, coupling = kNaN, layers = kNaN, v = kNaN;
  double sup_neck = kNaN, sup_argmax = kNaN, C_hat = kNaN, log_slope_r = kNaN;
  bool doubling_pass = false, convex = false;
  int cluster = 0;         // eigenvalues the solver treats as tied with lambda1
  bool certified = false;  // gap <= gap_bound up to a roundoff floor
  double lambda1_bound = kNaN, grad_ratio = kNaN, grad_bound = kNaN;
  double rho = kNaN, alpha = kNaN, neck_bound = kNaN, bulk = kNaN, neck_ratio = kNaN;
  bool ok() const { return status == "ok"; }
};

struct Profile {
  double r = 0;
  std::vector<double> x, V;
};

struct FitEntry {
  std::string name;
  bool ok = false;
  std::string error;
  ExpFit fit;
};

struct AuditRow {
  std::string stage, name, subject;
  double value = kNaN;
  bool pass = false;
  bool acceptance = true;  // failing rows make the run exit with the acceptance code
  std::string detail;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunRecord {
  ExperimentConfig config;
  std::string hash;
  double cutoff_delta = kNaN;
  std::vector<double> neck_reference;  // sup_N h at the reference parameter, per r
  std::vector<std::string> neck_reference_error;
  std::vector<GapRow> rows;
  std::vector<Profile> profiles;
  std::vector<std::vector<ScanPoint>> scans;
  std::vector<FitEntry> fits;
  DoublingTrend trend;
  std::string trend_error;
  std::vector<AuditRow> audits;
  std::vector<Check> checks;
  std::map<std::string, double> timings;
  CacheStats cache;

  bool acceptance_ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    for (const auto& a : audits)
      if (a.acceptance && !a.pass) return false;
    return true;
  }
  const FitEntry* fit(const std::string& name) const {
    for (const auto& f : fits)
      if (f.name == name) return &f;
    return nullptr;
  }
};

// ---------------------------------------------------------------- pipeline

namespace detail {

class StageClock {
 public:
  void add(const std::string& stage, double seconds) {
    std::lock_guard<std::mutex> lock(mu_);
    t_[stage] += seconds;
  }
  template <class F>
  auto time(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Guard {
      StageClock* c;
      std::string s;
      std::chrono::steady_clock::time_point t0;
      ~Guard() { c->add(s, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()); }
    } g{this, stage, t0};
    return f();
  }
  std::map<std::string, double> totals() const {
    std::lock_guard<std::mutex> lock(mu_);
    return t_;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, double> t_;
};

inline std::string error_text(const std::exception& e) { return e.what(); }
inline std::string error_status(const std::exception& e) {
  if (auto* fe = dynamic_cast<const Error*>(&e)) return to_string(fe->code());
  return "runtime-error";
}

struct Solved {
  std::shared_ptr<const Mesh> mesh;
  DiscreteForms F;
  EigenResult res;
  std::shared_ptr<const ConvexDomain3D> hull;  // 3D only
  NeckProfile neck;                            // 3D only
  double center = 0, orientation = 1;
};

class Sweep {
 public:
  Sweep(const ExperimentConfig& c, const ResolvedConfig& R, EigenCache& cache, StageClock& clock)
      : c_(c), R_(R), cache_(cache), clock_(clock), metric_fn_(catalog_metric(c.metric)) {}

  bool three_d() const { return c_.dim() == 3; }

  // 2D: t range clipped to the constructible family. 3D: alpha range.
  std::pair<double, double> bracket(double r) const {
    if (three_d()) return {c_.lo(), c_.hi()};
    const auto fam = family(r);
    return {std::max(fam->t_min, c_.lo() * c_.L), std::min(fam->t_max, c_.hi() * c_.L)};
  }
  double reference_param(double r) const {
    const auto [lo, hi] = bracket(r);
    return std::clamp(three_d() ? 1.0 : c_.L / 2, lo, hi);
  }
  double neck_halfwidth() const { return (three_d() ? 2 * c_.L : c_.L) / 18; }

  std::shared_ptr<const NeckFamily2D> family(double r) const {
    std::lock_guard<std::mutex> lock(fam_mu_);
    auto it = families_.find(r);
    if (it != families_.end()) return it->second;
    return families_[r] = make_family_2d(c_.metric, r, c_.L, c_.tube_radius);
  }

  Solved solve(double r, double p) const {
    Solved s;
    std::ostringstream key;
    key.precision(17);
    key << (three_d() ? "3d|" : "2d|") << c_.metric.canonical() << "|r=" << r << "|L=" << c_.L << "|p=" << p;
    if (three_d()) {
      auto D = clock_.time("geometry", [&] {
        return std::make_shared<const ConvexDomain3D>(build_domain_3d(c_.metric, r, R_.rho, p, c_.L, R_.gate));
      });
      s.neck = height_and_neck(*D, R_.kappa2_0);
      s.center = s.neck.neck_center;
      s.orientation = -1;
      s.hull = D;
      s.mesh = clock_.time("mesh", [&] { return std::make_shared<const Mesh>(mesh_hull(*D, c_.hull)); });
      key << "|rho=" << R_.rho << "|hull=" << c_.hull.nx << ',' << c_.hull.ny << ',' << c_.hull.nz;
    } else {
      const auto fam = family(r);
      s.mesh = clock_.time("mesh", [&] { return std::make_shared<const Mesh>(mesh_slab(ConvexDomain2D(fam, p), c_.slab)); });
      key << "|tube=" << c_.tube_radius << "|slab=" << c_.slab.ny << ',' << c_.slab.aspect << ',' << c_.slab.max_dx;
    }
    s.F = clock_.time("assemble", [&] { return assemble(s.mesh, c_.metric); });
    const EigenOptions opt = c_.eigen_options();
    key << "|tol=" << opt.tol << "|cluster=" << opt.cluster_tol << "|maxit=" << opt.max_iterations
        << "|seed=" << opt.seed << "|k=2";
    s.res = clock_.time("eigensolve", [&] {
      return cache_.get(key.str(), s.mesh->num_vertices(), [&] { return smallest_eigenpairs(s.F, 2, opt); });
    });
    return s;
  }

  CutoffFn cutoff_for(const Solved& s, double r, double delta, double fitted_c) const {
    return resolved_cutoff(*s.mesh, s.center, r, delta, s.orientation, fitted_c);
  }

  // sup_N h1 at the reference parameter. The cluster is balanced first so a
  // symmetric pair yields the even state.
  double neck_reference(double r, double probe_delta) const {
    Solved s = solve(r, reference_param(r));
    balance_cluster(s.F, s.res, cutoff_for(s, r, probe_delta, kNaN));
    return neck_sup(*s.mesh, s.res.pairs[0].h, s.center, neck_halfwidth()).sup;
  }

  double diameter(const Domain& d, std::uint64_t seed, bool& convex) const {
    std::vector<Vec> pts;
    if (three_d()) {
      const auto& D = static_cast<const ConvexDomain3D&>(d);
      for (int i = 0; i < 8; ++i) pts.push_back(D.vertex(i & 1, (i >> 1) & 1, (i >> 2) & 1));
    } else {
      for (const auto& p : static_cast<const ConvexDomain2D&>(d).corners()) pts.push_back(p);
    }
    double D = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) D = std::max(D, connect(c_.metric, pts[i], pts[j]).distance);
    const auto audit = convexity_audit(d, std::size_t(c_.convexity_pairs), seed, 1, false);
    convex = audit.pass;
    return std::max(D, audit.diameter);
  }

  void cell(std::size_t index, double r, double delta, double fitted_c, GapRow& row, Profile& prof,
            std::vector<ScanPoint>& scan, const std::string& matrix_dir) const {
    row.r = r;
    const auto [lo, hi] = bracket(r);
    auto F_of = [&](double p) {
      Solved s = solve(r, p);
      const CutoffFn psi = cutoff_for(s, r, delta, fitted_c);
      balance_cluster(s.F, s.res, psi);
      return ansatz_F_rel(s.F, s.res.pairs[0].h, psi);
    };
    const ContinuityResult cr = continuity_scan(F_of, lo, hi, c_.f_tol, c_.max_bisections);
    scan = cr.table;
    row.param = cr.root;
    row.evaluations = cr.evaluations;
    row.lipschitz = cr.lipschitz;
    row.monotone = cr.monotone;

    Solved s = solve(r, cr.root);
    const CutoffFn psi = cutoff_for(s, r, delta, fitted_c);
    balance_cluster(s.F, s.res, psi);
    const EigenPair& e1 = s.res.pairs[0];
    const AnsatzReport A = clock_.time("analysis", [&] { return ansatz_report(s.F, e1, psi, r); });
    row.lambda1 = e1.lambda;
    row.lambda2 = s.res.pairs[1].lambda;
    row.gap = row.lambda2 - row.lambda1;
    row.gap_bound = A.gap_bound;
    row.R_psih = A.R_psih;
    row.R_orth = A.R_orth;
    row.F_rel = A.F_rel;
    row.I = A.I;
    row.II = A.II;
    row.B_over_r2 = A.B_over_r2;
    row.coupling = A.coupling;
    row.layers = A.layers;
    row.v = A.v;
    const NeckSup ns = neck_sup(*s.mesh, e1.h, s.center, neck_halfwidth());
    row.sup_neck = ns.sup;
    row.sup_argmax = ns.argmax_x;

    clock_.time("diameter", [&] {
      if (three_d()) {
        row.D = diameter(*s.hull, c_.seed + index, row.convex);
      } else {
        row.D = diameter(ConvexDomain2D(family(r), cr.root), c_.seed + index, row.convex);
      }
      return 0;
    });
    row.cluster = s.res.ground_cluster;
    // Eigenvalues carry roundoff of a few hundred ulps of lambda2.
    row.certified = row.gap <= row.gap_bound + 1e-13 * row.lambda2;
    row.gap_D2 = row.gap * row.D * row.D;
    row.bound_D2 = row.gap_bound * row.D * row.D;

    if (three_d()) {
      row.rho = R_.rho;
      row.alpha = cr.root;
      row.neck_bound = s.neck.bound;
      row.bulk = s.neck.bulk_measure;
      row.neck_ratio = s.neck.ratio;
      const double m = std::max(1.0, cr.root);
      row.lambda1_bound = 4 * kPi * kPi / (row.bulk * row.bulk) +
                          4 * kPi * kPi / ((m + row.neck_bound) * (m + row.neck_bound) * r * r) +
                          kPi * kPi / (R_.rho * R_.rho * r * r);
    } else {
      clock_.time("analysis", [&] {
        const VerticalProfile P = vertical_profile(*s.mesh, e1, metric_fn_, doubling_window(0, c_.L));
        const DoublingAudit d = doubling_audit(P, r, c_.L);
        row.C_hat = d.C_hat;
        row.log_slope_r = d.log_slope_r;
        row.doubling_pass = d.pass;
        prof.r = r;
        prof.x = P.x;
        prof.V = P.V;
        row.grad_ratio = max_gradient_ratio(*s.mesh, e1.h, metric_fn_);
        row.grad_bound = gradient_bound_constant(row.lambda1, R_.K, 2).value;
        return 0;
      });
      row.lambda1_bound = lambda1_upper_bound(r, c_.L, c_.wectangle_delta);
    }
    if (!matrix_dir.empty()) {
      std::ostringstream stem;
      stem << matrix_dir << "/r" << index;
      write_matrix_market(stem.str() + "_A.mtx", s.F.A);
      write_matrix_market(stem.str() + "_M.mtx", s.F.M);
    }
  }

 private:
  const ExperimentConfig& c_;
  const ResolvedConfig& R_;
  EigenCache& cache_;
  StageClock& clock_;
  MetricFn metric_fn_;
  mutable std::mutex fam_mu_;
  mutable std::map<double, std::shared_ptr<const NeckFamily2D>> families_;
};

inline std::string fmt(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string r_label(double r) { return "r=" + fmt(r); }

}  // namespace detail

// ---------------------------------------------------------------- audits

// Geometry and Jacobi audits. Each audit is isolated: an exception becomes a failing row.
inline std::vector<AuditRow> geometry_audits(const ExperimentConfig& c, const ResolvedConfig& R, unsigned workers = 1) {
  std::vector<AuditRow> out;
  auto guarded = [&](const std::string& stage, const std::string& name, const std::string& subject, bool acceptance,
                     const std::function<void(AuditRow&)>& body) {
    AuditRow row{stage, name, subject, kNaN, false, acceptance, ""};
    try {
      body(row);
    } catch (const std::exception& e) {
      row.pass = false;
      row.detail = e.what();
    }
    out.push_back(row);
  };
  const bool three_d = c.dim() == 3;
  const bool hyper = c.metric.family == MetricFamily::hyperbolic_const;
  const bool pinched = c.metric.family == MetricFamily::pinched_surface;

  guarded("curvature", "tube_max_abs_sectional", "", false, [&](AuditRow& a) {
    a.value = R.K;
    a.pass = true;
    a.detail = "K1=" + detail::fmt(R.bounds.K1) + " K2=" + detail::fmt(R.bounds.K2);
  });

  // Remainder of the quadratic Fermi expansion: slopes >= 2.9.
  guarded("expansion", "min_residual_slope", "", hyper || three_d, [&](AuditRow& a) {
    const CatalogFermi ch(c.metric, c.L, three_d ? 0.2 : 0.4);
    const std::vector<double> radii = three_d ? std::vector<double>{0.0125, 0.025, 0.05, 0.1, 0.2}
                                              : std::vector<double>{0.025, 0.05, 0.1, 0.2, 0.4};
    const auto rep = expansion_audit(ch, radii);
    a.value = rep.min_slope();
    a.pass = a.value >= 2.9;
    std::ostringstream os;
    for (const auto& comp : rep.components)
      os << "g" << comp.i << comp.j << ":" << (comp.exact ? std::string("exact") : detail::fmt(comp.slope)) << ' ';
    a.detail = detail::trim(os.str());
  });

  // Randomised Sturm trials with piecewise-linear g1 in (0, K).
  guarded("sturm", "dominance_trials", "", true, [&](AuditRow& a) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int ok = 0;
    for (int t = 0; t < c.sturm_trials; ++t) {
      const double K = 0.5 + 2 * u(rng);
      const double w = kPi / std::sqrt(K) * (0.2 + 0.75 * u(rng));
      const double lo = -w / 2, hi = w / 2;
      std::vector<double> levels;
      for (int i = 0; i <= 6; ++i) levels.push_back(K * (0.02 + 0.96 * u(rng)));
      auto g1 = [&](double x) {
        const double s = std::clamp((x - lo) / (hi - lo) * 6, 0.0, 6.0);
        const std::size_t i = std::min<std::size_t>(5, std::size_t(s));
        return levels[i] + (s - double(i)) * (levels[i + 1] - levels[i]);
      };
      const double A = 0.5 + u(rng), B = 0.5 + u(rng);
      ok += sturm_compare(g1, K, lo, hi, A, B).dominance;
    }
    a.value = ok;
    a.pass = ok == c.sturm_trials;
    a.detail = std::to_string(ok) + "/" + std::to_string(c.sturm_trials);
  });

  if (!three_d && (hyper || pinched)) {
    const double Kr = std::sqrt(R.K);
    for (double r : c.r) {
      RauchReport rep;
      guarded("rauch", "lower", detail::r_label(r), true, [&](AuditRow& a) {
        rep = rauch_sandwich(catalog_form(c.metric), r, c.L, Kr);
        a.value = rep.worst_lower;
        a.pass = rep.lower_holds;
        a.detail = "r cosh(x) <= |J|; worst relative violation";
      });
      guarded("rauch", "upper_printed", detail::r_label(r), true, [&](AuditRow& a) {
        a.value = rep.worst_literal;
        a.pass = !rep.samples.empty() && rep.literal_upper_holds;
        a.detail = "|J| <= (r/K) cosh(K x) with K=" + detail::fmt(Kr);
      });
      guarded("rauch", "upper_corrected", detail::r_label(r), false, [&](AuditRow& a) {
        a.value = rep.worst_corrected;
        a.pass = !rep.samples.empty() && rep.corrected_upper_holds;
        a.detail = "|J| <= r cosh(K x)";
      });
    }
  }

  if (three_d) {
    guarded("gates", "pinching", "", true, [&](AuditRow& a) {
      a.value = R.bounds.kappa2_0;
      a.pass = R.bounds.pinching_gate;
      a.detail = "k2=" + detail::fmt(R.bounds.k2) + " K2=" + detail::fmt(R.bounds.K2_dir);
    });
    guarded("gates", "length", "", true, [&](AuditRow& a) {
      a.value = R.gate.max_admissible_L;
      a.pass = R.gate.passes();
      a.detail = "L=" + detail::fmt(c.L) + " max admissible";
    });
    guarded("gates", "choose_rho", "", true, [&](AuditRow& a) {
      a.value = R.rho;
      a.pass = R.rho >= R.rho_choice.rho && R.rho > R.rho_choice.lower_bound;
      a.detail = "admissible " + detail::fmt(R.rho_choice.rho) + ", lower bound " + detail::fmt(R.rho_choice.lower_bound);
    });
    guarded("flattening", "trials", "", true, [&](AuditRow& a) {
      const auto rep = flattening_audit(catalog_form(c.metric), R.gate, std::size_t(c.flattening_trials), c.seed, workers);
      a.value = std::min({rep.worst_lower, rep.worst_upper, rep.worst_envelope});
      a.pass = rep.pass;
      a.detail = "min margin over lower, upper, envelope";
    });
    const int n = c.alpha_grid;
    for (int k = 0; k < n; ++k) {
      const double alpha = c.lo() + (c.hi() - c.lo()) * k / (n - 1);
      for (double r : c.r) {
        guarded("hull", "height_sandwich", detail::r_label(r) + " alpha=" + detail::fmt(alpha), true, [&](AuditRow& a) {
          const auto D = build_domain_3d(c.metric, r, R.rho, alpha, c.L, R.gate);
          const auto P = height_and_neck(D, R.kappa2_0);
          a.value = std::max(P.sandwich.worst_below, P.sandwich.worst_above) / (r * r);
          a.pass = P.sandwich.holds(c.sandwich_c * r * r);
          a.detail = "worst excess / r^2, ratio " + detail::fmt(P.ratio) + ", closure defect " +
                     detail::fmt(D.quality().closure_defect);
        });
      }
      guarded("hull", "neck_bulk_ratio", "alpha=" + detail::fmt(alpha), true, [&](AuditRow& a) {
        const auto D = build_domain_3d(c.metric, c.r.back(), R.rho, alpha, c.L, R.gate);
        const auto P = height_and_neck(D, R.kappa2_0);
        a.value = P.ratio;
        a.pass = P.ratio < 1;
        a.detail = "neck bound " + detail::fmt(P.bound) + ", bulk " + detail::fmt(P.bulk_measure);
      });
    }
  }

  // Convexity of the reference domain of each r.
  for (std::size_t i = 0; i < c.r.size(); ++i) {
    const double r = c.r[i];
    guarded("convexity", "geodesic_containment", detail::r_label(r), true, [&](AuditRow& a) {
      ConvexityReport rep;
      if (three_d) {
        const auto D = build_domain_3d(c.metric, r, R.rho, std::clamp(1.0, c.lo(), c.hi()), c.L, R.gate);
        rep = convexity_audit(D, std::size_t(c.convexity_pairs), c.seed + 1000 + i, workers, false);
      } else {
        const auto fam = make_family_2d(c.metric, r, c.L, c.tube_radius);
        const double t = std::clamp(c.L / 2, fam->t_min, fam->t_max);
        rep = convexity_audit(ConvexDomain2D(fam, t), std::size_t(c.convexity_pairs), c.seed + 1000 + i, workers, false);
      }
      a.value = rep.worst_excursion;
      a.pass = rep.pass;
      a.detail = "diameter " + detail::fmt(rep.diameter);
    });
    if (!three_d && (hyper || pinched))
      guarded("wectangle", "containment", detail::r_label(r), true, [&](AuditRow& a) {
        const auto fam = make_family_2d(c.metric, r, c.L, c.tube_radius);
        const auto W = contained_wectangle(ConvexDomain2D(fam, std::clamp(c.L / 2, fam->t_min, fam->t_max)), c.wectangle_delta);
        a.value = W.half_height;
        a.pass = true;
        a.detail = "half height (1 - 2 delta) r cosh(L/4)";
      });
  }
  return out;
}

// ---------------------------------------------------------------- checks

inline std::vector<Check> acceptance_checks(const RunRecord& rec) {
  const ExperimentConfig& c = rec.config;
  std::vector<Check> out;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) { out.push_back({name, pass, detail}); };
  std::vector<const GapRow*> ok;
  for (const auto& r : rec.rows)
    if (r.ok()) ok.push_back(&r);
  const bool all_ok = !rec.rows.empty() && ok.size() == rec.rows.size();
  add("cells_completed", all_ok, std::to_string(ok.size()) + "/" + std::to_string(rec.rows.size()) + " cells ok");

  {
    bool pass = all_ok;
    double worst = 0;
    for (const auto* r : ok) {
      worst = std::max(worst, std::abs(r->F_rel));
      pass = pass && std::abs(r->F_rel) < c.f_tol;
    }
    std::string detail = "max |F|/|h|^2 = " + detail::fmt(worst);
    const bool symmetric = c.metric.family == MetricFamily::hyperbolic_const || c.metric.family == MetricFamily::euclidean;
    if (symmetric) {
      double dev = 0;
      for (const auto* r : ok) dev = std::max(dev, std::abs(r->param - c.L / 2));
      pass = pass && dev <= 1e-2;
      detail += ", max |t0 - L/2| = " + detail::fmt(dev);
    }
    add("continuity_root", pass, detail);
  }
  {
    bool pass = all_ok;
    double worst = 0;
    for (const auto* r : ok) {
      worst = std::max(worst, r->lambda2 / r->R_orth);
      pass = pass && r->lambda2 <= r->R_orth * (1 + c.variational_slack);
    }
    add("variational_bound", pass, "max lambda2 / R_orth = " + detail::fmt(worst));
  }

  const double three_pi2 = 3 * kPi * kPi;
  if (c.preset == "euclidean-control") {
    bool pass = all_ok;
    double lo = 1e300;
    for (const auto* r : ok) {
      lo = std::min(lo, r->gap_D2 / three_pi2);
      pass = pass && r->gap_D2 >= three_pi2;
    }
    add("control_gap_conjecture", pass, "min gap D^2 / 3 pi^2 = " + detail::fmt(lo));
    int n = 0;
    double dev = 0;
    for (const auto* r : ok)
      if (c.L / (2 * r->r) >= 10) {
        ++n;
        dev = std::max(dev, std::abs(r->gap_D2 / three_pi2 - 1));
      }
    add("control_aspect_limit", n > 0 && dev <= 0.05,
        std::to_string(n) + " rows with aspect >= 10, max |gap D^2 / 3 pi^2 - 1| = " + detail::fmt(dev));
    bool none = all_ok;
    for (const auto* r : ok) none = none && !r->doubling_pass;
    add("control_doubling_fails", none && !rec.trend.pass, "no row passes the doubling audit");
    const FitEntry* nf = rec.fit("neck_suppression");
    add("control_no_neck_decay", nf && !nf->ok && nf->error.rfind("positive-slope", 0) == 0,
        nf ? (nf->ok ? "unexpected decay" : nf->error) : "missing");
    const FitEntry* gf = rec.fit("gap_decay_actual");
    add("control_no_gap_decay", gf && !gf->ok && gf->error.rfind("non-decaying", 0) == 0,
        gf ? (gf->ok ? "unexpected decay" : gf->error) : "missing");
    return out;
  }

  if (c.dim() == 2) {
    add("doubling_trend", all_ok && rec.trend.pass,
        rec.trend_error.empty() ? "C_min " + detail::fmt(rec.trend.C_min) + ", C(0) " + detail::fmt(rec.trend.C_at_zero)
                                : rec.trend_error);
    const FitEntry* nf = rec.fit("neck_suppression");
    add("neck_suppression", nf && nf->ok && nf->fit.c > 0 && nf->fit.r2 >= 0.95,
        nf ? (nf->ok ? "c " + detail::fmt(nf->fit.c) + ", R^2 " + detail::fmt(nf->fit.r2) : nf->error) : "missing");
    int certified = 0;
    for (const auto* r : ok) certified += r->certified;
    add("gap_certified", all_ok && certified == int(ok.size()),
        std::to_string(certified) + "/" + std::to_string(ok.size()) + " rows with lambda2 - lambda1 <= gap bound");
    bool grad = all_ok;
    for (const auto* r : ok) grad = grad && r->grad_ratio <= r->grad_bound;
    add("gradient_bound", grad, "discrete |grad h|/|h| below the heat-kernel bound");
    if (c.metric.family == MetricFamily::hyperbolic_const) {
      bool pass = all_ok;
      double worst = 0;
      for (const auto* r : ok) {
        worst = std::max(worst, r->lambda1 / r->lambda1_bound);
        pass = pass && r->lambda1 <= r->lambda1_bound * (1 + c.lambda1_slack);
      }
      add("lambda1_bound", pass, "max lambda1 / bound = " + detail::fmt(worst));
    }
  } else {
    bool ratio = all_ok, bound = all_ok;
    double worst = 0;
    for (const auto* r : ok) {
      ratio = ratio && r->neck_ratio < 1;
      bound = bound && r->lambda1 <= r->lambda1_bound;
      worst = std::max(worst, r->lambda1 / r->lambda1_bound);
    }
    add("neck_ratio", ratio, "neck/bulk height ratio below 1 at every root");
    add("lambda1_bound_3d", bound, "max lambda1 / bound = " + detail::fmt(worst));
    return out;
  }

  bool decreasing = all_ok;
  for (std::size_t i = 1; i < ok.size(); ++i) decreasing = decreasing && ok[i]->bound_D2 < ok[i - 1]->bound_D2;
  const FitEntry* gf = rec.fit("gap_decay");
  add("gap_decay", decreasing && gf && gf->ok && gf->fit.r2 >= 0.95,
      std::string(decreasing ? "strictly decreasing" : "not strictly decreasing") + ", " +
          (gf ? (gf->ok ? "c " + detail::fmt(gf->fit.c) + ", R^2 " + detail::fmt(gf->fit.r2) : gf->error) : "missing"));
  return out;
}

// ---------------------------------------------------------------- run

struct RunOptions {
  unsigned workers = 1;
  bool audits = true;
  bool sweep = true;
  std::function<void(std::size_t)> before_cell;  // fault injection in tests
};

inline FitEntry run_fit(const std::string& name, const std::function<ExpFit()>& f) {
  FitEntry e;
  e.name = name;
  try {
    e.fit = f();
    e.ok = true;
  } catch (const std::exception& ex) {
    e.error = ex.what();
  }
  return e;
}

inline RunRecord run_experiment(const ExperimentConfig& c, const ResolvedConfig& R, const RunOptions& opt = {}) {
  RunRecord rec;
  rec.config = c;
  rec.hash = config_hash(c);
  detail::StageClock clock;
  if (opt.audits) rec.audits = clock.time("audits", [&] { return geometry_audits(c, R, opt.workers); });
  if (!opt.sweep) {
    rec.timings = clock.totals();
    return rec;
  }

  EigenCache cache(c.out_dir + "/cache", c.cache);
  detail::Sweep sweep(c, R, cache, clock);
  const std::size_t n = c.r.size();

  // Pass 1: neck suppression at the reference parameter fixes the cutoff rate.
  const double probe = c.cutoff_delta.value_or(1.0);
  rec.neck_reference.assign(n, kNaN);
  rec.neck_reference_error.assign(n, "");
  parallel_for(n, opt.workers, [&](std::size_t i) {
    try {
      rec.neck_reference[i] = sweep.neck_reference(c.r[i], probe);
    } catch (const std::exception& e) {
      rec.neck_reference_error[i] = e.what();
    }
  });
  rec.fits.push_back(run_fit("neck_suppression", [&] {
    for (const auto& e : rec.neck_reference_error)
      if (!e.empty()) fail(ErrorCode::insufficient_sweep, "reference solve failed: " + e);
    return neck_suppression(c.r, rec.neck_reference);
  }));
  const FitEntry& neck = rec.fits.back();
  const double fitted_c = neck.ok ? neck.fit.c : kNaN;
  std::string delta_error;
  if (c.cutoff_delta) {
    rec.cutoff_delta = *c.cutoff_delta;
  } else if (neck.ok) {
    rec.cutoff_delta = 0.5 * fitted_c;
  } else {
    delta_error = "cutoff rate unavailable: " + neck.error;
  }

  // Pass 2: continuity scan and analysis per r.
  rec.rows.assign(n, GapRow{});
  rec.profiles.assign(n, Profile{});
  rec.scans.assign(n, {});
  std::string matrix_dir;
  if (c.export_matrices) {
    matrix_dir = c.out_dir + "/matrices";
    std::filesystem::create_directories(matrix_dir);
  }
  parallel_for(n, opt.workers, [&](std::size_t i) {
    GapRow& row = rec.rows[i];
    row.r = c.r[i];
    try {
      if (!delta_error.empty()) fail(ErrorCode::positive_slope, delta_error);
      if (opt.before_cell) opt.before_cell(i);
      sweep.cell(i, c.r[i], rec.cutoff_delta, fitted_c, row, rec.profiles[i], rec.scans[i], matrix_dir);
    } catch (const std::exception& e) {
      row.status = detail::error_status(e);
      row.error = e.what();
    }
  });

  std::vector<double> rs, bound, actual, C_hat;
  for (const auto& row : rec.rows)
    if (row.ok()) {
      rs.push_back(row.r);
      bound.push_back(row.bound_D2);
      actual.push_back(row.gap_D2);
      C_hat.push_back(row.C_hat);
    }
  rec.fits.push_back(run_fit("gap_decay", [&] { return gap_decay_fit(rs, bound); }));
  rec.fits.push_back(run_fit("gap_decay_actual", [&] { return gap_decay_fit(rs, actual); }));
  if (c.dim() == 2) {
    try {
      if (rs.size() != c.r.size()) fail(ErrorCode::insufficient_data, "failed cells leave the doubling trend incomplete");
      rec.trend = doubling_trend(rs, C_hat);
    } catch (const std::exception& e) {
      rec.trend_error = e.what();
    }
  }
  rec.checks = acceptance_checks(rec);
  rec.cache = cache.stats();
  rec.timings = clock.totals();
  return rec;
}

// ---------------------------------------------------------------- outputs

inline const char* kGapReportHeader =
    "preset,r,param,status,lambda1,lambda2,gap,D,gap_D2,gap_bound,bound_D2,R_psih,R_orth,F_rel,evaluations,"
    "lipschitz,monotone,I,II,B_over_r2,coupling,layers,v,sup_neck,sup_argmax,C_hat,log_slope_r,doubling_pass,"
    "lambda1_bound,grad_ratio,grad_bound,convex,cluster,certified,rho,alpha,neck_bound,bulk,neck_ratio,error";

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' ? ' ' : ch;
  }
  return q + "\"";
}

inline std::string gap_report_csv(const RunRecord& rec) {
  using detail::fmt;
  std::ostringstream os;
  os << kGapReportHeader << '\n';
  for (const auto& w : rec.rows) {
    os << rec.config.preset << ',' << fmt(w.r) << ',' << fmt(w.param) << ',' << w.status << ',' << fmt(w.lambda1) << ','
       << fmt(w.lambda2) << ',' << fmt(w.gap) << ',' << fmt(w.D) << ',' << fmt(w.gap_D2) << ',' << fmt(w.gap_bound)
       << ',' << fmt(w.bound_D2) << ',' << fmt(w.R_psih) << ',' << fmt(w.R_orth) << ',' << fmt(w.F_rel) << ','
       << w.evaluations << ',' << fmt(w.lipschitz) << ',' << int(w.monotone) << ',' << fmt(w.I) << ',' << fmt(w.II)
       << ',' << fmt(w.B_over_r2) << ',' << fmt(w.coupling) << ',' << fmt(w.layers) << ',' << fmt(w.v) << ','
       << fmt(w.sup_neck) << ',' << fmt(w.sup_argmax) << ',' << fmt(w.C_hat) << ',' << fmt(w.log_slope_r) << ','
       << int(w.doubling_pass) << ',' << fmt(w.lambda1_bound) << ',' << fmt(w.grad_ratio) << ','
       << fmt(w.grad_bound) << ',' << int(w.convex) << ',' << w.cluster << ',' << int(w.certified) << ',' << fmt(w.rho) << ',' << fmt(w.alpha) << ','
       << fmt(w.neck_bound) << ',' << fmt(w.bulk) << ',' << fmt(w.neck_ratio) << ',' << csv_quote(w.error) << '\n';
  }
  return os.str();
}

inline std::string audits_csv(const RunRecord& rec) {
  std::ostringstream os;
  os << "stage,name,subject,value,pass,acceptance,detail\n";
  for (const auto& a : rec.audits)
    os << a.stage << ',' << a.name << ',' << csv_quote(a.subject) << ',' << detail::fmt(a.value) << ',' << int(a.pass)
       << ',' << int(a.acceptance) << ',' << csv_quote(a.detail) << '\n';
  for (const auto& c : rec.checks)
    os << "acceptance," << c.name << ",," << ',' << int(c.pass) << ",1," << csv_quote(c.detail) << '\n';
  return os.str();
}

inline std::string fits_text(const RunRecord& rec) {
  using detail::fmt;
  std::ostringstream os;
  os << "config_hash = " << rec.hash << "\npreset = " << rec.config.preset << "\ncutoff_delta = " << fmt(rec.cutoff_delta)
     << "\n";
  os << "\n[neck_reference]\n";
  for (std::size_t i = 0; i < rec.neck_reference.size(); ++i)
    os << detail::r_label(rec.config.r[i]) << " sup_N = "
       << (rec.neck_reference_error[i].empty() ? fmt(rec.neck_reference[i]) : rec.neck_reference_error[i]) << "\n";
  for (const auto& f : rec.fits) {
    os << "\n[" << f.name << "]\n";
    if (!f.ok) {
      os << "status = " << f.error << "\n";
      continue;
    }
    os << "status = ok\nc = " << fmt(f.fit.c) << "\nC = " << fmt(f.fit.C) << "\nR2 = " << fmt(f.fit.r2)
       << "\ndrop = " << fmt(f.fit.drop) << "\n";
  }
  if (rec.config.dim() == 2) {
    os << "\n[doubling_trend]\n";
    if (rec.trend_error.empty())
      os << "status = " << (rec.trend.pass ? "pass" : "fail") << "\nC_min = " << fmt(rec.trend.C_min)
         << "\nC_at_zero = " << fmt(rec.trend.C_at_zero) << "\n";
    else
      os << "status = " << rec.trend_error << "\n";
  }
  os << "\n[checks]\n";
  for (const auto& c : rec.checks) os << c.name << " = " << (c.pass ? "PASS" : "FAIL") << " (" << c.detail << ")\n";
  return os.str();
}

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

// Minimal line chart. Non-finite points are skipped.
inline std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                            const std::vector<PlotSeries>& series) {
  const double W = 640, H = 420, ml = 70, mr = 150, mt = 40, mb = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]);
        y1 = std::max(y1, s.y[i]);
      }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  auto X = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto Y = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
     << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    os << "<text x=\"" << X(xv) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << detail::fmt(xv) << "</text>\n"
       << "<text x=\"" << ml - 6 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">" << detail::fmt(yv) << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
     << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (mt + H - mb) / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* col = colors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].x.size(); ++i)
      if (std::isfinite(series[k].x[i]) && std::isfinite(series[k].y[i]))
        os << X(series[k].x[i]) << ',' << Y(series[k].y[i]) << ' ';
    os << "\"/>\n";
    if (series[k].x.size() <= 12)
      for (std::size_t i = 0; i < series[k].x.size(); ++i)
        if (std::isfinite(series[k].x[i]) && std::isfinite(series[k].y[i]))
          os << "<circle cx=\"" << X(series[k].x[i]) << "\" cy=\"" << Y(series[k].y[i]) << "\" r=\"3\" fill=\"" << col
             << "\"/>\n";
    os << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 * (k + 1) << "\" fill=\"" << col << "\">"
       << series[k].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::io_failure, "cannot write " + p.string());
  os << text;
  if (!os) fail(ErrorCode::io_failure, "write failed for " + p.string());
}

// Overwrites gap_report.csv, fits.txt, audits.csv and plots/*.svg under dir.
inline void emit_outputs(const RunRecord& rec, const std::string& dir, bool audits_only = false) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_failure, "cannot create " + dir);
  write_text(fs::path(dir) / "audits.csv", audits_csv(rec));
  if (audits_only) return;
  write_text(fs::path(dir) / "gap_report.csv", gap_report_csv(rec));
  write_text(fs::path(dir) / "fits.txt", fits_text(rec));
  fs::create_directories(fs::path(dir) / "plots", ec);
  if (ec) fail(ErrorCode::io_failure, "cannot create " + dir + "/plots");

  PlotSeries bound{"bound D^2", {}, {}}, actual{"gap D^2", {}, {}}, neck{"sup_N h", {}, {}};
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    const auto& w = rec.rows[i];
    if (!w.ok()) continue;
    bound.x.push_back(1 / w.r);
    bound.y.push_back(std::log10(w.bound_D2));
    actual.x.push_back(1 / w.r);
    actual.y.push_back(w.gap_D2 > 0 ? std::log10(w.gap_D2) : kNaN);
  }
  for (std::size_t i = 0; i < rec.neck_reference.size(); ++i) {
    neck.x.push_back(1 / rec.config.r[i]);
    neck.y.push_back(rec.neck_reference[i] > 0 ? std::log10(rec.neck_reference[i]) : kNaN);
  }
  write_text(fs::path(dir) / "plots" / "gap_decay.svg",
             svg_plot(rec.config.preset + ": gap decay", "1/r", "log10 of gap D^2", {bound, actual}));
  write_text(fs::path(dir) / "plots" / "neck_suppression.svg",
             svg_plot(rec.config.preset + ": neck suppression", "1/r", "log10 sup_N h", {neck}));
  std::vector<PlotSeries> prof, scans;
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    const auto& p = rec.profiles[i];
    if (!p.x.empty()) {
      PlotSeries s{detail::r_label(p.r), p.x, {}};
      for (double v : p.V) s.y.push_back(v > 0 ? std::log10(v) : kNaN);
      prof.push_back(std::move(s));
    }
    PlotSeries s{detail::r_label(rec.config.r[i]), {}, {}};
    for (const auto& q : rec.scans[i]) {
      s.x.push_back(q.p);
      s.y.push_back(q.F_rel);
    }
    scans.push_back(std::move(s));
  }
  if (!prof.empty())
    write_text(fs::path(dir) / "plots" / "profiles.svg",
               svg_plot(rec.config.preset + ": slice mass V(x)", "x", "log10 V", prof));
  write_text(fs::path(dir) / "plots" / "continuity.svg",
             svg_plot(rec.config.preset + ": continuity scan", rec.config.dim() == 3 ? "alpha" : "t", "F / |h|^2", scans));
}

}  // namespace fgap
