#include "fgap/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kOk = 0, kValidation = 2, kAcceptance = 3, kRuntime = 4;

struct Overrides {
  unsigned workers = 1;
  std::string out;
  std::optional<std::uint64_t> seed;
};

// --out beats FGAP_OUT, which beats output.dir in the file.
fgap::ExperimentConfig load(const std::string& path, const Overrides& o) {
  fgap::ExperimentConfig c = fgap::load_config_file(path);
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) {
    c.out_dir = o.out;
  } else if (const char* env = std::getenv("FGAP_OUT"); env && *env) {
    c.out_dir = env;
  }
  return c;
}

void print_timings(const fgap::RunRecord& rec) {
  std::cout << "timings (thread seconds):";
  for (const auto& [stage, t] : rec.timings) std::cout << ' ' << stage << '=' << fgap::detail::fmt(t);
  std::cout << '\n';
}

int failed_audits(const fgap::RunRecord& rec) {
  int n = 0;
  for (const auto& a : rec.audits)
    if (!a.pass) {
      ++n;
      std::cout << (a.acceptance ? "FAIL " : "note ") << a.stage << '/' << a.name
                << (a.subject.empty() ? "" : " [" + a.subject + "]") << ": " << a.detail << '\n';
    }
  return n;
}

int run(const std::string& path, const Overrides& o, bool sweep) {
  fgap::ExperimentConfig c;
  fgap::ResolvedConfig R;
  try {
    c = load(path, o);
    R = fgap::validate(c);
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kValidation;
  }
  try {
    fgap::RunOptions opt;
    opt.workers = std::max(1u, o.workers);
    opt.sweep = sweep;
    const fgap::RunRecord rec = fgap::run_experiment(c, R, opt);
    fgap::emit_outputs(rec, c.out_dir, !sweep);
    std::cout << "preset " << c.preset << ", config hash " << rec.hash << '\n';
    failed_audits(rec);
    for (const auto& row : rec.rows)
      std::cout << "r=" << fgap::detail::fmt(row.r) << ' ' << row.status
                << (row.ok() ? " gap*D^2=" + fgap::detail::fmt(row.gap_D2) + " bound*D^2=" + fgap::detail::fmt(row.bound_D2)
                             : ": " + row.error)
                << '\n';
    for (const auto& chk : rec.checks) std::cout << (chk.pass ? "PASS " : "FAIL ") << chk.name << ": " << chk.detail << '\n';
    if (sweep) {
      const auto& s = rec.cache;
      std::cout << "cache: " << s.memory_hits << " memory hits, " << s.disk_hits << " disk hits, " << s.misses
                << " solves, " << s.mismatches << " stale files\n";
    }
    print_timings(rec);
    std::cout << "outputs in " << c.out_dir << '\n';
    return rec.acceptance_ok() ? kOk : kAcceptance;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral gap experiments on thin convex neck domains"};
  app.require_subcommand(1);
  Overrides o;
  std::string config;
  std::string dump;

  auto* run_cmd = app.add_subcommand("run", "Run the sweep, fits, audits and acceptance checks");
  auto* audit_cmd = app.add_subcommand("audit", "Run the geometry and Jacobi audits only");
  auto* presets_cmd = app.add_subcommand("presets", "List built-in presets");
  for (auto* cmd : {run_cmd, audit_cmd}) {
    cmd->add_option("config", config, "Configuration file")->required();
    cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seed, "Override the configured seed");
  }
  presets_cmd->add_option("--dump", dump, "Print the full configuration of one preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  if (presets_cmd->parsed()) {
    try {
      if (!dump.empty()) {
        std::cout << fgap::to_ini(fgap::preset_config(dump));
        return kOk;
      }
      for (const auto& id : fgap::preset_ids()) {
        const auto c = fgap::preset_config(id);
        std::cout << id << "  metric=" << c.metric.id() << " dim=" << c.dim() << " L=" << fgap::detail::num(c.L) << '\n';
      }
      return kOk;
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return kValidation;
    }
  }
  return run(config, o, run_cmd->parsed());
}
