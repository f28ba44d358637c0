// Command-line front end.
//
//   specdist distance  --config FILE [--tol T] [--out FILE]
//   specdist sweep     --config FILE [--tol T] [--jobs J] [--out FILE] [--timing]
//   specdist table     --config FILE [--tol T] [--jobs J] [--out FILE]
//   specdist hausdorff --config FILE [--tol T] [--jobs J] [--out FILE]
//   specdist verify    --suite NAME [--seed S] [--corrupt-dirac] [--config FILE]
//
// Exit codes: 0 success, 1 usage or configuration error, 2 a solve did not
// close its duality gap (or a verify suite failed).

#include "specdist/experiments/runner.hpp"
#include "specdist/experiments/verify.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <locale>

namespace {

using specdist::config::RunConfig;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;

struct CommonFlags {
  std::string config;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "JSON run configuration");
  if (config_required) opt->required();
  cmd->add_option("--tol", f.tol, "absolute duality-gap tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "seed for randomized suites");
  cmd->add_option("--jobs", f.jobs, "concurrent solves")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output file (stdout when omitted)");
}

RunConfig resolve(const CommonFlags& f, const std::string& command) {
  RunConfig c;
  if (!f.config.empty()) {
    c = specdist::config::load_config(f.config);
    if (!c.experiment.empty() && c.experiment != command)
      throw specdist::config::ConfigError("config describes a '" + c.experiment + "' experiment, not '" + command +
                                          "'");
  }
  if (f.tol) c.tolerance = *f.tol;
  if (f.seed) c.seed = *f.seed;
  if (f.jobs) c.jobs = *f.jobs;
  if (!f.out.empty()) c.output = f.out;
  return c;
}

void emit(const RunConfig& c, const std::string& text) {
  if (c.output.empty()) std::cout << text;
  else specdist::io::write_text(c.output, text);
}

int finish(bool closed) {
  if (!closed) std::cerr << "specdist: duality gap not closed for at least one solve\n";
  return closed ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  std::locale::global(std::locale::classic());
  CLI::App app{"Certified spectral distances on truncated spectral triples"};
  app.require_subcommand(1);

  CommonFlags dist_f, sweep_f, table_f, haus_f, verify_f;
  bool timing = false, corrupt = false, list = false;
  std::string suite;

  auto* dist_cmd = app.add_subcommand("distance", "distance between two configured states");
  add_common(dist_cmd, dist_f, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "convergence sweep over one config parameter (CSV)");
  add_common(sweep_cmd, sweep_f, true);
  sweep_cmd->add_flag("--timing", timing, "append a wall_time_s column (output no longer reproducible)");
  auto* table_cmd = app.add_subcommand("table", "pairwise distances between configured states (CSV)");
  add_common(table_cmd, table_f, true);
  auto* haus_cmd = app.add_subcommand("hausdorff", "Hausdorff diagnostics between circle Fejer grids (CSV)");
  add_common(haus_cmd, haus_f, true);
  auto* verify_cmd = app.add_subcommand("verify", "run a named invariant suite");
  add_common(verify_cmd, verify_f, false);
  verify_cmd->add_option("--suite,suite", suite, "suite name, or 'all'");
  verify_cmd->add_flag("--corrupt-dirac", corrupt, "negative control: perturb the Dirac operators");
  verify_cmd->add_flag("--list", list, "list suite names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*dist_cmd) {
      const RunConfig c = resolve(dist_f, "distance");
      const auto r = specdist::run::distance(c);
      emit(c, r.record.dump(2) + "\n");
      if (!c.output.empty())
        std::cout << specdist::to_string(r.result.status) << ' ' << specdist::io::format_number(r.result.primal_value)
                  << ' ' << specdist::io::format_number(r.result.dual_value) << '\n';
      return finish(r.closed());
    }
    if (*sweep_cmd) {
      const RunConfig c = resolve(sweep_f, "sweep");
      const auto r = specdist::run::sweep(c, timing);
      emit(c, r.table.csv());
      return finish(r.all_closed);
    }
    if (*table_cmd) {
      const RunConfig c = resolve(table_f, "table");
      const auto r = specdist::run::table(c);
      emit(c, r.table.csv());
      return finish(r.all_closed);
    }
    if (*haus_cmd) {
      const RunConfig c = resolve(haus_f, "hausdorff");
      const auto r = specdist::run::hausdorff(c);
      emit(c, r.table.csv());
      return finish(r.all_closed);
    }
    if (*verify_cmd) {
      if (list) {
        for (const auto& [name, _] : specdist::verify::suites()) std::cout << name << '\n';
        std::cout << "all\n";
        return kOk;
      }
      const RunConfig c = resolve(verify_f, "verify");
      const std::string name = suite.empty() ? c.suite : suite;
      if (name.empty()) throw specdist::config::ConfigError("verify: no suite given");
      if (!specdist::verify::known_suite(name)) {
        std::cerr << "specdist: unknown suite '" << name << "'\n";
        return kUsage;
      }
      specdist::verify::Options o;
      o.seed = c.seed;
      o.tolerance = c.tolerance;
      o.corrupt_dirac = corrupt;
      const auto report = specdist::verify::run(name, o);
      emit(c, report.to_json().dump(2) + "\n");
      return report.passed() ? kOk : kNumerical;
    }
  } catch (const specdist::Error& e) {
    std::cerr << "specdist: error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "specdist: error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
