#include "specdist/experiments/runner.hpp"
#include "specdist/experiments/verify.hpp"
#include "specdist/random.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace specdist;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const std::string kCli = SPECDIST_CLI_PATH;
const std::string kConfigs = SPECDIST_CONFIG_DIR;

fs::path scratch_dir() {
  const fs::path dir = fs::path(::testing::TempDir()) / "specdist_cli";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const Json& j) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

/// Runs the CLI with stdout and stderr captured; returns the exit status.
int cli(const std::string& args, std::string* out = nullptr) {
  const fs::path log = scratch_dir() / "stdout.txt";
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2> \"" +
                          (scratch_dir() / "stderr.txt").string() + "\"";
  const int raw = std::system(cmd.c_str());
  if (out) *out = read_file(log);
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Json small_circle_sweep() {
  return Json::parse(R"({
    "config_version": 1, "experiment": "sweep",
    "geometry": {"kind": "circle", "cutoff": 1},
    "states": [{"type": "fejer", "x": 1.5707963267948966}, {"type": "fejer", "x": 0.0}],
    "sweep": {"parameter": "/geometry/cutoff", "from": 1, "to": 6}
  })");
}

}  // namespace

TEST(NumberFormat, RoundTripsExactly) {
  gen::Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double x = gen::normal(rng) * std::pow(10.0, gen::uniform_int(rng, -30, 30));
    EXPECT_EQ(io::parse_number(io::format_number(x)), x);
  }
  EXPECT_EQ(io::format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_TRUE(std::isinf(io::parse_number("-inf")));
  EXPECT_TRUE(std::isnan(io::parse_number("")));
  EXPECT_THROW(io::parse_number("1.5x"), InvalidInput);
  EXPECT_EQ(io::format_number(0.5), "0.5");
}

TEST(Csv, WritesAndReadsTables) {
  io::Table t;
  t.header = {"a", "b", "c"};
  t.rows.push_back({1, "x", io::Cell()});
  t.rows.push_back({0.25, "y", 3.0});
  EXPECT_EQ(t.csv(), "a,b,c\n1,x,\n0.25,y,3\n");
  std::istringstream is(t.csv());
  const auto [header, rows] = io::read_csv(is);
  EXPECT_EQ(header.size(), 3u);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][2], "");
  EXPECT_EQ(rows[1][0], "0.25");
}

TEST(Config, ParsesAndRejects) {
  const auto c = config::parse_config(small_circle_sweep());
  EXPECT_EQ(c.experiment, "sweep");
  EXPECT_EQ(c.sweep->values.size(), 6u);
  EXPECT_EQ(c.tolerance, 1e-7);
  Json bad = small_circle_sweep();
  bad["config_version"] = 99;
  EXPECT_THROW(config::parse_config(bad), config::ConfigError);
  bad = small_circle_sweep();
  bad["geometry"]["kind"] = "torus";
  EXPECT_THROW(config::build_geometry(bad["geometry"]), config::ConfigError);
  bad = small_circle_sweep();
  bad["sweep"] = Json::parse(R"({"parameter": "/geometry/cutoff"})");
  EXPECT_THROW(config::parse_config(bad), config::ConfigError);
  EXPECT_THROW(config::load_config((scratch_dir() / "missing.json").string()), config::ConfigError);
}

TEST(Config, SweepValuesFromRange) {
  const auto v = config::expand_sweep_values(Json::parse(R"({"parameter": "/x", "from": 0.5, "to": 1.5, "step": 0.25})"));
  ASSERT_EQ(v.size(), 5u);
  EXPECT_DOUBLE_EQ(v.back().get<double>(), 1.5);
  const auto c = config::substitute(config::parse_config(small_circle_sweep()), "/geometry/cutoff", 5);
  EXPECT_EQ(c.geometry["cutoff"], 5);
}

TEST(Config, EveryShippedConfigParses) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(config::load_config(entry.path().string())) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 6);
}

TEST(StateJson, RoundTripsOnTheSameGeometry) {
  gen::Rng rng(2);
  const auto t = std::make_shared<const TruncatedTriple>(build_fuzzy_sphere(2));
  const State s = mixed_state(t, gen::density(rng, 3, 2));
  const Json j = io::state_to_json(s);
  const State back = io::state_from_json(j, t);
  EXPECT_LE(max_abs(back.rho().matrix() - s.rho().matrix()), 0.0);
  const auto other = std::make_shared<const TruncatedTriple>(build_fuzzy_sphere(3));
  EXPECT_THROW(io::state_from_json(j, other), InvalidInput);
}

TEST(Runner, SweepRowsCarryOraclesAndValidate) {
  config::RunConfig c = config::parse_config(small_circle_sweep());
  const auto r = run::sweep(c);
  EXPECT_TRUE(r.all_closed);
  ASSERT_EQ(r.table.rows.size(), 6u);
  std::istringstream is(r.table.csv());
  std::string why;
  EXPECT_TRUE(run::validate_sweep_csv(is, 1e-7, &why)) << why;
  const auto& header = run::sweep_header();
  EXPECT_EQ(r.table.header, header);
  // Tampered: primal above dual must be caught.
  std::string text = r.table.csv();
  std::istringstream lines(text);
  std::string head, first;
  std::getline(lines, head);
  std::getline(lines, first);
  auto cells = io::split_csv_line(first);
  cells[3] = "9";
  std::string tampered = head + "\n";
  for (std::size_t k = 0; k < cells.size(); ++k) tampered += (k ? "," : "") + cells[k];
  tampered += "\n";
  std::istringstream bad(tampered);
  EXPECT_FALSE(run::validate_sweep_csv(bad, 1e-7, &why));
}

TEST(Runner, HausdorffRowsAreFiniteAndSmall) {
  config::HausdorffSpec spec;
  spec.samples = 6;
  const auto row = run::hausdorff_row(2, spec, 1e-7, 1);
  EXPECT_EQ(row.partner, 4);
  EXPECT_TRUE(row.closed);
  EXPECT_GT(row.hausdorff, 0.0);
  EXPECT_LT(row.hausdorff, kPi);
  spec.pairing = "self";
  EXPECT_NEAR(run::hausdorff_row(2, spec, 1e-7, 1).hausdorff, 0.0, 1e-12);
}

TEST(Runner, HausdorffRotationShortcutMatchesFullMatrix) {
  config::HausdorffSpec spec;
  spec.samples = 6;
  const auto fast = run::hausdorff_row(3, spec, 1e-8, 1);
  spec.rotation = false;
  const auto full = run::hausdorff_row(3, spec, 1e-8, 1);
  EXPECT_NEAR(fast.hausdorff, full.hausdorff, 1e-7);
  EXPECT_NEAR(fast.geodesic_distortion, full.geodesic_distortion, 1e-7);
}

TEST(Verify, SuitesPassAndDetectCorruption) {
  verify::Options o;
  o.seed = 11;
  for (const auto& [name, fn] : verify::suites()) {
    const auto report = verify::run(name, o);
    EXPECT_TRUE(report.passed()) << name << ": " << report.to_json().dump();
    EXPECT_GT(report.checks.size(), 0u);
  }
  o.corrupt_dirac = true;
  for (const std::string name : {"lattice-closed-forms", "flip-discrete", "commutator-identity"})
    EXPECT_FALSE(verify::run(name, o).passed()) << name;
  EXPECT_THROW(verify::run("nope", o), InvalidInput);
}

TEST(Cli, DistanceReportsCertifiedBracket) {
  std::string out;
  ASSERT_EQ(cli("distance --config \"" + kConfigs + "/lattice_distance.json\"", &out), 0);
  const Json j = Json::parse(out);
  EXPECT_EQ(j["status"], "finite");
  EXPECT_NEAR(j["primal"].get<double>(), 5.0, 1e-7);
  EXPECT_NEAR(j["dual"].get<double>(), 5.0, 1e-7);
  EXPECT_LE(j["primal"].get<double>(), j["dual"].get<double>());
}

TEST(Cli, SweepIsByteReproducibleAcrossJobCounts) {
  const fs::path cfg = write_config("sweep.json", small_circle_sweep());
  const fs::path a = scratch_dir() / "a.csv", b = scratch_dir() / "b.csv";
  ASSERT_EQ(cli("sweep --config \"" + cfg.string() + "\" --jobs 1 --out \"" + a.string() + "\""), 0);
  ASSERT_EQ(cli("sweep --config \"" + cfg.string() + "\" --jobs 3 --out \"" + b.string() + "\""), 0);
  const std::string sa = read_file(a), sb = read_file(b);
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, sb);
  std::istringstream is(sa);
  EXPECT_TRUE(run::validate_sweep_csv(is, 1e-7));
}

TEST(Cli, TableAndHausdorffCommands) {
  std::string out;
  ASSERT_EQ(cli("table --config \"" + kConfigs + "/lattice_table.json\"", &out), 0);
  EXPECT_EQ(out.substr(0, 4), "i,j,");
  Json h = Json::parse(R"({"config_version": 1, "experiment": "hausdorff",
                           "hausdorff": {"samples": 4, "cutoffs": [1, 2]}})");
  ASSERT_EQ(cli("hausdorff --config \"" + write_config("h.json", h).string() + "\"", &out), 0);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 3);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("verify lattice-closed-forms --seed 3"), 0);
  EXPECT_EQ(cli("verify flip-discrete --corrupt-dirac"), 2);
  EXPECT_EQ(cli("verify no-such-suite"), 1);
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("distance"), 1);
  EXPECT_EQ(cli("distance --config \"" + (scratch_dir() / "missing.json").string() + "\""), 1);
  EXPECT_EQ(cli("sweep --config \"" + kConfigs + "/lattice_distance.json\""), 1);
  EXPECT_EQ(cli("distance --config \"" + kConfigs + "/lattice_distance.json\" --tol -1"), 1);
  const Json moyal = Json::parse(R"({"config_version": 1, "experiment": "distance",
      "geometry": {"kind": "moyal", "theta": 1.0, "n_max": 8},
      "states": [{"type": "coherent", "z": [0, 0]}, {"type": "coherent", "z": [1, 0]}]})");
  std::string out;
  EXPECT_EQ(cli("distance --config \"" + write_config("gnc.json", moyal).string() + "\" --tol 1e-15", &out), 2);
  EXPECT_EQ(Json::parse(out)["status"], "gap-not-closed");
}
