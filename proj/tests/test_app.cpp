#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecokin/app/commands.hpp"
#include "ecokin/conditions.hpp"

using namespace ecokin;
using namespace ecokin::app;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ecokin");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("ecokin_app_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

using Table = std::vector<std::vector<std::string>>;

// Rows after the comment header; the first row holds the column names.
Table read_csv(const fs::path& p) {
  std::ifstream in(p);
  Table t;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) row.push_back(f);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    t.push_back(row);
  }
  return t;
}

std::size_t column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.at(0).size(); ++i)
    if (t[0][i] == name) return i;
  throw std::runtime_error("no column " + name);
}

const char* kCheckConfig = R"(model:
  mortality: 10.0
  kappa_plus: 1.0
  mechanism: establishment
  a_plus: {family: tophat, height: 1.0, radius: 0.5}
  phi: {family: tophat, height: 1.0, radius: 0.5}
checks:
  theorems: [establishment]
)";

const char* kContactConfig = R"(model:
  mortality: 0.5
  kappa_plus: 1.0
  a_plus: {family: gaussian, mass: 1.0, sigma: 0.5}
domain:
  length: 50.0
ibm:
  replicas: 100
  t_end: 2.0
  sample_dt: 0.1
  initial_count: 200
)";

const char* kSolveConfig = R"(model:
  mortality: 1.0
  kappa_plus: 2.0
  a_plus: {family: gaussian, mass: 1.0, sigma: 0.5}
  phi: {family: gaussian, mass: 1.0, sigma: 0.5}
domain:
  length: 16.0
  grid: 32
kinetics:
  dt: 0.05
  t_end: 30.0
  record_every: 100
  rho0: {kind: constant, value: 0.3}
)";

}  // namespace

TEST(Config, DefaultsParse) {
  const auto cfg = load_config("", {});
  EXPECT_EQ(cfg.domain.dimension, 1);
  EXPECT_EQ(cfg.kinetics.mechanisms, std::vector<std::string>{"establishment"});
  EXPECT_NE(cfg.hash, 0u);
}

TEST(Config, OverridesChangeHash) {
  const auto a = load_config("", {});
  const auto b = load_config("", {"model.mortality=2"});
  EXPECT_EQ(b.model.mortality, 2.0);
  EXPECT_NE(a.hash, b.hash);
  EXPECT_EQ(load_config("", {"model.mortality=2"}).hash, b.hash);
}

TEST(Config, UnknownKeyNamesLineAndField) {
  const auto dir = scratch("unknown");
  const auto path = write(dir, "c.yaml", "model:\n  mortality: 1.0\n  mortaliti: 2.0\n");
  try {
    load_config(path.string(), {});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("config:3:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("model.mortaliti"), std::string::npos) << msg;
  }
}

TEST(Config, WrongTypeNamesLineAndField) {
  const auto dir = scratch("type");
  const auto path = write(dir, "c.yaml", "domain:\n  length: 10\nmodel:\n  kappa_plus: lots\n");
  try {
    load_config(path.string(), {});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("config:4:15"), std::string::npos) << msg;
    EXPECT_NE(msg.find("model.kappa_plus"), std::string::npos) << msg;
  }
}

TEST(Config, KernelFieldsValidated) {
  EXPECT_THROW(load_config("", {"model.phi={family: gaussian, mass: 1}"}), ConfigError);
  EXPECT_THROW(load_config("", {"model.phi={family: cauchy}"}), ConfigError);
  EXPECT_THROW(load_config("", {"model.phi={family: tophat, height: 1, radius: -1}"}), ConfigError);
  EXPECT_THROW(load_config("", {"domain.dimension=3"}), ConfigError);
  EXPECT_THROW(load_config("", {"ibm.epsilons=[0.5, 1.0]"}), ConfigError);
  EXPECT_THROW(load_config("", {"kinetics.rho0.kind=spiral"}), ConfigError);
  EXPECT_THROW(load_config("", {"checks.C=[0.5]"}), ConfigError);
  EXPECT_THROW(load_config("", {"nonsense"}), ConfigError);
}

TEST(Config, DensityFromFile) {
  const auto dir = scratch("rho_file");
  std::string text = "i,rho\n";
  for (int i = 0; i < 8; ++i) text += std::to_string(i) + "," + std::to_string(0.1 * i) + "\n";
  const auto path = write(dir, "rho.csv", text);
  const auto cfg = load_config("", {"domain.grid=8", "ibm.bins=4", "kinetics.rho0={kind: from-file, file: " +
                                                                      path.string() + "}"});
  ASSERT_EQ(cfg.kinetics.rho0.file_values.size(), 8u);
  const auto f = density_function<1>(cfg.kinetics.rho0, cfg.domain.length, 8);
  EXPECT_DOUBLE_EQ(f(Point<1>{cfg.domain.length * 0.99}), 0.7);
  EXPECT_THROW(load_config("", {"domain.grid=16", "ibm.bins=4",
                                "kinetics.rho0={kind: from-file, file: " + path.string() + "}"}),
               ConfigError);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, kUsageError);
  EXPECT_EQ(invoke({"dance"}).code, kUsageError);
  EXPECT_EQ(invoke({"check", "--config", "/nonexistent.yaml"}).code, kUsageError);
  EXPECT_EQ(invoke({"check", "--set", "novalue"}).code, kUsageError);
  EXPECT_EQ(invoke({"check", "--help"}).code, kSuccess);
}

TEST(Cli, CheckPassingInstance) {
  const auto dir = scratch("check_pass");
  const auto cfg = write(dir, "c.yaml", kCheckConfig);
  const auto r = invoke({"check", "--config", cfg.string(), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, kSuccess) << r.err;
  EXPECT_NE(r.out.find("EstablishmentThm,satisfied=true"), std::string::npos) << r.out;
  const auto t = read_csv(dir / "out" / "checks.csv");
  ASSERT_GT(t.size(), 4u);
  EXPECT_EQ(t[0], (std::vector<std::string>{"theorem", "key", "value"}));
  EXPECT_EQ(t[1], (std::vector<std::string>{"EstablishmentThm", "satisfied", "true"}));
}

TEST(Cli, CheckZeroMortalityIsConfigError) {
  const auto dir = scratch("check_m0");
  const auto cfg = write(dir, "c.yaml", kCheckConfig);
  const auto r = invoke({"check", "--config", cfg.string(), "--set", "model.mortality=0", "--out", dir.string()});
  EXPECT_EQ(r.code, kUsageError);
  EXPECT_NE(r.err.find("mortality must be strictly positive"), std::string::npos) << r.err;
}

TEST(Cli, CheckBoundaryExitsOne) {
  const auto dir = scratch("check_boundary");
  const auto cfg = write(dir, "c.yaml", kCheckConfig);
  const auto base = load_config(cfg.string(), {});
  const auto r0 = check_establishment(base.model, base.checks.C.front());
  // rhs = m/2 exp(-c_phi C) is linear in m; pick m so that rhs equals lhs.
  const double m = base.model.mortality * r0.lhs / r0.rhs;
  std::ostringstream set;
  set.precision(17);
  set << "model.mortality=" << m;
  const auto r = invoke({"check", "--config", cfg.string(), "--set", set.str(), "--out", dir.string()});
  EXPECT_EQ(r.code, kDomainFailure);
  EXPECT_NE(r.out.find("verdict=boundary"), std::string::npos) << r.out;
}

TEST(Cli, CheckViolatedExitsOne) {
  const auto dir = scratch("check_violated");
  const auto cfg = write(dir, "c.yaml", kCheckConfig);
  const auto r = invoke({"check", "--config", cfg.string(), "--set", "model.mortality=0.1", "--out", dir.string()});
  EXPECT_EQ(r.code, kDomainFailure);
  EXPECT_NE(r.out.find("EstablishmentThm,satisfied=false"), std::string::npos);
}

TEST(Cli, OutputHeaderCarriesProvenance) {
  const auto dir = scratch("header");
  const auto cfg = write(dir, "c.yaml", kCheckConfig);
  invoke({"check", "--config", cfg.string(), "--out", dir.string()});
  std::ifstream in(dir / "checks.csv");
  std::vector<std::string> lines(4);
  for (auto& l : lines) std::getline(in, l);
  EXPECT_EQ(lines[0].rfind("# ecokin ", 0), 0u);
  EXPECT_EQ(lines[1], "# config_hash: " + hex64(load_config(cfg.string(), {}).hash));
  EXPECT_EQ(lines[2].rfind("# seeds: ", 0), 0u);
  EXPECT_NE(lines[3].find("check --config"), std::string::npos);
}

TEST(Cli, SimulateContactSlope) {
  const auto dir = scratch("contact");
  const auto cfg = write(dir, "c.yaml", kContactConfig);
  const auto r = invoke({"simulate", "--config", cfg.string(), "--out", dir.string()});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto s = read_csv(dir / "summary.csv");
  ASSERT_EQ(s.size(), 2u);
  const double mean = std::stod(s[1][column(s, "mean_slope")]);
  const double se = std::stod(s[1][column(s, "stderr")]);
  EXPECT_GT(se, 0.0);
  EXPECT_NEAR(mean, 0.5, 3.0 * se);
  const auto m = read_csv(dir / "manifest.csv");
  EXPECT_EQ(m.size(), 101u);
  EXPECT_TRUE(fs::exists(dir / "trajectory_99.csv"));
}

TEST(Cli, SimulateIsByteIdenticalForFixedSeed) {
  const auto dir = scratch("repeat");
  const auto cfg = write(dir, "c.yaml", kContactConfig);
  const std::vector<std::string> extra{"--set", "ibm.replicas=3", "--set", "ibm.snapshot_every=5", "--seed", "42"};
  auto args = std::vector<std::string>{"simulate", "--config", cfg.string(), "--out", (dir / "a").string()};
  args.insert(args.end(), extra.begin(), extra.end());
  ASSERT_EQ(invoke(args).code, kSuccess);
  const auto first = slurp(dir / "a" / "trajectory_1.csv");
  const auto snaps = slurp(dir / "a" / "snapshots_1.csv");
  ASSERT_EQ(invoke(args).code, kSuccess);
  EXPECT_EQ(slurp(dir / "a" / "trajectory_1.csv"), first);
  EXPECT_EQ(slurp(dir / "a" / "snapshots_1.csv"), snaps);
  // A different seed gives a different run.
  args[args.size() - 1] = "43";
  ASSERT_EQ(invoke(args).code, kSuccess);
  EXPECT_NE(slurp(dir / "a" / "trajectory_1.csv"), first);
  const auto snap = read_csv(dir / "a" / "snapshots_1.csv");
  EXPECT_EQ(snap[0], (std::vector<std::string>{"t", "particle_id", "x1"}));
}

TEST(Cli, ExtinctionIsFlagged) {
  const auto dir = scratch("extinct");
  const auto cfg = write(dir, "c.yaml", kContactConfig);
  const auto r = invoke({"simulate", "--config", cfg.string(), "--set", "model.kappa_plus=0", "--set",
                         "ibm.replicas=2", "--set", "ibm.initial_count=5", "--set", "ibm.t_end=100",
                         "--out", dir.string()});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto t = read_csv(dir / "trajectory_0.csv");
  EXPECT_EQ(t[0].back(), "flag");
  EXPECT_EQ(t.back().back(), "extinct");
  EXPECT_EQ(t.back()[column(t, "N")], "0");
}

TEST(Cli, Simulate2dWithCompetition) {
  const auto dir = scratch("sim2d");
  const auto r = invoke({"simulate", "--config", (fs::path(ECOKIN_SOURCE_DIR) / "configs/simulate_2d.yaml").string(),
                         "--set", "ibm.replicas=1", "--set", "ibm.t_end=1", "--out", dir.string()});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto snap = read_csv(dir / "snapshots_0.csv");
  EXPECT_EQ(snap[0], (std::vector<std::string>{"t", "particle_id", "x1", "x2"}));
  EXPECT_GT(snap.size(), 100u);
}

TEST(Cli, SimulateRejectsSmallBox) {
  const auto dir = scratch("smallbox");
  const auto cfg = write(dir, "c.yaml", kContactConfig);
  const auto r = invoke({"simulate", "--config", cfg.string(), "--set", "domain.length=5", "--out", dir.string()});
  EXPECT_EQ(r.code, kUsageError);
}

TEST(Cli, SolveConstantReachesEquilibrium) {
  const auto dir = scratch("solve_eq");
  const auto cfg = write(dir, "c.yaml", kSolveConfig);
  const auto r = invoke({"solve", "--config", cfg.string(), "--out", dir.string()});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto s = read_csv(dir / "solve_summary.csv");
  const auto eq = read_csv(dir / "equilibria.csv");
  ASSERT_EQ(eq.size(), 3u);
  const double u_star = std::stod(eq[2][0]);
  EXPECT_NEAR(u_star, std::log(2.0), 1e-10);
  EXPECT_NEAR(std::stod(s[1][column(s, "final_min")]), u_star, 1e-4);
  EXPECT_NEAR(std::stod(s[1][column(s, "final_max")]), u_star, 1e-4);
  const auto d = read_csv(dir / "density_establishment.csv");
  EXPECT_EQ(d[0], (std::vector<std::string>{"t", "i1", "rho"}));
}

TEST(Cli, SolvePicardCrossDifference) {
  const auto dir = scratch("solve_picard");
  const auto r = invoke({"solve", "--config", (fs::path(ECOKIN_SOURCE_DIR) / "configs/solve.yaml").string(),
                         "--set", "domain.grid=128", "--out", dir.string()});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto s = read_csv(dir / "solve_summary.csv");
  ASSERT_EQ(s.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i) {
    const double pd = std::stod(s[i][column(s, "picard_diff")]);
    EXPECT_GE(pd, 0.0);
    EXPECT_LT(pd, 1e-5);
  }
  // Two-bump density separates the mechanisms.
  EXPECT_GT(std::stod(s[1][column(s, "mechanism_diff")]), 1e-6);
  const auto p = read_csv(dir / "picard_fecundity.csv");
  EXPECT_EQ(p[0], (std::vector<std::string>{"iter", "delta_norm", "ratio"}));
  EXPECT_GT(p.size(), 3u);
}

TEST(Cli, SolveNonConvergenceExitsOne) {
  const auto dir = scratch("solve_nc");
  const auto cfg = write(dir, "c.yaml", kSolveConfig);
  const auto r = invoke({"solve", "--config", cfg.string(), "--set", "kinetics.t_end=1", "--set",
                         "kinetics.picard={enabled: true, max_iters: 2}", "--out", dir.string()});
  EXPECT_EQ(r.code, kDomainFailure);
}

TEST(Cli, SolveTwoDimensional) {
  const auto dir = scratch("solve2d");
  const auto cfg = write(dir, "c.yaml", kSolveConfig);
  const auto r = invoke({"solve", "--config", cfg.string(), "--set", "domain.dimension=2", "--set",
                         "model.a_plus={family: gaussian, mass: 1, sigma: 0.5}", "--set",
                         "model.phi={family: gaussian, mass: 1, sigma: 0.5}", "--set", "domain.grid=16", "--set",
                         "kinetics.t_end=1", "--set", "ibm.bins=4", "--out", dir.string()});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto d = read_csv(dir / "density_establishment.csv");
  EXPECT_EQ(d[0], (std::vector<std::string>{"t", "i1", "i2", "rho"}));
  EXPECT_EQ(d.size(), 1u + 2u * 256u);
}

TEST(Cli, LimitStudyTable) {
  const auto dir = scratch("limit");
  const auto r = invoke({"limit-study", "--config",
                         (fs::path(ECOKIN_SOURCE_DIR) / "configs/limit_study.yaml").string(), "--set",
                         "ibm.replicas=20", "--set", "ibm.epsilons=[1.0, 0.25]", "--out", dir.string()});
  ASSERT_NE(r.code, kUsageError) << r.err;
  const auto t = read_csv(dir / "limit_study.csv");
  EXPECT_EQ(t[0], (std::vector<std::string>{"eps", "t", "L2_error", "stderr"}));
  ASSERT_EQ(t.size(), 1u + 2u * 3u);
  EXPECT_EQ(t[1][0], "1");
  EXPECT_EQ(t[1][1], "0");
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(std::stod(t[i][3]), 0.0);
  const auto m = read_csv(dir / "limit_monotonicity.csv");
  EXPECT_EQ(m.size(), 4u);
  EXPECT_EQ(r.code == kSuccess, r.out.find("monotone=true") != std::string::npos);
}

TEST(Cli, LimitStudyInitialErrorIsPoissonNoise) {
  // At t = 0 the scaled field is Poisson with intensity rho0 / eps; the
  // expected squared L2 error of the replica mean is
  // sum_bins rho0_bin * eps / (binvol * R) * binvol.
  const auto dir = scratch("limit_t0");
  const std::size_t R = 200;
  const double eps = 0.5, L = 10.0, rho = 2.0;
  const auto r = invoke({"limit-study", "--set", "domain.length=10", "--set", "domain.grid=20", "--set",
                         "ibm.bins=10", "--set", "model.kappa_plus=0.2", "--set",
                         "model.phi={family: tophat, height: 0.4, radius: 0.5}", "--set",
                         "kinetics.rho0={kind: constant, value: 2.0}", "--set", "ibm.replicas=" + std::to_string(R),
                         "--set", "ibm.epsilons=[0.5]", "--set", "ibm.limit_times=[0.5]", "--set", "kinetics.dt=0.01",
                         "--out", dir.string()});
  ASSERT_NE(r.code, kUsageError) << r.err;
  const auto t = read_csv(dir / "limit_study.csv");
  const double expected = std::sqrt(rho * L * eps / static_cast<double>(R));
  const double err = std::stod(t[1][2]);
  EXPECT_NEAR(err, expected, 0.25 * expected);
}

TEST(Cli, VerifyPasses) {
  const auto dir = scratch("verify");
  const auto r =
      invoke({"verify", "--set", "verify.instances=50", "--set", "verify.mc_samples=5000", "--out", dir.string()});
  EXPECT_EQ(r.code, kSuccess) << r.out;
  const auto t = read_csv(dir / "verify.csv");
  ASSERT_EQ(t.size(), 11u);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_EQ(t[i][column(t, "status")], "pass") << t[i][0];
  EXPECT_NE(r.out.find("max_deviation="), std::string::npos);
}

TEST(Cli, VerifyZeroInstancesIsFlaggedVacuous) {
  const auto dir = scratch("verify0");
  const auto r = invoke({"verify", "--set", "verify.instances=0", "--out", dir.string()});
  EXPECT_EQ(r.code, kSuccess);
  const auto t = read_csv(dir / "verify.csv");
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_EQ(t[i][column(t, "status")], "vacuous-pass");
}

TEST(Cli, VerifyCorruptedClosedFormFails) {
  const auto dir = scratch("verify_corrupt");
  const auto r = invoke({"verify", "--set", "verify.instances=20", "--set", "verify.mc_samples=1000", "--set",
                         "verify.corrupt_closed_form=true", "--out", dir.string()});
  EXPECT_EQ(r.code, kDomainFailure);
  EXPECT_NE(r.out.find("closed-form-establishment,instances=20"), std::string::npos);
  EXPECT_NE(r.out.find("verify: fail"), std::string::npos);
}

TEST(Cli, SeedFlagReachesProvenance) {
  const auto dir = scratch("seedflag");
  invoke({"verify", "--set", "verify.instances=0", "--seed", "17", "--out", dir.string()});
  EXPECT_NE(slurp(dir / "verify.csv").find("# seeds: verify.seed=17"), std::string::npos);
}
