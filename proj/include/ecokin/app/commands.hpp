#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ecokin/app/config.hpp"
#include "ecokin/app/output.hpp"
#include "ecokin/app/verify.hpp"
#include "ecokin/conditions.hpp"
#include "ecokin/ibm.hpp"
#include "ecokin/kinetics.hpp"

namespace ecokin::app {

enum ExitCode : int { kSuccess = 0, kDomainFailure = 1, kUsageError = 2 };

struct Context {
  RunConfig cfg;
  Provenance prov;
  std::filesystem::path out_dir;
  std::ostream& out;
  std::ostream& err;

  std::filesystem::path file(const std::string& name) const { return out_dir / name; }
};

/// Initial density as a function on the torus [0, L)^d.
template <std::size_t Dim>
std::function<double(const Point<Dim>&)> density_function(const DensitySpec& s, double L, std::size_t grid) {
  if (s.kind == "constant") return [v = s.value](const Point<Dim>&) { return v; };
  if (s.kind == "from-file") {
    const double h = L / static_cast<double>(grid);
    return [vals = s.file_values, h, grid, L](const Point<Dim>& x) {
      std::size_t idx = 0;
      for (std::size_t i = Dim; i-- > 0;) {
        auto c = static_cast<std::size_t>(wrap(x[i], L) / h);
        idx = idx * grid + std::min(c, grid - 1);
      }
      return vals[idx];
    };
  }
  return [s, L](const Point<Dim>& x) {
    double r = s.base;
    for (double c : s.centers) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < Dim; ++i) {
        double dx = x[i] - (i == 0 ? c : 0.5 * L);
        dx -= L * std::round(dx / L);
        d2 += dx * dx;
      }
      r += s.height * std::exp(-0.5 * d2 / (s.width * s.width));
    }
    return r;
  };
}

// ---------------------------------------------------------------------------
// check

inline int cmd_check(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const ModelParams& p = cfg.model;
  const auto& grid = cfg.checks.C;
  auto semigroup = [&](const std::string& name) {
    if (name == "establishment") return scan_C([&](double C) { return check_establishment(p, C); }, grid);
    if (name == "fecundity") return scan_C([&](double C) { return check_fecundity(p, C); }, grid);
    return scan_C([&](double C) { return check_vlasov_scaling(p, C); }, grid);
  };
  std::vector<ConditionReport> reports;
  for (const auto& t : cfg.checks.theorems) {
    if (t != "picard") {
      reports.push_back(semigroup(t));
      continue;
    }
    double c = 0.0;
    std::string how;
    if (cfg.checks.c) {
      c = *cfg.checks.c;
      how = "c given";
    } else {
      const auto base = semigroup(to_string(p.mechanism));
      const double C = base.constants.count("C") ? base.constants.at("C") : grid.front();
      const double alpha = cfg.checks.alpha.value_or(1.0);
      c = alpha * C;
      how = "c = alpha * C with alpha=" + std::to_string(alpha) + ", C=" + std::to_string(C);
    }
    auto r = check_picard(p, c);
    r.notes.push_back(how);
    reports.push_back(std::move(r));
  }

  CsvWriter csv(ctx.file("checks.csv"), ctx.prov, {"theorem", "key", "value"});
  bool all = true;
  for (const auto& r : reports) {
    const char* id = to_string(r.theorem_id);
    all = all && r.satisfied;
    ctx.out << id << ",satisfied=" << (r.satisfied ? "true" : "false") << ",verdict=" << to_string(r.verdict)
            << ",lhs=" << r.lhs << ",rhs=" << r.rhs << "\n";
    csv.row(id, "satisfied", r.satisfied ? "true" : "false");
    csv.row(id, "verdict", to_string(r.verdict));
    csv.row(id, "lhs", r.lhs);
    csv.row(id, "rhs", r.rhs);
    csv.row(id, "margin", r.rhs - r.lhs);
    for (const auto& [k, v] : r.constants) {
      csv.row(id, k, v);
      ctx.out << "  " << k << "=" << v << "\n";
    }
    for (std::size_t i = 0; i < r.notes.size(); ++i) {
      std::string note = r.notes[i];
      std::replace(note.begin(), note.end(), ',', ';');
      csv.row(id, "note" + std::to_string(i), note);
      ctx.out << "  note: " << r.notes[i] << "\n";
    }
  }
  return all ? kSuccess : kDomainFailure;
}

// ---------------------------------------------------------------------------
// simulate

template <std::size_t Dim>
std::vector<Point<Dim>> initial_points(const RunConfig& cfg, double multiplier, std::uint64_t stream) {
  auto rng = ibm::make_rng(cfg.ibm.seed ^ 0x9e3779b97f4a7c15ull, stream);
  const double L = cfg.domain.length;
  if (cfg.ibm.initial == "uniform") return ibm::sample_uniform<Dim>(cfg.ibm.initial_count, L, rng);
  return ibm::sample_poisson_field<Dim>(density_function<Dim>(cfg.kinetics.rho0, L, cfg.domain.grid), L,
                                        cfg.domain.grid, multiplier, rng);
}

template <std::size_t Dim>
int simulate(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& I = cfg.ibm;
  const auto sm = ibm::apply_vlasov_scaling(cfg.model, I.epsilon);
  CsvWriter manifest(ctx.file("manifest.csv"), ctx.prov,
                     {"replica", "seed", "stream", "initial_N", "final_N", "events", "extinct", "extinction_time",
                      "slope", "audits", "max_audit_deviation"});
  std::vector<double> slopes;
  std::size_t extinct = 0;
  for (std::size_t r = 0; r < I.replicas; ++r) {
    ibm::SimulatorOptions opt;
    opt.box_length = cfg.domain.length;
    opt.seed = I.seed;
    opt.replica = r;
    opt.birth_prefactor = sm.birth_prefactor;
    opt.audit_every = I.audit_every;
    ibm::Simulator<Dim> sim(sm.params, opt, initial_points<Dim>(cfg, sm.density_multiplier, r));
    const auto tr = sim.run(I.t_end, I.sample_dt, I.snapshot_every);
    const std::string suffix = "_" + std::to_string(r) + ".csv";
    CsvWriter traj(ctx.file("trajectory" + suffix), ctx.prov, {"t", "N", "births", "deaths", "rejections", "flag"});
    for (const auto& row : tr.rows)
      traj.row(row.t, row.population, row.births, row.deaths, row.rejections, row.extinct ? "extinct" : "alive");
    if (I.snapshot_every > 0) {
      std::vector<std::string> cols{"t", "particle_id"};
      for (std::size_t i = 0; i < Dim; ++i) cols.push_back("x" + std::to_string(i + 1));
      CsvWriter snap(ctx.file("snapshots" + suffix), ctx.prov, cols);
      for (const auto& s : tr.snapshots)
        for (std::size_t k = 0; k < s.points.size(); ++k) {
          auto& os = snap.stream();
          os << s.t << "," << s.ids[k];
          for (double c : s.points[k]) os << "," << c;
          os << "\n";
        }
    }
    double slope = std::nan("");
    try {
      slope = ibm::log_growth_slope(tr.rows);
      slopes.push_back(slope);
    } catch (const ParameterError&) {
    }
    if (tr.extinct) ++extinct;
    manifest.row(r, I.seed, r, tr.initial_population, tr.rows.empty() ? 0 : tr.rows.back().population, sim.events(),
                 tr.extinct ? "true" : "false", tr.extinct ? tr.extinction_time : I.t_end, slope, sim.audits(),
                 sim.max_audit_deviation());
  }
  const double reference = cfg.model.kappa_plus * l1_norm(cfg.model.a_plus) - cfg.model.mortality;
  CsvWriter summary(ctx.file("summary.csv"), ctx.prov,
                    {"replicas", "slopes_used", "mean_slope", "stderr", "kappa_minus_m", "extinct"});
  double mean = std::nan(""), se = std::nan("");
  if (!slopes.empty()) {
    const auto est = ibm::mean_estimate(slopes);
    mean = est.mean;
    se = est.stderr_;
  }
  summary.row(I.replicas, slopes.size(), mean, se, reference, extinct);
  ctx.out << "replicas=" << I.replicas << " mean_slope=" << mean << " stderr=" << se
          << " kappa_minus_m=" << reference << " extinct=" << extinct << "\n";
  return kSuccess;
}

inline int cmd_simulate(Context& ctx) {
  return ctx.cfg.domain.dimension == 1 ? simulate<1>(ctx) : simulate<2>(ctx);
}

// ---------------------------------------------------------------------------
// solve

inline kinetics::SolverConfig solver_config(const KineticsConfig& K) {
  kinetics::SolverConfig sc;
  sc.scheme = kinetics::parse_scheme(K.scheme);
  sc.dt = K.dt;
  sc.t_end = K.t_end;
  sc.record_every = K.record_every;
  sc.picard.max_iters = K.picard_max_iters;
  sc.picard.tol = K.picard_tol;
  sc.density_bound = K.density_bound;
  return sc;
}

template <std::size_t Dim>
void write_density(CsvWriter& csv, const std::vector<double>& times,
                   const std::vector<kinetics::DensityField<Dim>>& fields) {
  auto& os = csv.stream();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto& f = fields[k];
    for (std::size_t i = 0; i < f.size(); ++i) {
      os << times[k];
      for (auto j : f.grid.multi_index(i)) os << "," << j;
      os << "," << f[i] << "\n";
    }
  }
}

template <std::size_t Dim>
int solve(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& K = cfg.kinetics;
  const kinetics::Grid<Dim> grid(cfg.domain.length, cfg.domain.grid);
  const auto rho0 = kinetics::DensityField<Dim>::from_function(
      grid, density_function<Dim>(K.rho0, cfg.domain.length, cfg.domain.grid));
  const auto sc = solver_config(K);
  const kinetics::KineticModel<Dim> model(cfg.model, grid);

  std::vector<std::string> cols{"t"};
  for (std::size_t i = 0; i < Dim; ++i) cols.push_back("i" + std::to_string(i + 1));
  cols.push_back("rho");

  struct Run {
    std::string mech;
    kinetics::Solution<Dim> sol;
    std::optional<kinetics::PicardResult<Dim>> picard;
    double picard_diff = std::nan("");
  };
  std::vector<Run> runs;
  for (const auto& name : K.mechanisms) {
    const Mechanism mech = parse_mechanism(name);
    Run run{to_string(mech), kinetics::integrate(rho0, model, sc, mech), std::nullopt};
    for (const auto& w : run.sol.warnings) ctx.err << "warning (" << run.mech << "): " << w << "\n";
    CsvWriter dens(ctx.file("density_" + run.mech + ".csv"), ctx.prov, cols);
    write_density(dens, run.sol.times, run.sol.fields);
    if (K.picard) {
      run.picard = kinetics::picard_solve(rho0, model, sc, mech);
      const auto& d = run.picard->diagnostics;
      CsvWriter diag(ctx.file("picard_" + run.mech + ".csv"), ctx.prov, {"iter", "delta_norm", "ratio"});
      for (std::size_t n = 0; n < d.deltas.size(); ++n)
        diag.row(n + 1, d.deltas[n], n == 0 ? std::nan("") : d.ratios[n - 1]);
      run.picard_diff = 0.0;
      for (std::size_t k = 0; k < run.sol.fields.size(); ++k)
        run.picard_diff = std::max(run.picard_diff, kinetics::sup_distance(run.sol.fields[k], run.picard->fields[k]));
    }
    runs.push_back(std::move(run));
  }
  double mech_diff = std::nan("");
  if (runs.size() >= 2) {
    mech_diff = 0.0;
    for (std::size_t k = 0; k < runs[0].sol.fields.size(); ++k)
      mech_diff = std::max(mech_diff, kinetics::sup_distance(runs[0].sol.fields[k], runs[1].sol.fields[k]));
  }

  CsvWriter summary(ctx.file("solve_summary.csv"), ctx.prov,
                    {"mechanism", "scheme", "t_final", "final_min", "final_max", "final_mean", "picard_iterations",
                     "picard_diff", "mechanism_diff", "warnings"});
  for (const auto& r : runs) {
    const auto& f = r.sol.fields.back();
    const double mean = f.mass() / std::pow(cfg.domain.length, static_cast<double>(Dim));
    summary.row(r.mech, K.scheme, r.sol.times.back(), f.min(), f.max(), mean,
                r.picard ? r.picard->diagnostics.iterations : 0, r.picard_diff, mech_diff, r.sol.warnings.size());
    ctx.out << r.mech << ": t=" << r.sol.times.back() << " min=" << f.min() << " max=" << f.max()
            << " mean=" << mean;
    if (r.picard) ctx.out << " picard_iterations=" << r.picard->diagnostics.iterations << " picard_diff=" << r.picard_diff;
    ctx.out << "\n";
  }
  if (runs.size() >= 2) ctx.out << "mechanism_diff=" << mech_diff << "\n";

  if (l1_norm(cfg.model.phi) > 0.0) {
    CsvWriter eq(ctx.file("equilibria.csv"), ctx.prov, {"u", "stable", "slope"});
    for (const auto& e : kinetics::homogeneous_equilibria(cfg.model)) eq.row(e.u, e.stable ? "true" : "false", e.slope);
  }
  return kSuccess;
}

inline int cmd_solve(Context& ctx) { return ctx.cfg.domain.dimension == 1 ? solve<1>(ctx) : solve<2>(ctx); }

// ---------------------------------------------------------------------------
// limit-study

struct LimitRow {
  double eps = 1.0;
  double t = 0.0;
  double l2_error = 0.0;
  double stderr_ = 0.0;
};

struct LimitStudy {
  std::vector<LimitRow> rows;
  /// One entry per (t, consecutive eps pair); false where the finer scale
  /// has a larger error beyond 2 stderr.
  struct Step {
    double t, eps_coarse, eps_fine, err_coarse, err_fine, allowance;
    bool ok;
  };
  std::vector<Step> steps;
  bool monotone() const {
    return std::all_of(steps.begin(), steps.end(), [](const Step& s) { return s.ok; });
  }
};

/// eps-scaled IBM densities (times eps) against the kinetic solution, binned.
/// The error at each (eps, t) is the L2 distance of the replica-mean density
/// to the bin-averaged kinetic density; stderr is the jackknife over replicas.
template <std::size_t Dim>
LimitStudy limit_study(const RunConfig& cfg) {
  const auto& I = cfg.ibm;
  const auto& K = cfg.kinetics;
  const double L = cfg.domain.length;
  const std::size_t n = cfg.domain.grid;
  if (I.replicas < 2) throw ConfigError("limit-study needs ibm.replicas >= 2 for the jackknife");
  std::vector<double> times{0.0};
  for (double t : I.limit_times) times.push_back(t);
  std::sort(times.begin(), times.end());

  const kinetics::Grid<Dim> grid(L, n);
  const auto rho_fn = density_function<Dim>(K.rho0, L, n);
  const auto rho0 = kinetics::DensityField<Dim>::from_function(grid, rho_fn);
  auto sc = solver_config(K);
  sc.t_end = times.back();
  sc.record_every = 1;
  for (double t : times) {
    const double k = t / sc.dt;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
      throw ConfigError("ibm.limit_times must be multiples of kinetics.dt");
  }
  const Mechanism mech = cfg.model.mechanism;
  const auto sol = kinetics::integrate(rho0, kinetics::KineticModel<Dim>(cfg.model, grid), sc, mech);

  // Kinetic reference averaged over the cells of each bin.
  const std::size_t B = I.bins, per = n / B;
  std::size_t nbins = 1;
  for (std::size_t i = 0; i < Dim; ++i) nbins *= B;
  double bin_vol = 1.0;
  for (std::size_t i = 0; i < Dim; ++i) bin_vol *= L / static_cast<double>(B);
  std::vector<std::vector<double>> ref(times.size(), std::vector<double>(nbins, 0.0));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto step = static_cast<std::size_t>(std::llround(times[k] / sc.dt));
    const auto& f = sol.fields[step];
    for (std::size_t c = 0; c < f.size(); ++c) {
      const auto idx = grid.multi_index(c);
      std::size_t b = 0;
      for (std::size_t i = Dim; i-- > 0;) b = b * B + idx[i] / per;
      ref[k][b] += f[c];
    }
    double cells = 1.0;
    for (std::size_t i = 0; i < Dim; ++i) cells *= static_cast<double>(per);
    for (auto& v : ref[k]) v /= cells;
  }

  LimitStudy out;
  std::vector<std::vector<LimitRow>> by_eps;
  for (std::size_t e = 0; e < I.epsilons.size(); ++e) {
    const double eps = I.epsilons[e];
    const auto sm = ibm::apply_vlasov_scaling(cfg.model, eps);
    // hist[k][r] = replica r density at times[k], times eps.
    std::vector<std::vector<std::vector<double>>> hist(times.size());
    for (std::size_t r = 0; r < I.replicas; ++r) {
      const std::uint64_t stream = e * 1000000ull + r;
      ibm::SimulatorOptions opt;
      opt.box_length = L;
      opt.seed = I.seed;
      opt.replica = stream;
      opt.birth_prefactor = sm.birth_prefactor;
      opt.audit_every = I.audit_every;
      auto rng = ibm::make_rng(I.seed ^ 0x9e3779b97f4a7c15ull, stream);
      ibm::Simulator<Dim> sim(sm.params, opt,
                              ibm::sample_poisson_field<Dim>(rho_fn, L, n, sm.density_multiplier, rng));
      for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] > sim.time()) sim.run(times[k], times[k] - sim.time());
        std::vector<Point<Dim>> pts(sim.size());
        for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = sim.position(i);
        hist[k].push_back(ibm::estimate_density<Dim>({pts}, L, B, eps).values);
      }
    }
    std::vector<LimitRow> rows;
    const double R = static_cast<double>(I.replicas);
    for (std::size_t k = 0; k < times.size(); ++k) {
      std::vector<double> sum(nbins, 0.0);
      for (const auto& h : hist[k])
        for (std::size_t b = 0; b < nbins; ++b) sum[b] += h[b];
      auto error_of = [&](const std::vector<double>& mean) {
        double s = 0.0;
        for (std::size_t b = 0; b < nbins; ++b) s += (mean[b] - ref[k][b]) * (mean[b] - ref[k][b]);
        return std::sqrt(s * bin_vol);
      };
      std::vector<double> mean(nbins);
      for (std::size_t b = 0; b < nbins; ++b) mean[b] = sum[b] / R;
      const double full = error_of(mean);
      std::vector<double> loo(I.replicas);
      for (std::size_t r = 0; r < I.replicas; ++r) {
        for (std::size_t b = 0; b < nbins; ++b) mean[b] = (sum[b] - hist[k][r][b]) / (R - 1.0);
        loo[r] = error_of(mean);
      }
      double avg = 0.0, var = 0.0;
      for (double v : loo) avg += v / R;
      for (double v : loo) var += (v - avg) * (v - avg);
      rows.push_back({eps, times[k], full, std::sqrt(var * (R - 1.0) / R)});
    }
    by_eps.push_back(rows);
  }
  for (const auto& rows : by_eps) out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t e = 1; e < by_eps.size(); ++e) {
      const auto& a = by_eps[e - 1][k];
      const auto& b = by_eps[e][k];
      const double allowance = 2.0 * std::hypot(a.stderr_, b.stderr_);
      out.steps.push_back({times[k], a.eps, b.eps, a.l2_error, b.l2_error, allowance,
                           b.l2_error <= a.l2_error + allowance});
    }
  return out;
}

inline int cmd_limit_study(Context& ctx) {
  const auto study = ctx.cfg.domain.dimension == 1 ? limit_study<1>(ctx.cfg) : limit_study<2>(ctx.cfg);
  CsvWriter table(ctx.file("limit_study.csv"), ctx.prov, {"eps", "t", "L2_error", "stderr"});
  for (const auto& r : study.rows) {
    table.row(r.eps, r.t, r.l2_error, r.stderr_);
    ctx.out << "eps=" << r.eps << " t=" << r.t << " L2_error=" << r.l2_error << " stderr=" << r.stderr_ << "\n";
  }
  CsvWriter mono(ctx.file("limit_monotonicity.csv"), ctx.prov,
                 {"t", "eps_coarse", "eps_fine", "error_coarse", "error_fine", "allowance", "status"});
  for (const auto& s : study.steps)
    mono.row(s.t, s.eps_coarse, s.eps_fine, s.err_coarse, s.err_fine, s.allowance, s.ok ? "pass" : "fail");
  ctx.out << "monotone=" << (study.monotone() ? "true" : "false") << "\n";
  return study.monotone() ? kSuccess : kDomainFailure;
}

// ---------------------------------------------------------------------------
// verify

inline int cmd_verify(Context& ctx) {
  const auto& V = ctx.cfg.verify;
  const auto results =
      run_verification(VerifyOptions{V.instances, V.seed, V.mc_samples, V.corrupt_closed_form});
  CsvWriter csv(ctx.file("verify.csv"), ctx.prov,
                {"family", "instances", "max_deviation", "tolerance", "status", "note"});
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed;
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    csv.row(r.family, r.instances, r.max_deviation, r.tolerance, r.status(), note);
    ctx.out << r.family << ",instances=" << r.instances << ",max_deviation=" << r.max_deviation
            << ",tolerance=" << r.tolerance << "," << r.status();
    if (!r.note.empty()) ctx.out << " (" << r.note << ")";
    ctx.out << "\n";
  }
  ctx.out << "verify: " << (ok ? "pass" : "fail") << "\n";
  return ok ? kSuccess : kDomainFailure;
}

// ---------------------------------------------------------------------------
// entry point

inline std::string seeds_of(const std::string& command, const RunConfig& cfg) {
  if (command == "simulate" || command == "limit-study")
    return "ibm.seed=" + std::to_string(cfg.ibm.seed) + " streams=replica index";
  if (command == "verify") return "verify.seed=" + std::to_string(cfg.verify.seed);
  return "";
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Spatial birth-death models: condition checks, simulation, kinetic solves."};
  app.name("ecokin");
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"check", "evaluate the sufficient conditions"},
      {"simulate", "run the individual-based model"},
      {"solve", "integrate the kinetic equations"},
      {"limit-study", "compare scaled simulations with the kinetic solution"},
      {"verify", "run the identity verification suite"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "YAML configuration file");
    sub->add_option("--set", overrides, "override one key, e.g. model.mortality=2")->allow_extra_args(false);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed for ibm and verify");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsageError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  std::string line;
  for (int i = 0; i < argc; ++i) line += (i ? " " : "") + std::string(argv[i]);

  try {
    if (seed) {
      overrides.push_back("ibm.seed=" + std::to_string(*seed));
      overrides.push_back("verify.seed=" + std::to_string(*seed));
    }
    Context ctx{load_config(config_path, overrides), {}, {}, out, err};
    ctx.prov = {line, ctx.cfg.hash, seeds_of(command, ctx.cfg)};
    ctx.out_dir = out_dir.empty() ? ctx.cfg.output.directory : out_dir;
    std::filesystem::create_directories(ctx.out_dir);
    if (command == "check") return cmd_check(ctx);
    if (command == "simulate") return cmd_simulate(ctx);
    if (command == "solve") return cmd_solve(ctx);
    if (command == "limit-study") return cmd_limit_study(ctx);
    return cmd_verify(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
}

}  // namespace ecokin::app
