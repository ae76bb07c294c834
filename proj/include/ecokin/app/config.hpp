#pragma once

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/kernels.hpp"
#include "ecokin/model.hpp"

namespace ecokin::app {

/// Invalid or unreadable configuration; the CLI maps it to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

struct DomainConfig {
  int dimension = 1;
  double length = 20.0;
  std::size_t grid = 256;
};

/// Initial density for the kinetic solvers and Poisson initial conditions.
struct DensitySpec {
  std::string kind = "constant";  ///< constant | gaussian-bump | two-bump | from-file
  double value = 1.0;
  double base = 0.0;
  double height = 1.0;
  double width = 1.0;
  std::vector<double> centers;  ///< bump centres along axis 0; default L/2 or L/3, 2L/3
  std::string file;
  std::vector<double> file_values;  ///< loaded from `file`, one per grid cell
};

struct IbmConfig {
  std::size_t replicas = 10;
  double t_end = 5.0;
  double sample_dt = 0.1;
  std::size_t snapshot_every = 0;  ///< snapshot every k-th sample row; 0 = none
  std::uint64_t seed = 1;
  double epsilon = 1.0;  ///< scaling used by `simulate`
  std::vector<double> epsilons{1.0, 0.5, 0.25, 0.125};
  std::vector<double> limit_times{0.5, 1.0};
  std::size_t bins = 16;
  std::string initial = "uniform";  ///< uniform | poisson (from kinetics.rho0)
  std::size_t initial_count = 100;
  std::uint64_t audit_every = 10000;
};

struct KineticsConfig {
  std::string scheme = "rk4";
  double dt = 0.01;
  double t_end = 2.0;
  std::size_t record_every = 10;
  bool picard = false;
  int picard_max_iters = 100;
  double picard_tol = 1e-10;
  std::vector<std::string> mechanisms;  ///< default: model.mechanism
  DensitySpec rho0;
  double density_bound = 0.0;
};

struct ChecksConfig {
  std::vector<std::string> theorems;  ///< default: the model's semigroup theorem
  std::vector<double> C{1.0 + 1e-6};
  std::optional<double> c;
  std::optional<double> alpha;
};

struct VerifyConfig {
  std::size_t instances = 200;
  std::uint64_t seed = 1;
  std::size_t mc_samples = 100000;
  bool corrupt_closed_form = false;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv"};
};

struct RunConfig {
  ModelParams model;
  DomainConfig domain;
  IbmConfig ibm;
  KineticsConfig kinetics;
  ChecksConfig checks;
  VerifyConfig verify;
  OutputConfig output;
  /// Effective YAML after overrides, and its FNV-1a hash.
  std::string canonical;
  std::uint64_t hash = 0;
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

inline std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.line < 0) return "config (default or --set)";
  return "config:" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

/// Typed access to one mapping with unknown-key rejection.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_) return;
    if (!node_.IsMap()) throw ConfigError(where(node_) + ": '" + path_ + "' must be a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError(where(kv.first) + ": unknown key '" + full(key) + "' (allowed: " + list + ")");
      }
    }
  }

  bool has(const std::string& key) const { return node_ && node_[key]; }
  YAML::Node child(const std::string& key) const {
    return node_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
  }
  std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void get(const std::string& key, T& out) const {
    if (!has(key)) return;
    const YAML::Node v = node_[key];
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(where(v) + ": '" + full(key) + "' has the wrong type (expected " + type_name<T>() + ")");
    }
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) const {
    if (!has(key)) return;
    T v{};
    get(key, v);
    out = v;
  }

  double number(const std::string& key, double fallback) const {
    double v = fallback;
    get(key, v);
    return v;
  }

  YAML::Node node() const { return node_; }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else return "a list";
  }

  YAML::Node node_;
  std::string path_;
};

inline void require(bool ok, const YAML::Node& n, const std::string& msg) {
  if (!ok) throw ConfigError(where(n) + ": " + msg);
}

inline KernelSpec parse_kernel(const YAML::Node& node, const std::string& path, int dim) {
  if (!node || node.IsNull()) return KernelSpec::zero(dim);
  if (node.IsScalar() && node.as<std::string>() == "zero") return KernelSpec::zero(dim);
  Section s(node, path, {"family", "height", "radius", "mass", "sigma", "scale", "e1", "delta", "cutoff"});
  std::string family;
  s.get("family", family);
  auto need = [&](const char* key) {
    require(s.has(key), node, "'" + s.full(key) + "' is required for family " + family);
    return s.number(key, 0.0);
  };
  std::optional<double> cutoff;
  s.get("cutoff", cutoff);
  try {
    if (family == "zero") return KernelSpec::zero(dim);
    if (family == "tophat") return KernelSpec::top_hat(dim, need("height"), need("radius"));
    if (family == "gaussian") return KernelSpec::gaussian(dim, need("mass"), need("sigma"), cutoff);
    if (family == "exponential") return KernelSpec::exponential(dim, need("mass"), need("scale"), cutoff);
    if (family == "powerlaw")
      return KernelSpec::power_law(dim, need("e1"), need("delta"),
                                   cutoff.value_or(std::numeric_limits<double>::infinity()));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where(node) + ": " + path + ": " + e.what());
  }
  throw ConfigError(where(node) + ": '" + path + ".family' must be one of zero|tophat|gaussian|exponential|powerlaw");
}

inline void set_path(YAML::Node node, const std::vector<std::string>& keys, std::size_t i, const YAML::Node& value) {
  if (i + 1 == keys.size()) {
    node[keys[i]] = value;
    return;
  }
  YAML::Node next = node[keys[i]];
  if (!next || !next.IsMap()) {
    node[keys[i]] = YAML::Node(YAML::NodeType::Map);
  }
  set_path(node[keys[i]], keys, i + 1, value);
}

}  // namespace detail

/// Applies `a.b.c=value` (value parsed as YAML) to the document.
inline void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  std::vector<std::string> keys;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("--set: empty path component in '" + key + "'");
    keys.push_back(part);
  }
  YAML::Node value;
  try {
    value = YAML::Clone(YAML::Load(assignment.substr(eq + 1)));
  } catch (const YAML::Exception& e) {
    throw ConfigError("--set " + key + ": cannot parse value: " + e.what());
  }
  if (!root || !root.IsMap()) root = YAML::Node(YAML::NodeType::Map);
  detail::set_path(root, keys, 0, value);
}

inline std::vector<double> load_density_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open density file '" + path + "'");
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find_last_of(',');
    const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      out.push_back(std::stod(field));
    } catch (const std::exception&) {
      if (out.empty()) continue;  // header row
      throw ConfigError("density file '" + path + "': bad value '" + field + "'");
    }
  }
  return out;
}

/// Builds and validates a RunConfig from a YAML document.
inline RunConfig parse_config(const YAML::Node& root) {
  using detail::require;
  using detail::Section;
  RunConfig cfg;
  Section top(root, "", {"model", "domain", "ibm", "kinetics", "checks", "verify", "output"});

  Section dom(top.child("domain"), "domain", {"dimension", "length", "grid"});
  dom.get("dimension", cfg.domain.dimension);
  dom.get("length", cfg.domain.length);
  dom.get("grid", cfg.domain.grid);
  require(cfg.domain.dimension == 1 || cfg.domain.dimension == 2, dom.child("dimension"),
          "domain.dimension must be 1 or 2");
  require(cfg.domain.length > 0.0 && std::isfinite(cfg.domain.length), dom.child("length"),
          "domain.length must be positive");
  require(cfg.domain.grid >= 2, dom.child("grid"), "domain.grid must be at least 2");
  const int d = cfg.domain.dimension;

  Section mod(top.child("model"), "model",
              {"mortality", "kappa_plus", "mechanism", "dispersal", "a_plus", "b_plus", "phi"});
  auto& p = cfg.model;
  p.a_plus = KernelSpec::top_hat(d, d == 1 ? 0.5 : 1.0 / std::numbers::pi, 1.0);
  mod.get("mortality", p.mortality);
  mod.get("kappa_plus", p.kappa_plus);
  std::string mech = "establishment", disp = "independent";
  mod.get("mechanism", mech);
  mod.get("dispersal", disp);
  try {
    p.mechanism = parse_mechanism(mech);
    p.dispersal = parse_dispersal(disp);
  } catch (const Error& e) {
    throw ConfigError(detail::where(mod.node()) + ": " + e.what());
  }
  if (mod.has("a_plus")) p.a_plus = detail::parse_kernel(mod.child("a_plus"), "model.a_plus", d);
  p.b_plus = detail::parse_kernel(mod.child("b_plus"), "model.b_plus", d);
  p.phi = detail::parse_kernel(mod.child("phi"), "model.phi", d);
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  Section ibm(top.child("ibm"), "ibm",
              {"replicas", "t_end", "sample_dt", "snapshot_every", "seed", "epsilon", "epsilons", "limit_times",
               "bins", "initial", "initial_count", "audit_every"});
  auto& I = cfg.ibm;
  ibm.get("replicas", I.replicas);
  ibm.get("t_end", I.t_end);
  ibm.get("sample_dt", I.sample_dt);
  ibm.get("snapshot_every", I.snapshot_every);
  ibm.get("seed", I.seed);
  ibm.get("epsilon", I.epsilon);
  ibm.get("epsilons", I.epsilons);
  ibm.get("limit_times", I.limit_times);
  ibm.get("bins", I.bins);
  ibm.get("initial", I.initial);
  ibm.get("initial_count", I.initial_count);
  ibm.get("audit_every", I.audit_every);
  require(I.replicas >= 1, ibm.child("replicas"), "ibm.replicas must be at least 1");
  require(I.t_end > 0.0, ibm.child("t_end"), "ibm.t_end must be positive");
  require(I.sample_dt > 0.0, ibm.child("sample_dt"), "ibm.sample_dt must be positive");
  require(I.epsilon > 0.0 && I.epsilon <= 1.0, ibm.child("epsilon"), "ibm.epsilon must lie in (0, 1]");
  require(!I.epsilons.empty(), ibm.child("epsilons"), "ibm.epsilons must not be empty");
  for (std::size_t k = 0; k < I.epsilons.size(); ++k) {
    require(I.epsilons[k] > 0.0 && I.epsilons[k] <= 1.0, ibm.child("epsilons"), "ibm.epsilons entries must lie in (0, 1]");
    require(k == 0 || I.epsilons[k] < I.epsilons[k - 1], ibm.child("epsilons"), "ibm.epsilons must be strictly descending");
  }
  for (double t : I.limit_times) require(t > 0.0, ibm.child("limit_times"), "ibm.limit_times must be positive");
  require(I.bins >= 1 && cfg.domain.grid % I.bins == 0, ibm.child("bins"), "ibm.bins must divide domain.grid");
  require(I.initial == "uniform" || I.initial == "poisson", ibm.child("initial"),
          "ibm.initial must be uniform|poisson");

  Section kin(top.child("kinetics"), "kinetics",
              {"scheme", "dt", "t_end", "record_every", "picard", "mechanisms", "rho0", "density_bound"});
  auto& K = cfg.kinetics;
  kin.get("scheme", K.scheme);
  kin.get("dt", K.dt);
  kin.get("t_end", K.t_end);
  kin.get("record_every", K.record_every);
  kin.get("mechanisms", K.mechanisms);
  kin.get("density_bound", K.density_bound);
  require(K.scheme == "rk4" || K.scheme == "exponential-euler", kin.child("scheme"),
          "kinetics.scheme must be rk4|exponential-euler");
  require(K.dt > 0.0, kin.child("dt"), "kinetics.dt must be positive");
  require(K.t_end >= 0.0, kin.child("t_end"), "kinetics.t_end must be nonnegative");
  require(K.record_every >= 1, kin.child("record_every"), "kinetics.record_every must be at least 1");
  if (K.mechanisms.empty()) K.mechanisms.push_back(to_string(p.mechanism));
  for (const auto& m : K.mechanisms) {
    try {
      parse_mechanism(m);
    } catch (const Error& e) {
      throw ConfigError(detail::where(kin.child("mechanisms")) + ": " + e.what());
    }
  }
  Section pic(kin.child("picard"), "kinetics.picard", {"enabled", "max_iters", "tol"});
  pic.get("enabled", K.picard);
  pic.get("max_iters", K.picard_max_iters);
  pic.get("tol", K.picard_tol);
  require(K.picard_max_iters >= 1, pic.child("max_iters"), "kinetics.picard.max_iters must be at least 1");
  require(K.picard_tol > 0.0, pic.child("tol"), "kinetics.picard.tol must be positive");
  Section rho(kin.child("rho0"), "kinetics.rho0",
              {"kind", "value", "base", "height", "width", "centers", "file"});
  auto& R = K.rho0;
  rho.get("kind", R.kind);
  rho.get("value", R.value);
  rho.get("base", R.base);
  rho.get("height", R.height);
  rho.get("width", R.width);
  rho.get("centers", R.centers);
  rho.get("file", R.file);
  if (R.kind == "constant") {
    require(R.value >= 0.0, rho.child("value"), "kinetics.rho0.value must be nonnegative");
  } else if (R.kind == "gaussian-bump" || R.kind == "two-bump") {
    require(R.base >= 0.0 && R.height >= 0.0, rho.node(), "kinetics.rho0 base and height must be nonnegative");
    require(R.width > 0.0, rho.child("width"), "kinetics.rho0.width must be positive");
    const std::size_t want = R.kind == "two-bump" ? 2 : 1;
    if (R.centers.empty()) {
      const double L = cfg.domain.length;
      R.centers = want == 1 ? std::vector<double>{L / 2} : std::vector<double>{L / 3, 2 * L / 3};
    }
    require(R.centers.size() == want, rho.child("centers"),
            "kinetics.rho0.centers must list " + std::to_string(want) + " value(s)");
  } else if (R.kind == "from-file") {
    require(!R.file.empty(), rho.node(), "kinetics.rho0.file is required for kind from-file");
    R.file_values = load_density_file(R.file);
    std::size_t cells = 1;
    for (int i = 0; i < d; ++i) cells *= cfg.domain.grid;
    require(R.file_values.size() == cells, rho.child("file"),
            "kinetics.rho0.file must hold " + std::to_string(cells) + " values, found " +
                std::to_string(R.file_values.size()));
  } else {
    throw ConfigError(detail::where(rho.child("kind")) +
                      ": kinetics.rho0.kind must be constant|gaussian-bump|two-bump|from-file");
  }

  Section chk(top.child("checks"), "checks", {"theorems", "C", "c", "alpha"});
  auto& Ch = cfg.checks;
  chk.get("theorems", Ch.theorems);
  if (chk.has("C")) {
    if (chk.child("C").IsSequence()) {
      chk.get("C", Ch.C);
    } else {
      double c1 = 0.0;
      chk.get("C", c1);
      Ch.C = {c1};
    }
  }
  chk.get("c", Ch.c);
  chk.get("alpha", Ch.alpha);
  if (Ch.theorems.empty()) Ch.theorems.push_back(to_string(p.mechanism));
  for (const auto& t : Ch.theorems)
    require(t == "establishment" || t == "fecundity" || t == "vlasov" || t == "picard", chk.child("theorems"),
            "checks.theorems entries must be establishment|fecundity|vlasov|picard, got '" + t + "'");
  require(!Ch.C.empty(), chk.child("C"), "checks.C must not be empty");
  for (double c : Ch.C) require(c > 1.0 && std::isfinite(c), chk.child("C"), "checks.C values must exceed 1");
  if (Ch.c) require(*Ch.c > 0.0, chk.child("c"), "checks.c must be positive");
  if (Ch.alpha) require(*Ch.alpha > 0.0, chk.child("alpha"), "checks.alpha must be positive");

  Section ver(top.child("verify"), "verify", {"instances", "seed", "mc_samples", "corrupt_closed_form"});
  ver.get("instances", cfg.verify.instances);
  ver.get("seed", cfg.verify.seed);
  ver.get("mc_samples", cfg.verify.mc_samples);
  ver.get("corrupt_closed_form", cfg.verify.corrupt_closed_form);
  require(cfg.verify.mc_samples >= 2, ver.child("mc_samples"), "verify.mc_samples must be at least 2");

  Section out(top.child("output"), "output", {"directory", "formats"});
  out.get("directory", cfg.output.directory);
  out.get("formats", cfg.output.formats);
  for (const auto& f : cfg.output.formats)
    require(f == "csv", out.child("formats"), "output.formats supports only csv, got '" + f + "'");

  YAML::Emitter em;
  em << root;
  cfg.canonical = em.c_str();
  cfg.hash = fnv1a64(cfg.canonical);
  return cfg;
}

/// Loads `path` (empty = all defaults), applies overrides, parses.
inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  YAML::Node root;
  if (!path.empty()) {
    try {
      root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
      throw ConfigError("cannot open config file '" + path + "'");
    } catch (const YAML::ParserException& e) {
      throw ConfigError("config:" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                        ": YAML syntax error: " + e.msg);
    }
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);
  return parse_config(root);
}

}  // namespace ecokin::app
