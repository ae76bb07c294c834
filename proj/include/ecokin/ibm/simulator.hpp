#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ecokin/configuration.hpp"
#include "ecokin/error.hpp"
#include "ecokin/ibm/cell_list.hpp"
#include "ecokin/kernels.hpp"
#include "ecokin/model.hpp"

namespace ecokin::ibm {

namespace detail {

/// Fenwick tree of nonnegative weights with prefix search.
class Fenwick {
 public:
  void resize(std::size_t n) {
    std::vector<double> w = weights_;
    w.resize(n, 0.0);
    rebuild(w);
  }

  void rebuild(const std::vector<double>& w) {
    weights_ = w;
    tree_.assign(w.size() + 1, 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      tree_[i + 1] += w[i];
      const std::size_t j = (i + 1) + ((i + 1) & (~(i + 1) + 1));
      if (j <= w.size()) tree_[j] += tree_[i + 1];
    }
  }

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }

  void set(std::size_t i, double w) {
    const double delta = w - weights_[i];
    weights_[i] = w;
    for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += delta;
  }

  double total() const {
    double s = 0.0;
    for (std::size_t j = weights_.size(); j > 0; j -= j & (~j + 1)) s += tree_[j];
    return std::max(0.0, s);
  }

  /// Smallest index whose inclusive prefix sum exceeds u.
  std::size_t find(double u) const {
    std::size_t pos = 0;
    std::size_t step = std::bit_floor(tree_.size() > 1 ? tree_.size() - 1 : std::size_t{1});
    for (; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= u) {
        pos = next;
        u -= tree_[next];
      }
    }
    return pos;
  }

 private:
  std::vector<double> weights_;
  std::vector<double> tree_;
};

}  // namespace detail

enum class EventKind { None, Death, Birth, Rejection };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::None: return "none";
    case EventKind::Death: return "death";
    case EventKind::Birth: return "birth";
    case EventKind::Rejection: return "rejection";
  }
  return "?";
}

/// A drawn but not yet applied event.
template <std::size_t Dim>
struct Proposal {
  EventKind kind = EventKind::None;
  double dt = std::numeric_limits<double>::infinity();
  std::uint32_t slot = 0;    ///< dying particle, or parent of a birth proposal
  Point<Dim> position{};     ///< proposed offspring site
  double energy = 0.0;       ///< E^phi(x, gamma) at the proposed site
  double acceptance = 1.0;   ///< e^{-energy} (establishment) or 1
};

template <std::size_t Dim>
struct EventRecord {
  double t = 0.0;
  EventKind kind = EventKind::None;
  std::uint64_t id = 0;
  Point<Dim> position{};
};

struct TrajectoryRow {
  double t = 0.0;
  std::size_t population = 0;
  std::uint64_t births = 0;
  std::uint64_t deaths = 0;
  std::uint64_t rejections = 0;
  bool extinct = false;
};

template <std::size_t Dim>
struct Snapshot {
  double t = 0.0;
  std::vector<std::uint64_t> ids;
  std::vector<Point<Dim>> points;
};

template <std::size_t Dim>
struct Trajectory {
  std::vector<TrajectoryRow> rows;
  std::vector<Snapshot<Dim>> snapshots;
  bool extinct = false;
  double extinction_time = std::numeric_limits<double>::infinity();
  std::size_t initial_population = 0;
};

struct SimulatorOptions {
  double box_length = 10.0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  /// Multiplies the birth part of the generator (1/eps under Vlasov scaling).
  double birth_prefactor = 1.0;
  /// Cache audit cadence in events; 0 disables audits.
  std::uint64_t audit_every = 10000;
  double audit_tolerance = 1e-9;
  bool keep_event_log = false;
};

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
  return std::mt19937_64(seq);
}

/// Exact continuous-time simulation of the establishment / fecundity
/// birth-death process on the torus [0, L)^d.
///
/// Particles live in dense slots; S(y) = E^phi(y, gamma \ y) and
/// F(y) = sum of b+ over the other particles are cached per slot and updated
/// on each event through the cell list. Parents are drawn from a Fenwick tree
/// with weight kappa+ + F (establishment) or e^{-S}(kappa+ + F) (fecundity).
/// Establishment offspring are kept with probability e^{-E^phi(x, gamma)};
/// rejected proposals still advance the clock.
template <std::size_t Dim>
class Simulator {
 public:
  Simulator(ModelParams params, SimulatorOptions options, const std::vector<Point<Dim>>& initial)
      : p_(std::move(params)), opt_(options), b_(p_.enhancement()), rng_(make_rng(options.seed, options.replica)) {
    p_.validate(false);
    if (p_.dimension() != static_cast<int>(Dim)) throw ParameterError("simulator: kernel dimension mismatch");
    if (!(opt_.birth_prefactor > 0.0)) throw ParameterError("simulator: birth prefactor must be positive");
    const double L = opt_.box_length;
    if (!(L > 0.0) || !std::isfinite(L)) throw ParameterError("simulator: box length must be positive");
    for (const KernelSpec* k : {&p_.a_plus, &b_, &p_.phi}) {
      if (k->is_zero()) continue;
      if (!std::isfinite(k->cutoff()))
        throw ParameterError("simulator requires finite kernel cutoffs (" + k->describe() + ")");
      if (L < 10.0 * k->cutoff())
        throw ParameterError("simulator: box length must be at least 10x the largest kernel cutoff");
    }
    range_ = std::max(p_.phi.support_radius(), b_.support_radius());
    if (range_ > 0.0) cells_ = CellList<Dim>(L, range_);
    birth_scale_ = opt_.birth_prefactor * l1_norm(p_.a_plus);
    for (const auto& x : initial) {
      Point<Dim> w = x;
      for (auto& c : w) c = wrap(c, L);
      add_particle(w);
    }
    initial_ = pos_.size();
  }

  double time() const { return t_; }
  std::size_t size() const { return pos_.size(); }
  const ModelParams& params() const { return p_; }
  const SimulatorOptions& options() const { return opt_; }
  std::uint64_t births() const { return births_; }
  std::uint64_t deaths() const { return deaths_; }
  std::uint64_t rejections() const { return rejections_; }
  std::uint64_t events() const { return births_ + deaths_ + rejections_; }
  std::uint64_t audits() const { return audits_; }
  double max_audit_deviation() const { return max_audit_dev_; }
  std::size_t initial_population() const { return initial_; }
  const std::vector<EventRecord<Dim>>& event_log() const { return log_; }

  /// Cached S(y) and F(y) of slot i.
  double suppression(std::size_t i) const { return S_[i]; }
  double enhancement_sum(std::size_t i) const { return F_[i]; }
  const Point<Dim>& position(std::size_t i) const { return pos_[i]; }
  std::uint64_t id(std::size_t i) const { return ids_[i]; }

  Configuration<Dim> configuration() const { return Configuration<Dim>(pos_, opt_.box_length); }

  double total_death_rate() const { return p_.mortality * static_cast<double>(pos_.size()); }

  /// Fecundity: the exact total birth intensity. Establishment: the proposal
  /// intensity, an upper bound on the true one.
  double total_birth_rate() const { return birth_scale_ * tree_.total(); }

  double total_rate() const { return total_death_rate() + total_birth_rate(); }

  /// E^phi(x, gamma) through the cell list.
  double energy_at(const Point<Dim>& x) const {
    double e = 0.0;
    if (p_.phi.is_zero()) return e;
    cells_.for_each_near(x, [&](std::uint32_t s) {
      e += p_.phi(displacement<Dim>(x, pos_[s], opt_.box_length));
    });
    return e;
  }

  /// Draws the next event without changing the state. Consumes randomness.
  Proposal<Dim> propose() {
    Proposal<Dim> out;
    const double rd = total_death_rate();
    const double rb = total_birth_rate();
    const double r = rd + rb;
    if (pos_.empty() || !(r > 0.0)) return out;
    out.dt = std::exponential_distribution<double>(r)(rng_);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng_) * r < rd) {
      out.kind = EventKind::Death;
      out.slot = static_cast<std::uint32_t>(
          std::min(pos_.size() - 1, static_cast<std::size_t>(u(rng_) * static_cast<double>(pos_.size()))));
      return out;
    }
    out.slot = pick_parent(u(rng_) * tree_.total());
    Point<Dim> x = pos_[out.slot] + sample_displacement<Dim>(p_.a_plus, rng_);
    for (auto& c : x) c = wrap(c, opt_.box_length);
    out.position = x;
    out.kind = EventKind::Birth;
    if (p_.mechanism == Mechanism::Establishment) {
      out.energy = energy_at(x);
      out.acceptance = std::exp(-out.energy);
      if (!(u(rng_) < out.acceptance)) out.kind = EventKind::Rejection;
    }
    return out;
  }

  void apply(const Proposal<Dim>& e) {
    if (e.kind == EventKind::None) return;
    t_ += e.dt;
    switch (e.kind) {
      case EventKind::Death:
        if (opt_.keep_event_log) log_.push_back({t_, e.kind, ids_[e.slot], pos_[e.slot]});
        remove_particle(e.slot);
        ++deaths_;
        break;
      case EventKind::Birth:
        add_particle(e.position);
        if (opt_.keep_event_log) log_.push_back({t_, e.kind, ids_.back(), e.position});
        ++births_;
        break;
      case EventKind::Rejection:
        if (opt_.keep_event_log) log_.push_back({t_, e.kind, 0, e.position});
        ++rejections_;
        break;
      case EventKind::None:
        break;
    }
    if (opt_.audit_every > 0 && events() % opt_.audit_every == 0) {
      const double dev = audit();
      if (dev > opt_.audit_tolerance)
        throw Error("cache audit failed: deviation " + std::to_string(dev) + " at t=" + std::to_string(t_));
      resync();
    }
  }

  Proposal<Dim> step() {
    auto e = propose();
    apply(e);
    return e;
  }

  /// Largest deviation of cached S, F from direct sums, also checking the
  /// cell registrations. Returns +inf on a registration error.
  double audit() {
    ++audits_;
    double dev = 0.0;
    const std::size_t n = pos_.size();
    if (range_ > 0.0) {
      if (cells_.registered() != n) return std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i)
        if (!cells_.registered_in(static_cast<std::uint32_t>(i), pos_[i]))
          return std::numeric_limits<double>::infinity();
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0, f = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto d = displacement<Dim>(pos_[i], pos_[j], opt_.box_length);
        s += p_.phi(d);
        f += b_(d);
      }
      dev = std::max({dev, std::abs(s - S_[i]), std::abs(f - F_[i])});
    }
    max_audit_dev_ = std::max(max_audit_dev_, dev);
    return dev;
  }

  /// Recomputes every cache from scratch and rebuilds the parent tree.
  void resync() {
    const std::size_t n = pos_.size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0, f = 0.0;
      if (range_ > 0.0)
        cells_.for_each_near(pos_[i], [&](std::uint32_t j) {
          if (j == i) return;
          const auto d = displacement<Dim>(pos_[i], pos_[j], opt_.box_length);
          s += p_.phi(d);
          f += b_(d);
        });
      S_[i] = s;
      F_[i] = f;
    }
    std::vector<double> w(tree_.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) w[i] = weight(i);
    tree_.rebuild(w);
  }

  /// Runs until t_end, recording a row at every multiple of sample_dt and a
  /// snapshot at every `snapshot_stride`-th row (0 = none). Stops early on
  /// extinction with a final flagged row.
  Trajectory<Dim> run(double t_end, double sample_dt, std::size_t snapshot_stride = 0) {
    if (!(sample_dt > 0.0)) throw ParameterError("sample interval must be positive");
    if (!(t_end >= t_)) throw ParameterError("t_end must not precede the current time");
    Trajectory<Dim> tr;
    tr.initial_population = initial_;
    const double t0 = t_;
    std::size_t k = 0;
    auto next_sample = [&] { return t0 + static_cast<double>(k) * sample_dt; };
    auto record = [&](double t) {
      tr.rows.push_back({t, pos_.size(), births_, deaths_, rejections_, false});
      if (snapshot_stride > 0 && k % snapshot_stride == 0) tr.snapshots.push_back(snapshot(t));
      ++k;
    };
    const double eps_t = 1e-12 * std::max(1.0, t_end);
    while (true) {
      if (pos_.empty()) {
        while (next_sample() <= t_end + eps_t && next_sample() <= t_) record(next_sample());
        tr.extinct = true;
        tr.extinction_time = t_;
        tr.rows.push_back({t_, 0, births_, deaths_, rejections_, true});
        return tr;
      }
      const auto e = propose();
      const double t_next = t_ + e.dt;
      while (next_sample() <= t_end + eps_t && next_sample() < t_next) record(next_sample());
      if (t_next > t_end) {
        // The drawn event falls past the horizon; by memorylessness it can be
        // discarded.
        t_ = t_end;
        return tr;
      }
      apply(e);
    }
  }

  Snapshot<Dim> snapshot(double t) const {
    Snapshot<Dim> s;
    s.t = t;
    s.ids = ids_;
    s.points = pos_;
    return s;
  }

 private:
  double weight(std::size_t i) const {
    const double base = std::max(0.0, p_.kappa_plus + F_[i]);
    return p_.mechanism == Mechanism::Establishment ? base : std::exp(-std::max(0.0, S_[i])) * base;
  }

  std::uint32_t pick_parent(double u) {
    std::size_t i = tree_.find(u);
    if (i >= pos_.size()) i = pos_.size() - 1;
    while (i > 0 && tree_.weight(i) <= 0.0) --i;
    return static_cast<std::uint32_t>(i);
  }

  template <class F>
  void for_each_neighbour(const Point<Dim>& x, F&& f) {
    if (range_ > 0.0) cells_.for_each_near(x, f);
  }

  void add_particle(const Point<Dim>& x) {
    const auto slot = static_cast<std::uint32_t>(pos_.size());
    double s = 0.0, f = 0.0;
    for_each_neighbour(x, [&](std::uint32_t j) {
      const auto d = displacement<Dim>(x, pos_[j], opt_.box_length);
      const double ph = p_.phi(d), bb = b_(d);
      if (ph == 0.0 && bb == 0.0) return;
      S_[j] += ph;
      F_[j] += bb;
      s += ph;
      f += bb;
      tree_.set(j, weight(j));
    });
    pos_.push_back(x);
    ids_.push_back(next_id_++);
    S_.push_back(s);
    F_.push_back(f);
    if (tree_.size() < pos_.size()) tree_.resize(std::max<std::size_t>(16, 2 * pos_.size()));
    tree_.set(slot, weight(slot));
    if (range_ > 0.0) cells_.insert(slot, x);
  }

  void remove_particle(std::uint32_t slot) {
    const Point<Dim> x = pos_[slot];
    if (range_ > 0.0) cells_.erase(slot);
    tree_.set(slot, 0.0);
    for_each_neighbour(x, [&](std::uint32_t j) {
      const auto d = displacement<Dim>(x, pos_[j], opt_.box_length);
      const double ph = p_.phi(d), bb = b_(d);
      if (ph == 0.0 && bb == 0.0) return;
      S_[j] -= ph;
      F_[j] -= bb;
      tree_.set(j, weight(j));
    });
    const auto last = static_cast<std::uint32_t>(pos_.size() - 1);
    if (slot != last) {
      pos_[slot] = pos_[last];
      ids_[slot] = ids_[last];
      S_[slot] = S_[last];
      F_[slot] = F_[last];
      if (range_ > 0.0) cells_.relabel(last, slot);
      tree_.set(slot, tree_.weight(last));
    }
    tree_.set(last, 0.0);
    pos_.pop_back();
    ids_.pop_back();
    S_.pop_back();
    F_.pop_back();
  }

  ModelParams p_;
  SimulatorOptions opt_;
  KernelSpec b_;
  std::mt19937_64 rng_;
  double range_ = 0.0;
  double birth_scale_ = 0.0;
  CellList<Dim> cells_;
  detail::Fenwick tree_;
  std::vector<Point<Dim>> pos_;
  std::vector<std::uint64_t> ids_;
  std::vector<double> S_, F_;
  std::uint64_t next_id_ = 0;
  double t_ = 0.0;
  std::uint64_t births_ = 0, deaths_ = 0, rejections_ = 0, audits_ = 0;
  double max_audit_dev_ = 0.0;
  std::size_t initial_ = 0;
  std::vector<EventRecord<Dim>> log_;
};

}  // namespace ecokin::ibm
