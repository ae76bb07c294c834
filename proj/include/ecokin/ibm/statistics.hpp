#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/geometry.hpp"
#include "ecokin/ibm/simulator.hpp"

namespace ecokin::ibm {

/// Histogram density on a bins^d grid over [0, L)^d, flattened with the first
/// coordinate fastest. Standard errors are taken across snapshots (zero when
/// only one is given).
struct DensityEstimate {
  std::size_t bins = 0;
  double box = 0.0;
  std::size_t samples = 0;
  std::vector<double> values;
  std::vector<double> stderr_;
};

namespace detail {

inline void mean_and_stderr(const std::vector<std::vector<double>>& rows, std::vector<double>& mean,
                            std::vector<double>& se) {
  const std::size_t n = rows.size();
  const std::size_t k = rows.front().size();
  mean.assign(k, 0.0);
  se.assign(k, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < k; ++j) mean[j] += r[j];
  for (auto& v : mean) v /= static_cast<double>(n);
  if (n < 2) return;
  for (const auto& r : rows)
    for (std::size_t j = 0; j < k; ++j) se[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  for (auto& v : se) v = std::sqrt(v / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace detail

template <std::size_t Dim>
DensityEstimate estimate_density(const std::vector<std::vector<Point<Dim>>>& snapshots, double box,
                                 std::size_t bins, double multiplier = 1.0) {
  if (snapshots.empty()) throw ParameterError("density estimate needs at least one snapshot");
  if (!(box > 0.0) || bins == 0) throw ParameterError("density estimate: bad box or bin count");
  const double h = box / static_cast<double>(bins);
  double vol = 1.0;
  std::size_t total = 1;
  for (std::size_t i = 0; i < Dim; ++i) {
    vol *= h;
    total *= bins;
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(snapshots.size());
  for (const auto& pts : snapshots) {
    std::vector<double> hist(total, 0.0);
    for (const auto& p : pts) {
      std::size_t idx = 0;
      for (std::size_t i = Dim; i-- > 0;) {
        auto c = static_cast<std::size_t>(wrap(p[i], box) / h);
        if (c >= bins) c = bins - 1;
        idx = idx * bins + c;
      }
      hist[idx] += multiplier / vol;
    }
    rows.push_back(std::move(hist));
  }
  DensityEstimate out;
  out.bins = bins;
  out.box = box;
  out.samples = snapshots.size();
  detail::mean_and_stderr(rows, out.values, out.stderr_);
  return out;
}

/// Radial pair correlation on the torus. g[k] belongs to the shell
/// [edges[k], edges[k+1]).
struct PairCorrelation {
  std::vector<double> edges;
  std::vector<double> g;
  std::vector<double> stderr_;
  std::size_t samples = 0;
  /// Fewer than two snapshots with at least two points.
  bool insufficient = false;
};

template <std::size_t Dim>
PairCorrelation estimate_pair_correlation(const std::vector<std::vector<Point<Dim>>>& snapshots,
                                          double box, double r_max, std::size_t nbins) {
  if (!(r_max > 0.0) || r_max > 0.5 * box) throw ParameterError("pair correlation: need 0 < r_max <= L/2");
  if (nbins == 0) throw ParameterError("pair correlation: need at least one bin");
  PairCorrelation out;
  const double dr = r_max / static_cast<double>(nbins);
  for (std::size_t k = 0; k <= nbins; ++k) out.edges.push_back(static_cast<double>(k) * dr);
  double volume = 1.0;
  for (std::size_t i = 0; i < Dim; ++i) volume *= box;
  std::vector<double> shell(nbins);
  for (std::size_t k = 0; k < nbins; ++k)
    shell[k] = ball_volume(static_cast<int>(Dim), out.edges[k + 1]) - ball_volume(static_cast<int>(Dim), out.edges[k]);

  std::vector<std::vector<double>> rows;
  for (const auto& pts : snapshots) {
    const std::size_t n = pts.size();
    if (n < 2) continue;
    std::vector<double> counts(nbins, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double r = norm<Dim>(displacement<Dim>(pts[i], pts[j], box));
        if (r >= r_max) continue;
        const auto k = static_cast<std::size_t>(r / dr);
        if (k < nbins) counts[k] += 2.0;
      }
    const double pair_density = static_cast<double>(n) * static_cast<double>(n - 1) / volume;
    for (std::size_t k = 0; k < nbins; ++k) counts[k] /= pair_density * shell[k];
    rows.push_back(std::move(counts));
  }
  out.samples = rows.size();
  out.insufficient = rows.size() < 2;
  if (rows.empty()) {
    out.g.assign(nbins, 0.0);
    out.stderr_.assign(nbins, 0.0);
    return out;
  }
  detail::mean_and_stderr(rows, out.g, out.stderr_);
  return out;
}

/// Least-squares slope of log N(t) over the rows with N > 0.
inline double log_growth_slope(const std::vector<TrajectoryRow>& rows) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  double n = 0.0;
  for (const auto& r : rows) {
    if (r.extinct || r.population == 0) continue;
    const double y = std::log(static_cast<double>(r.population));
    st += r.t;
    sy += y;
    stt += r.t * r.t;
    sty += r.t * y;
    n += 1.0;
  }
  const double den = n * stt - st * st;
  if (n < 2.0 || !(den > 0.0)) throw ParameterError("growth slope needs two sample times with N > 0");
  return (n * sty - st * sy) / den;
}

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

inline MeanEstimate mean_estimate(const std::vector<double>& xs) {
  if (xs.empty()) throw ParameterError("mean of an empty sample");
  std::vector<std::vector<double>> rows;
  for (double x : xs) rows.push_back({x});
  std::vector<double> m, se;
  detail::mean_and_stderr(rows, m, se);
  return {m[0], se[0], xs.size()};
}

}  // namespace ecokin::ibm
