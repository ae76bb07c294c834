#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/geometry.hpp"

namespace ecokin::ibm {

/// Periodic cell list on [0, L)^d holding slot indices. Cells are at least
/// `range` wide, so every point within `range` of p lies in the 3^d block of
/// cells around p's cell.
template <std::size_t Dim>
class CellList {
 public:
  CellList() = default;

  CellList(double box, double range) : box_(box) {
    if (!(box > 0.0)) throw ParameterError("cell list: box length must be positive");
    if (!(range > 0.0) || !std::isfinite(range)) throw ParameterError("cell list: range must be positive and finite");
    per_side_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(box / range)));
    width_ = box / static_cast<double>(per_side_);
    std::size_t total = 1;
    for (std::size_t i = 0; i < Dim; ++i) total *= per_side_;
    cells_.assign(total, {});
    build_neighbours();
  }

  std::size_t cells() const { return cells_.size(); }
  std::size_t per_side() const { return per_side_; }

  std::size_t cell_of(const Point<Dim>& p) const {
    std::size_t idx = 0;
    for (std::size_t i = Dim; i-- > 0;) {
      auto c = static_cast<std::size_t>(p[i] / width_);
      if (c >= per_side_) c = per_side_ - 1;
      idx = idx * per_side_ + c;
    }
    return idx;
  }

  void insert(std::uint32_t slot, const Point<Dim>& p) {
    if (slot >= where_.size()) where_.resize(slot + 1);
    const std::size_t c = cell_of(p);
    where_[slot] = {c, cells_[c].size()};
    cells_[c].push_back(slot);
  }

  void erase(std::uint32_t slot) {
    const auto [c, k] = where_[slot];
    auto& v = cells_[c];
    const std::uint32_t moved = v.back();
    v[k] = moved;
    where_[moved].index = k;
    v.pop_back();
  }

  /// The particle stored as `from` is now stored as `to`.
  void relabel(std::uint32_t from, std::uint32_t to) {
    if (to >= where_.size()) where_.resize(to + 1);
    where_[to] = where_[from];
    cells_[where_[to].cell][where_[to].index] = to;
  }

  /// Calls f(slot) for every slot in the 3^d block around p.
  template <class F>
  void for_each_near(const Point<Dim>& p, F&& f) const {
    for (std::size_t c : neighbours_[cell_of(p)])
      for (std::uint32_t s : cells_[c]) f(s);
  }

  /// Total number of registrations, for audits.
  std::size_t registered() const {
    std::size_t n = 0;
    for (const auto& c : cells_) n += c.size();
    return n;
  }

  bool registered_in(std::uint32_t slot, const Point<Dim>& p) const {
    if (slot >= where_.size()) return false;
    const auto& w = where_[slot];
    return w.cell == cell_of(p) && w.index < cells_[w.cell].size() && cells_[w.cell][w.index] == slot;
  }

 private:
  struct Where {
    std::size_t cell = 0;
    std::size_t index = 0;
  };

  void build_neighbours() {
    neighbours_.assign(cells_.size(), {});
    const auto n = static_cast<long>(per_side_);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      std::array<long, Dim> base{};
      std::size_t rest = c;
      for (std::size_t i = 0; i < Dim; ++i) {
        base[i] = static_cast<long>(rest % per_side_);
        rest /= per_side_;
      }
      std::size_t combos = 1;
      for (std::size_t i = 0; i < Dim; ++i) combos *= 3;
      auto& out = neighbours_[c];
      for (std::size_t k = 0; k < combos; ++k) {
        std::size_t code = k, idx = 0, stride = 1;
        for (std::size_t i = 0; i < Dim; ++i) {
          const long off = static_cast<long>(code % 3) - 1;
          code /= 3;
          const long j = ((base[i] + off) % n + n) % n;
          idx += static_cast<std::size_t>(j) * stride;
          stride *= per_side_;
        }
        out.push_back(idx);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
    }
  }

  double box_ = 1.0;
  std::size_t per_side_ = 1;
  double width_ = 1.0;
  std::vector<std::vector<std::uint32_t>> cells_;
  std::vector<std::vector<std::size_t>> neighbours_;
  std::vector<Where> where_;
};

}  // namespace ecokin::ibm
