#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/kernels.hpp"
#include "ecokin/kinetics/density_field.hpp"

namespace ecokin::kinetics {

namespace detail {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};

using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

}  // namespace detail

/// Kernel sampled at the lattice displacements of a grid: cell-centred
/// values times the cell volume, renormalized so the weights sum to the
/// kernel's integral. Layout matches the field layout with index j standing
/// for displacement (j mod n) * spacing, taken in [-L/2, L/2).
template <std::size_t Dim>
std::vector<double> lattice_kernel(const KernelSpec& k, const Grid<Dim>& g) {
  if (k.dimension() != static_cast<int>(Dim)) throw ParameterError("kernel dimension does not match the grid");
  std::vector<double> w(g.size(), 0.0);
  if (k.is_zero()) return w;
  if (!(k.cutoff() < 0.5 * g.length))
    throw ParameterError("kernel cutoff must be below half the domain length (" + k.describe() + ")");
  const double h = g.spacing();
  const auto n = static_cast<long>(g.n);
  double sum = 0.0;
  for (std::size_t f = 0; f < w.size(); ++f) {
    const auto idx = g.multi_index(f);
    Point<Dim> x{};
    for (std::size_t i = 0; i < Dim; ++i) {
      long j = static_cast<long>(idx[i]);
      if (j >= (n + 1) / 2) j -= n;
      x[i] = static_cast<double>(j) * h;
    }
    w[f] = k(x) * g.cell_volume();
    sum += w[f];
  }
  const double mass = l1_norm(k);
  if (sum > 0.0)
    for (auto& v : w) v *= mass / sum;
  return w;
}

/// Periodic convolution with a fixed kernel through FFTW. apply() reuses
/// internal buffers, so one instance must not be shared across threads.
template <std::size_t Dim>
class Convolver {
 public:
  Convolver(const KernelSpec& kernel, const Grid<Dim>& grid) : grid_(grid) {
    weights_ = lattice_kernel<Dim>(kernel, grid);
    zero_ = std::all_of(weights_.begin(), weights_.end(), [](double v) { return v == 0.0; });
    mass_ = 0.0;
    for (double v : weights_) mass_ += v;
    if (zero_) return;
    const std::size_t total = grid.size();
    complex_size_ = total / grid.n * (grid.n / 2 + 1);
    real_.reset(fftw_alloc_real(total));
    spec_.reset(fftw_alloc_complex(complex_size_));
    std::array<int, Dim> dims;
    dims.fill(static_cast<int>(grid.n));
    forward_.reset(fftw_plan_dft_r2c(static_cast<int>(Dim), dims.data(), real_.get(), spec_.get(), FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft_c2r(static_cast<int>(Dim), dims.data(), spec_.get(), real_.get(), FFTW_ESTIMATE));
    if (!forward_ || !backward_) throw Error("FFTW plan creation failed");
    std::copy(weights_.begin(), weights_.end(), real_.get());
    fftw_execute(forward_.get());
    kernel_hat_.resize(complex_size_);
    for (std::size_t k = 0; k < complex_size_; ++k) kernel_hat_[k] = {spec_[k][0], spec_[k][1]};
  }

  const Grid<Dim>& grid() const { return grid_; }
  const std::vector<double>& weights() const { return weights_; }
  double mass() const { return mass_; }
  bool is_zero() const { return zero_; }

  /// out[i] = sum_j w[i - j] in[j].
  void apply(const std::vector<double>& in, std::vector<double>& out) const {
    if (in.size() != grid_.size()) throw ParameterError("field size does not match the convolution grid");
    out.assign(in.size(), 0.0);
    if (zero_) return;
    std::copy(in.begin(), in.end(), real_.get());
    fftw_execute(forward_.get());
    for (std::size_t k = 0; k < complex_size_; ++k) {
      const std::complex<double> z = std::complex<double>(spec_[k][0], spec_[k][1]) * kernel_hat_[k];
      spec_[k][0] = z.real();
      spec_[k][1] = z.imag();
    }
    fftw_execute(backward_.get());
    const double scale = 1.0 / static_cast<double>(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = real_[i] * scale;
  }

  DensityField<Dim> operator()(const DensityField<Dim>& f) const {
    if (!(f.grid == grid_)) throw ParameterError("field grid does not match the convolution grid");
    DensityField<Dim> out(grid_);
    apply(f.values, out.values);
    return out;
  }

 private:
  Grid<Dim> grid_;
  std::vector<double> weights_;
  double mass_ = 0.0;
  bool zero_ = true;
  std::size_t complex_size_ = 0;
  detail::RealBuffer real_;
  detail::ComplexBuffer spec_;
  detail::Plan forward_, backward_;
  std::vector<std::complex<double>> kernel_hat_;
};

template <std::size_t Dim>
DensityField<Dim> convolve(const DensityField<Dim>& f, const KernelSpec& k) {
  return Convolver<Dim>(k, f.grid)(f);
}

}  // namespace ecokin::kinetics
