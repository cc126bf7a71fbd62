// Fourier-multiplier calculus on periodic grids: derivatives, inverse
// elliptic multipliers and the 2/3-rule dealias filter.
#pragma once

#include <unsupported/Eigen/FFT>

#include <complex>
#include <stdexcept>
#include <vector>

#include "nlwave/grid.hpp"

namespace nlwave {

// FFT workspace bound to one grid. Plans are cached inside Eigen::FFT, so a
// long-lived instance should be reused across calls on the hot path.
template <typename Scalar>
class Spectral {
 public:
  using Complex = std::complex<Scalar>;

  explicit Spectral(const PeriodicGrid<Scalar>& grid) : grid_(grid) {
    k_.resize(grid_.n);
    for (int j = 0; j < grid_.n; ++j) k_[j] = grid_.wavenumber(j);
  }

  const PeriodicGrid<Scalar>& grid() const { return grid_; }
  Scalar wavenumber(int j) const { return k_[j]; }

  Array2c<Scalar> fwd(const Array2<Scalar>& f) const {
    Array2c<Scalar> work = f.template cast<Complex>();
    transform_columns(work, /*inverse=*/false);
    transpose_in_place(work);
    transform_columns(work, /*inverse=*/false);
    transpose_in_place(work);
    return work;
  }

  Array2<Scalar> inv(Array2c<Scalar> spec) const {
    transform_columns(spec, /*inverse=*/true);
    transpose_in_place(spec);
    transform_columns(spec, /*inverse=*/true);
    transpose_in_place(spec);
    return spec.real();
  }

  // d/dx_axis applied in Fourier space; exact for band-limited samples.
  Array2c<Scalar> derivative_spec(const Array2c<Scalar>& spec, int axis) const {
    Array2c<Scalar> out(grid_.n, grid_.n);
    const Complex I(0, 1);
    for (int j = 0; j < grid_.n; ++j)
      for (int i = 0; i < grid_.n; ++i)
        out(i, j) = I * (axis == 0 ? k_[i] : k_[j]) * spec(i, j);
    return out;
  }

  Array2<Scalar> derivative(const Array2<Scalar>& f, int axis) const {
    return inv(derivative_spec(fwd(f), axis));
  }

  // d^2/dx_a dx_b as a single multiplier -k_a k_b.
  Array2<Scalar> second_derivative(const Array2<Scalar>& f, int a, int b) const {
    Array2c<Scalar> spec = fwd(f);
    for (int j = 0; j < grid_.n; ++j)
      for (int i = 0; i < grid_.n; ++i) {
        Scalar ka = (a == 0 ? k_[i] : k_[j]);
        Scalar kb = (b == 0 ? k_[i] : k_[j]);
        spec(i, j) *= -ka * kb;
      }
    return inv(spec);
  }

  Array2<Scalar> laplacian(const Array2<Scalar>& f) const {
    Array2c<Scalar> spec = fwd(f);
    apply_laplacian_symbol(spec);
    return inv(spec);
  }

  void apply_laplacian_symbol(Array2c<Scalar>& spec) const {
    for (int j = 0; j < grid_.n; ++j)
      for (int i = 0; i < grid_.n; ++i)
        spec(i, j) *= -(k_[i] * k_[i] + k_[j] * k_[j]);
  }

  // Solve m(k) * u_hat = rhs_hat for a real multiplier m with m(0) = 0.
  // The rhs zero mode is dropped (its value is returned through rhs_mean)
  // and u is returned with zero mean. Throws if m vanishes on a nonzero
  // resolved mode.
  Array2<Scalar> invert_multiplier(const Array2<Scalar>& rhs,
                                   const Array2<Scalar>& multiplier,
                                   Scalar* rhs_mean = nullptr) const {
    Array2c<Scalar> spec = fwd(rhs);
    Scalar n2 = Scalar(grid_.n) * Scalar(grid_.n);
    if (rhs_mean) *rhs_mean = spec(0, 0).real() / n2;
    spec(0, 0) = Complex(0, 0);
    for (int j = 0; j < grid_.n; ++j)
      for (int i = 0; i < grid_.n; ++i) {
        if (i == 0 && j == 0) continue;
        bool nyquist = grid_.mode(i) == grid_.n / 2 || grid_.mode(j) == grid_.n / 2;
        Scalar m = multiplier(i, j);
        if (m == Scalar(0)) {
          if (nyquist) {
            spec(i, j) = Complex(0, 0);  // kernel convention on the Nyquist band
            continue;
          }
          throw std::invalid_argument("invert_multiplier: symbol vanishes on a nonzero mode");
        }
        spec(i, j) /= m;
      }
    return inv(spec);
  }

  // Multiplier table for a symbol s(k1, k2).
  template <typename F>
  Array2<Scalar> multiplier_table(F&& symbol) const {
    Array2<Scalar> out(grid_.n, grid_.n);
    for (int j = 0; j < grid_.n; ++j)
      for (int i = 0; i < grid_.n; ++i) out(i, j) = symbol(k_[i], k_[j]);
    return out;
  }

  // Zero-mean solve of -Laplace(u) = rhs.
  Array2<Scalar> poisson(const Array2<Scalar>& rhs, Scalar* rhs_mean = nullptr) const {
    Array2<Scalar> mult = multiplier_table(
        [](Scalar k1, Scalar k2) { return k1 * k1 + k2 * k2; });
    return invert_multiplier(rhs, mult, rhs_mean);
  }

  // 2/3-rule truncation: zero every mode with |mode| > n/3 on either axis.
  void dealias_spec(Array2c<Scalar>& spec) const {
    int cut = grid_.n / 3;
    for (int j = 0; j < grid_.n; ++j)
      for (int i = 0; i < grid_.n; ++i)
        if (std::abs(grid_.mode(i)) > cut || std::abs(grid_.mode(j)) > cut)
          spec(i, j) = Complex(0, 0);
  }

  Array2<Scalar> dealias(const Array2<Scalar>& f) const {
    Array2c<Scalar> spec = fwd(f);
    dealias_spec(spec);
    return inv(spec);
  }

  // Projection onto the resolved band: the Nyquist lines are kernel for
  // every multiplier operator here, so residual checks of inverse solves
  // compare against this projection.
  Array2<Scalar> project_resolved(const Array2<Scalar>& f) const {
    Array2c<Scalar> spec = fwd(f);
    for (int j = 0; j < grid_.n; ++j)
      for (int i = 0; i < grid_.n; ++i)
        if (grid_.mode(i) == grid_.n / 2 || grid_.mode(j) == grid_.n / 2)
          spec(i, j) = Complex(0, 0);
    return inv(spec);
  }

  // Shear: trigonometric interpolation of f(x1, x2 + rate * x1) back onto
  // the grid. Each row i is shifted along axis 1 by rate * coord(i).
  Array2<Scalar> shear_axis1(const Array2<Scalar>& f, Scalar rate) const {
    const int n = grid_.n;
    const Complex I(0, 1);
    Array2c<Scalar> work = f.template cast<Complex>();
    transpose_in_place(work);                    // (x2, x1)
    transform_columns(work, /*inverse=*/false);  // (k2, x1)
    for (int i = 0; i < n; ++i) {
      Scalar delta = rate * grid_.coord(i);
      for (int j = 0; j < n; ++j) work(j, i) *= std::exp(I * (k_[j] * delta));
    }
    transform_columns(work, /*inverse=*/true);
    transpose_in_place(work);
    return work.real();
  }

  // Cumulative integral from the left domain edge along axis 0, per column:
  // F(x1, c) = int_{-L}^{x1} f(s, c) ds, exact for band-limited columns. A
  // nonzero column mean contributes the explicit ramp c0 * (x1 + L). The
  // full-period totals 2L * c0 are reported through `totals` when given.
  Array2<Scalar> cumulative_integral_axis0(
      const Array2<Scalar>& f,
      Eigen::Array<Scalar, Eigen::Dynamic, 1>* totals = nullptr) const {
    const int n = grid_.n;
    const Complex I(0, 1);
    const Scalar L = grid_.half_width;
    Array2c<Scalar> work = f.template cast<Complex>();
    transform_columns(work, /*inverse=*/false);  // (k1, c)
    if (totals) totals->resize(n);
    Eigen::Array<Scalar, Eigen::Dynamic, 1> mean(n);
    for (int c = 0; c < n; ++c) {
      mean(c) = work(0, c).real() / Scalar(n);
      if (totals) (*totals)(c) = Scalar(2) * L * mean(c);
      work(0, c) = Complex(0, 0);
      for (int m = 1; m < n; ++m) {
        if (k_[m] == Scalar(0)) {
          work(m, c) = Complex(0, 0);  // Nyquist kernel convention
          continue;
        }
        work(m, c) /= I * k_[m];
      }
    }
    transform_columns(work, /*inverse=*/true);
    Array2<Scalar> out = work.real();
    // subtract the antiderivative value at the left edge (row 0) and add the
    // ramp from the mean
    for (int c = 0; c < n; ++c) {
      Scalar base = out(0, c);
      for (int i = 0; i < n; ++i)
        out(i, c) += mean(c) * (grid_.coord(i) + L) - base;
    }
    return out;
  }

 private:
  void transform_columns(Array2c<Scalar>& a, bool inverse) const {
    const int n = grid_.n;
    buf_in_.resize(n);
    buf_out_.resize(n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) buf_in_[i] = a(i, j);
      if (inverse)
        fft_.inv(buf_out_.data(), buf_in_.data(), n);
      else
        fft_.fwd(buf_out_.data(), buf_in_.data(), n);
      for (int i = 0; i < n; ++i) a(i, j) = buf_out_[i];
    }
  }

  static void transpose_in_place(Array2c<Scalar>& a) { a = a.transpose().eval(); }

  PeriodicGrid<Scalar> grid_;
  std::vector<Scalar> k_;
  mutable Eigen::FFT<Scalar> fft_;
  mutable std::vector<Complex> buf_in_, buf_out_;
};

// First- or second-order spatial derivatives of a sampled field. order 1
// returns {d1 f, d2 f}; order 2 returns {d11 f, d12 f, d22 f}.
template <typename Scalar>
std::vector<GridField<Scalar>> spatial_derivatives(const GridField<Scalar>& f, int order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("spatial_derivatives: order must be 1 or 2");
  if (!f.all_finite())
    throw std::invalid_argument("spatial_derivatives: field has non-finite samples");
  Spectral<Scalar> sp(f.grid);
  std::vector<GridField<Scalar>> out;
  if (order == 1) {
    out.push_back({f.grid, sp.derivative(f.values, 0)});
    out.push_back({f.grid, sp.derivative(f.values, 1)});
  } else {
    out.push_back({f.grid, sp.second_derivative(f.values, 0, 0)});
    out.push_back({f.grid, sp.second_derivative(f.values, 0, 1)});
    out.push_back({f.grid, sp.second_derivative(f.values, 1, 1)});
  }
  return out;
}

}  // namespace nlwave
