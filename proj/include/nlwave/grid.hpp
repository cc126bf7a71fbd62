// Periodic grid and sampled scalar fields on [-L, L)^2.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace nlwave {

template <typename Scalar>
using Array2 = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Array2c = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

// Uniform n-by-n periodic grid covering [-L, L)^2 with spacing h = 2L/n.
template <typename Scalar>
struct PeriodicGrid {
  int n = 0;
  Scalar half_width = Scalar(0);

  PeriodicGrid() = default;
  PeriodicGrid(int points, Scalar L) : n(points), half_width(L) {
    if (n < 16 || (n & (n - 1)) != 0)
      throw std::invalid_argument("PeriodicGrid: n must be a power of two >= 16");
    if (!(half_width > Scalar(0)))
      throw std::invalid_argument("PeriodicGrid: half_width must be positive");
  }

  Scalar spacing() const { return Scalar(2) * half_width / Scalar(n); }
  Scalar coord(int j) const { return -half_width + Scalar(j) * spacing(); }

  // Signed integer mode for FFT bin j; the Nyquist bin is treated as kernel.
  int mode(int j) const { return j <= n / 2 ? j : j - n; }
  // Angular wavenumber of bin j for period 2L. Zero on the Nyquist bin so
  // that odd-order derivative multipliers stay conjugate-symmetric.
  Scalar wavenumber(int j) const {
    int m = mode(j);
    if (m == n / 2) return Scalar(0);
    return Scalar(M_PI) * Scalar(m) / half_width;
  }

  bool operator==(const PeriodicGrid& o) const {
    return n == o.n && half_width == o.half_width;
  }
};

// Samples of a scalar function; values(i, j) = f(coord(i), coord(j)).
template <typename Scalar>
struct GridField {
  PeriodicGrid<Scalar> grid;
  Array2<Scalar> values;

  GridField() = default;
  explicit GridField(const PeriodicGrid<Scalar>& g)
      : grid(g), values(Array2<Scalar>::Zero(g.n, g.n)) {}
  GridField(const PeriodicGrid<Scalar>& g, Array2<Scalar> v)
      : grid(g), values(std::move(v)) {
    if (values.rows() != grid.n || values.cols() != grid.n)
      throw std::invalid_argument("GridField: shape does not match grid");
  }

  bool all_finite() const { return values.isFinite().all(); }
};

template <typename Scalar>
GridField<Scalar> zero_field(const PeriodicGrid<Scalar>& g) {
  return GridField<Scalar>(g);
}

// Coordinate array along axis 0 (x1) or 1 (x2), broadcast to the full grid.
template <typename Scalar>
Array2<Scalar> coordinate_array(const PeriodicGrid<Scalar>& g, int axis) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> line(g.n);
  for (int j = 0; j < g.n; ++j) line(j) = g.coord(j);
  Array2<Scalar> out(g.n, g.n);
  if (axis == 0)
    out.colwise() = line;
  else
    out.rowwise() = line.transpose();
  return out;
}

template <typename Scalar>
Array2<Scalar> radius_array(const PeriodicGrid<Scalar>& g) {
  Array2<Scalar> x1 = coordinate_array(g, 0);
  Array2<Scalar> x2 = coordinate_array(g, 1);
  return (x1.square() + x2.square()).sqrt();
}

// Build a field from a callable f(x1, x2).
template <typename Scalar, typename F>
GridField<Scalar> sample_field(const PeriodicGrid<Scalar>& g, F&& f) {
  GridField<Scalar> out(g);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      out.values(i, j) = f(g.coord(i), g.coord(j));
  return out;
}

// Grid-sum quadrature: h^2 * sum of samples.
template <typename Scalar>
Scalar integrate(const GridField<Scalar>& f) {
  Scalar h = f.grid.spacing();
  return f.values.sum() * h * h;
}

template <typename Scalar>
Scalar integrate(const PeriodicGrid<Scalar>& g, const Array2<Scalar>& samples) {
  Scalar h = g.spacing();
  return samples.sum() * h * h;
}

template <typename Scalar>
Scalar l2_norm(const GridField<Scalar>& f) {
  using std::sqrt;
  return sqrt(integrate(f.grid, Array2<Scalar>(f.values.square())));
}

}  // namespace nlwave
