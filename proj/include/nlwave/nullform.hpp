// Exact algebra on quadratic nonlinearity coefficient tensors: pair
// symmetrization, null-condition verification on the light cone, lifting of
// quasilinear forms, and the good/bad derivative frame split.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "nlwave/grid.hpp"

namespace nlwave {

inline constexpr double kDefaultNullTol = 1e-10;

// Rank-4 coefficient array N[a,b,m,n] over indices {0,1,2}; index 0 is time.
template <typename Scalar>
struct NullFormTensor {
  using Coeffs = Eigen::Array<Scalar, 81, 1>;
  Coeffs coeffs = Coeffs::Zero();
  bool symmetric_flag = false;

  static constexpr int index(int a, int b, int m, int n) {
    return ((a * 3 + b) * 3 + m) * 3 + n;
  }
  Scalar operator()(int a, int b, int m, int n) const {
    return coeffs(index(a, b, m, n));
  }
  Scalar& operator()(int a, int b, int m, int n) {
    return coeffs(index(a, b, m, n));
  }

  Scalar max_abs() const { return coeffs.abs().maxCoeff(); }
  bool all_finite() const { return coeffs.isFinite().all(); }
  bool is_zero() const { return (coeffs == Scalar(0)).all(); }

  // Entrywise check of the two pair symmetries.
  bool symmetries_hold(Scalar tol = Scalar(0)) const {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int m = 0; m < 3; ++m)
          for (int n = 0; n < 3; ++n) {
            using std::abs;
            if (abs((*this)(a, b, m, n) - (*this)(b, a, m, n)) > tol) return false;
            if (abs((*this)(a, b, m, n) - (*this)(a, b, n, m)) > tol) return false;
          }
    return true;
  }
};

// Direction vector A and symmetric form m of a quasilinear nonlinearity
// A_l d_l (m_{uv} d_u v d_v v).
template <typename Scalar>
struct QuasiNullForm {
  Eigen::Matrix<Scalar, 3, 1> a = Eigen::Matrix<Scalar, 3, 1>::Zero();
  Eigen::Matrix<Scalar, 3, 3> m = Eigen::Matrix<Scalar, 3, 3>::Zero();

  bool degenerate() const { return a.isZero(0); }
  bool m_symmetric(Scalar tol = Scalar(0)) const {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
  }
};

// Point X = (1, cos theta, sin theta) on the light cone X0^2 = X1^2 + X2^2.
template <typename Scalar>
struct ConeDirection {
  Scalar theta = Scalar(0);

  explicit ConeDirection(Scalar t) {
    Scalar two_pi = Scalar(2) * Scalar(M_PI);
    theta = std::fmod(t, two_pi);
    if (theta < Scalar(0)) theta += two_pi;
  }
  Eigen::Matrix<Scalar, 3, 1> direction() const {
    using std::cos;
    using std::sin;
    return {Scalar(1), cos(theta), sin(theta)};
  }
};

// D^- component and good remainder of a space-time gradient at one point.
template <typename Scalar>
struct FrameSplit {
  Scalar dminus = Scalar(0);
  Eigen::Matrix<Scalar, 3, 1> good = Eigen::Matrix<Scalar, 3, 1>::Zero();
};

// N~ = 1/4 (N_abmn + N_bamn + N_abnm + N_banm); preserves all contractions
// with symmetric matrix pairs and preserves the null condition.
template <typename Scalar>
NullFormTensor<Scalar> symmetrize(const NullFormTensor<Scalar>& t) {
  NullFormTensor<Scalar> out;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
          out(a, b, m, n) = (t(a, b, m, n) + t(b, a, m, n) + t(a, b, n, m) + t(b, a, n, m)) / Scalar(4);
  out.symmetric_flag = true;
  return out;
}

// Full contraction N[a,b,m,n] h[a,b] k[m,n].
template <typename Scalar, typename DerivedH, typename DerivedK>
Scalar contract(const NullFormTensor<Scalar>& t,
                const Eigen::MatrixBase<DerivedH>& h,
                const Eigen::MatrixBase<DerivedK>& k) {
  Scalar acc = Scalar(0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
          acc += t(a, b, m, n) * h(a, b) * k(m, n);
  return acc;
}

// Degree-4 symbol N[a,b,m,n] X_a X_b X_m X_n at X = (1, cos, sin). By
// evenness of the symbol the single-sign section covers the whole cone.
template <typename Scalar>
Scalar null_symbol(const NullFormTensor<Scalar>& t, const ConeDirection<Scalar>& d) {
  Eigen::Matrix<Scalar, 3, 1> x = d.direction();
  Scalar acc = Scalar(0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
          acc += t(a, b, m, n) * x(a) * x(b) * x(m) * x(n);
  return acc;
}

template <typename Scalar>
Scalar quasi_symbol(const QuasiNullForm<Scalar>& q, const ConeDirection<Scalar>& d) {
  Eigen::Matrix<Scalar, 3, 1> x = d.direction();
  return x.dot(q.m * x);
}

namespace detail {

// Max Fourier-coefficient magnitude of samples at `count` equispaced angles.
// Exact for trigonometric polynomials of frequency < count/2.
template <typename Scalar>
Scalar max_fourier_coeff(const std::array<Scalar, 16>& samples, int count) {
  using std::cos;
  using std::sin;
  Scalar worst = Scalar(0);
  for (int k = 0; k < count; ++k) {
    Scalar re = Scalar(0), im = Scalar(0);
    for (int j = 0; j < count; ++j) {
      Scalar ang = Scalar(-2) * Scalar(M_PI) * Scalar(k) * Scalar(j) / Scalar(count);
      re += samples[j] * cos(ang);
      im += samples[j] * sin(ang);
    }
    using std::sqrt;
    Scalar mag = sqrt(re * re + im * im) / Scalar(count);
    if (mag > worst) worst = mag;
  }
  return worst;
}

}  // namespace detail

// Fourier null test: the cone symbol is a trig polynomial of frequency <= 4,
// so 16 equispaced samples determine it exactly. True iff every Fourier
// coefficient is below tol * max|coeffs| (scale-invariant verdict).
template <typename Scalar>
bool is_null(const NullFormTensor<Scalar>& t, Scalar tol = Scalar(kDefaultNullTol)) {
  if (!(tol > Scalar(0))) throw std::invalid_argument("is_null: tol must be positive");
  if (t.is_zero()) return true;
  std::array<Scalar, 16> s{};
  for (int j = 0; j < 16; ++j)
    s[j] = null_symbol(t, ConeDirection<Scalar>(Scalar(2) * Scalar(M_PI) * Scalar(j) / Scalar(16)));
  return detail::max_fourier_coeff(s, 16) <= tol * t.max_abs();
}

// Same test for m(X, X); frequency <= 2 so 8 samples suffice.
template <typename Scalar>
bool is_null_quasi(const QuasiNullForm<Scalar>& q, Scalar tol = Scalar(kDefaultNullTol)) {
  if (!(tol > Scalar(0))) throw std::invalid_argument("is_null_quasi: tol must be positive");
  Scalar scale = q.m.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) return true;
  std::array<Scalar, 16> s{};
  for (int j = 0; j < 8; ++j) {
    ConeDirection<Scalar> d(Scalar(2) * Scalar(M_PI) * Scalar(j) / Scalar(8));
    s[j] = quasi_symbol(q, d);
  }
  return detail::max_fourier_coeff(s, 8) <= tol * scale;
}

// Lift of the quasilinear form: T[a,b,g,d] = A_a A_g m[b,d], so that
// contract(T, H, H) matches A_l A_n m_{ud} d2_{lu}u d2_{nd}u. The lift is
// null exactly when the quasi form is, provided A != 0; A = 0 yields the
// zero tensor (the equation degenerates to the linear wave equation).
template <typename Scalar>
NullFormTensor<Scalar> lift_quasi(const QuasiNullForm<Scalar>& q) {
  NullFormTensor<Scalar> out;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int g = 0; g < 3; ++g)
        for (int d = 0; d < 3; ++d)
          out(a, b, g, d) = q.a(a) * q.a(g) * q.m(b, d);
  return out;
}

// Tensor of box u = |d_t^2 u|^2 - |d_t grad u|^2, before symmetrization.
template <typename Scalar>
NullFormTensor<Scalar> prototype_tensor() {
  NullFormTensor<Scalar> t;
  t(0, 0, 0, 0) = Scalar(1);
  t(0, 1, 0, 1) = Scalar(-1);
  t(0, 2, 0, 2) = Scalar(-1);
  return t;
}

// Minkowski form diag(1, -1, -1); the only null quasi form up to scale.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> minkowski_form() {
  Eigen::Matrix<Scalar, 3, 3> m = Eigen::Matrix<Scalar, 3, 3>::Zero();
  m(0, 0) = Scalar(1);
  m(1, 1) = Scalar(-1);
  m(2, 2) = Scalar(-1);
  return m;
}

// Split a space-time gradient (u_t, u_1, u_2) into the bad derivative
// D^- u = (u_t - w.grad u)/2 along Y^- = (1, -w) and the good remainder:
// grad = Y^- dminus + good, exactly.
template <typename Scalar, typename DerivedG, typename DerivedW>
FrameSplit<Scalar> frame_decompose(const Eigen::MatrixBase<DerivedG>& grad,
                                   const Eigen::MatrixBase<DerivedW>& omega) {
  using std::abs;
  if (abs(omega.norm() - Scalar(1)) > Scalar(1e-12))
    throw std::invalid_argument("frame_decompose: omega must be a unit vector");
  FrameSplit<Scalar> out;
  out.dminus = (grad(0) - omega(0) * grad(1) - omega(1) * grad(2)) / Scalar(2);
  Eigen::Matrix<Scalar, 3, 1> y_minus(Scalar(1), -omega(0), -omega(1));
  out.good = grad - y_minus * out.dminus;
  return out;
}

}  // namespace nlwave
