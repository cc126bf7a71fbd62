// Constructions turning a quasilinear initial-value problem into a fully
// nonlinear one: the A0 = 0 line-integral case, the A0 != 0 elliptic case,
// the prototype path, and the reconstruction v = A_i d_i u.
#pragma once

#include <string>
#include <vector>

#include "nlwave/grid.hpp"
#include "nlwave/nullform.hpp"
#include "nlwave/spectral.hpp"

namespace nlwave {

template <typename Scalar>
struct QuasilinearIVP {
  QuasiNullForm<Scalar> form;
  GridField<Scalar> v0;
  GridField<Scalar> v1;

  void validate() const {
    if (!(v0.grid == v1.grid))
      throw std::invalid_argument("QuasilinearIVP: fields must share one grid");
  }
};

// Data ready for the fully nonlinear solver. `notes` collects data-quality
// warnings raised by the transforms; `rhs_mean_removed` reports the zero
// mode subtracted before an elliptic inversion.
template <typename Scalar>
struct FullyNonlinearIVP {
  NullFormTensor<Scalar> tensor;
  GridField<Scalar> phi;
  GridField<Scalar> psi;
  std::vector<std::string> notes;
  Scalar rhs_mean_removed = Scalar(0);

  void validate() const {
    if (!(phi.grid == psi.grid))
      throw std::invalid_argument("FullyNonlinearIVP: fields must share one grid");
    if (!tensor.symmetric_flag)
      throw std::invalid_argument("FullyNonlinearIVP: tensor must be symmetrized");
  }
};

// Thrown when inputs select the wrong branch of the transformation or a
// branch the artifact does not support.
class TransformError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Warn when the data is not numerically confined to the inner half box.
template <typename Scalar>
void check_support(const GridField<Scalar>& f, const char* name,
                   std::vector<std::string>& notes) {
  Scalar peak = f.values.abs().maxCoeff();
  if (peak == Scalar(0)) return;
  const auto& g = f.grid;
  Scalar outer = Scalar(0);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      using std::abs;
      if (abs(g.coord(i)) > g.half_width / Scalar(2) ||
          abs(g.coord(j)) > g.half_width / Scalar(2))
        outer = std::max(outer, abs(f.values(i, j)));
    }
  if (outer > Scalar(1e-12) * peak)
    notes.push_back(std::string(name) + ": support extends outside the inner half box");
}

}  // namespace detail

// Case a (A0 = 0, A1 != 0): phi and psi are cumulative integrals of v0, v1
// along the slanted characteristics x2 + (A2/A1)(s - x1), starting at the
// left domain edge. The integral is evaluated by shearing the field onto
// characteristic coordinates, taking the spectral antiderivative along the
// line (exact for band-limited data) and shearing back. A nonzero total
// line integral means the data cannot decay as x1 -> +inf; it is flagged,
// not fixed.
template <typename Scalar>
FullyNonlinearIVP<Scalar> transform_case_a(const QuasilinearIVP<Scalar>& ivp) {
  ivp.validate();
  const Scalar a0 = ivp.form.a(0), a1 = ivp.form.a(1), a2 = ivp.form.a(2);
  if (a0 != Scalar(0))
    throw TransformError("transform_case_a: requires A0 = 0 (use case b)");
  if (a1 == Scalar(0))
    throw TransformError("transform_case_a: A1 = 0 is not supported; rotate the data so A1 != 0");

  FullyNonlinearIVP<Scalar> out;
  const auto& g = ivp.v0.grid;
  detail::check_support(ivp.v0, "v0", out.notes);
  detail::check_support(ivp.v1, "v1", out.notes);

  Spectral<Scalar> sp(g);
  const Scalar slope = a2 / a1;
  Scalar worst_total = Scalar(0);

  auto integrate_lines = [&](const GridField<Scalar>& src) {
    Array2<Scalar> sheared = slope == Scalar(0)
                                 ? src.values
                                 : sp.shear_axis1(src.values, slope);
    Eigen::Array<Scalar, Eigen::Dynamic, 1> totals;
    Array2<Scalar> cum = sp.cumulative_integral_axis0(sheared, &totals);
    worst_total = std::max(worst_total, totals.abs().maxCoeff());
    if (slope != Scalar(0)) cum = sp.shear_axis1(cum, -slope);
    return GridField<Scalar>(g, Array2<Scalar>(cum / a1));
  };
  out.phi = integrate_lines(ivp.v0);
  out.psi = integrate_lines(ivp.v1);

  Scalar scale = std::max(out.phi.values.abs().maxCoeff(), out.psi.values.abs().maxCoeff());
  if (scale > Scalar(0) && worst_total > Scalar(1e-8) * a1 * scale)
    out.notes.push_back("nonzero total line integral: transformed data does not decay");

  out.tensor = symmetrize(lift_quasi(ivp.form));
  return out;
}

// Case b (A0 != 0): solve (A1 d1 + A2 d2)^2 chi - A0^2 lap chi = rhs for a
// zero-mean chi by Fourier-multiplier division, then phi = chi and
// psi = v0/A0 - (A1/A0) d1 chi - (A2/A0) d2 chi. `vt0` supplies d_t v(0).
// The operator is elliptic only for A1^2 + A2^2 < A0^2.
template <typename Scalar>
FullyNonlinearIVP<Scalar> transform_case_b(const QuasilinearIVP<Scalar>& ivp,
                                           const GridField<Scalar>& vt0) {
  ivp.validate();
  const Scalar a0 = ivp.form.a(0), a1 = ivp.form.a(1), a2 = ivp.form.a(2);
  if (a0 == Scalar(0))
    throw TransformError("transform_case_b: requires A0 != 0 (use case a)");
  if (a1 * a1 + a2 * a2 >= a0 * a0)
    throw TransformError("transform_case_b: A1^2 + A2^2 >= A0^2 degenerates the chi operator");
  if (!(vt0.grid == ivp.v0.grid))
    throw std::invalid_argument("transform_case_b: vt0 grid mismatch");

  const auto& g = ivp.v0.grid;
  Spectral<Scalar> sp(g);

  Array2<Scalar> d1v0 = sp.derivative(ivp.v0.values, 0);
  Array2<Scalar> d2v0 = sp.derivative(ivp.v0.values, 1);

  // m-contraction of the t = 0 gradient (vt0, d1 v0, d2 v0) with itself.
  const auto& m = ivp.form.m;
  Array2<Scalar> quad =
      m(0, 0) * vt0.values.square() + m(1, 1) * d1v0.square() + m(2, 2) * d2v0.square() +
      Scalar(2) * (m(0, 1) * vt0.values * d1v0 + m(0, 2) * vt0.values * d2v0 +
                   m(1, 2) * d1v0 * d2v0);

  Array2<Scalar> rhs =
      -a0 * vt0.values + a1 * d1v0 + a2 * d2v0 + a0 * a0 * quad;

  Array2<Scalar> mult = sp.multiplier_table([&](Scalar k1, Scalar k2) {
    Scalar adotk = a1 * k1 + a2 * k2;
    return a0 * a0 * (k1 * k1 + k2 * k2) - adotk * adotk;
  });

  FullyNonlinearIVP<Scalar> out;
  Scalar mean = Scalar(0);
  out.phi = GridField<Scalar>(g, sp.invert_multiplier(rhs, mult, &mean));
  out.rhs_mean_removed = mean;
  if (mean != Scalar(0))
    out.notes.push_back("chi equation: nonzero right-hand-side mean removed before inversion");

  Array2<Scalar> d1chi = sp.derivative(out.phi.values, 0);
  Array2<Scalar> d2chi = sp.derivative(out.phi.values, 1);
  out.psi = GridField<Scalar>(
      g, (ivp.v0.values / a0 - (a1 / a0) * d1chi - (a2 / a0) * d2chi).eval());

  out.tensor = symmetrize(lift_quasi(ivp.form));
  return out;
}

// Prototype path: box v = d_t(|d_t v|^2 - |grad v|^2) becomes
// box u = |d_t^2 u|^2 - |d_t grad u|^2 with u(0) the zero-mean solution of
// -lap phi = |v1|^2 - |grad v0|^2 - v1 and d_t u(0) = v0.
template <typename Scalar>
FullyNonlinearIVP<Scalar> transform_prototype(const GridField<Scalar>& v0,
                                              const GridField<Scalar>& v1) {
  if (!(v0.grid == v1.grid))
    throw std::invalid_argument("transform_prototype: fields must share one grid");
  const auto& g = v0.grid;
  Spectral<Scalar> sp(g);

  Array2<Scalar> d1v0 = sp.derivative(v0.values, 0);
  Array2<Scalar> d2v0 = sp.derivative(v0.values, 1);
  Array2<Scalar> rhs = v1.values.square() - d1v0.square() - d2v0.square() - v1.values;

  FullyNonlinearIVP<Scalar> out;
  Scalar mean = Scalar(0);
  out.phi = GridField<Scalar>(g, sp.poisson(rhs, &mean));
  out.rhs_mean_removed = mean;
  if (mean != Scalar(0))
    out.notes.push_back("poisson: nonzero right-hand-side mean removed before inversion");
  out.psi = v0;
  out.tensor = symmetrize(prototype_tensor<Scalar>());
  return out;
}

// v = A_i d_i u = A0 u_t + A1 d1 u + A2 d2 u with spectral space derivatives.
template <typename Scalar>
GridField<Scalar> reconstruct_v(const GridField<Scalar>& u, const GridField<Scalar>& ut,
                                const QuasiNullForm<Scalar>& form) {
  if (!(u.grid == ut.grid))
    throw std::invalid_argument("reconstruct_v: fields must share one grid");
  Spectral<Scalar> sp(u.grid);
  Array2<Scalar> v = form.a(0) * ut.values;
  if (form.a(1) != Scalar(0)) v += form.a(1) * sp.derivative(u.values, 0);
  if (form.a(2) != Scalar(0)) v += form.a(2) * sp.derivative(u.values, 1);
  return GridField<Scalar>(u.grid, std::move(v));
}

}  // namespace nlwave
