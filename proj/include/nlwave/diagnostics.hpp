// Klainerman vector-field energies, Alinhac ghost-weight energy, weighted
// pointwise decay ratios and growth-exponent fits over solver snapshots.
//
// All Gamma applications are expanded closed forms in (u, ut, d_t^2 u) and
// pure spatial spectral derivatives; fields carrying explicit x-factors are
// never differentiated spectrally, so the seam of the periodic box does not
// contaminate the diagnostics.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nlwave/grid.hpp"
#include "nlwave/nullform.hpp"
#include "nlwave/solver.hpp"
#include "nlwave/spectral.hpp"

namespace nlwave {

// The seven first-order fields Gamma = (d_t, d_1, d_2, Omega, L_1, L_2, S-2).
enum class GammaField { Dt = 0, D1, D2, Omega, L1, L2, Stilde };

inline constexpr std::array<GammaField, 7> kGammaBasis = {
    GammaField::Dt, GammaField::D1, GammaField::D2, GammaField::Omega,
    GammaField::L1, GammaField::L2, GammaField::Stilde};

// Value and full space-time gradient of Gamma u.
template <typename Scalar>
struct FieldJet {
  Array2<Scalar> value, dt, dx1, dx2;
};

// Time-extended jet of an inner field f = Gamma u, carrying what a second
// Gamma application needs: f, d_t f, d_t^2 f and the spatial gradients of f
// and d_t f. The ftt slot is where u_ttt enters.
template <typename Scalar>
struct TimeJet {
  Array2<Scalar> value, ft, ftt, f1, f2, ft1, ft2;
};

// Value and time derivative of Gamma_a applied to a TimeJet.
template <typename Scalar>
struct ComposedJet {
  Array2<Scalar> value, dt;
};

// Shared geometry and base derivative bundle for one snapshot.
template <typename Scalar>
struct DiagWorkspace {
  PeriodicGrid<Scalar> grid;
  Array2<Scalar> x1, x2, r;
  int center_i = -1, center_j = -1;  // the single r = 0 cell

  Array2<Scalar> u1, u2, u11, u12, u22;
  Array2<Scalar> ut1, ut2, ut11, ut12, ut22;
  Array2<Scalar> w1, w2;

  DiagWorkspace(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                const Spectral<Scalar>& sp)
      : grid(state.u.grid) {
    x1 = coordinate_array(grid, 0);
    x2 = coordinate_array(grid, 1);
    r = (x1.square() + x2.square()).sqrt();
    for (int j = 0; j < grid.n; ++j)
      for (int i = 0; i < grid.n; ++i)
        if (r(i, j) == Scalar(0)) { center_i = i; center_j = j; }

    // one forward transform per base field, all derivatives from it
    Array2c<Scalar> spec = sp.fwd(state.u.values);
    u1 = sp.inv(sp.derivative_spec(spec, 0));
    u2 = sp.inv(sp.derivative_spec(spec, 1));
    u11 = sp.inv(sp.derivative_spec(sp.derivative_spec(spec, 0), 0));
    u12 = sp.inv(sp.derivative_spec(sp.derivative_spec(spec, 0), 1));
    u22 = sp.inv(sp.derivative_spec(sp.derivative_spec(spec, 1), 1));
    spec = sp.fwd(state.ut.values);
    ut1 = sp.inv(sp.derivative_spec(spec, 0));
    ut2 = sp.inv(sp.derivative_spec(spec, 1));
    ut11 = sp.inv(sp.derivative_spec(sp.derivative_spec(spec, 0), 0));
    ut12 = sp.inv(sp.derivative_spec(sp.derivative_spec(spec, 0), 1));
    ut22 = sp.inv(sp.derivative_spec(sp.derivative_spec(spec, 1), 1));
    spec = sp.fwd(w.values);
    w1 = sp.inv(sp.derivative_spec(spec, 0));
    w2 = sp.inv(sp.derivative_spec(spec, 1));
  }

  // Unit radial direction; at the center cell it falls back to the dominant
  // gradient direction of u (radial-limit convention).
  std::pair<Array2<Scalar>, Array2<Scalar>> omega(const WaveState<Scalar>&) const {
    Array2<Scalar> o1(grid.n, grid.n), o2(grid.n, grid.n);
    for (int j = 0; j < grid.n; ++j)
      for (int i = 0; i < grid.n; ++i) {
        if (r(i, j) > Scalar(0)) {
          o1(i, j) = x1(i, j) / r(i, j);
          o2(i, j) = x2(i, j) / r(i, j);
        } else {
          Scalar g1 = u1(i, j), g2 = u2(i, j);
          using std::sqrt;
          Scalar norm = sqrt(g1 * g1 + g2 * g2);
          o1(i, j) = norm > Scalar(0) ? g1 / norm : Scalar(1);
          o2(i, j) = norm > Scalar(0) ? g2 / norm : Scalar(0);
        }
      }
    return {std::move(o1), std::move(o2)};
  }
};

// Gamma u and its space-time gradient, from the expanded closed forms.
template <typename Scalar>
FieldJet<Scalar> apply_gamma(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                             GammaField id, const DiagWorkspace<Scalar>& ws) {
  const Array2<Scalar>& u = state.u.values;
  const Array2<Scalar>& ut = state.ut.values;
  const Array2<Scalar>& wv = w.values;
  const Scalar t = state.t;
  FieldJet<Scalar> j;
  switch (id) {
    case GammaField::Dt:
      j.value = ut;
      j.dt = wv;
      j.dx1 = ws.ut1;
      j.dx2 = ws.ut2;
      break;
    case GammaField::D1:
      j.value = ws.u1;
      j.dt = ws.ut1;
      j.dx1 = ws.u11;
      j.dx2 = ws.u12;
      break;
    case GammaField::D2:
      j.value = ws.u2;
      j.dt = ws.ut2;
      j.dx1 = ws.u12;
      j.dx2 = ws.u22;
      break;
    case GammaField::Omega:
      j.value = -ws.x2 * ws.u1 + ws.x1 * ws.u2;
      j.dt = -ws.x2 * ws.ut1 + ws.x1 * ws.ut2;
      j.dx1 = -ws.x2 * ws.u11 + ws.u2 + ws.x1 * ws.u12;
      j.dx2 = -ws.u1 - ws.x2 * ws.u12 + ws.x1 * ws.u22;
      break;
    case GammaField::L1:
      j.value = t * ws.u1 + ws.x1 * ut;
      j.dt = t * ws.ut1 + ws.u1 + ws.x1 * wv;
      j.dx1 = t * ws.u11 + ut + ws.x1 * ws.ut1;
      j.dx2 = t * ws.u12 + ws.x1 * ws.ut2;
      break;
    case GammaField::L2:
      j.value = t * ws.u2 + ws.x2 * ut;
      j.dt = t * ws.ut2 + ws.u2 + ws.x2 * wv;
      j.dx1 = t * ws.u12 + ws.x2 * ws.ut1;
      j.dx2 = t * ws.u22 + ut + ws.x2 * ws.ut2;
      break;
    case GammaField::Stilde:
      j.value = t * ut + ws.x1 * ws.u1 + ws.x2 * ws.u2 - Scalar(2) * u;
      j.dt = t * wv + ws.x1 * ws.ut1 + ws.x2 * ws.ut2 - ut;
      j.dx1 = t * ws.ut1 + ws.x1 * ws.u11 + ws.x2 * ws.u12 - ws.u1;
      j.dx2 = t * ws.ut2 + ws.x1 * ws.u12 + ws.x2 * ws.u22 - ws.u2;
      break;
  }
  return j;
}

// Convenience overload building a workspace per call.
template <typename Scalar>
FieldJet<Scalar> apply_gamma(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                             GammaField id) {
  Spectral<Scalar> sp(state.u.grid);
  DiagWorkspace<Scalar> ws(state, w, sp);
  return apply_gamma(state, w, id, ws);
}

// Time-extended jet of Gamma u; d_t^2 (Gamma u) consumes u_ttt.
template <typename Scalar>
TimeJet<Scalar> gamma_time_jet(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                               const GridField<Scalar>& uttt, GammaField id,
                               const DiagWorkspace<Scalar>& ws) {
  FieldJet<Scalar> base = apply_gamma(state, w, id, ws);
  const Array2<Scalar>& wv = w.values;
  const Array2<Scalar>& z = uttt.values;
  const Scalar t = state.t;
  TimeJet<Scalar> j;
  j.value = std::move(base.value);
  j.ft = std::move(base.dt);
  j.f1 = std::move(base.dx1);
  j.f2 = std::move(base.dx2);
  switch (id) {
    case GammaField::Dt:
      j.ftt = z;
      j.ft1 = ws.w1;
      j.ft2 = ws.w2;
      break;
    case GammaField::D1:
      j.ftt = ws.w1;
      j.ft1 = ws.ut11;
      j.ft2 = ws.ut12;
      break;
    case GammaField::D2:
      j.ftt = ws.w2;
      j.ft1 = ws.ut12;
      j.ft2 = ws.ut22;
      break;
    case GammaField::Omega:
      j.ftt = -ws.x2 * ws.w1 + ws.x1 * ws.w2;
      j.ft1 = -ws.x2 * ws.ut11 + ws.ut2 + ws.x1 * ws.ut12;
      j.ft2 = -ws.ut1 - ws.x2 * ws.ut12 + ws.x1 * ws.ut22;
      break;
    case GammaField::L1:
      j.ftt = Scalar(2) * ws.ut1 + t * ws.w1 + ws.x1 * z;
      j.ft1 = t * ws.ut11 + ws.u11 + wv + ws.x1 * ws.w1;
      j.ft2 = t * ws.ut12 + ws.u12 + ws.x1 * ws.w2;
      break;
    case GammaField::L2:
      j.ftt = Scalar(2) * ws.ut2 + t * ws.w2 + ws.x2 * z;
      j.ft1 = t * ws.ut12 + ws.u12 + ws.x2 * ws.w1;
      j.ft2 = t * ws.ut22 + ws.u22 + wv + ws.x2 * ws.w2;
      break;
    case GammaField::Stilde:
      j.ftt = t * z + ws.x1 * ws.w1 + ws.x2 * ws.w2;
      j.ft1 = t * ws.w1 + ws.x1 * ws.ut11 + ws.x2 * ws.ut12;
      j.ft2 = t * ws.w2 + ws.x1 * ws.ut12 + ws.x2 * ws.ut22;
      break;
  }
  return j;
}

// Gamma_a applied to an inner jet: value and time derivative of
// Gamma_a Gamma_b u from the same expanded formulas.
template <typename Scalar>
ComposedJet<Scalar> apply_gamma_to_jet(GammaField id, Scalar t,
                                       const DiagWorkspace<Scalar>& ws,
                                       const TimeJet<Scalar>& f) {
  ComposedJet<Scalar> g;
  switch (id) {
    case GammaField::Dt:
      g.value = f.ft;
      g.dt = f.ftt;
      break;
    case GammaField::D1:
      g.value = f.f1;
      g.dt = f.ft1;
      break;
    case GammaField::D2:
      g.value = f.f2;
      g.dt = f.ft2;
      break;
    case GammaField::Omega:
      g.value = -ws.x2 * f.f1 + ws.x1 * f.f2;
      g.dt = -ws.x2 * f.ft1 + ws.x1 * f.ft2;
      break;
    case GammaField::L1:
      g.value = t * f.f1 + ws.x1 * f.ft;
      g.dt = t * f.ft1 + f.f1 + ws.x1 * f.ftt;
      break;
    case GammaField::L2:
      g.value = t * f.f2 + ws.x2 * f.ft;
      g.dt = t * f.ft2 + f.f2 + ws.x2 * f.ftt;
      break;
    case GammaField::Stilde:
      g.value = t * f.ft + ws.x1 * f.f1 + ws.x2 * f.f2 - Scalar(2) * f.value;
      g.dt = t * f.ftt + ws.x1 * f.ft1 + ws.x2 * f.ft2 - f.ft;
      break;
  }
  return g;
}

// E_1 = 1/2 int |d u|^2; E_2 adds 1/2 int |d Gamma u|^2 over the seven
// first-order fields.
template <typename Scalar>
Scalar energy(const WaveState<Scalar>& state, const GridField<Scalar>& w, int order,
              const Spectral<Scalar>& sp) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("energy: order must be 1 or 2");
  Scalar h = state.u.grid.spacing();
  DiagWorkspace<Scalar> ws(state, w, sp);
  Scalar e = Scalar(0.5) * h * h *
             (state.ut.values.square() + ws.u1.square() + ws.u2.square()).sum();
  if (order == 1) return e;
  for (GammaField id : kGammaBasis) {
    FieldJet<Scalar> j = apply_gamma(state, w, id, ws);
    e += Scalar(0.5) * h * h * (j.dt.square() + j.dx1.square() + j.dx2.square()).sum();
  }
  return e;
}

template <typename Scalar>
Scalar energy(const WaveState<Scalar>& state, const GridField<Scalar>& w, int order) {
  Spectral<Scalar> sp(state.u.grid);
  return energy(state, w, order, sp);
}

// Per-field contributions 1/2 int |d Gamma u|^2, for subsetting checks.
template <typename Scalar>
std::array<Scalar, 7> gamma_energy_terms(const WaveState<Scalar>& state,
                                         const GridField<Scalar>& w,
                                         const Spectral<Scalar>& sp) {
  DiagWorkspace<Scalar> ws(state, w, sp);
  Scalar h = state.u.grid.spacing();
  std::array<Scalar, 7> out{};
  for (int k = 0; k < 7; ++k) {
    FieldJet<Scalar> j = apply_gamma(state, w, kGammaBasis[k], ws);
    out[k] = Scalar(0.5) * h * h * (j.dt.square() + j.dx1.square() + j.dx2.square()).sum();
  }
  return out;
}

namespace detail {

// Quadrature of P(r - t) * S over the box, Euler-Maclaurin corrected for the
// kink of r across the periodic seam lines x1 = -L and x2 = -L: the normal
// derivative of the weight jumps by -2L/r * P'(sigma) there, which costs the
// plain grid sum an O(h^2) error exactly where the ghost weight is live.
// `pprime` receives sigma and r restricted to the seam samples.
template <typename Scalar, typename P, typename Pprime>
Scalar ghost_quadrature(const PeriodicGrid<Scalar>& g, const Array2<Scalar>& r, Scalar t,
                        const Array2<Scalar>& s, P&& weight, Pprime&& pprime) {
  const Scalar h = g.spacing();
  const Scalar L = g.half_width;
  Scalar sum = Scalar(0);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) sum += weight(r(i, j) - t) * s(i, j);
  sum *= h * h;

  Scalar corr = Scalar(0);
  for (int j = 0; j < g.n; ++j) {  // x1 = -L line
    Scalar rr = r(0, j);
    corr += s(0, j) * pprime(rr - t) * (Scalar(2) * L / rr);
  }
  for (int i = 0; i < g.n; ++i) {  // x2 = -L line
    Scalar rr = r(i, 0);
    corr += s(i, 0) * pprime(rr - t) * (Scalar(2) * L / rr);
  }
  return sum - h * h * h / Scalar(12) * corr;
}

// Ghost flux quadrature 1/2 sum_i int q' e^q |(w_i d_t + d_i) u|^2. Besides
// the weight kink, the cross term u_t (w . grad u) inherits seam jumps from
// w = x/r itself; both Euler-Maclaurin corrections are applied.
template <typename Scalar>
Scalar ghost_flux_quadrature(const PeriodicGrid<Scalar>& g, const DiagWorkspace<Scalar>& ws,
                             Scalar t, const Array2<Scalar>& ut, const Array2<Scalar>& o1,
                             const Array2<Scalar>& o2) {
  using std::atan;
  using std::exp;
  auto eq = [](Scalar s) { return exp(atan(s)); };
  auto weight = [&](Scalar s) { return eq(s) / (Scalar(1) + s * s); };
  auto weight_p = [&](Scalar s) {
    Scalar qp = Scalar(1) / (Scalar(1) + s * s);
    return eq(s) * qp * qp * (Scalar(1) - Scalar(2) * s);
  };

  Array2<Scalar> s_all =
      Scalar(0.5) * ((o1 * ut + ws.u1).square() + (o2 * ut + ws.u2).square());
  Scalar flux = ghost_quadrature(g, ws.r, t, s_all, weight, weight_p);

  // remaining jump of d_n(integrand) across the seams from the odd term
  const Scalar h = g.spacing();
  const Scalar L = g.half_width;
  Scalar corr = Scalar(0);
  for (int j = 0; j < g.n; ++j) {  // x1 = -L line: [d1 w1] = 0, jump via w1, d1 w2
    Scalar rr = ws.r(0, j);
    Scalar x2 = ws.x2(0, j);
    Scalar jump = ut(0, j) * (-Scalar(2) * L / rr * ws.u11(0, j) +
                              Scalar(2) * L * x2 / (rr * rr * rr) * ws.u2(0, j));
    corr += weight(rr - t) * jump;
  }
  for (int i = 0; i < g.n; ++i) {  // x2 = -L line
    Scalar rr = ws.r(i, 0);
    Scalar x1 = ws.x1(i, 0);
    Scalar jump = ut(i, 0) * (-Scalar(2) * L / rr * ws.u22(i, 0) +
                              Scalar(2) * L * x1 / (rr * rr * rr) * ws.u1(i, 0));
    corr += weight(rr - t) * jump;
  }
  return flux + h * h * h / Scalar(12) * corr;
}

}  // namespace detail

// Weighted energy 1/2 int e^q |d u|^2 with q = arctan(r - t), and the flux
// 1/2 sum_i int e^q/(1+s^2) |(w_i d_t + d_i) u|^2. The one-half on the flux
// pairs it with d/dt(weighted) in the energy identity: for the linear
// equation, d/dt(weighted) + flux = 0.
template <typename Scalar>
std::pair<Scalar, Scalar> ghost_energy(const WaveState<Scalar>& state,
                                       const DiagWorkspace<Scalar>& ws) {
  const auto& g = state.u.grid;
  const Array2<Scalar>& ut = state.ut.values;
  const Scalar t = state.t;

  using std::atan;
  using std::exp;
  auto eq = [](Scalar s) { return exp(atan(s)); };
  auto eq_p = [&](Scalar s) { return eq(s) / (Scalar(1) + s * s); };

  Array2<Scalar> grad2 = Scalar(0.5) * (ut.square() + ws.u1.square() + ws.u2.square());
  Scalar weighted = detail::ghost_quadrature(g, ws.r, t, grad2, eq, eq_p);

  auto [o1, o2] = ws.omega(state);
  Scalar flux = detail::ghost_flux_quadrature(g, ws, t, ut, o1, o2);
  return {weighted, flux};
}

template <typename Scalar>
std::pair<Scalar, Scalar> ghost_energy(const WaveState<Scalar>& state,
                                       const Spectral<Scalar>& sp) {
  GridField<Scalar> zero(state.u.grid);
  DiagWorkspace<Scalar> ws(state, zero, sp);
  return ghost_energy(state, ws);
}

template <typename Scalar>
std::pair<Scalar, Scalar> ghost_energy(const WaveState<Scalar>& state) {
  Spectral<Scalar> sp(state.u.grid);
  return ghost_energy(state, sp);
}

// Defect of the ghost energy identity at one snapshot: the exact time
// derivative of the discrete weighted energy, plus the flux, minus the
// nonlinear source int e^q u_t (w - lap u). Vanishes to quadrature accuracy
// on linear runs.
template <typename Scalar>
struct GhostIdentity {
  Scalar weighted, flux, dwdt, source, residual;
};

template <typename Scalar>
GhostIdentity<Scalar> ghost_identity(const WaveState<Scalar>& state,
                                     const GridField<Scalar>& w,
                                     const DiagWorkspace<Scalar>& ws) {
  const auto& g = state.u.grid;
  const Array2<Scalar>& ut = state.ut.values;
  const Scalar t = state.t;

  using std::atan;
  using std::exp;
  auto eq = [](Scalar s) { return exp(atan(s)); };
  auto eq_p = [&](Scalar s) { return eq(s) / (Scalar(1) + s * s); };
  auto eqq = [&](Scalar s) { return eq_p(s); };
  auto eqq_p = [&](Scalar s) {
    Scalar qp = Scalar(1) / (Scalar(1) + s * s);
    return eq(s) * (qp * qp - Scalar(2) * s * qp * qp);
  };

  Array2<Scalar> grad2 = Scalar(0.5) * (ut.square() + ws.u1.square() + ws.u2.square());

  GhostIdentity<Scalar> out;
  out.weighted = detail::ghost_quadrature(g, ws.r, t, grad2, eq, eq_p);

  auto [o1, o2] = ws.omega(state);
  out.flux = detail::ghost_flux_quadrature(g, ws, t, ut, o1, o2);

  // d/dt of the weighted quadrature: the weight moves with -q'(sigma), the
  // fields move with (ut, w, grad ut).
  Array2<Scalar> lap = ws.u11 + ws.u22;
  Array2<Scalar> moving = ut * w.values + ws.u1 * ws.ut1 + ws.u2 * ws.ut2;
  out.dwdt = -detail::ghost_quadrature(g, ws.r, t, grad2, eqq, eqq_p) +
             detail::ghost_quadrature(g, ws.r, t, moving, eq, eq_p);
  Array2<Scalar> src = ut * (w.values - lap);
  out.source = detail::ghost_quadrature(g, ws.r, t, src, eq, eq_p);
  out.residual = out.dwdt + out.flux - out.source;
  return out;
}

template <typename Scalar>
GhostIdentity<Scalar> ghost_identity(const WaveState<Scalar>& state,
                                     const GridField<Scalar>& w,
                                     const Spectral<Scalar>& sp) {
  DiagWorkspace<Scalar> ws(state, w, sp);
  return ghost_identity(state, w, ws);
}

// Klainerman-Sobolev quotient sup <t+r>^1/2 <t-r>^1/2 |u| over the level-2
// norm sum of compositions. The composed jets consume w and u_ttt through
// the inner time jets.
template <typename Scalar>
struct KsRatio {
  Scalar value = Scalar(0);
  bool degenerate = false;
};

template <typename Scalar>
KsRatio<Scalar> ks_ratio(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                         const GridField<Scalar>& uttt, const DiagWorkspace<Scalar>& ws) {
  Scalar h = state.u.grid.spacing();
  const Scalar t = state.t;

  Array2<Scalar> tp = (Scalar(1) + (t + ws.r).square()).sqrt();
  Array2<Scalar> tm = (Scalar(1) + (t - ws.r).square()).sqrt();
  Scalar numerator = ((tp * tm).sqrt() * state.u.values.abs()).maxCoeff();

  auto l2 = [&](const Array2<Scalar>& v) {
    using std::sqrt;
    return sqrt(h * h * v.square().sum());
  };

  Scalar denom = l2(state.u.values);
  std::array<TimeJet<Scalar>, 7> inner;
  for (int b = 0; b < 7; ++b) {
    inner[b] = gamma_time_jet(state, w, uttt, kGammaBasis[b], ws);
    denom += l2(inner[b].value);
  }
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b) {
      ComposedJet<Scalar> c = apply_gamma_to_jet(kGammaBasis[a], t, ws, inner[b]);
      denom += l2(c.value);
    }

  KsRatio<Scalar> out;
  if (denom == Scalar(0)) {
    out.degenerate = true;
    return out;
  }
  out.value = numerator / denom;
  return out;
}

template <typename Scalar>
KsRatio<Scalar> ks_ratio(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                         const GridField<Scalar>& uttt, const Spectral<Scalar>& sp) {
  DiagWorkspace<Scalar> ws(state, w, sp);
  return ks_ratio(state, w, uttt, ws);
}

template <typename Scalar>
KsRatio<Scalar> ks_ratio(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                         const GridField<Scalar>& uttt) {
  Spectral<Scalar> sp(state.u.grid);
  return ks_ratio(state, w, uttt, sp);
}

// sup |(t+r)(d_t + d_r) u| over the pointwise sum of |Gamma u| expanded via
// S = S~ + 2; the pointwise identity (t+r)(d_t+d_r) = S + w.L makes the
// ratio at most 1 up to rounding. The r = 0 cell is excluded.
template <typename Scalar>
Scalar good_derivative_check(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                             const DiagWorkspace<Scalar>& ws) {
  const Scalar t = state.t;
  const Array2<Scalar>& ut = state.ut.values;

  Array2<Scalar> denom = Scalar(2) * state.u.values.abs();
  for (GammaField id : kGammaBasis) {
    FieldJet<Scalar> j = apply_gamma(state, w, id, ws);
    denom += j.value.abs();
  }
  Scalar floor = Scalar(1e-14) * denom.maxCoeff();
  if (denom.maxCoeff() == Scalar(0)) return Scalar(0);

  auto [o1, o2] = ws.omega(state);
  Array2<Scalar> num = ((t + ws.r) * (ut + o1 * ws.u1 + o2 * ws.u2)).abs();

  Scalar worst = Scalar(0);
  for (int j = 0; j < ws.grid.n; ++j)
    for (int i = 0; i < ws.grid.n; ++i) {
      if (i == ws.center_i && j == ws.center_j) continue;
      Scalar d = denom(i, j);
      if (d <= floor) continue;
      worst = std::max(worst, num(i, j) / d);
    }
  return worst;
}

template <typename Scalar>
Scalar good_derivative_check(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                             const Spectral<Scalar>& sp) {
  DiagWorkspace<Scalar> ws(state, w, sp);
  return good_derivative_check(state, w, ws);
}

template <typename Scalar>
Scalar good_derivative_check(const WaveState<Scalar>& state, const GridField<Scalar>& w) {
  Spectral<Scalar> sp(state.u.grid);
  return good_derivative_check(state, w, sp);
}

// Null-gain monitor near the cone: sup over r >= <t>/2 of
// r |N(d^2 u, d^2 u)| / (sum |d Gamma u| + |d u|)^2.
template <typename Scalar>
Scalar lemma31_ratio(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                     const NullFormTensor<Scalar>& tensor,
                     const std::array<FieldJet<Scalar>, 7>& jets,
                     const DiagWorkspace<Scalar>& ws) {
  const Scalar t = state.t;
  const Array2<Scalar>& ut = state.ut.values;
  const auto& g = ws.grid;

  // N(H(w), H(w)) pointwise from the quadratic coefficient split.
  HessianField<Scalar> hess;
  hess.wtt = w;
  hess.wt1 = GridField<Scalar>(g, ws.ut1);
  hess.wt2 = GridField<Scalar>(g, ws.ut2);
  hess.w11 = GridField<Scalar>(g, ws.u11);
  hess.w12 = GridField<Scalar>(g, ws.u12);
  hess.w22 = GridField<Scalar>(g, ws.u22);
  auto coeffs = detail::nonlinearity_coeffs(tensor, hess);
  Array2<Scalar> nval = coeffs.quad_a * w.values.square() + coeffs.lin_b * w.values +
                        coeffs.const_c;

  Array2<Scalar> dsum = (ut.square() + ws.u1.square() + ws.u2.square()).sqrt();
  for (const auto& j : jets)
    dsum += (j.dt.square() + j.dx1.square() + j.dx2.square()).sqrt();
  Array2<Scalar> denom = dsum.square();
  Scalar floor = Scalar(1e-14) * denom.maxCoeff();
  if (denom.maxCoeff() == Scalar(0)) return Scalar(0);

  using std::sqrt;
  Scalar region = sqrt(Scalar(1) + t * t) / Scalar(2);
  Scalar worst = Scalar(0);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      if (ws.r(i, j) < region) continue;
      Scalar d = denom(i, j);
      if (d <= floor) continue;
      worst = std::max(worst, ws.r(i, j) * std::abs(nval(i, j)) / d);
    }
  return worst;
}

template <typename Scalar>
Scalar lemma31_ratio(const WaveState<Scalar>& state, const GridField<Scalar>& w,
                     const NullFormTensor<Scalar>& tensor, const Spectral<Scalar>& sp) {
  DiagWorkspace<Scalar> ws(state, w, sp);
  std::array<FieldJet<Scalar>, 7> jets;
  for (int k = 0; k < 7; ++k) jets[k] = apply_gamma(state, w, kGammaBasis[k], ws);
  return lemma31_ratio(state, w, tensor, jets, ws);
}

// H^k_Lambda data norm: sum over |a| <= k-1 of ||grad Lambda^a phi|| +
// ||Lambda^a psi|| with Lambda = {d_1, d_2, r d_r, Omega}.
template <typename Scalar>
Scalar hk_lambda_norm(const GridField<Scalar>& phi, const GridField<Scalar>& psi, int k,
                      const Spectral<Scalar>& sp) {
  if (k != 1 && k != 2) throw std::invalid_argument("hk_lambda_norm: k must be 1 or 2");
  if (!(phi.grid == psi.grid))
    throw std::invalid_argument("hk_lambda_norm: fields must share one grid");
  const auto& g = phi.grid;
  Scalar h = g.spacing();
  Array2<Scalar> x1 = coordinate_array(g, 0);
  Array2<Scalar> x2 = coordinate_array(g, 1);

  auto l2 = [&](const Array2<Scalar>& v) {
    using std::sqrt;
    return sqrt(h * h * v.square().sum());
  };
  auto grad_norm = [&](const Array2<Scalar>& f) {
    Array2<Scalar> f1 = sp.derivative(f, 0);
    Array2<Scalar> f2 = sp.derivative(f, 1);
    using std::sqrt;
    return sqrt(h * h * (f1.square() + f2.square()).sum());
  };

  Scalar total = grad_norm(phi.values) + l2(psi.values);
  if (k == 1) return total;

  auto lambda_apply = [&](const Array2<Scalar>& f, int which) {
    Array2<Scalar> f1 = sp.derivative(f, 0);
    Array2<Scalar> f2 = sp.derivative(f, 1);
    switch (which) {
      case 0: return f1;
      case 1: return f2;
      case 2: return Array2<Scalar>(x1 * f1 + x2 * f2);   // r d_r
      default: return Array2<Scalar>(-x2 * f1 + x1 * f2); // Omega
    }
  };
  for (int which = 0; which < 4; ++which) {
    total += grad_norm(lambda_apply(phi.values, which));
    total += l2(lambda_apply(psi.values, which));
  }
  return total;
}

template <typename Scalar>
Scalar hk_lambda_norm(const GridField<Scalar>& phi, const GridField<Scalar>& psi, int k) {
  Spectral<Scalar> sp(phi.grid);
  return hk_lambda_norm(phi, psi, k, sp);
}

// Fitted exponent of E against t on a log-log scale.
struct DecayFit {
  double gamma_hat = 0.0;
  double t0 = 0.0, t1 = 0.0;
  double residual = 0.0;  // rms of log E about the fit
  int samples = 0;
};

inline DecayFit fit_growth(const std::vector<std::pair<double, double>>& series) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, e] : series) {
    if (t < 1.0) continue;
    if (!(e > 0.0))
      throw std::invalid_argument("fit_growth: energies must be positive");
    pts.push_back({std::log(t), std::log(e)});
  }
  if (pts.size() < 8)
    throw std::invalid_argument("fit_growth: need at least 8 samples with t >= 1");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(pts.size());
  const double denom = n * sxx - sx * sx;
  DecayFit fit;
  fit.samples = int(pts.size());
  fit.gamma_hat = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - fit.gamma_hat * sx) / n;
  double ss = 0.0;
  for (const auto& [x, y] : pts) {
    double d = y - intercept - fit.gamma_hat * x;
    ss += d * d;
  }
  fit.residual = std::sqrt(ss / n);
  fit.t0 = std::exp(pts.front().first);
  fit.t1 = std::exp(pts.back().first);
  return fit;
}

// Time-stamped diagnostics record; the CSV row schema of the runner.
template <typename Scalar>
struct EnergyReport {
  Scalar t = 0;
  Scalar e1 = 0, e2 = 0;
  Scalar ghost_e = 0, ghost_g = 0;
  Scalar ks = 0;
  Scalar good_deriv = 0;
  Scalar lemma31 = 0;
  int picard_max_iters = 0;

  bool finite_and_nonnegative() const {
    auto ok = [](Scalar v) { return std::isfinite(double(v)) && v >= Scalar(0); };
    return ok(e1) && ok(e2) && ok(ghost_e) && ok(ghost_g) && ok(ks) && ok(good_deriv) &&
           ok(lemma31) && std::isfinite(double(t));
  }
};

// Assemble the full report for one observation.
template <typename Scalar>
EnergyReport<Scalar> compute_report(const WaveState<Scalar>& state,
                                    const GridField<Scalar>& w,
                                    const GridField<Scalar>& uttt,
                                    const NullFormTensor<Scalar>& tensor,
                                    int picard_iters, const Spectral<Scalar>& sp) {
  EnergyReport<Scalar> rep;
  rep.t = state.t;
  rep.picard_max_iters = picard_iters;

  DiagWorkspace<Scalar> ws(state, w, sp);
  Scalar h = state.u.grid.spacing();
  rep.e1 = Scalar(0.5) * h * h *
           (state.ut.values.square() + ws.u1.square() + ws.u2.square()).sum();
  rep.e2 = rep.e1;
  std::array<FieldJet<Scalar>, 7> jets;
  for (int k = 0; k < 7; ++k) {
    jets[k] = apply_gamma(state, w, kGammaBasis[k], ws);
    rep.e2 += Scalar(0.5) * h * h *
              (jets[k].dt.square() + jets[k].dx1.square() + jets[k].dx2.square()).sum();
  }

  auto [weighted, flux] = ghost_energy(state, ws);
  rep.ghost_e = weighted;
  rep.ghost_g = flux;
  rep.ks = ks_ratio(state, w, uttt, ws).value;
  rep.good_deriv = good_derivative_check(state, w, ws);
  rep.lemma31 = lemma31_ratio(state, w, tensor, jets, ws);
  return rep;
}

}  // namespace nlwave
