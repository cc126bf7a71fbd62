// Time integration of the fully nonlinear wave equation
// box u = N(d^2 u, d^2 u) on the periodic grid. The implicit pointwise
// dependence of the nonlinearity on d_t^2 u is resolved by Picard iteration.
#pragma once

#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlwave/grid.hpp"
#include "nlwave/nullform.hpp"
#include "nlwave/spectral.hpp"
#include "nlwave/transform.hpp"

namespace nlwave {

template <typename Scalar>
struct WaveState {
  Scalar t = Scalar(0);
  GridField<Scalar> u;
  GridField<Scalar> ut;

  WaveState() = default;
  WaveState(Scalar time, GridField<Scalar> u_, GridField<Scalar> ut_)
      : t(time), u(std::move(u_)), ut(std::move(ut_)) {
    if (!(u.grid == ut.grid))
      throw std::invalid_argument("WaveState: u and ut must share one grid");
  }
};

template <typename Scalar>
struct SolverConfig {
  Scalar dt = Scalar(0);
  Scalar picard_tol = Scalar(1e-10);
  int picard_max = 50;
  bool dealias = true;
  int report_every = 1;  // observer cadence, in steps

  void validate() const {
    if (!(dt > Scalar(0))) throw std::invalid_argument("SolverConfig: dt must be positive");
    if (!(picard_tol > Scalar(0)))
      throw std::invalid_argument("SolverConfig: picard_tol must be positive");
    if (picard_max < 1) throw std::invalid_argument("SolverConfig: picard_max must be >= 1");
    if (report_every < 1)
      throw std::invalid_argument("SolverConfig: report_every must be >= 1");
  }
};

// The six distinct second derivatives of u, with the d_t^2 slot explicit.
template <typename Scalar>
struct HessianField {
  GridField<Scalar> wtt;        // d_t^2 u
  GridField<Scalar> wt1, wt2;   // d_t d_i u
  GridField<Scalar> w11, w12, w22;

  // Pointwise symmetric 3x3 Hessian at grid point (i, j).
  Eigen::Matrix<Scalar, 3, 3> at(int i, int j) const {
    Eigen::Matrix<Scalar, 3, 3> h;
    h(0, 0) = wtt.values(i, j);
    h(0, 1) = h(1, 0) = wt1.values(i, j);
    h(0, 2) = h(2, 0) = wt2.values(i, j);
    h(1, 1) = w11.values(i, j);
    h(1, 2) = h(2, 1) = w12.values(i, j);
    h(2, 2) = w22.values(i, j);
    return h;
  }
};

// Divergence of the pointwise fixed-point solve for d_t^2 u; the artifact's
// blow-up proxy.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(double time, int i, int j, double resid)
      : std::runtime_error("Picard iteration for d_t^2 u did not converge at t = " +
                           std::to_string(time) + ", grid point (" + std::to_string(i) +
                           ", " + std::to_string(j) + "), residual " + std::to_string(resid)),
        t(time), ix(i), iy(j), residual(resid) {}
  double t;
  int ix, iy;
  double residual;
};

struct PicardStats {
  int iterations = 0;
  double contraction = 0.0;   // worst observed sup-change ratio
  bool ambiguous = false;     // contraction factor exceeded 1/2
};

namespace detail {

// Quadratic-in-w coefficient fields of N(H(w), H(w)) where H(w) carries w in
// the d_t^2 slot: N = quad_a * w^2 + lin_b(x) * w + const_c(x).
template <typename Scalar>
struct NonlinearityCoeffs {
  Scalar quad_a = Scalar(0);
  Array2<Scalar> lin_b;
  Array2<Scalar> const_c;
  bool trivial = false;  // zero tensor: N == 0
};

template <typename Scalar>
NonlinearityCoeffs<Scalar> nonlinearity_coeffs(const NullFormTensor<Scalar>& n,
                                               const HessianField<Scalar>& hess) {
  NonlinearityCoeffs<Scalar> out;
  const auto& g = hess.wtt.grid;
  if (n.is_zero()) {
    out.trivial = true;
    out.quad_a = Scalar(0);
    out.lin_b = Array2<Scalar>::Zero(g.n, g.n);
    out.const_c = Array2<Scalar>::Zero(g.n, g.n);
    return out;
  }
  // H0 = Hessian with the d_t^2 slot zeroed; E picks out that slot.
  const Array2<Scalar>* h0[3][3] = {
      {nullptr, &hess.wt1.values, &hess.wt2.values},
      {&hess.wt1.values, &hess.w11.values, &hess.w12.values},
      {&hess.wt2.values, &hess.w12.values, &hess.w22.values}};

  out.quad_a = n(0, 0, 0, 0);
  out.lin_b = Array2<Scalar>::Zero(g.n, g.n);
  out.const_c = Array2<Scalar>::Zero(g.n, g.n);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int m = 0; m < 3; ++m)
        for (int q = 0; q < 3; ++q) {
          Scalar coeff = n(a, b, m, q);
          if (coeff == Scalar(0)) continue;
          bool left_tt = (a == 0 && b == 0);
          bool right_tt = (m == 0 && q == 0);
          if (left_tt && right_tt) continue;  // handled by quad_a
          if (left_tt) {
            out.lin_b += coeff * (*h0[m][q]);
          } else if (right_tt) {
            out.lin_b += coeff * (*h0[a][b]);
          } else {
            out.const_c += coeff * (*h0[a][b]) * (*h0[m][q]);
          }
        }
  return out;
}

}  // namespace detail

// Spatial second-derivative fields of (u, ut); the d_t^2 slot of the result
// is zero-initialized and owned by the caller.
template <typename Scalar>
HessianField<Scalar> spatial_hessian(const WaveState<Scalar>& state,
                                     const Spectral<Scalar>& sp) {
  const auto& g = state.u.grid;
  HessianField<Scalar> h;
  h.wtt = GridField<Scalar>(g);
  h.wt1 = GridField<Scalar>(g, sp.derivative(state.ut.values, 0));
  h.wt2 = GridField<Scalar>(g, sp.derivative(state.ut.values, 1));
  h.w11 = GridField<Scalar>(g, sp.second_derivative(state.u.values, 0, 0));
  h.w12 = GridField<Scalar>(g, sp.second_derivative(state.u.values, 0, 1));
  h.w22 = GridField<Scalar>(g, sp.second_derivative(state.u.values, 1, 1));
  return h;
}

// Pointwise Picard solve of w = lap u + N(H(w), H(w)), starting from the
// linear branch w0 = lap u. Divergence (or running out of iterations)
// throws NonConvergence with the worst grid point attached.
template <typename Scalar>
GridField<Scalar> solve_utt(const WaveState<Scalar>& state, const NullFormTensor<Scalar>& n,
                            const SolverConfig<Scalar>& cfg, const Spectral<Scalar>& sp,
                            PicardStats* stats = nullptr) {
  const auto& g = state.u.grid;
  Array2<Scalar> lap = sp.laplacian(state.u.values);

  PicardStats local;
  Array2<Scalar> w = lap;
  if (n.is_zero()) {
    local.iterations = 1;
    if (stats) *stats = local;
    return GridField<Scalar>(g, std::move(w));
  }

  HessianField<Scalar> hess = spatial_hessian(state, sp);
  auto coeffs = detail::nonlinearity_coeffs(n, hess);

  Scalar prev_change = Scalar(0);
  for (int it = 1; it <= cfg.picard_max; ++it) {
    Array2<Scalar> next =
        lap + coeffs.quad_a * w.square() + coeffs.lin_b * w + coeffs.const_c;
    Scalar change = (next - w).abs().maxCoeff();
    Scalar scale = Scalar(1) + next.abs().maxCoeff();
    local.iterations = it;
    if (it > 1 && prev_change > Scalar(0)) {
      double ratio = double(change / prev_change);
      local.contraction = std::max(local.contraction, ratio);
      if (ratio > 0.5) local.ambiguous = true;
    }
    prev_change = change;
    bool finite = next.isFinite().all();
    w = std::move(next);
    if (!finite) break;
    if (change <= cfg.picard_tol * scale) {
      if (stats) *stats = local;
      return GridField<Scalar>(g, std::move(w));
    }
  }

  // Find the worst residual point for the error report.
  Array2<Scalar> resid =
      (w - lap - coeffs.quad_a * w.square() - coeffs.lin_b * w - coeffs.const_c).abs();
  if (!resid.isFinite().all()) {
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i)
        if (!std::isfinite(resid(i, j))) resid(i, j) = std::numeric_limits<Scalar>::max();
  }
  int wi = 0, wj = 0;
  resid.maxCoeff(&wi, &wj);
  if (stats) *stats = local;
  throw NonConvergence(double(state.t), wi, wj, double(resid(wi, wj)));
}

// Convenience overload constructing a workspace per call.
template <typename Scalar>
GridField<Scalar> solve_utt(const WaveState<Scalar>& state, const NullFormTensor<Scalar>& n,
                            const SolverConfig<Scalar>& cfg, PicardStats* stats = nullptr) {
  Spectral<Scalar> sp(state.u.grid);
  return solve_utt(state, n, cfg, sp, stats);
}

namespace detail {

// ut-slope: the converged d_t^2 u, band-limited when dealiasing is on.
template <typename Scalar>
Array2<Scalar> ut_slope(const WaveState<Scalar>& state, const NullFormTensor<Scalar>& n,
                        const SolverConfig<Scalar>& cfg, const Spectral<Scalar>& sp,
                        PicardStats* stats) {
  GridField<Scalar> w = solve_utt(state, n, cfg, sp, stats);
  if (cfg.dealias && !n.is_zero()) return sp.dealias(w.values);
  return std::move(w.values);
}

template <typename Scalar>
void merge(PicardStats& acc, const PicardStats& s) {
  acc.iterations = std::max(acc.iterations, s.iterations);
  acc.contraction = std::max(acc.contraction, s.contraction);
  acc.ambiguous = acc.ambiguous || s.ambiguous;
}

}  // namespace detail

// One classical RK4 step on (u, ut). Fourth-order in dt for smooth
// solutions; requires dt <= 0.5 h for stability of the spectral wave
// operator.
template <typename Scalar>
WaveState<Scalar> step(const WaveState<Scalar>& state, const NullFormTensor<Scalar>& n,
                       const SolverConfig<Scalar>& cfg, const Spectral<Scalar>& sp,
                       PicardStats* stats = nullptr) {
  cfg.validate();
  const auto& g = state.u.grid;
  if (!(cfg.dt <= Scalar(0.5) * g.spacing()))
    throw std::invalid_argument("step: dt exceeds the stability guard 0.5 h");

  PicardStats acc;
  PicardStats s;
  const Scalar dt = cfg.dt;

  auto stage = [&](const Array2<Scalar>& u, const Array2<Scalar>& ut, Scalar t) {
    WaveState<Scalar> st(t, GridField<Scalar>(g, u), GridField<Scalar>(g, ut));
    Array2<Scalar> dut = detail::ut_slope(st, n, cfg, sp, &s);
    detail::merge<Scalar>(acc, s);
    return std::pair<Array2<Scalar>, Array2<Scalar>>(ut, std::move(dut));
  };

  auto [k1u, k1v] = stage(state.u.values, state.ut.values, state.t);
  auto [k2u, k2v] = stage(state.u.values + Scalar(0.5) * dt * k1u,
                          state.ut.values + Scalar(0.5) * dt * k1v,
                          state.t + Scalar(0.5) * dt);
  auto [k3u, k3v] = stage(state.u.values + Scalar(0.5) * dt * k2u,
                          state.ut.values + Scalar(0.5) * dt * k2v,
                          state.t + Scalar(0.5) * dt);
  auto [k4u, k4v] = stage(state.u.values + dt * k3u, state.ut.values + dt * k3v,
                          state.t + dt);

  WaveState<Scalar> out;
  out.t = state.t + dt;
  out.u = GridField<Scalar>(
      g, state.u.values + dt / Scalar(6) * (k1u + Scalar(2) * k2u + Scalar(2) * k3u + k4u));
  out.ut = GridField<Scalar>(
      g, state.ut.values + dt / Scalar(6) * (k1v + Scalar(2) * k2v + Scalar(2) * k3v + k4v));
  if (stats) *stats = acc;
  return out;
}

template <typename Scalar>
WaveState<Scalar> step(const WaveState<Scalar>& state, const NullFormTensor<Scalar>& n,
                       const SolverConfig<Scalar>& cfg, PicardStats* stats = nullptr) {
  Spectral<Scalar> sp(state.u.grid);
  return step(state, n, cfg, sp, stats);
}

// Observation passed to the evolve observer. u_ttt is a finite-difference
// estimate from w snapshots across neighbouring steps (centered in the
// interior, one-sided at the run ends); it only feeds diagnostics.
template <typename Scalar>
struct Observation {
  const WaveState<Scalar>& state;
  const GridField<Scalar>& w;  // d_t^2 u at state.t
  const GridField<Scalar>& u_ttt;
  PicardStats picard;  // worst counts since the previous observation
  int step_index = 0;
};

template <typename Scalar>
struct StepRecord {
  Scalar t;
  int picard_iterations;
  double contraction;
  bool ambiguous;
};

template <typename Scalar>
struct EvolveResult {
  WaveState<Scalar> final_state;
  std::vector<StepRecord<Scalar>> log;
};

template <typename Scalar>
using Observer = std::function<void(const Observation<Scalar>&)>;
template <typename Scalar>
using StepTap = std::function<void(const WaveState<Scalar>&, const GridField<Scalar>&)>;

// Advance the initial-value problem to t_end, invoking `observer` every
// cfg.report_every steps (plus the initial and final states). A per-step
// `tap` receives every (state, w) pair before stepping; it is meant for
// cheap snapshot capture. NonConvergence propagates with the failure time
// attached.
template <typename Scalar>
EvolveResult<Scalar> evolve(const FullyNonlinearIVP<Scalar>& ivp,
                            const SolverConfig<Scalar>& cfg, Scalar t_end,
                            Observer<Scalar> observer = {}, StepTap<Scalar> tap = {}) {
  cfg.validate();
  ivp.validate();
  if (!(t_end > Scalar(0))) throw std::invalid_argument("evolve: t_end must be positive");
  if (!ivp.phi.all_finite() || !ivp.psi.all_finite())
    throw std::invalid_argument("evolve: initial data must be finite");

  const auto& g = ivp.phi.grid;
  Spectral<Scalar> sp(g);

  WaveState<Scalar> state(Scalar(0), ivp.phi, ivp.psi);
  if (cfg.dealias) {
    state.u.values = sp.dealias(state.u.values);
    state.ut.values = sp.dealias(state.ut.values);
  }

  EvolveResult<Scalar> result;
  PicardStats since_report;

  // Rolling (t, state, w) triples used for centered u_ttt differences; a
  // report for step k is emitted once w at step k+1 is known.
  struct Snap {
    Scalar t;
    WaveState<Scalar> state;
    GridField<Scalar> w;
    int index;
    PicardStats picard;
    bool pending;
  };
  std::deque<Snap> window;

  auto fd_uttt = [&](const Snap& prev, const Snap& mid, const Snap& next) {
    Scalar dm = mid.t - prev.t, dp = next.t - mid.t;
    Array2<Scalar> d =
        (dm * dm * next.w.values - dp * dp * prev.w.values +
         (dp * dp - dm * dm) * mid.w.values) /
        (dp * dm * (dp + dm));
    return GridField<Scalar>(g, std::move(d));
  };
  auto one_sided_uttt = [&](const Snap& a, const Snap& b) {
    Array2<Scalar> d = (b.w.values - a.w.values) / (b.t - a.t);
    return GridField<Scalar>(g, std::move(d));
  };

  // One-step-delayed emission: the snap at position size-2 is finalized once
  // its successor exists (centered u_ttt when a predecessor is present,
  // forward difference for the very first step). flush handles the run end.
  auto emit_pending = [&](bool flush_all) {
    if (window.size() >= 2) {
      Snap& mid = window[window.size() - 2];
      if (mid.pending) {
        if (observer) {
          GridField<Scalar> uttt =
              window.size() >= 3
                  ? fd_uttt(window[window.size() - 3], mid, window.back())
                  : one_sided_uttt(mid, window.back());
          Observation<Scalar> obs{mid.state, mid.w, uttt, mid.picard, mid.index};
          observer(obs);
        }
        mid.pending = false;
      }
    }
    if (flush_all && !window.empty() && window.back().pending) {
      Snap& last = window.back();
      if (observer) {
        GridField<Scalar> uttt =
            window.size() >= 2 ? one_sided_uttt(window[window.size() - 2], last)
                               : GridField<Scalar>(g);
        Observation<Scalar> obs{last.state, last.w, uttt, last.picard, last.index};
        observer(obs);
      }
      last.pending = false;
    }
  };

  int step_index = 0;
  const Scalar tiny = cfg.dt * Scalar(1e-9);
  while (true) {
    PicardStats wstats;
    GridField<Scalar> w;
    try {
      w = solve_utt(state, ivp.tensor, cfg, sp, &wstats);
    } catch (NonConvergence&) {
      emit_pending(true);
      throw;
    }
    detail::merge<Scalar>(since_report, wstats);
    if (tap) tap(state, w);

    bool is_report = (step_index % cfg.report_every == 0) || state.t + tiny >= t_end;
    window.push_back(Snap{state.t, state, w, step_index, since_report, is_report});
    if (is_report) since_report = PicardStats{};
    result.log.push_back(StepRecord<Scalar>{state.t, wstats.iterations,
                                            wstats.contraction, wstats.ambiguous});
    while (window.size() > 3) window.pop_front();
    emit_pending(false);

    if (state.t + tiny >= t_end) break;

    SolverConfig<Scalar> step_cfg = cfg;
    step_cfg.dt = std::min(cfg.dt, t_end - state.t);
    PicardStats sstats;
    try {
      state = step(state, ivp.tensor, step_cfg, sp, &sstats);
    } catch (NonConvergence&) {
      emit_pending(true);
      throw;
    }
    detail::merge<Scalar>(since_report, sstats);
    ++step_index;
  }
  emit_pending(true);

  result.final_state = std::move(state);
  return result;
}

}  // namespace nlwave
