#include "brlab/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "brlab/errors.hpp"
#include "brlab/spectral.hpp"

namespace brlab {
namespace {

// Resolved options shared by the data map, the Newton loop, and the
// comparison driver, so every evaluation uses identical caps.
struct Engine {
  const HyperbolicModel& model;
  CurveProvider provider;
  FanOptions fopts;
  LaxOptions lopts;
  LayerOptions lays;
  int k, n, nw;
};

Engine make_engine(const HyperbolicModel& model, const RiemannOptions& o) {
  if (!(o.tol > 0.0) || !std::isfinite(o.tol) || o.max_iter < 1 || o.fan_m < 2)
    fail(ErrorKind::InvalidParams, "riemann options: need tol > 0, max_iter >= 1, fan_m >= 2");
  const double r = model.domain.radius;
  Engine e{model, o.provider, {}, {}, {}, model.k, model.n, model.n - model.k};
  e.fopts.m = o.fan_m;
  e.fopts.s_max = o.s_cap > 0.0 ? o.s_cap : 0.45 * r;
  e.lopts.s_max = e.fopts.s_max;
  e.lays.s_max_factor = (o.layer_cap > 0.0 ? o.layer_cap : 0.6 * r) / r;
  e.lays.horizon = 40.0 / model.gap_c;  // resolved here so it can be reported
  return e;
}

Vector wave_endpoint(const Engine& e, int family, double s, const Vector& U_right) {
  if (e.provider == CurveProvider::lax_oracle)
    return lax_oracle(e.model, family, s, U_right, e.lopts).endpoint;
  return fan_curve(e.model, leading_order_closure(e.model, family, U_right), family,
                   s, U_right, e.fopts)
      .endpoint();
}

// F(S, s): outgoing curves applied fastest first from U_0, then the layer
// chart at the resulting trace.  x = (S_1..S_k, s_{k+1}..s_n).
Vector data_map(const Engine& e, const Vector& U_0, const Vector& x) {
  Vector W = U_0;
  for (int idx = e.nw - 1; idx >= 0; --idx)
    W = wave_endpoint(e, e.k + 1 + idx, x[e.k + idx], W);
  if (e.k == 0) return W;
  return phi_s(e.model, W, x.head(e.k), e.lays);
}

// Central-difference Jacobian column with one-sided fallbacks for points
// sitting against a strength cap; Fx is the map value at x.
Matrix jacobian(const Engine& e, const Vector& U_0, const Vector& x, double step,
                const Vector& Fx) {
  Matrix J(e.n, e.n);
  for (int i = 0; i < e.n; ++i) {
    Vector xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    try {
      J.col(i) = (data_map(e, U_0, xp) - data_map(e, U_0, xm)) / (2.0 * step);
      continue;
    } catch (const LabError&) {
    }
    try {
      J.col(i) = (data_map(e, U_0, xp) - Fx) / step;
      continue;
    } catch (const LabError&) {
    }
    try {
      J.col(i) = (Fx - data_map(e, U_0, xm)) / step;
    } catch (const LabError&) {
      fail(ErrorKind::NewtonDivergence,
           "riemann: jacobian column " + std::to_string(i) + " not evaluable");
    }
  }
  return J;
}

// Chains the solved coordinates into the full fan description and rejects
// converged points whose wave group is not outgoing and ordered.
FanSolution build_solution(const Engine& e, const Vector& U_0, const Vector& U_b,
                           const Vector& x, int iterations) {
  FanSolution fan;
  fan.U_0 = U_0;
  fan.U_b = U_b;
  fan.provider = e.provider;
  fan.S = x.head(e.k);
  fan.strengths = x.tail(e.nw);
  fan.newton_iterations = iterations;
  fan.layer_horizon = e.lays.horizon;

  std::vector<Vector> rights(e.nw), lefts(e.nw);
  Vector W = U_0;
  for (int idx = e.nw - 1; idx >= 0; --idx) {
    rights[idx] = W;
    W = wave_endpoint(e, e.k + 1 + idx, x[e.k + idx], W);
    lefts[idx] = W;
  }
  fan.trace_U_bar = W;
  const Vector U_b_model = e.k == 0 ? W : phi_s(e.model, W, fan.S, e.lays);
  fan.residual = (U_b_model - U_b).lpNorm<Eigen::Infinity>();

  // Kinematics always come from the envelope engine anchored at the chain
  // states; under the lax provider the curve endpoint may differ from U_left
  // by the O(|s|^3) construction mismatch.
  for (int idx = 0; idx < e.nw; ++idx) {
    FanWave w;
    w.family = e.k + 1 + idx;
    w.strength = x[e.k + idx];
    w.U_right = rights[idx];
    w.U_left = lefts[idx];
    w.curve = fan_curve(e.model, leading_order_closure(e.model, w.family, w.U_right),
                        w.family, w.strength, w.U_right, e.fopts);
    fan.waves.push_back(std::move(w));
  }
  for (int idx = 0; idx < e.nw; ++idx) {
    if (fan.waves[idx].strength == 0.0) continue;  // absent wave, no pieces
    auto pcs = classify(fan.waves[idx].curve);
    std::reverse(pcs.begin(), pcs.end());  // node order is fastest-first
    for (size_t q = 0; q < pcs.size(); ++q)
      fan.pieces.push_back({idx, q == 0, pcs[q]});
  }

  for (size_t q = 0; q < fan.pieces.size(); ++q) {
    const FanPiece& p = fan.pieces[q].piece;
    if (!(p.speed_lo > 0.0)) {
      std::ostringstream os;
      os << "riemann: family " << fan.waves[fan.pieces[q].wave].family
         << " carries speed " << p.speed_lo
         << " <= 0; the data do not split into outgoing waves and a layer";
      fail(ErrorKind::NoLocalSolution, os.str());
    }
    if (q == 0) continue;
    const OrderedPiece& prev = fan.pieces[q - 1];
    // Pieces of one composite wave share attachment nodes, so allow FP-level
    // overlap there; distinct families must stay strictly ordered.
    const double slack = prev.wave == fan.pieces[q].wave
                             ? 1e-7 * std::max(1.0, std::abs(p.speed_lo))
                             : 0.0;
    if (prev.piece.speed_hi > p.speed_lo + slack) {
      std::ostringstream os;
      os << "riemann: wave speeds overlap (" << prev.piece.speed_hi << " > "
         << p.speed_lo << "); the fan ordering collapsed";
      fail(ErrorKind::NoLocalSolution, os.str());
    }
  }
  return fan;
}

// Nearest node of the curve's uniform tau grid.
int tau_index(const WaveFanCurve& c, double t) {
  const int m = static_cast<int>(c.tau.size());
  if (m <= 1) return 0;
  const int j = static_cast<int>(std::lround(t / c.tau[1]));
  return std::clamp(j, 0, m - 1);
}

}  // namespace

Vector compose_boundary_data(const HyperbolicModel& model, const Vector& U_0,
                             const Vector& S, const Vector& strengths,
                             const RiemannOptions& opts) {
  const Engine e = make_engine(model, opts);
  if (S.size() != e.k || strengths.size() != e.nw)
    fail(ErrorKind::InvalidParams, "compose_boundary_data: need k chart and n-k wave coordinates");
  if (U_0.size() != e.n || !model.domain.contains(U_0))
    fail(ErrorKind::OutOfDomain, "compose_boundary_data: far-field state outside the model box");
  Vector x(e.n);
  x.head(e.k) = S;
  x.tail(e.nw) = strengths;
  return data_map(e, U_0, x);
}

FanSolution solve_boundary_riemann(const HyperbolicModel& model, const Vector& U_0,
                                   const Vector& U_b, const RiemannOptions& opts) {
  const Engine e = make_engine(model, opts);
  if (U_0.size() != e.n || U_b.size() != e.n)
    fail(ErrorKind::InvalidParams, "riemann: states must have the model dimension");
  if (!model.domain.contains(U_0) || !model.domain.contains(U_b))
    fail(ErrorKind::OutOfDomain, "riemann: boundary data outside the model box");
  const double sep = (U_0 - U_b).lpNorm<Eigen::Infinity>();
  if (sep > 0.5 * model.domain.radius * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "riemann: |U_0 - U_b| = " << sep << " exceeds half the box radius "
       << 0.5 * model.domain.radius << "; the local construction needs close data";
    fail(ErrorKind::InvalidParams, os.str());
  }
  const double step = opts.fd_step > 0.0 ? opts.fd_step : 1e-6 * model.domain.radius;

  // Eigenbasis split of the jump seeds the coordinates; clamp into the caps
  // so the first evaluation cannot trip them.
  const SpectralData sd = eigendecompose(model.matrix_at(U_0));
  Vector x = sd.R.partialPivLu().solve(U_b - U_0);
  const double cap_S = 0.95 * e.lays.s_max_factor * model.domain.radius;
  const double cap_s = 0.95 * e.fopts.s_max;
  for (int i = 0; i < e.n; ++i) {
    const double c = i < e.k ? cap_S : cap_s;
    x[i] = std::clamp(x[i], -c, c);
  }

  Vector Fx = data_map(e, U_0, x);
  Vector G = Fx - U_b;
  double phi = G.lpNorm<Eigen::Infinity>();
  int iter = 0;
  while (phi > opts.tol && iter < opts.max_iter) {
    const Matrix J = jacobian(e, U_0, x, step, Fx);
    const Vector dx = Eigen::PartialPivLU<Matrix>(J).solve(-G);
    if (!dx.allFinite())
      fail(ErrorKind::NewtonDivergence, "riemann: singular jacobian in the coordinate solve");
    bool accepted = false;
    for (double alpha = 1.0; alpha >= std::ldexp(1.0, -30); alpha *= 0.5) {
      const Vector xt = x + alpha * dx;
      try {
        Vector Ft = data_map(e, U_0, xt);
        const double pt = (Ft - U_b).lpNorm<Eigen::Infinity>();
        if (pt <= phi * (1.0 - 1e-4 * alpha)) {
          x = xt;
          Fx = std::move(Ft);
          G = Fx - U_b;
          phi = pt;
          accepted = true;
          break;
        }
      } catch (const LabError&) {
        // trial left a cap or the box; treat as a rejected step
      }
    }
    ++iter;
    if (!accepted) {
      std::ostringstream os;
      os << "riemann: line search stalled at |F - U_b| = " << phi << " after " << iter
         << " iterations";
      fail(ErrorKind::NewtonDivergence, os.str());
    }
  }
  if (phi > opts.tol) {
    std::ostringstream os;
    os << "riemann: no convergence in " << opts.max_iter
       << " iterations; |F - U_b| = " << phi;
    fail(ErrorKind::NewtonDivergence, os.str());
  }
  return build_solution(e, U_0, U_b, x, iter);
}

Vector evaluate_fan(const FanSolution& fan, double speed) {
  if (!std::isfinite(speed) || speed < 0.0)
    fail(ErrorKind::InvalidParams, "evaluate_fan: need a finite speed >= 0");
  for (const OrderedPiece& op : fan.pieces) {
    const FanPiece& p = op.piece;
    const FanWave& w = fan.waves[op.wave];
    const int ja = tau_index(w.curve, p.tau_lo);
    const int jb = tau_index(w.curve, p.tau_hi);
    const int jfast = std::min(ja, jb);
    const int jslow = std::max(ja, jb);
    if (speed < p.speed_lo)
      // Constant below this piece: the chain state under the wave's slowest
      // piece, the shared attachment node inside a composite.
      return op.first_of_wave ? w.U_left : w.curve.V[jslow];
    if (speed <= p.speed_hi) {
      if (p.type == PieceType::shock || jfast == jslow)
        return w.curve.V[jfast];  // right-continuous: the larger-xi side
      // Monotone inversion of xi(tau) across the rarefaction nodes.
      if (speed >= w.curve.xi[jfast]) return w.curve.V[jfast];
      if (speed <= w.curve.xi[jslow]) return w.curve.V[jslow];
      int lo = jfast, hi = jslow;
      while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (w.curve.xi[mid] >= speed ? lo : hi) = mid;
      }
      const double x0 = w.curve.xi[lo], x1 = w.curve.xi[hi];
      const double t = x0 > x1 ? (x0 - speed) / (x0 - x1) : 0.0;
      if (!std::isfinite(t))
        fail(ErrorKind::UnresolvedSpeed,
             "evaluate_fan: rarefaction inversion hit non-finite speeds");
      return w.curve.V[lo] + t * (w.curve.V[hi] - w.curve.V[lo]);
    }
  }
  return fan.U_0;
}

ComparisonReport compare_limits(const HyperbolicModel& model, const Vector& U_0,
                                const Vector& U_b,
                                const std::vector<double>& eps_list,
                                double Z_inner, const CompareOptions& opts) {
  if (!(Z_inner > 0.0) || !std::isfinite(Z_inner))
    fail(ErrorKind::InvalidParams, "compare_limits: need Z_inner > 0");
  ComparisonReport rep;
  rep.fan = solve_boundary_riemann(model, U_0, U_b, opts.riemann);
  rep.Xi = opts.Xi > 0.0 ? opts.Xi : 1.25 * std::max(max_wave_speed(model), 0.8);
  if (!eps_list.empty() && eps_list.front() * Z_inner > rep.Xi) {
    std::ostringstream os;
    os << "compare_limits: the top rung needs eps * Z_inner = "
       << eps_list.front() * Z_inner << " inside [0, Xi = " << rep.Xi << "]";
    fail(ErrorKind::InvalidParams, os.str());
  }

  const LadderResult lad =
      continuation_ladder(model, U_b, U_0, rep.Xi, eps_list, opts.mesh);
  if (!lad.complete()) {
    std::ostringstream os;
    os << "compare_limits: rung " << lad.failed_rung << " (eps = "
       << eps_list[lad.failed_rung] << ") failed: " << lad.failure_message;
    fail(ErrorKind::ComparisonInconclusive, os.str());
  }

  // Reference layer trajectory at the solved trace and chart coordinates.
  const Engine e = make_engine(model, opts.riemann);
  LayerOptions lops = e.lays;
  lops.horizon = std::max(40.0 / model.gap_c, 1.5 * Z_inner);
  LayerTrajectory traj;
  if (e.k > 0) traj = layer_from_seed(model, rep.fan.trace_U_bar, rep.fan.S, lops);

  const double c = model.gap_c;
  for (const ViscousProfile& pr : lad.profiles) {
    ComparisonRow row;
    row.epsilon = pr.epsilon;

    // (a) outer trapezoid of |Q - fan|_inf above xi_low = 3 eps |log eps|.
    const double xi_low = 3.0 * pr.epsilon * std::abs(std::log(pr.epsilon));
    double prev_xi = 0.0, prev_err = 0.0;
    bool have_prev = false;
    for (size_t i = 0; i < pr.xi.size(); ++i) {
      if (pr.xi[i] < xi_low) continue;
      const double err = (pr.Q[i] - evaluate_fan(rep.fan, pr.xi[i])).lpNorm<Eigen::Infinity>();
      if (have_prev) row.l1_fan_dist += 0.5 * (prev_err + err) * (pr.xi[i] - prev_xi);
      prev_xi = pr.xi[i];
      prev_err = err;
      have_prev = true;
    }

    // (b) sup distance between the rescaled inner profile and the layer.
    const InnerProfile ip = inner_rescale(pr, Z_inner, opts.inner_nodes);
    for (size_t i = 0; i < ip.zeta.size(); ++i) {
      const Vector ref = e.k > 0 ? layer_eval(traj, ip.zeta[i]) : rep.fan.trace_U_bar;
      row.sup_inner_dist =
          std::max(row.sup_inner_dist, (ip.V[i] - ref).lpNorm<Eigen::Infinity>());
    }

    // (c) weighted derivative tail sup |dV/dzeta| e^{c zeta / 4} on [Z/2, Z].
    const double h = ip.zeta[1] - ip.zeta[0];
    const size_t last = ip.zeta.size() - 1;
    for (size_t i = 1; i <= last; ++i) {
      if (ip.zeta[i] < 0.5 * Z_inner) continue;
      const Vector d = i < last ? Vector((ip.V[i + 1] - ip.V[i - 1]) / (2.0 * h))
                                : Vector((ip.V[last] - ip.V[last - 1]) / h);
      row.weighted_tail = std::max(
          row.weighted_tail, d.lpNorm<Eigen::Infinity>() * std::exp(c * ip.zeta[i] / 4.0));
    }

    if (!std::isfinite(row.l1_fan_dist) || !std::isfinite(row.sup_inner_dist) ||
        !std::isfinite(row.weighted_tail)) {
      std::ostringstream os;
      os << "compare_limits: non-finite metric at eps = " << pr.epsilon;
      fail(ErrorKind::ComparisonInconclusive, os.str());
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace brlab
