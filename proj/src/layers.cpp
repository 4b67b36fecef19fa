#include "brlab/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "brlab/errors.hpp"
#include "brlab/interp.hpp"
#include "brlab/ode.hpp"
#include "brlab/spectral.hpp"

namespace brlab {
namespace {

double resolve_horizon(const HyperbolicModel& model, const LayerOptions& opts) {
  const double floor = 10.0 / model.gap_c;
  const double Y = opts.horizon < 0.0 ? 40.0 / model.gap_c : opts.horizon;
  if (Y < floor * (1.0 - 1e-12))
    fail(ErrorKind::InvalidParams,
         "layers: horizon " + std::to_string(Y) + " below the floor 10/gap_c = " +
             std::to_string(floor));
  return Y;
}

double seed_cap(const HyperbolicModel& model, const LayerOptions& opts) {
  return opts.s_max_factor * model.domain.radius;
}

LayerTrajectory constant_trajectory(const HyperbolicModel& model, const Vector& U_bar,
                                    const Vector& S, double Y, double max_step) {
  LayerTrajectory tr;
  const int nodes = std::max(3, static_cast<int>(std::ceil(Y / max_step)) + 1);
  const Vector zero = Vector::Zero(model.n);
  tr.zeta.reserve(nodes);
  for (int i = 0; i < nodes; ++i) {
    tr.zeta.push_back(Y * static_cast<double>(i) / (nodes - 1));
    tr.V.push_back(U_bar);
    tr.W.push_back(zero);
  }
  tr.zeta.front() = 0.0;
  tr.zeta.back() = Y;
  tr.U_bar = U_bar;
  tr.S = S;
  tr.horizon = Y;
  return tr;
}

}  // namespace

StableBasis stable_basis(const HyperbolicModel& model, const Vector& U_bar) {
  SpectralData sd = eigendecompose(model.matrix_at(U_bar));
  for (int i = 0; i < model.n; ++i)
    if (std::abs(sd.lambda[i]) < model.gap_c)
      fail(ErrorKind::NonCharacteristicViolation,
           "layers: |lambda_" + std::to_string(i + 1) + "| = " +
               std::to_string(std::abs(sd.lambda[i])) + " below gap_c at the given state");
  if (sd.k != model.k)
    fail(ErrorKind::NonUniformSignature,
         "layers: state has " + std::to_string(sd.k) + " incoming modes, model has " +
             std::to_string(model.k));
  StableBasis b;
  b.lambda.assign(sd.lambda.data(), sd.lambda.data() + model.k);
  b.R = sd.R.leftCols(model.k);
  return b;
}

LayerTrajectory layer_from_seed(const HyperbolicModel& model, const Vector& U_bar,
                                const StableBasis& basis, const Vector& S,
                                const LayerOptions& opts) {
  const int n = model.n, k = model.k;
  if (!model.domain.contains(U_bar))
    fail(ErrorKind::OutOfDomain, "layers: equilibrium outside the domain box");
  if (basis.k() != k || basis.R.rows() != n || basis.R.cols() != k)
    fail(ErrorKind::InvalidParams, "layers: basis shape does not match the model");
  if (S.size() != k)
    fail(ErrorKind::InvalidParams, "layers: seed has dimension " +
                                       std::to_string(S.size()) + ", expected k = " +
                                       std::to_string(k));
  const double Y = resolve_horizon(model, opts);
  const double s_max = seed_cap(model, opts);
  if (S.lpNorm<Eigen::Infinity>() > s_max * (1.0 + 1e-12))
    fail(ErrorKind::RangeExceeded,
         "layers: |S| = " + std::to_string(S.lpNorm<Eigen::Infinity>()) +
             " exceeds the seed cap " + std::to_string(s_max));
  for (double lam : basis.lambda) {
    if (!(lam < 0.0))
      fail(ErrorKind::InvalidParams, "layers: basis carries a non-stable rate");
    if (std::abs(lam) * Y > 600.0)
      fail(ErrorKind::InvalidParams,
           "layers: horizon too long for rate " + std::to_string(lam) +
               "; the horizon-end seed underflows");
  }
  const double max_step = opts.max_step < 0.0 ? Y / 400.0 : opts.max_step;

  if (S.lpNorm<Eigen::Infinity>() == 0.0)
    return constant_trajectory(model, U_bar, S, Y, max_step);

  // Mode frame at the equilibrium: caller's stable columns, remaining modes
  // from the decomposition. Integrating the W-block in these coordinates gives
  // each mode its own relative error control, which backward integration of a
  // multi-rate manifold requires (a fast stable mode is exponentially smaller
  // than a slow one near the horizon, and any absolute noise placed on it is
  // re-amplified by e^{|lambda_fast| Y} on the way back).
  const Matrix A0 = model.matrix_at(U_bar);
  SpectralData sd = eigendecompose(A0);
  if (sd.k != k)
    fail(ErrorKind::NonUniformSignature,
         "layers: state has " + std::to_string(sd.k) + " incoming modes, model has " +
             std::to_string(k));
  Matrix Rm = sd.R;
  for (int i = 0; i < k; ++i) {
    const Vector& r = basis.R.col(i);
    if (std::abs(r.norm() - 1.0) > 1e-6 ||
        (A0 * r - basis.lambda[i] * r).norm() > 1e-6 * (1.0 + std::abs(basis.lambda[i])))
      fail(ErrorKind::InvalidParams,
           "layers: basis column " + std::to_string(i + 1) +
               " is not a unit stable eigenvector at the equilibrium");
    Rm.col(i) = r;
  }
  const Matrix Lm = Rm.inverse();

  if (k >= 2) {
    // Conditioning guards for spread-out stable spectra.
    const double fast = -basis.lambda.front(), slow = -basis.lambda.back();
    if ((fast - slow) * Y > 18.0)
      fail(ErrorKind::IllConditioned,
           "layers: stable-rate spread times horizon = " +
               std::to_string((fast - slow) * Y) +
               " exceeds the double-precision budget (18); shorten the horizon");
    if (fast * Y > 2.0 * slow * Y - 5.0) {
      // First-order horizon seeding also needs the 2:1 spectral-gap condition
      // unless the matrix is constant near the equilibrium (exact seeding).
      Vector disp = Rm.leftCols(k) * S;
      while (!model.domain.contains(U_bar + disp)) disp *= 0.5;
      const double ascale = 1.0 + A0.cwiseAbs().maxCoeff();
      const bool constant =
          (model.matrix_at(U_bar + disp) - A0).cwiseAbs().maxCoeff() < 1e-12 * ascale &&
          (model.matrix_at(U_bar + 0.5 * disp) - A0).cwiseAbs().maxCoeff() <
              1e-12 * ascale;
      if (!constant)
        fail(ErrorKind::IllConditioned,
             "layers: fastest stable rate violates the 2:1 spectral condition for "
             "first-order horizon seeding on a non-constant matrix");
    }
  }

  // Seed at zeta = Y, scaled so the chart at zeta = 0 is tangent to the
  // eigenbasis: each mode carries its own factor e^{lambda_i Y}.
  Vector Vseed = U_bar, bseed = Vector::Zero(n);
  for (int i = 0; i < k; ++i) {
    const double amp = S[i] * std::exp(basis.lambda[i] * Y);
    Vseed += amp * Rm.col(i);
    bseed[i] = amp * basis.lambda[i];
  }

  Vector y0(2 * n);
  y0.head(n) = Vseed;
  y0.tail(n) = bseed;

  OdeOptions oopts;
  oopts.rtol = opts.rtol;
  oopts.max_step = max_step;
  oopts.scale = [n](const Vector& y) {
    Vector sc(2 * n);
    for (int i = 0; i < n; ++i) sc[i] = 1.0 + std::abs(y[i]);
    // Per-mode relative control, floored at a small fraction of the group so
    // that a mode growing from exact zero (physical curvature content) does
    // not demand impossible accuracy; the floor keeps cross-mode noise below
    // ~1e-9 after re-amplification within the spread*horizon budget.
    const double bmax = y.tail(n).lpNorm<Eigen::Infinity>();
    for (int i = 0; i < n; ++i)
      sc[n + i] = std::max({std::abs(y[n + i]), 1e-6 * bmax, 1e-290});
    return sc;
  };
  oopts.inside = [&model, n](const Vector& y) {
    return model.domain.contains(y.head(n), 1.05);
  };
  auto rhs = [&model, &Rm, &Lm, n](double, const Vector& y) {
    Vector dy(2 * n);
    const Vector W = Rm * y.tail(n);
    dy.head(n) = W;
    dy.tail(n) = Lm * (model.matrix_at(y.head(n), 1.1) * W);
    return dy;
  };

  OdeTrajectory ot;
  try {
    ot = integrate(rhs, y0, Y, 0.0, oopts);
  } catch (const LabError& e) {
    if (e.kind() == ErrorKind::OutOfDomain)
      fail(ErrorKind::IntegrationEscape,
           std::string("layers: trajectory left the domain box (") + e.what() + ")");
    throw;
  }

  LayerTrajectory tr;
  const std::size_t m = ot.t.size();
  tr.zeta.resize(m);
  tr.V.resize(m);
  tr.W.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = m - 1 - i;  // reindex forward
    tr.zeta[i] = ot.t[j];
    tr.V[i] = ot.y[j].head(n);
    tr.W[i] = Rm * ot.y[j].tail(n);
  }
  tr.zeta.front() = 0.0;
  tr.U_bar = U_bar;
  tr.S = S;
  tr.horizon = Y;
  return tr;
}

LayerTrajectory layer_from_seed(const HyperbolicModel& model, const Vector& U_bar,
                                const Vector& S, const LayerOptions& opts) {
  return layer_from_seed(model, U_bar, stable_basis(model, U_bar), S, opts);
}

Vector phi_s(const HyperbolicModel& model, const Vector& U_bar, const Vector& S,
             const LayerOptions& opts) {
  return layer_from_seed(model, U_bar, S, opts).V.front();
}

Vector layer_eval(const LayerTrajectory& traj, double zeta) {
  return hermite_eval(traj.zeta, traj.V, traj.W, zeta);
}

MembershipResult membership(const HyperbolicModel& model, const Vector& U_bar,
                            const StableBasis& basis, const Vector& U_b, double tol,
                            const LayerOptions& opts) {
  const int k = model.k;
  if (!(tol > 0.0)) fail(ErrorKind::InvalidParams, "layers: tol must be positive");
  if (!model.domain.contains(U_bar))
    fail(ErrorKind::OutOfDomain, "layers: equilibrium outside the domain box");
  if ((U_b - U_bar).lpNorm<Eigen::Infinity>() > model.domain.radius * (1.0 + 1e-12))
    fail(ErrorKind::OutOfDomain,
         "layers: probe point farther than one box radius from the equilibrium");

  MembershipResult res;
  if ((U_b - U_bar).lpNorm<Eigen::Infinity>() == 0.0) {
    res.in_manifold = true;
    res.S = Vector::Zero(k);
    res.residual = 0.0;
    return res;
  }

  const double s_max = seed_cap(model, opts);
  const double s_box = 0.999 * s_max;
  auto clamp_S = [&](Vector S) {
    for (int i = 0; i < k; ++i) S[i] = std::clamp(S[i], -s_box, s_box);
    return S;
  };
  auto evaluate = [&](const Vector& S) -> Vector {
    return layer_from_seed(model, U_bar, basis, S, opts).V.front();
  };

  // Initial guess: least-squares coefficients of U_b - U_bar over the basis.
  Vector S = clamp_S(basis.R.colPivHouseholderQr().solve(U_b - U_bar));
  Vector r = evaluate(S) - U_b;
  double rn = r.lpNorm<Eigen::Infinity>();

  const int max_iter = 50;
  const double fd = 1e-6;
  int it = 0;
  bool stalled = false;
  for (; it < max_iter && rn > 1e-11 && !stalled; ++it) {
    Matrix J(model.n, k);
    for (int j = 0; j < k; ++j) {
      Vector Sp = S;
      double step = (Sp[j] + fd <= s_box) ? fd : -fd;
      Sp[j] += step;
      J.col(j) = (evaluate(Sp) - (r + U_b)) / step;
    }
    Matrix JtJ = J.transpose() * J;
    JtJ.diagonal().array() += 1e-14 * JtJ.trace() + 1e-300;
    Vector dS = JtJ.ldlt().solve(-J.transpose() * r);

    double alpha = 1.0;
    bool improved = false;
    for (int h = 0; h < 11; ++h, alpha *= 0.5) {
      Vector St = clamp_S(S + alpha * dS);
      Vector vt;
      try {
        vt = evaluate(St);
      } catch (const LabError&) {
        continue;  // trial escaped; shorten the step
      }
      const double rt = (vt - U_b).lpNorm<Eigen::Infinity>();
      if (rt < rn * (1.0 - 1e-6) || rt < 1e-13) {
        S = St;
        r = vt - U_b;
        rn = rt;
        improved = true;
        break;
      }
    }
    if (!improved) stalled = true;  // local least-squares minimum reached
  }
  if (it == max_iter && rn > tol && !stalled)
    fail(ErrorKind::NewtonDivergence,
         "layers: membership failed to settle in " + std::to_string(max_iter) +
             " iterations (residual " + std::to_string(rn) + ")");

  res.in_manifold = rn <= tol;
  res.S = S;
  res.residual = rn;
  res.iterations = it;
  return res;
}

MembershipResult membership(const HyperbolicModel& model, const Vector& U_bar,
                            const Vector& U_b, double tol, const LayerOptions& opts) {
  return membership(model, U_bar, stable_basis(model, U_bar), U_b, tol, opts);
}

DecayReport decay_report(const LayerTrajectory& traj, double c) {
  if (!(c > 0.0)) fail(ErrorKind::InvalidParams, "layers: decay weight c must be positive");
  const std::size_t m = traj.zeta.size();
  if (m < 2) fail(ErrorKind::InsufficientTail, "layers: trajectory has too few nodes");
  long past = 0;
  for (double z : traj.zeta)
    if (z >= 2.0 / c) ++past;
  if (past < 20)
    fail(ErrorKind::InsufficientTail,
         "layers: only " + std::to_string(past) + " nodes past zeta = 2/c = " +
             std::to_string(2.0 / c) + " (need 20)");

  DecayReport rep;
  rep.c = c;
  const double tail_start = traj.horizon / 2.0;
  double sup = 0.0;
  std::vector<double> zs, ls;
  int tail_nodes = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (traj.zeta[i] < tail_start) continue;
    ++tail_nodes;
    const double w = traj.W[i].norm();
    sup = std::max(sup, w * std::exp(c * traj.zeta[i] / 4.0));
    if (w > 1e-300) {
      zs.push_back(traj.zeta[i]);
      ls.push_back(std::log(w));
    }
  }
  rep.tail_nodes = tail_nodes;
  rep.weighted_sup_tail = sup;
  if (zs.size() < 2) {
    rep.fitted_rate = -std::numeric_limits<double>::infinity();  // identically-zero W
    return rep;
  }
  // Least-squares slope of log|W| against zeta.
  double zm = 0, lm = 0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    zm += zs[i];
    lm += ls[i];
  }
  zm /= zs.size();
  lm /= zs.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    num += (zs[i] - zm) * (ls[i] - lm);
    den += (zs[i] - zm) * (zs[i] - zm);
  }
  if (den == 0.0) fail(ErrorKind::InsufficientTail, "layers: degenerate tail grid");
  rep.fitted_rate = num / den;
  return rep;
}

}  // namespace brlab
