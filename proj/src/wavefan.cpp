#include "brlab/wavefan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "brlab/errors.hpp"
#include "brlab/ode.hpp"

namespace brlab {

// ---------------------------------------------------------------------------
// Envelope.

double hull_orient(int aj, double af, int bj, double bf, int cj, double cf) {
  return static_cast<double>(bj - aj) * (cf - af) -
         (bf - af) * static_cast<double>(cj - aj);
}

double chord_value(int a, double fa, int b, double fb, int i) {
  return fa + (fb - fa) * (static_cast<double>(i - a) / static_cast<double>(b - a));
}

Envelope envelope(const std::vector<double>& f, EnvelopeSense sense, double h) {
  const int m = static_cast<int>(f.size());
  if (m < 2) fail(ErrorKind::InvalidParams, "envelope: need at least two samples");
  if (!std::isfinite(h) || h == 0.0)
    fail(ErrorKind::InvalidParams, "envelope: spacing must be finite and nonzero");
  for (double v : f)
    if (!std::isfinite(v)) fail(ErrorKind::InvalidParams, "envelope: non-finite sample");

  // Monotone chain over (j, f[j]).  A middle vertex is discarded only when it
  // lies strictly on the wrong side of the chord of its neighbors, so exactly
  // collinear points survive as vertices.
  const bool concave = (sense == EnvelopeSense::concave);
  std::vector<int> hv;
  hv.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    while (hv.size() >= 2) {
      const int a = hv[hv.size() - 2];
      const int b = hv[hv.size() - 1];
      const double o = hull_orient(a, f[static_cast<size_t>(a)], b,
                                   f[static_cast<size_t>(b)], j, f[static_cast<size_t>(j)]);
      const bool pop = concave ? (o > 0.0) : (o < 0.0);
      if (!pop) break;
      hv.pop_back();
    }
    hv.push_back(j);
  }

  Envelope out;
  out.g = f;  // vertices keep their sample values bitwise
  out.hull = hv;
  const size_t p = hv.size();
  for (size_t c = 0; c + 1 < p; ++c) {
    const int a = hv[c], b = hv[c + 1];
    for (int i = a + 1; i < b; ++i)
      out.g[static_cast<size_t>(i)] =
          chord_value(a, f[static_cast<size_t>(a)], b, f[static_cast<size_t>(b)], i);
  }

  // Slopes in index space: constant on chord interiors, mean of the adjacent
  // chord slopes at vertices, one-sided extrapolation at the two ends (both
  // rules are exact for quadratic data on the unit-gap hull).
  std::vector<double> sec(p - 1);
  for (size_t c = 0; c + 1 < p; ++c) {
    const int a = hv[c], b = hv[c + 1];
    sec[c] = (f[static_cast<size_t>(b)] - f[static_cast<size_t>(a)]) /
             static_cast<double>(b - a);
  }
  std::vector<double> dj(static_cast<size_t>(m), 0.0);
  for (size_t c = 0; c + 1 < p; ++c)
    for (int i = hv[c] + 1; i < hv[c + 1]; ++i) dj[static_cast<size_t>(i)] = sec[c];
  for (size_t c = 1; c + 1 < p; ++c)
    dj[static_cast<size_t>(hv[c])] = 0.5 * (sec[c - 1] + sec[c]);
  if (p == 2) {
    dj[static_cast<size_t>(hv[0])] = sec[0];
    dj[static_cast<size_t>(hv[1])] = sec[0];
  } else {
    dj[static_cast<size_t>(hv[0])] = sec[0] - 0.5 * (sec[1] - sec[0]);
    dj[static_cast<size_t>(hv[p - 1])] = sec[p - 2] + 0.5 * (sec[p - 2] - sec[p - 3]);
  }
  out.g_prime.resize(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i)
    out.g_prime[static_cast<size_t>(i)] = dj[static_cast<size_t>(i)] / h;
  return out;
}

// ---------------------------------------------------------------------------
// Closure fields.

ClosureFields leading_order_closure(const HyperbolicModel& model, int family,
                                    const Vector& anchor) {
  if (family < 1 || family > model.n)
    fail(ErrorKind::InvalidParams, model.name + ": family must be in 1.." +
                                       std::to_string(model.n));
  if (anchor.size() != model.n || !model.domain.contains(anchor))
    fail(ErrorKind::OutOfDomain, model.name + ": closure anchor outside the box");
  const Matrix orient = eigendecompose(model.matrix_at(anchor)).R;
  const int i0 = family - 1;
  ClosureFields cf;
  cf.order_tag = "leading_order";
  cf.R_hat = [model, orient, i0](const Vector& V, double, double) -> Vector {
    return eigendecompose(model.matrix_at(V, 1.1), orient).R.col(i0);
  };
  cf.lambda_hat = [model, orient, i0](const Vector& V, double, double) -> double {
    return eigendecompose(model.matrix_at(V, 1.1), orient).lambda[i0];
  };
  return cf;
}

// ---------------------------------------------------------------------------
// Fan curves.

WaveFanCurve fan_curve(const HyperbolicModel& model, const ClosureFields& closure,
                       int family, double strength, const Vector& U_plus,
                       const FanOptions& opts) {
  const int n = model.n;
  if (family < 1 || family > n)
    fail(ErrorKind::InvalidParams, "fan_curve: family must be in 1.." + std::to_string(n));
  if (!closure.R_hat || !closure.lambda_hat)
    fail(ErrorKind::InvalidParams, "fan_curve: closure fields are empty");
  if (!std::isfinite(strength)) fail(ErrorKind::InvalidParams, "fan_curve: non-finite strength");
  if (opts.m < 2 || !(opts.tol > 0.0) || opts.max_iter < 1)
    fail(ErrorKind::InvalidParams, "fan_curve: need m >= 2, tol > 0, max_iter >= 1");
  if (U_plus.size() != n || !model.domain.contains(U_plus))
    fail(ErrorKind::OutOfDomain, "fan_curve: base state outside the model box");
  const double s_max = opts.s_max > 0.0 ? opts.s_max : 0.05 * model.domain.radius;
  if (std::abs(strength) > s_max * (1.0 + 1e-12))
    fail(ErrorKind::RangeExceeded,
         "fan_curve: |strength| exceeds the cap " + std::to_string(s_max));

  const SpectralData base = eigendecompose(model.matrix_at(U_plus));
  const int i0 = family - 1;

  WaveFanCurve out;
  out.family = family;
  out.strength = strength;
  if (strength == 0.0) {
    out.tau = {0.0};
    out.V = {U_plus};
    out.omega = {0.0};
    out.xi = {base.lambda[i0]};
    out.f_vals = {0.0};
    out.g_vals = {0.0};
    return out;
  }

  const int m = opts.m;
  const double h = strength / static_cast<double>(m - 1);
  const EnvelopeSense sense =
      strength > 0.0 ? EnvelopeSense::concave : EnvelopeSense::convex;
  out.tau.resize(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) out.tau[static_cast<size_t>(j)] = h * j;
  out.tau.back() = strength;

  std::vector<Vector> V(static_cast<size_t>(m));
  std::vector<double> om(static_cast<size_t>(m), 0.0);
  std::vector<double> xi(static_cast<size_t>(m), base.lambda[i0]);
  std::vector<double> f(static_cast<size_t>(m), 0.0);
  std::vector<double> g(static_cast<size_t>(m), 0.0);
  const Vector R0 = base.R.col(i0);
  for (int j = 0; j < m; ++j)
    V[static_cast<size_t>(j)] = U_plus + out.tau[static_cast<size_t>(j)] * R0;

  std::vector<double> lam(static_cast<size_t>(m));
  std::vector<Vector> Rh(static_cast<size_t>(m));
  std::vector<Vector> Vn(static_cast<size_t>(m));
  double res = std::numeric_limits<double>::infinity();
  bool converged = false;
  int sweeps = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    ++sweeps;
    for (int j = 0; j < m; ++j) {
      const size_t sj = static_cast<size_t>(j);
      lam[sj] = closure.lambda_hat(V[sj], om[sj], xi[sj]);
      Rh[sj] = closure.R_hat(V[sj], om[sj], xi[sj]);
    }
    f[0] = 0.0;
    for (int j = 1; j < m; ++j) {
      const size_t sj = static_cast<size_t>(j);
      f[sj] = f[sj - 1] + 0.5 * h * (lam[sj - 1] + lam[sj]);
    }
    const Envelope env = envelope(f, sense, h);
    Vn[0] = U_plus;
    for (int j = 1; j < m; ++j) {
      const size_t sj = static_cast<size_t>(j);
      Vn[sj] = Vn[sj - 1] + (0.5 * h) * (Rh[sj - 1] + Rh[sj]);
    }
    res = 0.0;
    for (int j = 0; j < m; ++j) {
      const size_t sj = static_cast<size_t>(j);
      if (!model.domain.contains(Vn[sj], 1.05))
        fail(ErrorKind::OutOfDomain, "fan_curve: iterate left the domain box at tau=" +
                                         std::to_string(out.tau[sj]));
      res = std::max(res, (Vn[sj] - V[sj]).lpNorm<Eigen::Infinity>());
      res = std::max(res, std::abs((f[sj] - env.g[sj]) - om[sj]));
      res = std::max(res, std::abs(env.g_prime[sj] - xi[sj]));
    }
    V.swap(Vn);
    g = env.g;
    for (int j = 0; j < m; ++j) {
      const size_t sj = static_cast<size_t>(j);
      om[sj] = f[sj] - g[sj];
      xi[sj] = env.g_prime[sj];
    }
    out.residual_history.push_back(res);
    if (res < opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "fan_curve: Picard stalled after " << sweeps
        << " sweeps, last residual " << res;
    fail(ErrorKind::NoConvergence, msg.str());
  }
  out.V = std::move(V);
  out.omega = std::move(om);
  out.xi = std::move(xi);
  out.f_vals = std::move(f);
  out.g_vals = std::move(g);
  out.iterations = sweeps;
  out.residual = res;
  return out;
}

// ---------------------------------------------------------------------------
// Classification.

std::vector<FanPiece> classify(const WaveFanCurve& curve, double contact_tol) {
  const size_t m = curve.tau.size();
  if (m == 0 || curve.omega.size() != m || curve.xi.size() != m ||
      curve.g_vals.size() != m || curve.f_vals.size() != m)
    fail(ErrorKind::InvalidParams, "classify: curve arrays empty or inconsistent");

  std::vector<FanPiece> pieces;
  if (m == 1) {
    FanPiece p;
    p.type = PieceType::rarefaction;
    p.tau_lo = p.tau_hi = curve.tau[0];
    p.speed_lo = p.speed_hi = curve.xi[0];
    pieces.push_back(p);
    return pieces;
  }

  double max_w = 0.0, max_f = 0.0;
  for (size_t j = 0; j < m; ++j) {
    max_w = std::max(max_w, std::abs(curve.omega[j]));
    max_f = std::max(max_f, std::abs(curve.f_vals[j]));
  }
  const double tol =
      contact_tol > 0.0 ? contact_tol : std::max(1e-6 * max_w, 1e-13 * max_f);

  std::vector<char> contact(m, 0);
  for (size_t j = 0; j < m; ++j) contact[j] = std::abs(curve.omega[j]) <= tol;
  contact[0] = contact[m - 1] = 1;  // exact zeros on converged curves; anchor the walk

  auto sorted = [](double a, double b) { return a <= b ? std::pair(a, b) : std::pair(b, a); };
  size_t j = 0;
  while (j < m) {
    size_t e = j;
    if (contact[j]) {
      while (e + 1 < m && contact[e + 1]) ++e;
      if (e > j) {  // an isolated contact node is just a piece boundary
        FanPiece p;
        p.type = PieceType::rarefaction;
        std::tie(p.tau_lo, p.tau_hi) = sorted(curve.tau[j], curve.tau[e]);
        double lo = curve.xi[j], hi = curve.xi[j];
        for (size_t q = j; q <= e; ++q) {
          lo = std::min(lo, curve.xi[q]);
          hi = std::max(hi, curve.xi[q]);
        }
        p.speed_lo = lo;
        p.speed_hi = hi;
        pieces.push_back(p);
      }
    } else {
      while (e + 1 < m && !contact[e + 1]) ++e;
      const size_t a = j - 1, b = e + 1;  // bracketing contact nodes
      FanPiece p;
      p.type = PieceType::shock;
      std::tie(p.tau_lo, p.tau_hi) = sorted(curve.tau[a], curve.tau[b]);
      const double speed =
          (curve.g_vals[b] - curve.g_vals[a]) / (curve.tau[b] - curve.tau[a]);
      p.speed_lo = p.speed_hi = speed;
      pieces.push_back(p);
    }
    j = e + 1;
  }
  return pieces;
}

// ---------------------------------------------------------------------------
// Classical Lax oracle.

LaxWave lax_oracle(const HyperbolicModel& model, int family, double strength,
                   const Vector& U_plus, const LaxOptions& opts) {
  const int n = model.n;
  if (!model.has_flux())
    fail(ErrorKind::InvalidParams, model.name + ": classical oracle needs a flux");
  if (family < 1 || family > n)
    fail(ErrorKind::InvalidParams, "lax_oracle: family must be in 1.." + std::to_string(n));
  if (!std::isfinite(strength)) fail(ErrorKind::InvalidParams, "lax_oracle: non-finite strength");
  if (U_plus.size() != n || !model.domain.contains(U_plus))
    fail(ErrorKind::OutOfDomain, "lax_oracle: base state outside the model box");
  const double s_max = opts.s_max > 0.0 ? opts.s_max : 0.05 * model.domain.radius;
  if (std::abs(strength) > s_max * (1.0 + 1e-12))
    fail(ErrorKind::RangeExceeded,
         "lax_oracle: |strength| exceeds the cap " + std::to_string(s_max));

  const SpectralData base = eigendecompose(model.matrix_at(U_plus));
  const int i0 = family - 1;

  LaxWave out;
  if (strength == 0.0) {
    out.endpoint = U_plus;
    out.speed_left = out.speed_right = base.lambda[i0];
    out.is_shock = false;
    return out;
  }

  // grad lambda_i . R_i by a central difference along the local eigenvector.
  const double step = 1e-6 * model.domain.radius;
  auto gnl_at = [&](const Vector& P) {
    const Vector dir = eigendecompose(model.matrix_at(P, 1.1), base.R).R.col(i0);
    const double lp = eigendecompose(model.matrix_at(P + step * dir, 1.1), base.R).lambda[i0];
    const double lm = eigendecompose(model.matrix_at(P - step * dir, 1.1), base.R).lambda[i0];
    return (lp - lm) / (2.0 * step);
  };
  const double d0 = gnl_at(U_plus);
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const Vector P = U_plus + (t * strength) * base.R.col(i0);
    if (std::abs(gnl_at(P)) < opts.gnl_tol)
      fail(ErrorKind::GNLViolation,
           "lax_oracle: grad lambda_i . R_i vanishes along the probe segment");
  }

  if (strength * d0 < 0.0) {
    // Rarefaction: integral curve of the oriented eigenvector field.
    OdeOptions oo;
    oo.rtol = opts.ode_rtol;
    oo.atol = 1e-14;
    oo.inside = [&](const Vector& U) { return model.domain.contains(U, 1.05); };
    auto rhs = [&](double, const Vector& U) -> Vector {
      return eigendecompose(model.matrix_at(U, 1.1), base.R).R.col(i0);
    };
    const OdeTrajectory traj = integrate(rhs, U_plus, 0.0, strength, oo);
    out.endpoint = traj.y.back();
    const double lam_end =
        eigendecompose(model.matrix_at(out.endpoint, 1.1), base.R).lambda[i0];
    out.speed_left = std::min(lam_end, base.lambda[i0]);
    out.speed_right = std::max(lam_end, base.lambda[i0]);
    out.is_shock = false;
    return out;
  }

  // Shock: Newton on F(V) - F(U+) = sigma (V - U+) with |V - U+|^2 = s^2.
  const Vector F0 = model.flux_at(U_plus);
  const double res_scale = std::max(1.0, F0.lpNorm<Eigen::Infinity>());
  Vector V = U_plus + strength * base.R.col(i0);
  double sigma = base.lambda[i0] + 0.5 * strength * d0;
  bool done = false;
  for (int it = 0; it < opts.max_iter && !done; ++it) {
    Vector rF;
    Matrix AV;
    try {
      rF = model.flux_at(V, 1.1) - F0 - sigma * (V - U_plus);
      AV = model.matrix_at(V, 1.1);
    } catch (const LabError& e) {
      if (e.kind() == ErrorKind::OutOfDomain)
        fail(ErrorKind::RootFindFailure, "lax_oracle: Hugoniot iteration left the box");
      throw;
    }
    const double rc = (V - U_plus).squaredNorm() - strength * strength;
    const double res = std::max(rF.lpNorm<Eigen::Infinity>(), std::abs(rc));
    if (res <= opts.newton_tol * res_scale) {
      done = true;
      break;
    }
    Matrix J = Matrix::Zero(n + 1, n + 1);
    J.topLeftCorner(n, n) = AV - sigma * Matrix::Identity(n, n);
    J.topRightCorner(n, 1) = -(V - U_plus);
    J.bottomLeftCorner(1, n) = 2.0 * (V - U_plus).transpose();
    Vector r(n + 1);
    r.head(n) = rF;
    r(n) = rc;
    const Vector delta = J.fullPivLu().solve(r);
    if (!delta.allFinite())
      fail(ErrorKind::RootFindFailure, "lax_oracle: singular Hugoniot Jacobian");
    V -= delta.head(n);
    sigma -= delta(n);
  }
  if (!done)
    fail(ErrorKind::RootFindFailure,
         "lax_oracle: Hugoniot Newton did not converge in " +
             std::to_string(opts.max_iter) + " iterations");

  // Lax admissibility: left characteristic above the shock, right below.
  const double lam_left = eigendecompose(model.matrix_at(V, 1.1), base.R).lambda[i0];
  const double slack = 1e-9 * (1.0 + std::abs(sigma));
  if (!(lam_left >= sigma - slack && sigma >= base.lambda[i0] - slack))
    fail(ErrorKind::RootFindFailure,
         "lax_oracle: converged Hugoniot root is not Lax-admissible");

  out.endpoint = V;
  out.speed_left = out.speed_right = sigma;
  out.is_shock = true;
  return out;
}

}  // namespace brlab
