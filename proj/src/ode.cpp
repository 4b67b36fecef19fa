#include "brlab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "brlab/errors.hpp"

namespace brlab {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-minus-4th order weights for the embedded error estimate.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

OdeTrajectory integrate(const std::function<Vector(double, const Vector&)>& f,
                        const Vector& y0, double t0, double t1,
                        const OdeOptions& opts) {
  if (!(opts.rtol > 0.0)) fail(ErrorKind::InvalidParams, "ode: rtol must be positive");
  if (t1 == t0) fail(ErrorKind::InvalidParams, "ode: empty integration interval");
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double hmin = span * 1e-14;
  double hcap = opts.max_step > 0.0 ? opts.max_step : span;
  hcap = std::min(hcap, span);

  auto scale_of = [&](const Vector& y) -> Vector {
    if (opts.scale) {
      Vector s = opts.scale(y);
      if (s.size() != y.size())
        fail(ErrorKind::InvalidParams, "ode: scale callback returned wrong dimension");
      return s;
    }
    return Vector(y.array().abs() + opts.atol / opts.rtol);
  };

  OdeTrajectory tr;
  double t = t0;
  Vector y = y0;
  Vector k1 = f(t, y);
  tr.t.push_back(t);
  tr.y.push_back(y);
  tr.dy.push_back(k1);

  double h = std::min(hcap, span * 1e-3);
  // Refine the initial guess from the first derivative magnitude.
  {
    Vector sc = scale_of(y);
    double r = 0.0;
    for (int i = 0; i < y.size(); ++i) r = std::max(r, std::abs(k1[i]) / sc[i]);
    if (r > 0.0) h = std::min(h, 0.01 / r);
    h = std::max(h, hmin);
  }

  long accepted = 0, rejected = 0;
  bool last = false;
  while (!last) {
    if (accepted + rejected >= opts.max_steps)
      fail(ErrorKind::ToleranceFailure,
           "ode: step budget exhausted at t=" + std::to_string(t));
    if (std::abs(t1 - t) <= h) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * h;

    Vector k2 = f(t + c2 * hs, y + hs * (a21 * k1));
    Vector k3 = f(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    Vector k4 = f(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    Vector k5 = f(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vector k6 = f(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vector ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vector k7 = f(t + hs, ynew);  // FSAL

    Vector err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    Vector sc = scale_of(y);
    double enorm = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double si = std::max(std::abs(sc[i]), 1e-300);
      enorm = std::max(enorm, std::abs(err[i]) / (opts.rtol * si));
    }

    if (enorm <= 1.0 || h <= hmin * 1.0001) {
      t = last ? t1 : t + hs;
      y = ynew;
      k1 = k7;
      tr.t.push_back(t);
      tr.y.push_back(y);
      tr.dy.push_back(k1);
      ++accepted;
      if (opts.inside && !opts.inside(y))
        fail(ErrorKind::IntegrationEscape,
             "ode: trajectory left the admissible region at t=" + std::to_string(t));
    } else {
      ++rejected;
      last = false;
    }

    double fac = 0.9 * std::pow(std::max(enorm, 1e-10), -0.2);
    h = std::min(hcap, h * std::clamp(fac, 0.2, 5.0));
    if (h < hmin) h = hmin;
  }

  tr.steps_accepted = accepted;
  tr.steps_rejected = rejected;
  return tr;
}

}  // namespace brlab
