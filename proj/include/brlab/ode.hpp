#pragma once

#include <functional>
#include <vector>

#include "brlab/types.hpp"

namespace brlab {

// Adaptive Dormand-Prince 5(4) with per-component error scaling.
// Integrates y' = f(t, y) from t0 to t1; t1 < t0 integrates backward.
struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-14;    // folded into the default scale; ignored if `scale` is set
  double max_step = 0.0;  // absolute cap on |h|; 0 = no cap
  long max_steps = 2000000;
  // Per-component error scales; error is measured as max_i |e_i| / (rtol * scale_i).
  // Default: scale_i = atol/rtol + |y_i|.
  std::function<Vector(const Vector&)> scale;
  // Domain guard checked after every accepted step; returning false aborts
  // with IntegrationEscape. Empty = unguarded.
  std::function<bool(const Vector&)> inside;
};

// Accepted nodes in integration order (t strictly monotone, first = t0, last = t1).
// Derivatives f(t_i, y_i) are recorded so trajectories can be re-evaluated with
// cubic Hermite interpolation without calling f again.
struct OdeTrajectory {
  std::vector<double> t;
  std::vector<Vector> y;
  std::vector<Vector> dy;
  long steps_accepted = 0;
  long steps_rejected = 0;
};

OdeTrajectory integrate(const std::function<Vector(double, const Vector&)>& f,
                        const Vector& y0, double t0, double t1,
                        const OdeOptions& opts = {});

}  // namespace brlab
