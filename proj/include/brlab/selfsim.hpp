// Self-similar viscous profiles: two-point BVP solver for
//   eps * Q'' = [A(Q) - xi I] Q'   on [0, Xi],  Q(0) = U_b, Q(Xi) = U_right,
// via damped Newton on central differences over a graded mesh, plus an
// eps-continuation ladder and the inner boundary-layer rescaling.
#pragma once

#include <string>
#include <vector>

#include "brlab/model.hpp"
#include "brlab/types.hpp"

namespace brlab {

// Largest eigenvalue of A over a coarse tensor grid on the box; the domain
// endpoint Xi must sit strictly above every wave speed.
double max_wave_speed(const HyperbolicModel& model, int grid = 5);

struct MeshPolicy {
  int base_nodes = 800;            // approximate node count before refinement
  double first_cell_factor = 0.05; // first cell width = factor * eps
  double growth = 1.08;            // grading ratio away from xi = 0; <= 1 means
                                   // a uniform mesh of base_nodes cells
  double refine_fraction = 0.08;   // split cells whose state jump exceeds
                                   // fraction * total variation of the profile
  int max_refine_rounds = 6;
  int max_nodes = 40000;
  double newton_tol = 1e-9;        // scaled residual norm target
  int max_newton = 50;
};

struct ViscousProfile {
  double epsilon = 0.0;
  std::vector<double> xi;     // strictly increasing, xi.front()=0, xi.back()=Xi
  std::vector<Vector> Q;      // nodal states; Q.front()=U_b, Q.back()=U_right
  Vector U_b, U_right;
  double residual_norm = 0.0; // final scaled sup norm of the discrete residual
  int newton_iterations = 0;  // total accepted Newton steps (all mesh rounds)
  std::vector<double> damping; // accepted step lengths, for divergence forensics
};

// Solves the viscous profile equation. Requires eps > 0, both boundary states
// inside the domain box, and Xi strictly above the largest eigenvalue of A on
// the box (so every wave speed is interior). warm_start, when given, seeds
// Newton by interpolating an existing profile onto the new mesh.
// Errors: InvalidParams, OutOfDomain, NewtonDivergence (message carries the
// damping history), MeshExhausted.
ViscousProfile solve_profile(const HyperbolicModel& model, double epsilon,
                             const Vector& U_b, const Vector& U_right, double Xi,
                             const MeshPolicy& policy = {},
                             const ViscousProfile* warm_start = nullptr);

struct LadderResult {
  std::vector<ViscousProfile> profiles; // one per completed rung
  int failed_rung = -1;                 // -1 when every rung converged
  std::string failure_message;

  bool complete() const { return failed_rung < 0; }
  void throw_if_failed() const; // ContinuationFailure naming the rung
};

// Walks eps_list (strictly decreasing, neighbor ratio >= 0.5), warm-starting
// each rung from the previous profile. A failure at rung r stops the walk and
// returns the completed rungs together with the failure diagnostics.
LadderResult continuation_ladder(const HyperbolicModel& model, const Vector& U_b,
                                 const Vector& U_right, double Xi,
                                 const std::vector<double>& eps_list,
                                 const MeshPolicy& policy = {});

struct InnerProfile {
  double epsilon = 0.0;
  std::vector<double> zeta; // uniform on [0, Z]
  std::vector<Vector> V;    // V(zeta) = Q(eps * zeta); V.front() = U_b exactly
};

// Stretches the profile to boundary-layer coordinates zeta = xi / eps with a
// shape-preserving cubic interpolant on a uniform grid of >= 400 nodes.
// Errors: InvalidParams (nodes < 400, Z <= 0), RangeExceeded (eps * Z > Xi).
InnerProfile inner_rescale(const ViscousProfile& profile, double Z,
                           int nodes = 401);

// xi-extent of the region (at xi >= xi_min) where the profile's cellwise
// derivative magnitude exceeds half its maximum -- the width of the interior
// transition. Returns 0 for profiles with no variation past xi_min.
double transition_width(const ViscousProfile& profile, double xi_min);

}  // namespace brlab
