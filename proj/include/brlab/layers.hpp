#pragma once

#include <vector>

#include "brlab/model.hpp"
#include "brlab/types.hpp"

namespace brlab {

// Stable eigenpairs of A(U_bar): lambda ascending (all < 0), R the matching
// unit eigenvector columns (n x k).
struct StableBasis {
  std::vector<double> lambda;
  Matrix R;
  int k() const { return static_cast<int>(lambda.size()); }
};

StableBasis stable_basis(const HyperbolicModel& model, const Vector& U_bar);

struct LayerOptions {
  double horizon = -1.0;       // < 0: use 40 / gap_c; must be >= 10 / gap_c
  double s_max_factor = 0.05;  // seed cap |S|_inf <= s_max_factor * radius
  double rtol = 1e-11;
  double max_step = -1.0;      // < 0: horizon / 400
};

// One boundary-layer trajectory on the stable manifold of V' = W, W' = A(V)W
// about (U_bar, 0), sampled on an ascending zeta grid from 0 to the horizon.
struct LayerTrajectory {
  std::vector<double> zeta;
  std::vector<Vector> V;
  std::vector<Vector> W;  // = V' at the nodes (Hermite slopes)
  Vector U_bar;
  Vector S;  // chart coordinates of this trajectory
  double horizon = 0.0;
  const Vector& boundary_value() const { return V.front(); }
};

// Traces the manifold trajectory with chart coordinates S by integrating
// backward from a seed at the horizon. The seed is placed so that the chart is
// tangent to the stable eigenbasis at S = 0:
//   phi_s(S) = U_bar + sum_i S_i R_i + O(|S|^2),  phi_s(0) = U_bar exactly.
// For a constant-matrix model the trajectory is exactly
//   V(zeta) = U_bar + sum_i S_i e^{lambda_i zeta} R_i.
LayerTrajectory layer_from_seed(const HyperbolicModel& model, const Vector& U_bar,
                                const Vector& S, const LayerOptions& opts = {});
// Same, over a caller-supplied stable basis (e.g. with flipped eigenvector
// signs); the traced manifold is identical, only coordinates relabel.
LayerTrajectory layer_from_seed(const HyperbolicModel& model, const Vector& U_bar,
                                const StableBasis& basis, const Vector& S,
                                const LayerOptions& opts = {});

// Chart map: boundary value V(0) of the trajectory with coordinates S.
Vector phi_s(const HyperbolicModel& model, const Vector& U_bar, const Vector& S,
             const LayerOptions& opts = {});

// Cubic Hermite evaluation of V(zeta) from the stored (V, W) nodes.
Vector layer_eval(const LayerTrajectory& traj, double zeta);

struct MembershipResult {
  bool in_manifold = false;
  Vector S;
  double residual = 0.0;  // |phi_s(S) - U_b|_inf at the returned S
  int iterations = 0;
};

// Least-squares inversion of phi_s by damped Gauss-Newton: finds the manifold
// point nearest U_b. in_manifold iff the final residual is <= tol; an
// off-manifold U_b is an answer (in_manifold = false), not an error.
MembershipResult membership(const HyperbolicModel& model, const Vector& U_bar,
                            const Vector& U_b, double tol = 1e-6,
                            const LayerOptions& opts = {});
MembershipResult membership(const HyperbolicModel& model, const Vector& U_bar,
                            const StableBasis& basis, const Vector& U_b,
                            double tol = 1e-6, const LayerOptions& opts = {});

struct DecayReport {
  double fitted_rate = 0.0;        // LS slope of log|W|_2 over the tail half
  double weighted_sup_tail = 0.0;  // sup over the tail of |W|_2 e^{c zeta/4}
  double c = 0.0;
  int tail_nodes = 0;
};

// Tail decay diagnostics; requires >= 20 nodes past zeta = 2/c. A trajectory
// with identically zero W reports weighted_sup_tail = 0 and fitted_rate -inf.
DecayReport decay_report(const LayerTrajectory& traj, double c);

}  // namespace brlab
