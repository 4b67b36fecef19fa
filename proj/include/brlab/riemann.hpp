// Boundary Riemann solver: couples the boundary-layer chart with the
// outgoing wave-fan curves.  The data map is
//   F(S, s) = phi_S( T_{k+1}(s_{k+1}; ... T_n(s_n; U_0) ... ) ),
// innermost the fastest wave curve anchored at the far-field state U_0,
// outermost the layer chart; solving F(S, s) = U_b yields the fan trace,
// the outgoing waves, and the layer coordinates.  A small driver compares
// the resulting fan against directly computed viscous profiles.
#pragma once

#include <utility>
#include <vector>

#include "brlab/layers.hpp"
#include "brlab/model.hpp"
#include "brlab/selfsim.hpp"
#include "brlab/types.hpp"
#include "brlab/wavefan.hpp"

namespace brlab {

// Which engine supplies the wave-curve endpoints inside the Newton loop:
// the envelope-based fan curves (works for any model) or the classical
// shock/rarefaction construction (needs a flux and genuine nonlinearity).
enum class CurveProvider { envelope_engine, lax_oracle };

struct RiemannOptions {
  CurveProvider provider = CurveProvider::envelope_engine;
  double tol = 1e-9;        // |F(S,s) - U_b|_inf convergence target
  int max_iter = 40;
  double fd_step = -1.0;    // Jacobian step; < 0 requests 1e-6 * radius
  int fan_m = 1024;         // wave-curve resolution
  double s_cap = -1.0;      // wave-strength cap; < 0 requests 0.45 * radius
  double layer_cap = -1.0;  // chart coordinate cap; < 0 requests 0.6 * radius
};

// One outgoing family's wave group.  U_right/U_left are the intermediate
// constants of the solved chain (toward U_0 / toward the boundary); curve is
// the envelope-engine description used for piecewise evaluation, whose own
// endpoint may differ from U_left by O(|s|^3) under the lax_oracle provider.
struct FanWave {
  int family = 0;  // 1-based
  double strength = 0.0;
  Vector U_right, U_left;
  WaveFanCurve curve;
};

// A classified piece tagged with its wave; first_of_wave marks the slowest
// piece of that family (the constant state below it is U_left).
struct OrderedPiece {
  int wave = 0;
  bool first_of_wave = false;
  FanPiece piece;
};

struct FanSolution {
  Vector U_0, U_b;
  Vector S;           // layer chart coordinates (size k)
  Vector strengths;   // outgoing wave strengths, families k+1..n
  Vector trace_U_bar; // fan trace at xi = 0+
  std::vector<FanWave> waves;        // slowest family first
  std::vector<OrderedPiece> pieces;  // ascending speeds, validated disjoint
  double residual = 0.0;
  int newton_iterations = 0;
  CurveProvider provider = CurveProvider::envelope_engine;
  double layer_horizon = 0.0;  // resolved phi_s horizon, so S is comparable across runs
};

// Builds the boundary datum F(S, s) for given coordinates; the test preimage
// generator for round-trip checks and demo drivers.
Vector compose_boundary_data(const HyperbolicModel& model, const Vector& U_0,
                             const Vector& S, const Vector& strengths,
                             const RiemannOptions& opts = {});

// Damped Newton on (S, s) with a finite-difference Jacobian, initialized by
// the eigenbasis split of U_b - U_0.  Pre: both states in the box and
// |U_0 - U_b|_inf <= 0.5 * radius.  Errors: InvalidParams, OutOfDomain,
// NewtonDivergence, NoLocalSolution (converged but the fan is not an
// outgoing wave group: nonpositive or overlapping piece speeds).
FanSolution solve_boundary_riemann(const HyperbolicModel& model, const Vector& U_0,
                                   const Vector& U_b,
                                   const RiemannOptions& opts = {});

// Samples the self-similar limit at a given speed xi >= 0: the trace below
// the slowest wave, monotone inversion inside rarefactions, intermediate
// constants between waves, U_0 above the fastest wave; right-continuous at
// shocks.  Errors: InvalidParams (speed < 0 or non-finite), UnresolvedSpeed.
Vector evaluate_fan(const FanSolution& fan, double speed);

struct ComparisonRow {
  double epsilon = 0.0;
  double l1_fan_dist = 0.0;     // L1 distance to the fan on [xi_low, Xi]
  double sup_inner_dist = 0.0;  // sup over [0, Z] of |V_eps - V0|
  double weighted_tail = 0.0;   // sup over [Z/2, Z] of |dV_eps/dzeta| e^{c zeta/4}
};

struct ComparisonReport {
  FanSolution fan;
  double Xi = 0.0;
  std::vector<ComparisonRow> rows;  // one per rung, epsilon descending
};

struct CompareOptions {
  RiemannOptions riemann;
  MeshPolicy mesh;
  double Xi = -1.0;  // < 0 requests 1.25 * (largest wave speed)
  int inner_nodes = 801;
};

// For each rung: solves the viscous profile with boundary data (U_b, U_0),
// then measures (a) the outer L1 distance to the fan above xi_low =
// 3 eps |log eps|, (b) the sup distance between the rescaled inner profile
// and the layer trajectory on [0, Z_inner], (c) the weighted derivative
// tail.  Errors: ComparisonInconclusive (a rung failed or a metric is not
// finite), plus anything the fan solve itself raises.
ComparisonReport compare_limits(const HyperbolicModel& model, const Vector& U_0,
                                const Vector& U_b,
                                const std::vector<double>& eps_list,
                                double Z_inner, const CompareOptions& opts = {});

}  // namespace brlab
