// Wave-fan curves: one-parameter families of states reachable from a base
// state by a single-family fan (shock / rarefaction / composite).  Built by
// Picard iteration on the envelope fixed point
//     f(tau) = integral of lambda_hat,   g = envelope(f),
//     xi = g',  omega = f - g,           V(tau) = U_plus + integral of R_hat,
// with pluggable closure fields; plus a classical Lax/Rankine-Hugoniot
// oracle for conservative genuinely nonlinear fields.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "brlab/model.hpp"
#include "brlab/spectral.hpp"
#include "brlab/types.hpp"

namespace brlab {

// ---------------------------------------------------------------------------
// Envelopes of sampled functions.

enum class EnvelopeSense { concave, convex };

struct Envelope {
  std::vector<double> g;        // envelope values; g[v] == f[v] bitwise at hull vertices
  std::vector<double> g_prime;  // slopes w.r.t. the physical abscissa (spacing h)
  std::vector<int> hull;        // vertex indices, ascending, always includes 0 and m-1
};

// Orientation determinant of ((aj,af),(bj,bf),(cj,cf)) with integer
// abscissas; > 0 when, for aj < bj < cj, b lies strictly below the chord
// a--c.  The hull and any brute-force cross-check must share this exact
// floating-point expression.
double hull_orient(int aj, double af, int bj, double bf, int cj, double cf);

// Value at index i of the chord through (a, fa) and (b, fb); the one
// interpolation formula used everywhere so envelopes are reproducible.
double chord_value(int a, double fa, int b, double fb, int i);

// Least concave majorant (or greatest convex minorant) of f sampled on a
// uniform grid with signed spacing h.  Single-pass monotone chain over the
// integer index space; pops use strict inequalities, so vertices that are
// exactly collinear under hull_orient are kept.  g_prime is constant on
// chord interiors, the mean of the adjacent chord slopes at vertices, and
// one-sided extrapolated at the ends (exact for quadratic data).
Envelope envelope(const std::vector<double>& f, EnvelopeSense sense, double h = 1.0);

// ---------------------------------------------------------------------------
// Wave-fan curves.

// Closure fields feeding the fixed point: R_hat integrates to the state
// curve, lambda_hat to f.  Contract: at (U_plus, 0, lambda_i(U_plus)) they
// reduce to R_i(U_plus) and lambda_i(U_plus).
struct ClosureFields {
  std::function<Vector(const Vector& V, double omega, double xi)> R_hat;
  std::function<double(const Vector& V, double omega, double xi)> lambda_hat;
  std::string order_tag = "leading_order";
};

// The default closure: R_hat(V,.,.) = R_i(V), lambda_hat(V,.,.) = lambda_i(V),
// eigenvectors oriented against the frame at `anchor` so the field is
// continuous over the whole box.  family is 1-based in ascending eigenvalue
// order.
ClosureFields leading_order_closure(const HyperbolicModel& model, int family,
                                    const Vector& anchor);

struct FanOptions {
  int m = 1024;          // grid nodes on [0, s] (>= 2)
  double tol = 1e-10;    // sup-norm change across one Picard sweep
  int max_iter = 80;
  double s_max = -1.0;   // strength cap; <= 0 requests 0.05 * domain radius
};

struct WaveFanCurve {
  int family = 0;       // 1-based
  double strength = 0.0;
  // Node j sits at tau[j] = j * strength/(m-1): tau[0] = 0 is the base state
  // U_plus, tau.back() = strength.  For negative strengths tau descends.
  std::vector<double> tau;
  std::vector<Vector> V;
  std::vector<double> omega;   // f - g; <= 0 on concave curves, >= 0 on convex
  std::vector<double> xi;      // fan speed dg/dtau
  std::vector<double> f_vals;
  std::vector<double> g_vals;
  int iterations = 0;
  double residual = 0.0;                  // last sup-norm change
  std::vector<double> residual_history;   // change after each sweep
  const Vector& endpoint() const { return V.back(); }
};

// Builds the family-i curve of strength s from U_plus.  Positive strengths
// use the concave envelope, negative ones the convex envelope; with the
// leading-order closure the state curve is the integral curve of R_i and
// endpoints match classical Lax curves to O(|s|^3).
WaveFanCurve fan_curve(const HyperbolicModel& model, const ClosureFields& closure,
                       int family, double strength, const Vector& U_plus,
                       const FanOptions& opts = {});

// ---------------------------------------------------------------------------
// Classification.

enum class PieceType { shock, rarefaction };

struct FanPiece {
  PieceType type = PieceType::rarefaction;
  double tau_lo = 0.0, tau_hi = 0.0;    // sorted
  double speed_lo = 0.0, speed_hi = 0.0;  // sorted; equal for shocks
};

// Partitions the curve by the contact set {|omega| <= contact_tol}: maximal
// non-contact runs become shock pieces (single chord speed), contact runs of
// at least two nodes become rarefaction pieces (speed interval [min xi,
// max xi]).  contact_tol <= 0 requests the automatic choice
// max(1e-6 * max|omega|, 1e-13 * max|f|), which absorbs quadrature rounding
// without swallowing genuine chords.  Pieces come in node order (fastest
// first, since curves start at the downstream state).
std::vector<FanPiece> classify(const WaveFanCurve& curve, double contact_tol = -1.0);

// ---------------------------------------------------------------------------
// Classical oracle for conservative genuinely nonlinear fields.

struct LaxWave {
  Vector endpoint;
  double speed_left = 0.0;   // for rarefactions: characteristic speed at the endpoint side
  double speed_right = 0.0;  // equal to speed_left for shocks
  bool is_shock = false;
};

struct LaxOptions {
  double ode_rtol = 1e-12;   // rarefaction integral-curve tolerance
  double newton_tol = 1e-13; // Hugoniot residual sup-norm
  int max_iter = 50;
  double gnl_tol = 1e-8;     // |grad lambda_i . R_i| below this is a violation
  double s_max = -1.0;       // <= 0 requests 0.05 * domain radius
};

// Classical i-wave through U_plus (taken as the downstream/right state):
// rarefaction branch integrates dV/ds = R_i(V); shock branch solves
// F(V) - F(U_plus) = sigma (V - U_plus) with the chord-length constraint
// |V - U_plus|^2 = s^2, then checks Lax admissibility
// lambda_i(V) >= sigma >= lambda_i(U_plus).  The branch is chosen by the
// sign of s * (grad lambda_i . R_i)(U_plus): negative = rarefaction.
LaxWave lax_oracle(const HyperbolicModel& model, int family, double strength,
                   const Vector& U_plus, const LaxOptions& opts = {});

}  // namespace brlab
