// Wave-fan curves: closure fields, Picard fixed point, classification, and
// agreement with classical Lax/Rankine-Hugoniot constructions.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "brlab/errors.hpp"
#include "brlab/model.hpp"
#include "brlab/spectral.hpp"
#include "brlab/wavefan.hpp"

using namespace brlab;

static Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Riemann invariant of the isentropic system (v, u) with p = v^-gamma:
// constant along family-1 (+) resp. family-2 (-) integral curves.
static double riemann_invariant(const Vector& U, double gamma, int family) {
  const double w = 2.0 * std::sqrt(gamma) / (gamma - 1.0) *
                   std::pow(U[0], -(gamma - 1.0) / 2.0);
  return family == 1 ? U[1] + w : U[1] - w;
}

static double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// shared sign/shape pins for every converged curve
static void check_curve_invariants(const WaveFanCurve& c, const Vector& U_plus) {
  REQUIRE(!c.tau.empty());
  CHECK((c.V.front() - U_plus).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(c.tau.front() == 0.0);
  CHECK(c.tau.back() == c.strength);
  CHECK(c.omega.front() == 0.0);
  CHECK(c.omega.back() == 0.0);
  for (size_t j = 0; j < c.omega.size(); ++j) {
    if (c.strength > 0.0) CHECK(c.omega[j] <= 1e-14);   // f below its concave majorant
    if (c.strength < 0.0) CHECK(c.omega[j] >= -1e-14);  // f above its convex minorant
  }
  for (size_t j = 1; j < c.xi.size(); ++j)
    CHECK(c.xi[j] <= c.xi[j - 1] + 1e-10);  // fastest wave sits at the base state
}

TEST_CASE("leading-order closure reduces to the spectral pair at the anchor") {
  HyperbolicModel m = builtin_model("p_system");
  const Vector U = vec2(1.0, 0.0);
  const SpectralData sd = eigendecompose(m.matrix_at(U));
  for (int fam : {1, 2}) {
    ClosureFields cf = leading_order_closure(m, fam, U);
    CHECK(cf.order_tag == "leading_order");
    const Vector R = cf.R_hat(U, 0.0, sd.lambda[fam - 1]);
    CHECK((R - sd.R.col(fam - 1)).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(std::abs(cf.lambda_hat(U, 0.0, sd.lambda[fam - 1]) - sd.lambda[fam - 1]) < 1e-12);
  }
  CHECK_THROWS_AS(leading_order_closure(m, 3, U), LabError);
  CHECK_THROWS_AS(leading_order_closure(m, 2, vec2(2.0, 0.0)), LabError);
}

TEST_CASE("zero strength gives the single-node curve at the base state") {
  HyperbolicModel m = builtin_model("p_system");
  const Vector U = vec2(1.05, -0.02);
  ClosureFields cf = leading_order_closure(m, 2, U);
  WaveFanCurve c = fan_curve(m, cf, 2, 0.0, U);
  REQUIRE(c.tau.size() == 1);
  CHECK((c.V[0] - U).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(c.omega[0] == 0.0);
  const double lam2 = eigendecompose(m.matrix_at(U)).lambda[1];
  CHECK(std::abs(c.xi[0] - lam2) < 1e-14);

  auto pieces = classify(c);
  REQUIRE(pieces.size() == 1);
  CHECK(pieces[0].type == PieceType::rarefaction);
  CHECK(pieces[0].tau_lo == pieces[0].tau_hi);
  CHECK(pieces[0].speed_lo == pieces[0].speed_hi);
}

TEST_CASE("linear model: affine f makes the whole curve a contact fan") {
  HyperbolicModel m = builtin_model("linear");  // diag(-1, 2)
  const Vector U = vec2(0.03, -0.02);
  ClosureFields cf = leading_order_closure(m, 2, U);
  WaveFanCurve c = fan_curve(m, cf, 2, 0.01, U);
  check_curve_invariants(c, U);
  CHECK(c.iterations <= 3);
  for (size_t j = 0; j < c.tau.size(); ++j) {
    CHECK(std::abs(c.omega[j]) <= 1e-15);
    CHECK(std::abs(c.xi[j] - 2.0) <= 1e-12);
    const Vector expect = U + c.tau[j] * Vector(vec2(0.0, 1.0));
    CHECK((c.V[j] - expect).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  CHECK((c.endpoint() - (U + 0.01 * Vector(vec2(0.0, 1.0)))).lpNorm<Eigen::Infinity>() <= 1e-12);

  auto pieces = classify(c);
  REQUIRE(pieces.size() == 1);
  CHECK(pieces[0].type == PieceType::rarefaction);
  CHECK(std::abs(pieces[0].tau_lo - 0.0) < 1e-15);
  CHECK(std::abs(pieces[0].tau_hi - 0.01) < 1e-15);
  CHECK(pieces[0].speed_hi - pieces[0].speed_lo <= 1e-12);
}

TEST_CASE("p-system family-2 rarefaction matches the classical oracle") {
  HyperbolicModel m = builtin_model("p_system");  // gamma = 2
  const Vector U = vec2(1.0, 0.0);
  ClosureFields cf = leading_order_closure(m, 2, U);
  FanOptions fo;
  fo.s_max = 0.1;
  LaxOptions lo;
  lo.s_max = 0.1;

  LaxWave lax = lax_oracle(m, 2, 0.04, U, lo);
  CHECK(!lax.is_shock);
  WaveFanCurve c = fan_curve(m, cf, 2, 0.04, U, fo);
  check_curve_invariants(c, U);

  CHECK((c.endpoint() - lax.endpoint).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(std::abs(riemann_invariant(c.endpoint(), 2.0, 2) - riemann_invariant(U, 2.0, 2)) <= 1e-9);
  for (double w : c.omega) CHECK(std::abs(w) <= 1e-14);  // pure contact: g == f

  auto pieces = classify(c);
  REQUIRE(pieces.size() == 1);
  CHECK(pieces[0].type == PieceType::rarefaction);
  CHECK(std::abs(pieces[0].speed_lo - lax.speed_left) <= 1e-7);
  CHECK(std::abs(pieces[0].speed_hi - lax.speed_right) <= 1e-7);
  CHECK(lax.speed_right > lax.speed_left);  // genuine fan, not a contact
}

TEST_CASE("p-system family-2 shock: Hugoniot root, Lax inequalities, chord speed") {
  HyperbolicModel m = builtin_model("p_system");
  const double gamma = 2.0;
  const Vector U = vec2(1.0, 0.0);
  ClosureFields cf = leading_order_closure(m, 2, U);
  FanOptions fo;
  fo.s_max = 0.1;
  LaxOptions lo;
  lo.s_max = 0.1;
  const double s = -0.04;

  LaxWave lax = lax_oracle(m, 2, s, U, lo);
  CHECK(lax.is_shock);
  const double sigma = lax.speed_left;
  const Vector V = lax.endpoint;
  // scalar Rankine-Hugoniot identities for (v, u) with flux (-u, p(v))
  const double dv = V[0] - U[0], du = V[1] - U[1];
  const double dp = std::pow(V[0], -gamma) - std::pow(U[0], -gamma);
  CHECK(std::abs(sigma * sigma + dp / dv) <= 1e-12);
  CHECK(std::abs(-du - sigma * dv) <= 1e-12);
  const double lam_left = eigendecompose(m.matrix_at(V)).lambda[1];
  const double lam_right = eigendecompose(m.matrix_at(U)).lambda[1];
  CHECK(lam_left > sigma);
  CHECK(sigma > lam_right);

  WaveFanCurve c = fan_curve(m, cf, 2, s, U, fo);
  check_curve_invariants(c, U);
  double max_w = 0.0;
  for (double w : c.omega) max_w = std::max(max_w, w);
  CHECK(max_w >= 1e-6);  // genuinely a chord, not a contact fan

  auto pieces = classify(c);
  REQUIRE(pieces.size() == 1);
  CHECK(pieces[0].type == PieceType::shock);
  CHECK(std::abs(pieces[0].tau_lo - s) <= 1e-12);
  CHECK(std::abs(pieces[0].tau_hi - 0.0) <= 1e-12);
  CHECK(pieces[0].speed_lo == pieces[0].speed_hi);
  CHECK(std::abs(pieces[0].speed_lo - sigma) <= 5e-3);  // chord speed is O(s^2) off

  const double gap = (c.endpoint() - lax.endpoint).lpNorm<Eigen::Infinity>();
  CHECK(gap <= 1e-4);  // leading-order curve, cubic defect
  CHECK(gap >= 1e-9);  // ... but a real one: the engine is not on the Hugoniot
}

TEST_CASE("shock-side endpoint gap shrinks cubically in the strength") {
  HyperbolicModel m = builtin_model("p_system");
  const Vector U = vec2(1.0, 0.0);
  ClosureFields cf = leading_order_closure(m, 2, U);
  FanOptions fo;
  fo.s_max = 0.1;
  fo.m = 2048;
  LaxOptions lo;
  lo.s_max = 0.1;

  std::vector<double> lx, ly;
  for (double s : {0.08, 0.04, 0.02, 0.01}) {
    LaxWave lax = lax_oracle(m, 2, -s, U, lo);
    WaveFanCurve c = fan_curve(m, cf, 2, -s, U, fo);
    const double err = (c.endpoint() - lax.endpoint).lpNorm<Eigen::Infinity>();
    CHECK(err > 1e-10);
    lx.push_back(std::log(s));
    ly.push_back(std::log(err));
  }
  const double slope = ls_slope(lx, ly);
  CHECK(slope >= 2.5);
  CHECK(slope <= 3.5);
}

TEST_CASE("rarefaction side tracks the integral curve to quadrature accuracy") {
  HyperbolicModel m = builtin_model("p_system");
  const Vector U = vec2(1.0, 0.0);
  FanOptions fo;
  fo.s_max = 0.1;
  LaxOptions lo;
  lo.s_max = 0.1;

  ClosureFields cf2 = leading_order_closure(m, 2, U);
  for (double s : {0.08, 0.04, 0.02, 0.01}) {
    LaxWave lax = lax_oracle(m, 2, s, U, lo);
    WaveFanCurve c = fan_curve(m, cf2, 2, s, U, fo);
    CHECK((c.endpoint() - lax.endpoint).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(std::abs(riemann_invariant(c.endpoint(), 2.0, 2) -
                   riemann_invariant(U, 2.0, 2)) <= 1e-9);
  }

  // family 1 rarefies on the other side of zero strength
  ClosureFields cf1 = leading_order_closure(m, 1, U);
  LaxWave lax1 = lax_oracle(m, 1, -0.04, U, lo);
  CHECK(!lax1.is_shock);
  WaveFanCurve c1 = fan_curve(m, cf1, 1, -0.04, U, fo);
  check_curve_invariants(c1, U);
  CHECK((c1.endpoint() - lax1.endpoint).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(std::abs(riemann_invariant(c1.endpoint(), 2.0, 1) -
                 riemann_invariant(U, 2.0, 1)) <= 1e-9);
}

TEST_CASE("endpoint tangency residual quarters when the strength halves") {
  HyperbolicModel m = builtin_model("p_system");
  const Vector U = vec2(1.0, 0.0);
  const SpectralData sd = eigendecompose(m.matrix_at(U));
  FanOptions fo;
  fo.s_max = 0.1;
  for (int fam : {1, 2}) {
    ClosureFields cf = leading_order_closure(m, fam, U);
    auto resid = [&](double s) {
      WaveFanCurve c = fan_curve(m, cf, fam, s, U, fo);
      return (c.endpoint() - U - s * sd.R.col(fam - 1)).lpNorm<Eigen::Infinity>();
    };
    const double r2 = resid(0.02), r1 = resid(0.01);
    CHECK(r1 > 1e-9);
    CHECK(r2 / r1 >= 3.5);
    CHECK(r2 / r1 <= 4.5);
  }
}

TEST_CASE("Picard contraction is geometric on the built-in models") {
  auto ratios_ok = [](const WaveFanCurve& c) {
    for (size_t k = 1; k < c.residual_history.size(); ++k) {
      if (c.residual_history[k - 1] < 1e-9) break;
      CHECK(c.residual_history[k] / c.residual_history[k - 1] <= 0.8);
    }
    CHECK(c.iterations < 40);
  };
  HyperbolicModel ps = builtin_model("p_system");
  const Vector Ups = vec2(1.0, 0.0);
  FanOptions fo;
  fo.s_max = 0.1;
  ratios_ok(fan_curve(ps, leading_order_closure(ps, 2, Ups), 2, 0.04, Ups, fo));
  ratios_ok(fan_curve(ps, leading_order_closure(ps, 2, Ups), 2, -0.04, Ups, fo));

  HyperbolicModel nc = builtin_model("noncons_demo");
  const Vector Unc = vec2(0.02, -0.03);
  ratios_ok(fan_curve(nc, leading_order_closure(nc, 2, Unc), 2, 0.01, Unc));
  ratios_ok(fan_curve(nc, leading_order_closure(nc, 1, Unc), 1, -0.01, Unc));
}

TEST_CASE("non-conservative model runs on the envelope engine alone") {
  HyperbolicModel nc = builtin_model("noncons_demo");
  const Vector U = vec2(0.02, -0.03);
  const SpectralData sd = eigendecompose(nc.matrix_at(U));
  for (int fam : {1, 2}) {
    for (double s : {0.01, -0.01}) {
      WaveFanCurve c = fan_curve(nc, leading_order_closure(nc, fam, U), fam, s, U);
      check_curve_invariants(c, U);
      const double tang = (c.endpoint() - U - s * sd.R.col(fam - 1)).lpNorm<Eigen::Infinity>();
      CHECK(tang <= 1e-4);  // O(s^2) seed truncation only
    }
  }
  CHECK_THROWS_AS(lax_oracle(nc, 2, 0.01, U), LabError);
  try {
    lax_oracle(nc, 2, 0.01, U);
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::InvalidParams);  // no flux to build the oracle from
  }
}

// isentropic-style model whose pressure has an inflection inside the box, so
// the family-2 eigenvalue is non-monotone along its own curve
static HyperbolicModel inflected_pressure_model() {
  auto p = [](double v) { return std::pow(v, -2.0) - 4.0 * std::pow(v - 1.0, 3.0); };
  auto dp = [](double v) { return -2.0 * std::pow(v, -3.0) - 12.0 * (v - 1.0) * (v - 1.0); };
  ModelSpec spec;
  spec.name = "inflected_p";
  spec.n = 2;
  spec.domain.center = vec2(1.1, -0.1);
  spec.domain.radius = 0.3;
  spec.matrix_fn = [dp](const Vector& U) {
    Matrix A(2, 2);
    A << 0.0, -1.0, dp(U[0]), 0.0;
    return A;
  };
  spec.flux_fn = [p](const Vector& U) {
    Vector F(2);
    F << -U[1], p(U[0]);
    return F;
  };
  return make_model(spec);
}

TEST_CASE("pressure inflection produces a composite rarefaction+shock fan") {
  HyperbolicModel m = inflected_pressure_model();
  const Vector U = vec2(1.0, 0.0);
  ClosureFields cf = leading_order_closure(m, 2, U);
  FanOptions fo;
  fo.s_max = 0.3;
  WaveFanCurve c = fan_curve(m, cf, 2, 0.28, U, fo);
  check_curve_invariants(c, U);

  auto pieces = classify(c);
  REQUIRE(pieces.size() >= 2);
  int shocks = 0, fans = 0;
  for (const auto& p : pieces) (p.type == PieceType::shock ? shocks : fans)++;
  CHECK(shocks >= 1);
  CHECK(fans >= 1);
  CHECK(pieces.front().type == PieceType::rarefaction);  // eigenvalue falls first
  for (size_t q = 1; q < pieces.size(); ++q)
    CHECK(pieces[q].speed_hi <= pieces[q - 1].speed_lo + 1e-9);  // ordered, no overlap
  for (const auto& p : pieces)
    if (p.type == PieceType::shock) CHECK(p.tau_hi - p.tau_lo >= 0.02);

  // the classical oracle refuses the same model near the inflection
  LaxOptions lo;
  lo.s_max = 0.3;
  lo.gnl_tol = 0.02;
  try {
    lax_oracle(m, 2, 0.005, vec2(1.1453, -0.1), lo);
    CHECK(false);
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::GNLViolation);
  }
}

TEST_CASE("precondition and failure taxonomy") {
  HyperbolicModel m = builtin_model("p_system");
  const Vector U = vec2(1.0, 0.0);
  ClosureFields cf = leading_order_closure(m, 2, U);

  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const LabError& e) {
      return e.kind();
    }
    return ErrorKind::IOError;  // sentinel: "did not throw"
  };

  // strength cap: default is 0.05 * radius = 0.0125
  CHECK(kind_of([&] { fan_curve(m, cf, 2, 0.02, U); }) == ErrorKind::RangeExceeded);
  CHECK(kind_of([&] { lax_oracle(m, 2, 0.02, U); }) == ErrorKind::RangeExceeded);
  CHECK(kind_of([&] { fan_curve(m, cf, 0, 0.01, U); }) == ErrorKind::InvalidParams);
  CHECK(kind_of([&] { fan_curve(m, cf, 3, 0.01, U); }) == ErrorKind::InvalidParams);
  CHECK(kind_of([&] { fan_curve(m, cf, 2, 0.01, vec2(1.4, 0.0)); }) == ErrorKind::OutOfDomain);
  FanOptions bad;
  bad.m = 1;
  CHECK(kind_of([&] { fan_curve(m, cf, 2, 0.01, U, bad); }) == ErrorKind::InvalidParams);

  FanOptions one_sweep;
  one_sweep.s_max = 0.1;
  one_sweep.max_iter = 1;
  CHECK(kind_of([&] { fan_curve(m, cf, 2, 0.04, U, one_sweep); }) ==
        ErrorKind::NoConvergence);

  // a curve aimed at the box corner escapes
  FanOptions wide;
  wide.s_max = 0.12;
  ClosureFields cf1 = leading_order_closure(m, 1, vec2(1.2, 0.2));
  CHECK(kind_of([&] { fan_curve(m, cf1, 1, 0.1, vec2(1.2, 0.2), wide); }) ==
        ErrorKind::OutOfDomain);
}
