#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "brlab/errors.hpp"
#include "brlab/layers.hpp"
#include "brlab/riemann.hpp"
#include "brlab/spectral.hpp"

using namespace brlab;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

HyperbolicModel psys() {
  return builtin_model("p_system",
                       {{"gamma", 2.0}, {"center", {1.0, 0.0}}, {"radius", 0.3}});
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const LabError& e) {
    return e.kind();
  }
  REQUIRE_MESSAGE(false, "expected a LabError");
  return ErrorKind::InvalidParams;
}

// Diagonal field whose second eigenvalue dips below zero along the wave
// curve while staying positive at both endpoints; built raw because the
// certified factory would rightly refuse it.
HyperbolicModel dipping_model() {
  HyperbolicModel m;
  m.name = "dipping_speed";
  m.n = 2;
  m.domain.center = Vector::Zero(2);
  m.domain.radius = 0.5;
  m.gap_c = 0.25;
  m.k = 1;
  m.matrix_fn = [](const Vector& U) {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = -1.0;
    A(1, 1) = 0.3 + 10.0 * U[1] + 50.0 * U[1] * U[1];
    return A;
  };
  return m;
}

}  // namespace

TEST_CASE("linear model: the solve is the eigenbasis expansion") {
  auto lin = builtin_model("linear");  // diag(-1, 2), k = 1
  const Vector U_0 = lin.domain.center;
  const SpectralData sd = eigendecompose(lin.matrix_at(U_0));
  const double c1 = 0.06, c2 = -0.04;
  const Vector U_b = U_0 + c1 * sd.R.col(0) + c2 * sd.R.col(1);

  const FanSolution fan = solve_boundary_riemann(lin, U_0, U_b);
  REQUIRE(fan.S.size() == 1);
  REQUIRE(fan.strengths.size() == 1);
  CHECK(fan.S[0] == doctest::Approx(c1).epsilon(1e-8));
  CHECK(fan.strengths[0] == doctest::Approx(c2).epsilon(1e-8));
  CHECK(fan.residual <= 1e-9);
  CHECK(fan.newton_iterations <= 1);  // the eigen split already solves it

  const Vector trace_exact = U_0 + c2 * sd.R.col(1);
  CHECK((fan.trace_U_bar - trace_exact).lpNorm<Eigen::Infinity>() <= 1e-8);

  // One contact wave at speed 2: trace below, U_0 above, jump c2 R2.
  REQUIRE(fan.pieces.size() == 1);
  CHECK(fan.pieces[0].piece.speed_lo == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fan.pieces[0].piece.speed_hi == doctest::Approx(2.0).epsilon(1e-10));
  CHECK((evaluate_fan(fan, 1.9) - trace_exact).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((evaluate_fan(fan, 2.1) - U_0).lpNorm<Eigen::Infinity>() == 0.0);
  for (int i = 0; i < 2; ++i) CHECK(evaluate_fan(fan, 0.0)[i] == fan.trace_U_bar[i]);
}

TEST_CASE("p-system round trip recovers the planted coordinates") {
  auto m = psys();
  const Vector U_0 = m.domain.center;
  const Vector S = vec1(0.012);
  const Vector s = vec1(-0.03);

  for (CurveProvider prov : {CurveProvider::envelope_engine, CurveProvider::lax_oracle}) {
    RiemannOptions ro;
    ro.provider = prov;
    const Vector U_b = compose_boundary_data(m, U_0, S, s, ro);
    const FanSolution fan = solve_boundary_riemann(m, U_0, U_b, ro);
    CHECK(std::abs(fan.S[0] - S[0]) <= 1e-6);
    CHECK(std::abs(fan.strengths[0] - s[0]) <= 1e-6);
    CHECK(fan.residual <= 1e-9);
    CHECK(fan.newton_iterations <= 10);
    CHECK(fan.provider == prov);
    // the chain states around the single wave bracket the trace
    REQUIRE(fan.waves.size() == 1);
    for (int i = 0; i < 2; ++i) {
      CHECK(fan.waves[0].U_right[i] == U_0[i]);
      CHECK(fan.waves[0].U_left[i] == fan.trace_U_bar[i]);
    }
  }
}

TEST_CASE("providers agree to third order in the wave strength") {
  auto m = psys();
  const Vector U_0 = m.domain.center;
  const Vector S = vec1(0.012);
  const Vector s = vec1(-0.03);
  const Vector U_b = compose_boundary_data(m, U_0, S, s);  // envelope datum

  RiemannOptions lax;
  lax.provider = CurveProvider::lax_oracle;
  const FanSolution fe = solve_boundary_riemann(m, U_0, U_b);
  const FanSolution fl = solve_boundary_riemann(m, U_0, U_b, lax);

  const double bound = 20.0 * std::pow(std::abs(s[0]), 3.0);
  CHECK(std::abs(fe.strengths[0] - fl.strengths[0]) <= bound);
  CHECK(std::abs(fe.S[0] - fl.S[0]) <= bound);
  CHECK((fe.trace_U_bar - fl.trace_U_bar).lpNorm<Eigen::Infinity>() <= bound);
}

TEST_CASE("rarefaction fan: inversion reproduces the characteristic speed") {
  auto m = psys();
  const Vector U_0 = m.domain.center;
  const Vector U_b = compose_boundary_data(m, U_0, vec1(0.015), vec1(0.05));
  const FanSolution fan = solve_boundary_riemann(m, U_0, U_b);

  REQUIRE(fan.pieces.size() == 1);
  const FanPiece& p = fan.pieces[0].piece;
  CHECK(p.type == PieceType::rarefaction);
  CHECK(p.speed_hi == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
  CHECK(p.speed_hi - p.speed_lo > 0.04);  // a genuinely spread fan
  CHECK(p.speed_lo > 0.0);

  // inside the fan the sampled state rides its own characteristic
  for (double t : {0.15, 0.5, 0.85}) {
    const double xi = p.speed_lo + t * (p.speed_hi - p.speed_lo);
    const Vector V = evaluate_fan(fan, xi);
    const double lam = eigendecompose(m.matrix_at(V)).lambda[1];
    CHECK(std::abs(lam - xi) <= 1e-6);
  }
  // edges: slow side meets the trace constant, fast side meets U_0
  CHECK((evaluate_fan(fan, p.speed_lo) - fan.trace_U_bar).lpNorm<Eigen::Infinity>() <= 1e-7);
  for (int i = 0; i < 2; ++i) CHECK(evaluate_fan(fan, p.speed_hi)[i] == U_0[i]);
  CHECK((evaluate_fan(fan, 0.5 * p.speed_lo) - fan.trace_U_bar).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("shock fan: right continuity and the classical speed") {
  auto m = psys();
  const Vector U_0 = m.domain.center;
  const Vector U_b = compose_boundary_data(m, U_0, vec1(0.015), vec1(-0.05));
  const FanSolution fan = solve_boundary_riemann(m, U_0, U_b);

  REQUIRE(fan.pieces.size() == 1);
  const FanPiece& p = fan.pieces[0].piece;
  CHECK(p.type == PieceType::shock);
  CHECK(p.speed_lo == p.speed_hi);
  const double sigma = p.speed_lo;
  CHECK(sigma > std::sqrt(2.0));  // compressive: faster than the base state

  // right-continuous at the shock: the value at sigma is the fast side
  const Vector at = evaluate_fan(fan, sigma);
  const Vector above = evaluate_fan(fan, sigma + 1e-9);
  const Vector below = evaluate_fan(fan, sigma - 1e-9);
  for (int i = 0; i < 2; ++i) {
    CHECK(at[i] == above[i]);
    CHECK(at[i] == U_0[i]);
    CHECK(below[i] == fan.trace_U_bar[i]);
  }

  // the classical construction puts the jump at the same speed to O(s^2)
  LaxOptions lo;
  lo.s_max = 0.1;
  const LaxWave lw = lax_oracle(m, 2, fan.strengths[0], U_0, lo);
  CHECK(lw.is_shock);
  CHECK(std::abs(sigma - lw.speed_left) <= 1e-2);
}

TEST_CASE("trace invariants: chart membership reproduces the boundary state") {
  auto m = psys();
  const Vector U_0 = m.domain.center;
  const Vector U_b = compose_boundary_data(m, U_0, vec1(0.015), vec1(-0.05));
  const FanSolution fan = solve_boundary_riemann(m, U_0, U_b);

  LayerOptions lo;
  lo.s_max_factor = 0.6;  // the solver's own chart cap
  const Vector back = phi_s(m, fan.trace_U_bar, fan.S, lo);
  CHECK((back - U_b).lpNorm<Eigen::Infinity>() <= 1e-9);

  const MembershipResult mem = membership(m, fan.trace_U_bar, U_b, 1e-6, lo);
  CHECK(mem.in_manifold);
  CHECK(std::abs(mem.S[0] - fan.S[0]) <= 1e-6);
}

TEST_CASE("non-conservative model: envelope solve works, lax provider refuses") {
  auto nc = builtin_model("noncons_demo");
  const Vector U_0 = nc.domain.center;
  const Vector U_b = compose_boundary_data(nc, U_0, vec1(0.03), vec1(0.04));

  const FanSolution fan = solve_boundary_riemann(nc, U_0, U_b);
  CHECK(std::abs(fan.S[0] - 0.03) <= 1e-6);
  CHECK(std::abs(fan.strengths[0] - 0.04) <= 1e-6);
  CHECK(fan.residual <= 1e-9);
  for (const OrderedPiece& op : fan.pieces) CHECK(op.piece.speed_lo > 0.0);
  for (size_t q = 1; q < fan.pieces.size(); ++q)
    CHECK(fan.pieces[q - 1].piece.speed_hi <=
          fan.pieces[q].piece.speed_lo + 1e-7 * std::max(1.0, fan.pieces[q].piece.speed_lo));
  for (int i = 0; i < 2; ++i) CHECK(evaluate_fan(fan, 0.0)[i] == fan.trace_U_bar[i]);

  RiemannOptions lax;
  lax.provider = CurveProvider::lax_oracle;
  CHECK(kind_of([&] { solve_boundary_riemann(nc, U_0, U_b, lax); }) ==
        ErrorKind::InvalidParams);
}

TEST_CASE("a wave group with nonpositive speeds is rejected, not returned") {
  auto toy = dipping_model();
  const Vector U_0 = Vector::Zero(2);
  const Vector U_b = compose_boundary_data(toy, U_0, vec1(0.02), vec1(-0.2));
  try {
    solve_boundary_riemann(toy, U_0, U_b);
    REQUIRE_MESSAGE(false, "expected NoLocalSolution");
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::NoLocalSolution);
    CHECK(std::string(e.what()).find("do not split") != std::string::npos);
  }
}

TEST_CASE("compare_limits: both distances shrink along the ladder") {
  auto m = psys();
  const Vector U_0 = m.domain.center;
  const Vector U_b = compose_boundary_data(m, U_0, vec1(0.015), vec1(0.05));

  const std::vector<double> eps = {0.1, 0.05, 0.025};
  const ComparisonReport rep = compare_limits(m, U_0, U_b, eps, 8.0);

  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.fan.residual <= 1e-9);
  CHECK(rep.Xi > rep.fan.pieces.back().piece.speed_hi);
  for (size_t j = 0; j < 3; ++j) {
    CHECK(rep.rows[j].epsilon == eps[j]);
    CHECK(std::isfinite(rep.rows[j].l1_fan_dist));
    CHECK(rep.rows[j].sup_inner_dist >= 0.0);
    CHECK(rep.rows[j].weighted_tail >= 0.0);
    CHECK(rep.rows[j].weighted_tail < 0.1);
  }
  // outer L1 against the fan: first order up to the log factor
  CHECK(rep.rows[1].l1_fan_dist <= 0.85 * rep.rows[0].l1_fan_dist);
  CHECK(rep.rows[2].l1_fan_dist <= 0.85 * rep.rows[1].l1_fan_dist);
  // inner sup against the layer trajectory
  CHECK(rep.rows[1].sup_inner_dist <= 0.8 * rep.rows[0].sup_inner_dist);
  CHECK(rep.rows[2].sup_inner_dist <= 0.8 * rep.rows[1].sup_inner_dist);
}

TEST_CASE("compare_limits failure taxonomy") {
  auto m = psys();
  const Vector U_0 = m.domain.center;
  const Vector U_b = compose_boundary_data(m, U_0, vec1(0.015), vec1(0.05));

  CHECK(kind_of([&] { compare_limits(m, U_0, U_b, {0.1}, 0.0); }) ==
        ErrorKind::InvalidParams);
  // a top rung whose inner window does not fit inside [0, Xi]
  CHECK(kind_of([&] { compare_limits(m, U_0, U_b, {0.5, 0.25}, 20.0); }) ==
        ErrorKind::InvalidParams);

  CompareOptions tight;
  tight.mesh.base_nodes = 200;
  tight.mesh.max_nodes = 100;  // below the initial mesh: rung 0 must fail
  try {
    compare_limits(m, U_0, U_b, {0.1, 0.05}, 8.0, tight);
    REQUIRE_MESSAGE(false, "expected ComparisonInconclusive");
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::ComparisonInconclusive);
    CHECK(std::string(e.what()).find("rung 0") != std::string::npos);
  }
}

TEST_CASE("riemann preconditions and evaluation errors") {
  auto m = psys();
  const Vector U_0 = m.domain.center;

  // data separation beyond half the radius, still inside the box
  CHECK(kind_of([&] { solve_boundary_riemann(m, U_0, U_0 + vec2(0.16, 0.0)); }) ==
        ErrorKind::InvalidParams);
  CHECK(kind_of([&] { solve_boundary_riemann(m, U_0, U_0 + vec2(0.4, 0.0)); }) ==
        ErrorKind::OutOfDomain);
  CHECK(kind_of([&] { solve_boundary_riemann(m, U_0, Vector::Zero(3)); }) ==
        ErrorKind::InvalidParams);

  RiemannOptions bad;
  bad.tol = 0.0;
  CHECK(kind_of([&] { solve_boundary_riemann(m, U_0, U_0, bad); }) ==
        ErrorKind::InvalidParams);
  bad = RiemannOptions{};
  bad.fan_m = 1;
  CHECK(kind_of([&] { solve_boundary_riemann(m, U_0, U_0, bad); }) ==
        ErrorKind::InvalidParams);

  CHECK(kind_of([&] { compose_boundary_data(m, U_0, Vector::Zero(2), vec1(0.01)); }) ==
        ErrorKind::InvalidParams);

  const Vector U_b = compose_boundary_data(m, U_0, vec1(0.01), vec1(0.02));
  const FanSolution fan = solve_boundary_riemann(m, U_0, U_b);
  CHECK(kind_of([&] { evaluate_fan(fan, -0.1); }) == ErrorKind::InvalidParams);
  CHECK(kind_of([&] { evaluate_fan(fan, std::nan("")); }) == ErrorKind::InvalidParams);
}
