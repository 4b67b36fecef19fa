// Model zoo contract tests: frozen hand-derived Jacobians, grid validation,
// domain checks, JSON config loading.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "brlab/model.hpp"
#include "brlab/spectral.hpp"

using namespace brlab;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("p_system matrix matches the hand-differentiated flux Jacobian") {
  // F(v,u) = (-u, v^-gamma)  =>  DF = [[0, -1], [-gamma v^-(gamma+1), 0]]
  auto m = builtin_model("p_system");  // gamma = 2
  const Matrix A = m.matrix_at(vec2(1.0, 0.0));
  CHECK(A(0, 0) == 0.0);
  CHECK(A(0, 1) == -1.0);
  CHECK(A(1, 0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(A(1, 1) == 0.0);

  // same check away from the reference point, gamma = 1.4
  auto m14 = builtin_model("p_system", {{"gamma", 1.4}});
  const double v = 1.13, gamma = 1.4;
  const Matrix A14 = m14.matrix_at(vec2(v, 0.05));
  CHECK(A14(1, 0) == doctest::Approx(-gamma * std::pow(v, -gamma - 1.0)).epsilon(1e-14));
}

TEST_CASE("matrix field agrees with a central FD Jacobian of the flux") {
  for (const char* name : {"linear", "p_system"}) {
    auto m = builtin_model(name);
    REQUIRE(m.has_flux());
    const double h = 1e-5;
    Vector U = m.domain.center;
    U[0] += 0.3 * m.domain.radius;
    const Matrix A = m.matrix_at(U);
    Matrix J(m.n, m.n);
    for (int c = 0; c < m.n; ++c) {
      Vector Up = U, Um = U;
      Up[c] += h;
      Um[c] -= h;
      J.col(c) = (m.flux_at(Up) - m.flux_at(Um)) / (2.0 * h);
    }
    CHECK((A - J).cwiseAbs().maxCoeff() <= 10.0 * h * h + 1e-12);
  }
}

TEST_CASE("verify_model reports k and the closed-form worst gap for p_system") {
  const double gamma = 2.0;
  auto m = builtin_model("p_system");
  const int grid = 9;
  const ModelReport rep = verify_model(m, grid);
  CHECK(rep.k == 1);
  CHECK(rep.grid_points == grid * grid);
  CHECK(rep.max_jacobian_mismatch < 1e-7);

  // oracle: |lambda| = sqrt(gamma) * v^-(gamma+1)/2, minimized over the grid
  double worst = 1e300;
  for (int j = 0; j < grid; ++j) {
    const double v =
        m.domain.center[0] - m.domain.radius + 2.0 * m.domain.radius * j / (grid - 1);
    worst = std::min(worst, std::sqrt(gamma) * std::pow(v, -(gamma + 1.0) / 2.0));
  }
  CHECK(rep.worst_gap == doctest::Approx(worst).epsilon(1e-12));
}

TEST_CASE("evaluation outside the domain box raises OutOfDomain") {
  auto m = builtin_model("p_system");
  Vector U = vec2(2.0, 0.0);  // radius is 0.25 around (1,0)
  CHECK_THROWS_AS(m.matrix_at(U), LabError);
  try {
    m.matrix_at(U);
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::OutOfDomain);
  }
  // the 10% solver slack admits states just past the nominal box
  Vector edge = vec2(1.0 + 1.05 * m.domain.radius, 0.0);
  CHECK_THROWS_AS(m.matrix_at(edge), LabError);
  CHECK_NOTHROW(m.matrix_at(edge, 1.1));
}

TEST_CASE("zero eigenvalue on the box fails the non-characteristic check") {
  CHECK_THROWS_AS(builtin_model("linear", {{"matrix", {-1.0, 0.0, 0.0, 0.0}}}), LabError);
  try {
    builtin_model("linear", {{"matrix", {-1.0, 0.0, 0.0, 0.0}}});
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::NonCharacteristicViolation);
  }
}

TEST_CASE("signature change across the box raises NonUniformSignature") {
  ModelSpec spec;
  spec.name = "sign_flip";
  spec.n = 2;
  spec.domain.center = vec2(0.0, 0.0);
  spec.domain.radius = 0.25;
  spec.matrix_fn = [](const Vector& U) {
    Matrix A(2, 2);
    A << U[0] + 0.1, 0.0, 0.0, 2.0;  // first eigenvalue crosses zero inside the box
    return A;
  };
  try {
    make_model(spec);
    CHECK_MESSAGE(false, "expected NonUniformSignature");
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::NonUniformSignature);
  }
}

TEST_CASE("complex pair raises HyperbolicityCheckFailed with the grid point") {
  ModelSpec spec;
  spec.name = "rotationish";
  spec.n = 2;
  spec.domain.center = vec2(0.0, 0.0);
  spec.domain.radius = 0.25;
  spec.matrix_fn = [](const Vector&) {
    Matrix A(2, 2);
    A << 0.0, -1.0, 1.0, 0.0;
    return A;
  };
  try {
    make_model(spec);
    CHECK_MESSAGE(false, "expected HyperbolicityCheckFailed");
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::HyperbolicityCheckFailed);
    CHECK(std::string(e.what()).find("U=") != std::string::npos);
  }
}

TEST_CASE("noncons_demo has no flux and a certified curl margin") {
  auto m = builtin_model("noncons_demo");
  CHECK(!m.has_flux());
  CHECK_THROWS_AS(m.flux_at(vec2(0.0, 0.0)), LabError);
  CHECK(jacobian_curl_margin(m) > 1e-3);
  CHECK(m.k == 1);

  // conservative parameter choice must be rejected (a == b == c makes the
  // field a Jacobian up to FD noise)
  CHECK_THROWS_AS(builtin_model("noncons_demo", {{"a", 0.1}, {"b", 0.1}, {"c", 0.1}}),
                  LabError);
}

TEST_CASE("builtin zoo has flux fields exactly where documented") {
  CHECK(builtin_model("linear").has_flux());
  CHECK(builtin_model("p_system").has_flux());
  CHECK(!builtin_model("noncons_demo").has_flux());
}

TEST_CASE("model config loads from JSON with domain and gap overrides") {
  nlohmann::json config = {
      {"name", "p_system"},
      {"params", {{"gamma", 1.4}}},
      {"domain", {{"center", {1.2, 0.1}}, {"radius", 0.2}}},
      {"gap_c", 0.5},
  };
  auto m = model_from_json(config);
  CHECK(m.name == "p_system");
  CHECK(m.gap_c == 0.5);
  CHECK(m.domain.radius == 0.2);
  CHECK(m.domain.center[0] == 1.2);
  const Matrix A = m.matrix_at(vec2(1.2, 0.1));
  CHECK(A(1, 0) == doctest::Approx(-1.4 * std::pow(1.2, -2.4)).epsilon(1e-14));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(builtin_model("p_system", {{"gamma", 1.0}}), LabError);
  CHECK_THROWS_AS(builtin_model("p_system", {{"center", {0.1, 0.0}}}), LabError);  // v ~ 0
  CHECK_THROWS_AS(builtin_model("nope"), LabError);
  // 5x5 exceeds the supported dimension range
  std::vector<double> big(25, 0.0);
  for (int i = 0; i < 5; ++i) big[static_cast<size_t>(i * 5 + i)] = i - 2.0;
  CHECK_THROWS_AS(builtin_model("linear", {{"matrix", big}}), LabError);
}

TEST_CASE("matrix evaluation is pure and repeatable") {
  auto m = builtin_model("noncons_demo");
  const Vector U = vec2(0.07, -0.11);
  const Matrix A1 = m.matrix_at(U);
  const Matrix A2 = m.matrix_at(U);
  CHECK((A1 - A2).cwiseAbs().maxCoeff() == 0.0);
}
