#include "brlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "brlab/spectral.hpp"

namespace brlab {

namespace {

std::string point_str(const Vector& U) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < U.size(); ++i) os << (i ? "," : "") << U[i];
  os << ")";
  return os.str();
}

template <class F>
void for_each_grid_point(const DomainBox& box, int grid, F&& f) {
  const int n = static_cast<int>(box.center.size());
  std::vector<int> idx(n, 0);
  Vector U(n);
  while (true) {
    for (int d = 0; d < n; ++d) {
      const double t = (grid == 1) ? 0.5 : static_cast<double>(idx[d]) / (grid - 1);
      U[d] = box.center[d] - box.radius + 2.0 * box.radius * t;
    }
    f(U);
    int d = 0;
    while (d < n && ++idx[d] == grid) {
      idx[d] = 0;
      ++d;
    }
    if (d == n) break;
  }
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& F, const Vector& U, double h) {
  const int n = static_cast<int>(U.size());
  Matrix J(n, n);
  for (int m = 0; m < n; ++m) {
    Vector Up = U, Um = U;
    Up[m] += h;
    Um[m] -= h;
    J.col(m) = (F(Up) - F(Um)) / (2.0 * h);
  }
  return J;
}

ModelReport run_grid_validation(const std::string& name, const DomainBox& box,
                                const std::function<Matrix(const Vector&)>& matrix_fn,
                                const std::function<Vector(const Vector&)>& flux_fn,
                                int grid) {
  if (grid < 1) fail(ErrorKind::InvalidParams, "grid_per_axis must be >= 1");
  ModelReport rep;
  rep.worst_gap = std::numeric_limits<double>::infinity();
  const double hj = 6e-6 * std::max(box.radius, 1e-8);
  for_each_grid_point(box, grid, [&](const Vector& U) {
    Matrix A = matrix_fn(U);
    SpectralData sd;
    try {
      sd = eigendecompose(A);
    } catch (const LabError& e) {
      fail(ErrorKind::HyperbolicityCheckFailed,
           name + " at grid point U=" + point_str(U) + ": " + e.what());
    }
    if (rep.k < 0)
      rep.k = sd.k;
    else if (sd.k != rep.k)
      fail(ErrorKind::NonUniformSignature,
           name + ": signature changes at grid point U=" + point_str(U));
    rep.worst_gap = std::min(rep.worst_gap, sd.lambda.cwiseAbs().minCoeff());
    if (flux_fn) {
      const Matrix J = fd_jacobian(flux_fn, U, hj);
      rep.max_jacobian_mismatch =
          std::max(rep.max_jacobian_mismatch, (A - J).cwiseAbs().maxCoeff());
    }
    ++rep.grid_points;
  });
  return rep;
}

}  // namespace

Matrix HyperbolicModel::matrix_at(const Vector& U, double inflate) const {
  if (U.size() != n) fail(ErrorKind::InvalidParams, name + ": state has wrong dimension");
  if (!domain.contains(U, inflate))
    fail(ErrorKind::OutOfDomain, name + ": U=" + point_str(U) + " outside the domain box");
  return matrix_fn(U);
}

Vector HyperbolicModel::flux_at(const Vector& U, double inflate) const {
  if (!flux_fn) fail(ErrorKind::InvalidParams, name + " has no flux (non-conservative model)");
  if (U.size() != n) fail(ErrorKind::InvalidParams, name + ": state has wrong dimension");
  if (!domain.contains(U, inflate))
    fail(ErrorKind::OutOfDomain, name + ": U=" + point_str(U) + " outside the domain box");
  return flux_fn(U);
}

HyperbolicModel make_model(const ModelSpec& spec, int grid_per_axis) {
  if (spec.n < 2 || spec.n > 4)
    fail(ErrorKind::InvalidParams, spec.name + ": dimension must be in [2,4]");
  if (spec.domain.center.size() != spec.n)
    fail(ErrorKind::InvalidParams, spec.name + ": domain center has wrong dimension");
  if (spec.domain.radius <= 0.0)
    fail(ErrorKind::InvalidParams, spec.name + ": domain radius must be positive");
  if (!spec.matrix_fn) fail(ErrorKind::InvalidParams, spec.name + ": matrix evaluator missing");

  const ModelReport rep =
      run_grid_validation(spec.name, spec.domain, spec.matrix_fn, spec.flux_fn, grid_per_axis);

  const double gap_c = (spec.gap_c < 0.0) ? 0.95 * rep.worst_gap : spec.gap_c;
  if (!(gap_c > 0.0) || rep.worst_gap <= gap_c) {
    std::ostringstream os;
    os << spec.name << ": spectral gap " << rep.worst_gap
       << " does not clear gap_c=" << gap_c << " on the validation grid";
    fail(ErrorKind::NonCharacteristicViolation, os.str());
  }

  HyperbolicModel m;
  m.name = spec.name;
  m.n = spec.n;
  m.domain = spec.domain;
  m.gap_c = gap_c;
  m.k = rep.k;
  m.matrix_fn = spec.matrix_fn;
  m.flux_fn = spec.flux_fn;
  return m;
}

ModelReport verify_model(const HyperbolicModel& model, int grid_per_axis) {
  return run_grid_validation(model.name, model.domain, model.matrix_fn, model.flux_fn,
                             grid_per_axis);
}

double jacobian_curl_margin(const HyperbolicModel& model, int grid_per_axis) {
  // For A = DF the mixed partials of each row agree:
  //   d A(i,m1) / d U_m2 == d A(i,m2) / d U_m1.
  // Reports the largest violation over the grid; ~0 for Jacobian fields.
  const double h = 1e-4 * model.domain.radius;
  double margin = 0.0;
  DomainBox inner = model.domain;
  inner.radius = model.domain.radius * (1.0 - 1e-3);
  for_each_grid_point(inner, grid_per_axis, [&](const Vector& U) {
    const int n = model.n;
    std::vector<Matrix> dA(n);  // dA[m] = dA/dU_m
    for (int m = 0; m < n; ++m) {
      Vector Up = U, Um = U;
      Up[m] += h;
      Um[m] -= h;
      dA[m] = (model.matrix_fn(Up) - model.matrix_fn(Um)) / (2.0 * h);
    }
    for (int i = 0; i < n; ++i)
      for (int m1 = 0; m1 < n; ++m1)
        for (int m2 = m1 + 1; m2 < n; ++m2)
          margin = std::max(margin, std::abs(dA[m2](i, m1) - dA[m1](i, m2)));
  });
  return margin;
}

namespace {

using nlohmann::json;

DomainBox box_from_params(const json& params, const Vector& default_center,
                          double default_radius) {
  DomainBox box;
  box.center = default_center;
  box.radius = default_radius;
  if (params.contains("center")) {
    const auto& c = params.at("center");
    if (!c.is_array()) fail(ErrorKind::InvalidParams, "center must be an array");
    box.center.resize(c.size());
    for (size_t i = 0; i < c.size(); ++i) box.center[static_cast<int>(i)] = c[i].get<double>();
  }
  if (params.contains("radius")) box.radius = params.at("radius").get<double>();
  return box;
}

HyperbolicModel build_linear(const json& params) {
  std::vector<double> entries{-1.0, 0.0, 0.0, 2.0};
  if (params.contains("matrix")) {
    entries.clear();
    const auto& m = params.at("matrix");
    if (!m.is_array()) fail(ErrorKind::InvalidParams, "linear: matrix must be an array");
    if (!m.empty() && m[0].is_array()) {
      for (const auto& row : m)
        for (const auto& v : row) entries.push_back(v.get<double>());
    } else {
      for (const auto& v : m) entries.push_back(v.get<double>());
    }
  }
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(entries.size()))));
  if (n * n != static_cast<int>(entries.size()) || n < 2 || n > 4)
    fail(ErrorKind::InvalidParams, "linear: matrix must be square, dimension 2..4");
  Matrix A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = entries[static_cast<size_t>(i * n + j)];

  ModelSpec spec;
  spec.name = "linear";
  spec.n = n;
  spec.domain = box_from_params(params, Vector::Zero(n), 0.25);
  spec.gap_c = params.value("gap_c", -1.0);
  spec.matrix_fn = [A](const Vector&) { return A; };
  spec.flux_fn = [A](const Vector& U) { return Vector(A * U); };
  return make_model(spec, params.value("grid_per_axis", 9));
}

HyperbolicModel build_p_system(const json& params) {
  const double gamma = params.value("gamma", 2.0);
  if (!(gamma > 1.0)) fail(ErrorKind::InvalidParams, "p_system: gamma must be > 1");
  Vector center(2);
  center << 1.0, 0.0;
  DomainBox box = box_from_params(params, center, 0.25);
  if (box.center[0] - 1.1 * box.radius <= 0.0)
    fail(ErrorKind::InvalidParams, "p_system: box must keep v bounded away from 0");

  ModelSpec spec;
  spec.name = "p_system";
  spec.n = 2;
  spec.domain = box;
  spec.gap_c = params.value("gap_c", -1.0);
  // state U = (v, u), flux F = (-u, p(v)) with p(v) = v^-gamma
  spec.matrix_fn = [gamma](const Vector& U) {
    Matrix A(2, 2);
    A << 0.0, -1.0, -gamma * std::pow(U[0], -gamma - 1.0), 0.0;
    return A;
  };
  spec.flux_fn = [gamma](const Vector& U) {
    Vector F(2);
    F << -U[1], std::pow(U[0], -gamma);
    return F;
  };
  return make_model(spec, params.value("grid_per_axis", 9));
}

HyperbolicModel build_noncons_demo(const json& params) {
  const double a = params.value("a", 0.2);
  const double b = params.value("b", 0.1);
  const double c = params.value("c", 0.05);

  ModelSpec spec;
  spec.name = "noncons_demo";
  spec.n = 2;
  spec.domain = box_from_params(params, Vector::Zero(2), 0.25);
  spec.gap_c = params.value("gap_c", -1.0);
  spec.matrix_fn = [a, b, c](const Vector& U) {
    Matrix A(2, 2);
    A << -1.0 + a * U[1], b * U[0], c * U[1], 1.0 + a * U[0];
    return A;
  };
  HyperbolicModel m = make_model(spec, params.value("grid_per_axis", 9));

  // the point of the demo: measurably not a Jacobian field
  const double margin = jacobian_curl_margin(m, 5);
  if (margin <= 1e-3)
    fail(ErrorKind::InvalidParams,
         "noncons_demo: parameters make the field accidentally conservative "
         "(curl margin <= 1e-3)");
  return m;
}

}  // namespace

HyperbolicModel builtin_model(const std::string& name, const nlohmann::json& params) {
  if (!params.is_object()) fail(ErrorKind::InvalidParams, "model params must be a JSON object");
  if (name == "linear") return build_linear(params);
  if (name == "p_system") return build_p_system(params);
  if (name == "noncons_demo") return build_noncons_demo(params);
  fail(ErrorKind::InvalidParams, "unknown model '" + name + "'");
}

HyperbolicModel model_from_json(const nlohmann::json& config) {
  if (!config.is_object() || !config.contains("name"))
    fail(ErrorKind::InvalidParams, "model config must be an object with a 'name'");
  nlohmann::json params = config.value("params", nlohmann::json::object());
  if (config.contains("domain")) {
    const auto& d = config.at("domain");
    if (d.contains("center")) params["center"] = d.at("center");
    if (d.contains("radius")) params["radius"] = d.at("radius");
  }
  if (config.contains("gap_c")) params["gap_c"] = config.at("gap_c");
  return builtin_model(config.at("name").get<std::string>(), params);
}

HyperbolicModel model_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IOError, "cannot open model config '" + path + "'");
  nlohmann::json config;
  try {
    in >> config;
  } catch (const std::exception& e) {
    fail(ErrorKind::InvalidParams, "bad JSON in '" + path + "': " + e.what());
  }
  return model_from_json(config);
}

}  // namespace brlab
