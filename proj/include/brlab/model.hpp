// Hyperbolic model zoo: a model is a matrix field U -> A(U) on a box,
// optionally backed by a flux (then A = DF), with a certified spectral
// gap gap_c and signature k (count of negative eigenvalues).
#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "brlab/errors.hpp"
#include "brlab/types.hpp"

namespace brlab {

struct DomainBox {
  Vector center;
  double radius = 0.25;

  // sup-norm box membership; inflate > 1 admits the slightly enlarged box
  // that solvers are allowed to touch.
  bool contains(const Vector& U, double inflate = 1.0) const {
    if (U.size() != center.size()) return false;
    return ((U - center).lpNorm<Eigen::Infinity>() <= radius * inflate + 1e-15);
  }
};

struct ModelReport {
  int k = -1;
  double worst_gap = 0.0;          // min over grid of min_i |lambda_i|
  double max_jacobian_mismatch = 0.0;  // 0 when the model has no flux
  int grid_points = 0;
};

struct HyperbolicModel {
  std::string name;
  int n = 0;
  DomainBox domain;
  double gap_c = 0.0;
  int k = 0;
  std::function<Matrix(const Vector&)> matrix_fn;
  std::function<Vector(const Vector&)> flux_fn;  // null if non-conservative

  bool has_flux() const { return static_cast<bool>(flux_fn); }

  // Domain-checked evaluation. Solvers may pass inflate up to 1.1 (meshes
  // and Newton probes are allowed to graze past the nominal box).
  Matrix matrix_at(const Vector& U, double inflate = 1.0) const;
  Vector flux_at(const Vector& U, double inflate = 1.0) const;
};

// Everything needed to build a model; gap_c < 0 requests the automatic
// choice 0.95 * worst_gap measured on the validation grid.
struct ModelSpec {
  std::string name;
  int n = 0;
  DomainBox domain;
  double gap_c = -1.0;
  std::function<Matrix(const Vector&)> matrix_fn;
  std::function<Vector(const Vector&)> flux_fn;
};

// Validates strict hyperbolicity, uniform signature and the spectral gap on
// a tensor grid (default 9 points per axis) and returns the certified model.
HyperbolicModel make_model(const ModelSpec& spec, int grid_per_axis = 9);

// Re-runs the grid validation on an existing model and reports what it saw.
ModelReport verify_model(const HyperbolicModel& model, int grid_per_axis = 9);

// Largest mixed-partial (row-curl) violation of U -> A(U) over a grid.
// ~0 iff the field is locally a flux Jacobian; the non-conservative demo
// model is required to score > 1e-3 here.
double jacobian_curl_margin(const HyperbolicModel& model, int grid_per_axis = 5);

// Built-in zoo: "linear", "p_system", "noncons_demo".  params may override
// the defaults documented in the implementation; pass {} for defaults.
HyperbolicModel builtin_model(const std::string& name,
                              const nlohmann::json& params = nlohmann::json::object());

// Config files: {"name": ..., "params": {...}, "domain": {"center": [...],
// "radius": r}, "gap_c": g} -- domain/gap_c optional, merged into params.
HyperbolicModel model_from_json(const nlohmann::json& config);
HyperbolicModel model_from_json_file(const std::string& path);

}  // namespace brlab
