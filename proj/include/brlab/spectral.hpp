// Spectral toolbox: sorted real eigendecompositions with a deterministic
// sign convention, dual (left) bases, derivative decompositions and the
// interaction coefficients beta_{jhl} = -<DL_j R_h, R_l>.
#pragma once

#include <vector>

#include "brlab/model.hpp"
#include "brlab/types.hpp"

namespace brlab {

struct SpectralData {
  Vector lambda;  // ascending
  Matrix R;       // columns = unit-norm right eigenvectors, sign-fixed
  Matrix L;       // rows = dual left eigenvectors, L * R = I
  int k = 0;      // count of negative eigenvalues
};

// Throws StrictHyperbolicityViolation on a complex pair or on an eigenvalue
// gap below 1e-10.  Sign rule: first component with |x| > 1e-12 made
// positive; with `orient` given, column i keeps a positive inner product
// with orient.col(i) instead (orientation chaining along paths).
SpectralData eigendecompose(const Matrix& A);
SpectralData eigendecompose(const Matrix& A, const Matrix& orient);

// Coefficients a with d = sum_j a_j R_j(U), i.e. a = L(U) d.
Vector decompose_derivative(const HyperbolicModel& model, const Vector& U, const Vector& d);

// beta[j](h,l) = -<DL_j(U) R_h(U), R_l(U)>; DL_j by central differences of
// the oriented left-eigenvector field.
using BetaTensor = std::vector<Matrix>;

// Single-step central-difference evaluation at the given step.
BetaTensor beta_coefficients_raw(const HyperbolicModel& model, const Vector& U, double step);

// Richardson extrapolation of the raw evaluations at step and step/2.
// step <= 0 requests the default 1e-6 * domain radius.
BetaTensor beta_coefficients(const HyperbolicModel& model, const Vector& U, double step = -1.0);

}  // namespace brlab
