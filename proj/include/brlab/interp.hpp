#pragma once

#include <vector>

#include "brlab/types.hpp"

namespace brlab {

// Cubic Hermite evaluation on a strictly increasing grid from nodal values and
// derivatives. Queries may overshoot the grid by a 1e-12 relative slack (they
// are clamped); farther out throws RangeExceeded.
double hermite_eval(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& dy, double xq);
Vector hermite_eval(const std::vector<double>& x, const std::vector<Vector>& y,
                    const std::vector<Vector>& dy, double xq);

// Monotonicity-preserving cubic slopes (Fritsch-Carlson). Interpolating with
// these via hermite_eval gives a shape-preserving C1 interpolant.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y);

}  // namespace brlab
