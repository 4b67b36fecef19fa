// Common linear-algebra aliases. State dimension n is small (2..4) but
// kept dynamic; Eigen handles the dense work.
#pragma once

#include <Eigen/Dense>

namespace brlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace brlab
