#include "brlab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace brlab {

namespace {

void sign_fix_first_nonzero(Eigen::Ref<Matrix> R) {
  for (int i = 0; i < R.cols(); ++i) {
    for (int r = 0; r < R.rows(); ++r) {
      if (std::abs(R(r, i)) > 1e-12) {
        if (R(r, i) < 0.0) R.col(i) = -R.col(i);
        break;
      }
    }
  }
}

SpectralData decompose_impl(const Matrix& A, const Matrix* orient) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || n < 1)
    fail(ErrorKind::InvalidParams, "eigendecompose needs a square matrix");

  Vector lam(n);
  Matrix R(n, n);

  if (n == 2) {
    // closed form keeps the hot paths (Picard sweeps over curve grids) cheap
    const double tr = A(0, 0) + A(1, 1);
    const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    const double disc = tr * tr - 4.0 * det;
    if (disc <= 0.0)
      fail(ErrorKind::StrictHyperbolicityViolation,
           "2x2 matrix has a complex or repeated eigenvalue pair");
    const double sq = std::sqrt(disc);
    lam << 0.5 * (tr - sq), 0.5 * (tr + sq);
    for (int i = 0; i < 2; ++i) {
      // each row of (A - lam I) annihilates the eigenvector; take the
      // better-conditioned of the two orthogonal-complement candidates
      Vector c1(2), c2(2);
      c1 << A(0, 1), lam[i] - A(0, 0);
      c2 << lam[i] - A(1, 1), A(1, 0);
      Vector v = (c1.norm() >= c2.norm()) ? c1 : c2;
      if (v.norm() == 0.0) {
        v.setZero();
        v[i] = 1.0;
      }
      R.col(i) = v / v.norm();
    }
  } else {
    Eigen::EigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success)
      fail(ErrorKind::StrictHyperbolicityViolation, "eigensolver did not converge");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    Eigen::VectorXcd ev = es.eigenvalues();
    for (int i = 0; i < n; ++i) {
      if (std::abs(ev[i].imag()) > 1e-9 * scale) {
        std::ostringstream os;
        os << "complex eigenvalue pair (imag " << ev[i].imag() << ")";
        fail(ErrorKind::StrictHyperbolicityViolation, os.str());
      }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return ev[a].real() < ev[b].real(); });
    const Eigen::MatrixXcd V = es.eigenvectors();
    for (int i = 0; i < n; ++i) {
      lam[i] = ev[order[i]].real();
      Vector v = V.col(order[i]).real();
      const double nv = v.norm();
      if (nv == 0.0)
        fail(ErrorKind::StrictHyperbolicityViolation, "degenerate eigenvector");
      R.col(i) = v / nv;
    }
  }

  for (int i = 0; i + 1 < n; ++i) {
    if (lam[i + 1] - lam[i] < 1e-10)
      fail(ErrorKind::StrictHyperbolicityViolation, "eigenvalue gap below 1e-10");
  }

  if (orient) {
    if (orient->rows() != n || orient->cols() != n)
      fail(ErrorKind::InvalidParams, "orient matrix has wrong shape");
    for (int i = 0; i < n; ++i) {
      const double d = R.col(i).dot(orient->col(i));
      if (d < 0.0) {
        R.col(i) = -R.col(i);
      } else if (d == 0.0) {
        Matrix col = R.col(i);
        sign_fix_first_nonzero(col);
        R.col(i) = col;
      }
    }
  } else {
    sign_fix_first_nonzero(R);
  }

  SpectralData sd;
  sd.lambda = lam;
  sd.R = R;
  sd.L = R.inverse();
  sd.k = 0;
  for (int i = 0; i < n; ++i)
    if (lam[i] < 0.0) ++sd.k;
  return sd;
}

void check_conditioning(const SpectralData& sd) {
  for (int i = 0; i + 1 < sd.lambda.size(); ++i) {
    if (sd.lambda[i + 1] - sd.lambda[i] < 1e-6)
      fail(ErrorKind::IllConditioned,
           "eigenvalues closer than 1e-6 at a difference stencil point");
  }
}

}  // namespace

SpectralData eigendecompose(const Matrix& A) { return decompose_impl(A, nullptr); }

SpectralData eigendecompose(const Matrix& A, const Matrix& orient) {
  return decompose_impl(A, &orient);
}

Vector decompose_derivative(const HyperbolicModel& model, const Vector& U, const Vector& d) {
  if (d.size() != model.n) fail(ErrorKind::InvalidParams, "derivative has wrong dimension");
  SpectralData sd = eigendecompose(model.matrix_at(U));
  return sd.L * d;
}

BetaTensor beta_coefficients_raw(const HyperbolicModel& model, const Vector& U, double step) {
  const int n = model.n;
  if (step <= 0.0) fail(ErrorKind::InvalidParams, "beta step must be positive");
  for (int m = 0; m < n; ++m) {
    Vector Up = U, Um = U;
    Up[m] += step;
    Um[m] -= step;
    if (!model.domain.contains(Up) || !model.domain.contains(Um))
      fail(ErrorKind::OutOfDomain,
           "beta stencil leaves the domain box; move U inward or shrink step");
  }

  const SpectralData center = eigendecompose(model.matrix_at(U));
  check_conditioning(center);

  // DL[j]: Jacobian of the left-eigenvector field U -> L_j(U); columns are
  // partial derivatives, computed with orientation chained to the center.
  std::vector<Matrix> DL(n, Matrix(n, n));
  for (int m = 0; m < n; ++m) {
    Vector Up = U, Um = U;
    Up[m] += step;
    Um[m] -= step;
    const SpectralData sp = eigendecompose(model.matrix_at(Up), center.R);
    const SpectralData sm = eigendecompose(model.matrix_at(Um), center.R);
    check_conditioning(sp);
    check_conditioning(sm);
    for (int j = 0; j < n; ++j)
      DL[j].col(m) = (sp.L.row(j) - sm.L.row(j)).transpose() / (2.0 * step);
  }

  BetaTensor beta(n, Matrix(n, n));
  for (int j = 0; j < n; ++j)
    for (int h = 0; h < n; ++h)
      for (int l = 0; l < n; ++l)
        beta[j](h, l) = -(DL[j] * center.R.col(h)).dot(center.R.col(l));
  return beta;
}

BetaTensor beta_coefficients(const HyperbolicModel& model, const Vector& U, double step) {
  if (step <= 0.0) step = 1e-6 * model.domain.radius;
  const BetaTensor full = beta_coefficients_raw(model, U, step);
  const BetaTensor half = beta_coefficients_raw(model, U, step / 2.0);
  BetaTensor out(full.size());
  for (size_t j = 0; j < full.size(); ++j)
    out[j] = (4.0 * half[j] - full[j]) / 3.0;  // second-order stencil extrapolation
  return out;
}

}  // namespace brlab
