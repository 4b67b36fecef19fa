#include "brlab/interp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "brlab/errors.hpp"

namespace brlab {
namespace {

// Bracket index i with x[i] <= xq <= x[i+1], clamping tiny overshoot.
std::size_t bracket(const std::vector<double>& x, double& xq) {
  if (x.size() < 2) fail(ErrorKind::InvalidParams, "interp: need at least two nodes");
  const double span = x.back() - x.front();
  const double slack = 1e-12 * std::abs(span);
  if (xq < x.front() - slack || xq > x.back() + slack)
    fail(ErrorKind::RangeExceeded,
         "interp: query " + std::to_string(xq) + " outside [" +
             std::to_string(x.front()) + ", " + std::to_string(x.back()) + "]");
  xq = std::clamp(xq, x.front(), x.back());
  auto it = std::upper_bound(x.begin(), x.end(), xq);
  std::size_t i = (it == x.begin()) ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(i, x.size() - 2);
}

double hermite_piece(double xa, double xb, double ya, double yb, double da,
                     double db, double xq) {
  const double h = xb - xa, s = (xq - xa) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * ya + (s3 - 2 * s2 + s) * h * da +
         (-2 * s3 + 3 * s2) * yb + (s3 - s2) * h * db;
}

}  // namespace

double hermite_eval(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& dy, double xq) {
  if (y.size() != x.size() || dy.size() != x.size())
    fail(ErrorKind::InvalidParams, "interp: node arrays disagree in length");
  std::size_t i = bracket(x, xq);
  return hermite_piece(x[i], x[i + 1], y[i], y[i + 1], dy[i], dy[i + 1], xq);
}

Vector hermite_eval(const std::vector<double>& x, const std::vector<Vector>& y,
                    const std::vector<Vector>& dy, double xq) {
  if (y.size() != x.size() || dy.size() != x.size())
    fail(ErrorKind::InvalidParams, "interp: node arrays disagree in length");
  std::size_t i = bracket(x, xq);
  const int n = static_cast<int>(y[i].size());
  Vector out(n);
  for (int c = 0; c < n; ++c)
    out[c] = hermite_piece(x[i], x[i + 1], y[i][c], y[i + 1][c], dy[i][c],
                           dy[i + 1][c], xq);
  return out;
}

std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (y.size() != n || n < 2)
    fail(ErrorKind::InvalidParams, "interp: pchip needs matched arrays, >= 2 nodes");
  std::vector<double> d(n, 0.0);
  if (n == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (x[1] - x[0]);
    return d;
  }
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    if (!(h[i] > 0.0)) fail(ErrorKind::InvalidParams, "interp: grid not increasing");
    del[i] = (y[i + 1] - y[i]) / h[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (del[i - 1] * del[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0)
      d = 0.0;
    else if (d0 * d1 < 0.0 && std::abs(d) > 3 * std::abs(d0))
      d = 3 * d0;
    return d;
  };
  d[0] = endpoint(h[0], h[1], del[0], del[1]);
  d[n - 1] = endpoint(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  return d;
}

}  // namespace brlab
