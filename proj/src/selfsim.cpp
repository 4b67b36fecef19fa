#include "brlab/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "brlab/errors.hpp"
#include "brlab/interp.hpp"
#include "brlab/spectral.hpp"

namespace brlab {

double max_wave_speed(const HyperbolicModel& model, int grid) {
  double lmax = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(model.n, 0);
  Vector U(model.n);
  while (true) {
    for (int d = 0; d < model.n; ++d) {
      const double t = static_cast<double>(idx[d]) / (grid - 1);
      U[d] = model.domain.center[d] - model.domain.radius +
             2.0 * model.domain.radius * t;
    }
    lmax = std::max(lmax, eigendecompose(model.matrix_at(U)).lambda.maxCoeff());
    int d = 0;
    while (d < model.n && ++idx[d] == grid) {
      idx[d] = 0;
      ++d;
    }
    if (d == model.n) break;
  }
  return lmax;
}

namespace {

// Graded mesh on [0, Xi]: first cell ~ factor * eps, geometric growth up to a
// uniform far-field cell. growth <= 1 requests a plain uniform mesh.
std::vector<double> build_mesh(double eps, double Xi, const MeshPolicy& pol) {
  if (pol.base_nodes < 8)
    fail(ErrorKind::InvalidParams, "mesh policy: base_nodes must be >= 8");
  std::vector<double> xi;
  if (pol.growth <= 1.0) {
    const int N = pol.base_nodes;
    if (N > pol.max_nodes)
      fail(ErrorKind::MeshExhausted, "mesh construction exceeded max_nodes");
    xi.resize(N);
    for (int i = 0; i < N; ++i) xi[i] = Xi * static_cast<double>(i) / (N - 1);
    xi.front() = 0.0;
    xi.back() = Xi;
    return xi;
  }
  const double H = Xi / (0.6 * pol.base_nodes);
  double h = std::min(pol.first_cell_factor * eps, H);
  if (!(h > 0.0))
    fail(ErrorKind::InvalidParams, "mesh policy: first cell must be positive");
  xi.push_back(0.0);
  while (true) {
    const double cur = xi.back();
    if (cur + 1.5 * h >= Xi) {
      xi.push_back(Xi);
      break;
    }
    xi.push_back(cur + h);
    h = std::min(h * pol.growth, H);
    if (static_cast<int>(xi.size()) > pol.max_nodes)
      fail(ErrorKind::MeshExhausted, "mesh construction exceeded max_nodes");
  }
  return xi;
}

// Nonuniform central-difference weights at an interior node.
struct FdWeights {
  double al, am, ar;  // second derivative
  double dl, dm, dr;  // first derivative
};

FdWeights fd_weights(double hL, double hR) {
  FdWeights w;
  const double s = hL + hR;
  w.al = 2.0 / (hL * s);
  w.ar = 2.0 / (hR * s);
  w.am = -2.0 / (hL * hR);
  w.dl = -hR / (hL * s);
  w.dr = hL / (hR * s);
  w.dm = (hR - hL) / (hL * hR);
  return w;
}

// Discrete residual F_i = eps Q'' - [A(Q) - xi I] Q' at the interior nodes,
// each measured against its own term sizes; returns the scaled sup norm.
double scaled_residual(const HyperbolicModel& model, double eps,
                       const std::vector<double>& xi,
                       const std::vector<Vector>& Q, std::vector<Vector>* F_out) {
  const int N = static_cast<int>(xi.size());
  double phi = 0.0;
  if (F_out) F_out->assign(static_cast<size_t>(N - 2), Vector());
  for (int i = 1; i + 1 < N; ++i) {
    const FdWeights w = fd_weights(xi[i] - xi[i - 1], xi[i + 1] - xi[i]);
    // difference form (the weights of each stencil sum to zero exactly)
    const Vector dL = Q[i - 1] - Q[i], dR = Q[i + 1] - Q[i];
    const Vector Qp = w.dl * dL + w.dr * dR;
    const Vector Qpp = w.al * dL + w.ar * dR;
    Matrix B = model.matrix_at(Q[i], 1.1);
    B.diagonal().array() -= xi[i];
    const Vector conv = B * Qp;
    const Vector F = eps * Qpp - conv;
    const double weight = 1.0 + eps * Qpp.lpNorm<Eigen::Infinity>() +
                          conv.lpNorm<Eigen::Infinity>();
    phi = std::max(phi, F.lpNorm<Eigen::Infinity>() / weight);
    if (F_out) (*F_out)[static_cast<size_t>(i - 1)] = F;
  }
  return phi;
}

std::string history_tail(const std::vector<double>& damping) {
  std::ostringstream os;
  os << "[";
  const size_t start = damping.size() > 12 ? damping.size() - 12 : 0;
  for (size_t i = start; i < damping.size(); ++i) {
    if (i > start) os << ", ";
    os << damping[i];
  }
  os << "]";
  if (start > 0) os << " (last 12 of " << damping.size() << ")";
  return os.str();
}

struct NewtonOutcome {
  double residual = 0.0;
  int iterations = 0;
};

// Damped Newton with an Armijo line search on the scaled residual norm.
NewtonOutcome newton_solve(const HyperbolicModel& model, double eps,
                           const std::vector<double>& xi, std::vector<Vector>& Q,
                           const MeshPolicy& pol, std::vector<double>& damping) {
  const int N = static_cast<int>(xi.size());
  const int m = N - 2;
  const int n = model.n;
  if (m < 1) fail(ErrorKind::InvalidParams, "mesh has no interior nodes");
  const double delta = 1e-6 * std::max(model.domain.radius, 1e-12);
  const Matrix I = Matrix::Identity(n, n);

  std::vector<Vector> F, Ftrial;
  double phi = scaled_residual(model, eps, xi, Q, &F);
  NewtonOutcome out;
  std::vector<Matrix> Lb(m), Db(m), Rb(m);
  std::vector<Eigen::PartialPivLU<Matrix>> lus(m);
  std::vector<Vector> rt(m), dlt(m);
  std::vector<Vector> trial = Q;

  while (phi > pol.newton_tol) {
    if (out.iterations >= pol.max_newton) {
      std::ostringstream os;
      os << "no convergence in " << pol.max_newton
         << " Newton iterations; residual=" << phi
         << ", damping=" << history_tail(damping);
      fail(ErrorKind::NewtonDivergence, os.str());
    }

    for (int i = 1; i + 1 < N; ++i) {
      const FdWeights w = fd_weights(xi[i] - xi[i - 1], xi[i + 1] - xi[i]);
      const Vector Qp = w.dl * (Q[i - 1] - Q[i]) + w.dr * (Q[i + 1] - Q[i]);
      Matrix B = model.matrix_at(Q[i], 1.1);
      B.diagonal().array() -= xi[i];
      Matrix M(n, n);  // d/dQ_i of A(Q_i) Q'  (coefficient nonlinearity)
      for (int j = 0; j < n; ++j) {
        Vector Vp = Q[i], Vm = Q[i];
        Vp[j] += delta;
        Vm[j] -= delta;
        M.col(j) =
            ((model.matrix_at(Vp, 1.1) - model.matrix_at(Vm, 1.1)) / (2.0 * delta)) *
            Qp;
      }
      const int b = i - 1;
      Lb[b] = eps * w.al * I - w.dl * B;
      Db[b] = eps * w.am * I - w.dm * B - M;
      Rb[b] = eps * w.ar * I - w.dr * B;
    }

    // Block-tridiagonal elimination; back substitution reuses the original
    // superdiagonal blocks.
    lus[0].compute(Db[0]);
    rt[0] = -F[0];
    for (int b = 1; b < m; ++b) {
      const Matrix T = lus[b - 1].solve(Rb[b - 1]);
      const Vector s = lus[b - 1].solve(rt[b - 1]);
      lus[b].compute(Matrix(Db[b] - Lb[b] * T));
      rt[b] = -F[b] - Lb[b] * s;
    }
    dlt[m - 1] = lus[m - 1].solve(rt[m - 1]);
    for (int b = m - 2; b >= 0; --b)
      dlt[b] = lus[b].solve(Vector(rt[b] - Rb[b] * dlt[b + 1]));
    bool finite = true;
    for (int b = 0; b < m && finite; ++b) finite = dlt[b].allFinite();
    if (!finite) {
      std::ostringstream os;
      os << "singular linearization at residual=" << phi
         << ", damping=" << history_tail(damping);
      fail(ErrorKind::NewtonDivergence, os.str());
    }

    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= std::ldexp(1.0, -36)) {
      for (int i = 1; i + 1 < N; ++i) trial[i] = Q[i] + alpha * dlt[i - 1];
      double pt = std::numeric_limits<double>::infinity();
      try {
        pt = scaled_residual(model, eps, xi, trial, &Ftrial);
      } catch (const LabError&) {
        pt = std::numeric_limits<double>::infinity();  // left the domain box
      }
      if (pt <= phi * (1.0 - 1e-4 * alpha)) {
        Q.swap(trial);
        F.swap(Ftrial);
        phi = pt;
        damping.push_back(alpha);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "line search stalled at residual=" << phi
         << ", damping=" << history_tail(damping);
      fail(ErrorKind::NewtonDivergence, os.str());
    }
    trial = Q;  // re-sync boundary rows for the next sweep
    ++out.iterations;
  }
  out.residual = phi;
  return out;
}

// Cells whose state jump exceeds fraction * total variation and which are
// still wider than half the nominal first cell; these get split.
std::vector<int> refine_flags(const std::vector<double>& xi,
                              const std::vector<Vector>& Q, const MeshPolicy& pol,
                              double eps) {
  const int N = static_cast<int>(xi.size());
  double tv = 0.0;
  for (int i = 0; i + 1 < N; ++i)
    tv += (Q[i + 1] - Q[i]).lpNorm<Eigen::Infinity>();
  const double thr = pol.refine_fraction * tv;
  const double min_w = 0.5 * pol.first_cell_factor * eps;
  std::vector<int> flags;
  for (int i = 0; i + 1 < N; ++i) {
    const double jump = (Q[i + 1] - Q[i]).lpNorm<Eigen::Infinity>();
    if (jump > thr && (xi[i + 1] - xi[i]) > min_w) flags.push_back(i);
  }
  return flags;
}

void split_cells(std::vector<double>& xi, std::vector<Vector>& Q,
                 const std::vector<int>& flags) {
  std::vector<double> nx;
  std::vector<Vector> nq;
  nx.reserve(xi.size() + flags.size());
  nq.reserve(xi.size() + flags.size());
  size_t f = 0;
  for (size_t i = 0; i + 1 < xi.size(); ++i) {
    nx.push_back(xi[i]);
    nq.push_back(Q[i]);
    if (f < flags.size() && flags[f] == static_cast<int>(i)) {
      nx.push_back(0.5 * (xi[i] + xi[i + 1]));
      nq.push_back(Vector(0.5 * (Q[i] + Q[i + 1])));
      ++f;
    }
  }
  nx.push_back(xi.back());
  nq.push_back(Q.back());
  xi.swap(nx);
  Q.swap(nq);
}

// Clamped linear interpolation of an existing profile onto a new mesh.
std::vector<Vector> interp_onto(const std::vector<double>& xs,
                                const ViscousProfile& old) {
  std::vector<Vector> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    const double q = std::clamp(xs[i], old.xi.front(), old.xi.back());
    auto it = std::upper_bound(old.xi.begin(), old.xi.end(), q);
    size_t a = (it == old.xi.begin()) ? 0 : static_cast<size_t>(it - old.xi.begin()) - 1;
    a = std::min(a, old.xi.size() - 2);
    const double t = (q - old.xi[a]) / (old.xi[a + 1] - old.xi[a]);
    out[i] = (1.0 - t) * old.Q[a] + t * old.Q[a + 1];
  }
  return out;
}

}  // namespace

ViscousProfile solve_profile(const HyperbolicModel& model, double epsilon,
                             const Vector& U_b, const Vector& U_right, double Xi,
                             const MeshPolicy& policy,
                             const ViscousProfile* warm_start) {
  const int n = model.n;
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrorKind::InvalidParams, "epsilon must be positive and finite");
  if (U_b.size() != n || U_right.size() != n)
    fail(ErrorKind::InvalidParams, "boundary states have wrong dimension");
  if (!model.domain.contains(U_b))
    fail(ErrorKind::OutOfDomain, "left boundary state outside the domain box");
  if (!model.domain.contains(U_right))
    fail(ErrorKind::OutOfDomain, "right boundary state outside the domain box");
  if (!(Xi > 0.0) || !std::isfinite(Xi))
    fail(ErrorKind::InvalidParams, "Xi must be positive and finite");
  if (!(policy.newton_tol > 0.0) || policy.max_newton < 1 ||
      !(policy.refine_fraction > 0.0) || policy.max_refine_rounds < 0)
    fail(ErrorKind::InvalidParams, "solver policy has nonpositive controls");
  const double lmax = max_wave_speed(model);
  if (Xi <= std::max(0.0, lmax)) {
    std::ostringstream os;
    os << "Xi=" << Xi << " must exceed the largest wave speed " << lmax
       << " so every wave is interior";
    fail(ErrorKind::InvalidParams, os.str());
  }

  std::vector<double> xi = build_mesh(epsilon, Xi, policy);
  std::vector<Vector> Q;
  if (warm_start && warm_start->xi.size() >= 2 &&
      warm_start->Q.size() == warm_start->xi.size()) {
    Q = interp_onto(xi, *warm_start);
  } else {
    Q.resize(xi.size());
    for (size_t i = 0; i < xi.size(); ++i)
      Q[i] = U_b + (xi[i] / Xi) * (U_right - U_b);
  }
  Q.front() = U_b;
  Q.back() = U_right;

  // Resolve layers inherited from the warm start before the first solve;
  // splitting a cell halves its jump, so this terminates.
  int guard = 0;
  while (true) {
    const std::vector<int> flags = refine_flags(xi, Q, policy, epsilon);
    if (flags.empty()) break;
    if (static_cast<int>(xi.size() + flags.size()) > policy.max_nodes || ++guard > 60)
      fail(ErrorKind::MeshExhausted, "pre-refinement exceeded the node budget");
    split_cells(xi, Q, flags);
  }

  ViscousProfile out;
  out.epsilon = epsilon;
  out.U_b = U_b;
  out.U_right = U_right;

  for (int round = 0;; ++round) {
    const NewtonOutcome nw = newton_solve(model, epsilon, xi, Q, policy, out.damping);
    out.newton_iterations += nw.iterations;
    out.residual_norm = nw.residual;
    const std::vector<int> flags = refine_flags(xi, Q, policy, epsilon);
    if (flags.empty()) break;
    if (round >= policy.max_refine_rounds) {
      std::ostringstream os;
      os << "refinement budget exhausted after " << round + 1 << " rounds ("
         << xi.size() << " nodes, " << flags.size() << " cells still flagged)";
      fail(ErrorKind::MeshExhausted, os.str());
    }
    if (static_cast<int>(xi.size() + flags.size()) > policy.max_nodes) {
      std::ostringstream os;
      os << "refinement would exceed max_nodes=" << policy.max_nodes << " ("
         << xi.size() << " nodes, " << flags.size() << " cells flagged)";
      fail(ErrorKind::MeshExhausted, os.str());
    }
    split_cells(xi, Q, flags);
  }

  out.xi = std::move(xi);
  out.Q = std::move(Q);
  return out;
}

void LadderResult::throw_if_failed() const {
  if (failed_rung < 0) return;
  fail(ErrorKind::ContinuationFailure,
       "continuation failed at rung " + std::to_string(failed_rung) + ": " +
           failure_message);
}

LadderResult continuation_ladder(const HyperbolicModel& model, const Vector& U_b,
                                 const Vector& U_right, double Xi,
                                 const std::vector<double>& eps_list,
                                 const MeshPolicy& policy) {
  if (eps_list.empty())
    fail(ErrorKind::InvalidParams, "continuation needs a nonempty epsilon list");
  for (size_t j = 0; j < eps_list.size(); ++j) {
    if (!(eps_list[j] > 0.0) || !std::isfinite(eps_list[j]))
      fail(ErrorKind::InvalidParams, "continuation epsilons must be positive");
    if (j > 0) {
      if (!(eps_list[j] < eps_list[j - 1]))
        fail(ErrorKind::InvalidParams, "continuation epsilons must strictly decrease");
      if (eps_list[j] < 0.5 * eps_list[j - 1] * (1.0 - 1e-12))
        fail(ErrorKind::InvalidParams,
             "continuation ratio below 0.5: rungs too far apart to warm-start");
    }
  }
  LadderResult res;
  res.profiles.reserve(eps_list.size());
  const ViscousProfile* warm = nullptr;
  for (size_t j = 0; j < eps_list.size(); ++j) {
    try {
      res.profiles.push_back(
          solve_profile(model, eps_list[j], U_b, U_right, Xi, policy, warm));
    } catch (const LabError& err) {
      res.failed_rung = static_cast<int>(j);
      res.failure_message = err.what();
      break;
    }
    warm = &res.profiles.back();
  }
  return res;
}

InnerProfile inner_rescale(const ViscousProfile& profile, double Z, int nodes) {
  if (profile.xi.size() < 2 || profile.Q.size() != profile.xi.size())
    fail(ErrorKind::InvalidParams, "profile has no mesh to rescale");
  if (!(profile.epsilon > 0.0))
    fail(ErrorKind::InvalidParams, "profile carries no positive epsilon");
  if (!(Z > 0.0) || !std::isfinite(Z))
    fail(ErrorKind::InvalidParams, "inner window Z must be positive");
  if (nodes < 400)
    fail(ErrorKind::InvalidParams, "inner profile needs at least 400 nodes");
  if (profile.epsilon * Z > profile.xi.back() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "inner window eps*Z=" << profile.epsilon * Z
       << " reaches past the profile domain [0, " << profile.xi.back() << "]";
    fail(ErrorKind::RangeExceeded, os.str());
  }

  const int n = static_cast<int>(profile.Q.front().size());
  const size_t N = profile.xi.size();
  std::vector<Vector> dy(N, Vector(n));
  std::vector<double> comp(N);
  for (int c = 0; c < n; ++c) {
    for (size_t i = 0; i < N; ++i) comp[i] = profile.Q[i][c];
    const std::vector<double> s = pchip_slopes(profile.xi, comp);
    for (size_t i = 0; i < N; ++i) dy[i][c] = s[i];
  }

  InnerProfile out;
  out.epsilon = profile.epsilon;
  out.zeta.resize(static_cast<size_t>(nodes));
  out.V.resize(static_cast<size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    const double z = Z * static_cast<double>(i) / (nodes - 1);
    out.zeta[static_cast<size_t>(i)] = z;
    const double q = std::min(profile.epsilon * z, profile.xi.back());
    out.V[static_cast<size_t>(i)] = hermite_eval(profile.xi, profile.Q, dy, q);
  }
  out.zeta.back() = Z;
  out.V.front() = profile.Q.front();  // V(0) = U_b exactly
  return out;
}

double transition_width(const ViscousProfile& profile, double xi_min) {
  const size_t N = profile.xi.size();
  if (N < 2 || profile.Q.size() != N)
    fail(ErrorKind::InvalidParams, "profile has no mesh");
  std::vector<double> d(N - 1, -1.0);
  double dmax = 0.0;
  for (size_t i = 0; i + 1 < N; ++i) {
    const double mid = 0.5 * (profile.xi[i] + profile.xi[i + 1]);
    if (mid < xi_min) continue;
    d[i] = (profile.Q[i + 1] - profile.Q[i]).lpNorm<Eigen::Infinity>() /
           (profile.xi[i + 1] - profile.xi[i]);
    dmax = std::max(dmax, d[i]);
  }
  if (!(dmax > 0.0)) return 0.0;
  const double thr = 0.5 * dmax;
  size_t first = N, last = N;
  for (size_t i = 0; i + 1 < N; ++i) {
    if (d[i] >= thr) {
      if (first == N) first = i;
      last = i;
    }
  }
  if (first == N) return 0.0;
  return profile.xi[last + 1] - profile.xi[first];
}

}  // namespace brlab
