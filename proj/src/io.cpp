#include "brlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "brlab/errors.hpp"

namespace brlab {
namespace {

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IOError, "cannot open '" + path + "' for writing");
  out << body;
  if (!out) fail(ErrorKind::IOError, "short write to '" + path + "'");
}

std::string header(const nlohmann::json& config, const std::string& columns) {
  return "# config: " + config.dump() + "\n" + columns + "\n";
}

void append_cell(std::string& row, double x) {
  if (!row.empty() && row.back() != '\n') row += ',';
  row += format_g17(x);
}

void append_vector(std::string& row, const Vector& v) {
  for (int i = 0; i < v.size(); ++i) append_cell(row, v[i]);
}

std::string component_columns(const std::string& stem, int n) {
  std::string s;
  for (int i = 1; i <= n; ++i) s += "," + stem + "_" + std::to_string(i);
  return s;
}

// Nearest node of the curve's uniform tau grid (mirrors the fan evaluator).
int tau_index(const WaveFanCurve& c, double t) {
  const int m = static_cast<int>(c.tau.size());
  if (m <= 1) return 0;
  const int j = static_cast<int>(std::lround(t / c.tau[1]));
  return std::clamp(j, 0, m - 1);
}

}  // namespace

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_layer_csv(const std::string& path, const LayerTrajectory& traj,
                     const nlohmann::json& config) {
  const int n = static_cast<int>(traj.U_bar.size());
  std::string body =
      header(config, "zeta" + component_columns("V", n) + component_columns("W", n));
  for (size_t j = 0; j < traj.zeta.size(); ++j) {
    std::string row;
    append_cell(row, traj.zeta[j]);
    append_vector(row, traj.V[j]);
    append_vector(row, traj.W[j]);
    body += row + "\n";
  }
  write_text(path, body);
}

void write_curve_csv(const std::string& path, const WaveFanCurve& curve,
                     const nlohmann::json& config) {
  const int n = curve.V.empty() ? 0 : static_cast<int>(curve.V.front().size());
  std::string body =
      header(config, "tau" + component_columns("V", n) + ",omega,xi,f,g");
  for (size_t j = 0; j < curve.tau.size(); ++j) {
    std::string row;
    append_cell(row, curve.tau[j]);
    append_vector(row, curve.V[j]);
    append_cell(row, curve.omega[j]);
    append_cell(row, curve.xi[j]);
    append_cell(row, curve.f_vals[j]);
    append_cell(row, curve.g_vals[j]);
    body += row + "\n";
  }
  write_text(path, body);
}

void write_profile_csv(const std::string& path, const ViscousProfile& profile,
                       const nlohmann::json& config) {
  const int n = static_cast<int>(profile.U_b.size());
  std::string body = header(config, "xi" + component_columns("Q", n));
  for (size_t j = 0; j < profile.xi.size(); ++j) {
    std::string row;
    append_cell(row, profile.xi[j]);
    append_vector(row, profile.Q[j]);
    body += row + "\n";
  }
  write_text(path, body);
}

void write_fan_csv(const std::string& path, const FanSolution& fan,
                   const nlohmann::json& config) {
  const int n = static_cast<int>(fan.U_0.size());
  std::string body =
      header(config, "family,type,speed_lo,speed_hi" + component_columns("UL", n) +
                         component_columns("UR", n));
  for (const OrderedPiece& op : fan.pieces) {
    const FanWave& w = fan.waves[op.wave];
    const int ja = tau_index(w.curve, op.piece.tau_lo);
    const int jb = tau_index(w.curve, op.piece.tau_hi);
    const Vector& slow = op.first_of_wave ? w.U_left : w.curve.V[std::max(ja, jb)];
    const Vector& fast = w.curve.V[std::min(ja, jb)];
    std::string row = std::to_string(w.family);
    row += op.piece.type == PieceType::shock ? ",shock" : ",rarefaction";
    append_cell(row, op.piece.speed_lo);
    append_cell(row, op.piece.speed_hi);
    append_vector(row, slow);
    append_vector(row, fast);
    body += row + "\n";
  }
  write_text(path, body);
}

void write_convergence_csv(const std::string& path, const ComparisonReport& report,
                           const nlohmann::json& config) {
  std::string body = header(config, "epsilon,l1_fan_dist,sup_inner_dist,weighted_tail");
  for (const ComparisonRow& r : report.rows) {
    std::string row;
    append_cell(row, r.epsilon);
    append_cell(row, r.l1_fan_dist);
    append_cell(row, r.sup_inner_dist);
    append_cell(row, r.weighted_tail);
    body += row + "\n";
  }
  write_text(path, body);
}

void write_ladder_manifest(const std::string& path, const LadderResult& ladder,
                           const nlohmann::json& config) {
  nlohmann::json j;
  j["config"] = config;
  j["rungs"] = nlohmann::json::array();
  for (const ViscousProfile& p : ladder.profiles) {
    j["rungs"].push_back({{"epsilon", p.epsilon},
                          {"residual", p.residual_norm},
                          {"mesh_size", p.xi.size()},
                          {"newton_iterations", p.newton_iterations}});
  }
  j["failed_rung"] = ladder.failed_rung;
  j["failure_message"] = ladder.failure_message;
  write_text(path, j.dump(2) + "\n");
}

}  // namespace brlab
