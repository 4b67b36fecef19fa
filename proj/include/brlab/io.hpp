// CSV/JSON artifact writers.  Every artifact embeds a '#'-prefixed header
// with the full resolved configuration, uses '.' decimals independent of
// locale, and formats floats with 17 significant digits so identical runs
// produce byte-identical files.
#pragma once

#include <string>

#include <json.hpp>

#include "brlab/layers.hpp"
#include "brlab/riemann.hpp"
#include "brlab/selfsim.hpp"
#include "brlab/wavefan.hpp"

namespace brlab {

// %.17g rendering shared by all writers; round-trips every double exactly.
std::string format_g17(double x);

// layer.csv: zeta, V_1..V_n, W_1..W_n.
void write_layer_csv(const std::string& path, const LayerTrajectory& traj,
                     const nlohmann::json& config);

// curve.csv: tau, V_1..V_n, omega, xi, f, g.
void write_curve_csv(const std::string& path, const WaveFanCurve& curve,
                     const nlohmann::json& config);

// profile.csv: xi, Q_1..Q_n.
void write_profile_csv(const std::string& path, const ViscousProfile& profile,
                       const nlohmann::json& config);

// fan.csv: one row per piece -- family, type, speed_lo, speed_hi, then the
// states on the slow (boundary) and fast (far-field) sides of the piece.
void write_fan_csv(const std::string& path, const FanSolution& fan,
                   const nlohmann::json& config);

// convergence.csv: epsilon, l1_fan_dist, sup_inner_dist, weighted_tail.
void write_convergence_csv(const std::string& path, const ComparisonReport& report,
                           const nlohmann::json& config);

// Ladder manifest (JSON): resolved config plus one entry per rung with
// epsilon, final residual, and mesh size; failure diagnostics when a rung
// stopped the walk.
void write_ladder_manifest(const std::string& path, const LadderResult& ladder,
                           const nlohmann::json& config);

}  // namespace brlab
