#pragma once

#include "sweep/certificate.hpp"
#include "sweep/oracle.hpp"
#include "sweep/solver.hpp"

#include <json.hpp>

#include <string>

namespace sweep {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form.
std::string fmt_double(double v);

/// One row per node: tau, t, y, x, z, u, u0, v, omega.
std::string trajectory_csv(const StateTrajectory& tr, const ControlProfile& cp);

/// Smoothed and catching-up runs on the same controls, one row per node.
std::string side_by_side_csv(const StateTrajectory& smooth, const StateTrajectory& catchup, const ControlProfile& cp,
                             const Scenario& s);

Json violation_json(const StateTrajectory& tr, const Scenario& s);

Json validation_to_json(const ValidationReport& rep);

std::string convergence_csv(const std::vector<double>& gammas, const std::vector<double>& errors);

Json solution_to_json(const BilevelSolution& sol);
Json lower_multipliers_to_json(const LowerMultipliers& m);

/// Rebuilds a solution, re-integrating both trajectories. Lower multipliers
/// are left empty; see apply_lower_multipliers.
BilevelSolution solution_from_json(const Json& j, const Scenario& s);
void apply_lower_multipliers(BilevelSolution& sol, const Json& j);

Json certificate_to_json(const CertificateReport& rep, const GamkrelidzeMultipliers& m);
std::string certificate_table(const CertificateReport& rep);

std::string oracle_top_csv(const LowerOracleResult& res);

void write_text(const std::string& path, const std::string& text);
Json read_json(const std::string& path);

}  // namespace sweep
