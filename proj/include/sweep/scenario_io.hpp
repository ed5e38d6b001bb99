#pragma once

#include "sweep/certificate.hpp"
#include "sweep/solver.hpp"

#include <stdexcept>
#include <string>

namespace sweep {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scenario plus the solver and certificate settings read from the same file.
struct RunConfig {
    Scenario scenario;
    SolverOptions solver;
    CertificateTolerances tolerances;
    std::string out_dir = "out";
};

Scenario parse_scenario(const std::string& yaml_text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_yaml(const Scenario& s);

/// `scenario` is either an inline section or a path to a scenario file,
/// resolved against base_dir when relative.
RunConfig parse_run_config(const std::string& yaml_text, const std::string& base_dir = "");
RunConfig load_run_config(const std::string& path);

/// Control file for simulate: scalars broadcast to every node, lists give one
/// value per node.
struct ControlsFile {
    ControlProfile controls;
    Vec2 x_init;
    bool has_x_init = false;
    std::vector<double> gamma_sweep;  // convergence study when non-empty
};

ControlsFile parse_controls(const std::string& yaml_text, const Scenario& s, const TimeGrid& fallback);
ControlsFile load_controls(const std::string& path, const Scenario& s, const TimeGrid& fallback);

}  // namespace sweep
