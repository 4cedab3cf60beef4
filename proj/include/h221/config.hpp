#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "h221/flows.hpp"

namespace h221 {

// message already carries "<source>:<line>: " when the offending field can be located
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FlowConfig {
    cplx dt1{0.1}, dt2{0.1};
    std::vector<double> tol_sweep{1e-8, 1e-9, 1e-10};
    int random_states = 10;
    unsigned long long seed = 20261016;
    double random_radius = 0.3;
    int samples_per_segment = 8;
};

struct LaxConfig {
    std::vector<cplx> eta;
    std::vector<double> steps{1e-3, 5e-4, 2.5e-4};
};

struct PrlgConfig {
    TimeGrid grid;
    std::vector<double> steps{1e-3, 5e-4, 2.5e-4};
};

struct SpectralLine {
    cplx start, end;
    int count = 1;

    std::vector<cplx> values() const;
};

struct PsiGridConfig {
    SpectralLine x, y;  // mapped variables; zeta = x/(x-1), eta = y/(y-1)
    cplx base_eta{2.0, 0.2};
    std::vector<double> steps{4e-3, 2e-3, 1e-3};
};

struct RunConfig {
    ParameterSet params;
    KnsState initial_state;
    RationalState rational_state;
    TimePoint base_time{Chart::TAU, 1.0, 0.5};
    TimeGrid time_grid;
    double integrator_tol = 1e-11;  // grids, stencils and gauge quadrature
    double flow_tol = 1e-10;        // commutativity and trajectory runs
    double clearance = 0.05;
    double path_tol = 1e-8;
    FlowConfig flow;
    LaxConfig lax;
    PrlgConfig prlg;
    PsiGridConfig psi;
    std::string output_dir = "out";

    std::string source = "<builtin demo>";  // for messages
    std::string raw;                        // bytes the config was read from, for the provenance hash
};

// JSON pointer -> 1-based line of the key (or array element) in the source text
std::map<std::string, int> locate_lines(const std::string& text);

RunConfig parse_config(const std::string& text, const std::string& source);
RunConfig load_config(const std::string& path);
const std::string& demo_config_text();
RunConfig demo_config();

}  // namespace h221
