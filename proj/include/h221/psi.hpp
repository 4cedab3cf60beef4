#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "h221/convergence.hpp"
#include "h221/flows.hpp"
#include "h221/kernel_equations.hpp"

namespace h221 {

struct PsiConfig {
    ParameterSet params;
    Vec base_state;               // KNS coordinates and u at the grid origin
    TimeGrid grid;                // tau chart; the origin is the base time
    cplx base_eta{2.0, 0.2};      // Z = identity at (origin, base_eta)
    std::vector<cplx> zeta, eta;  // kernel arguments
    double tol = 1e-11;
    double clearance = 0.05;
    double path_tol = 1e-8;
    int substeps = 4;  // fixed steps per stencil hop
};

// negative controls
struct PsiMutation {
    double kappa_shift = 0;  // kappa in the final potentials, after the constraint check
    bool corrupt_s = false;  // S integrated with a broken det(B00)
    double g1_shift = 0;     // added to the tau1 kernel potential
};

// checks the singular sets and the parameter constraints; throws on violation
void validate_psi_config(const PsiConfig& cfg);

// Z at every time node for every spectral point (zeta values first, then eta values),
// together with the phase state and the gauge S. The joint vector at a node holds
// [KNS state (5), S, Z_0, Z_1, ...] with each Z stored column-major.
struct FundamentalSolutionGrid {
    PsiConfig config;
    std::vector<cplx> points;
    std::vector<Vec> joint;  // per time node, row-major like GridStates
    StepStats stats;
    bool corrupt_s = false;

    int zeta_index(int i) const { return i; }
    int eta_index(int j) const { return int(config.zeta.size()) + j; }
    Mat2 Z(int node, int k) const;
    cplx S(int node) const;
    KnsState state(int node) const;
    TimePoint time(int node) const { return config.grid.node(node / config.grid.n2, node % config.grid.n2); }
};

FundamentalSolutionGrid build_Z_grid(const PsiConfig& cfg, bool corrupt_s = false);

// Z(eta)^-1 Z(zeta) at a time node; throws SingularZ
Mat2 kernel_M(const FundamentalSolutionGrid& g, int node, int zeta_i, int eta_j);

// transport Z from base_eta to `eta` at a fixed time with the given phase state
Mat2 transport_eta(const LaxMatrices& B, cplx from, cplx to, const Mat2& Z0, double tol, double clearance,
                   StepStats* stats = nullptr);

struct PsiInvariants {
    double det_deviation = 0;        // max |det Z - 1|
    double loop_deviation = 0;       // max |Z - I| after closed spectral/time loops
    double diagonal_identity = 0;    // max |M(zeta, zeta) - I|
    double inverse_identity = 0;     // max |M(zeta, eta) M(eta, zeta) - I|
    double s_order_swap = 0;         // |S(far corner)| by tau2-first versus tau1-first quadrature
    double s_base = 0;               // |S| at the base time
    double gauge_associativity = 0;  // relative difference of the two groupings of the gauge factors
    double gauge_roundtrip = 0;      // relative error of exp(f) exp(-f) applied to M
};

PsiInvariants psi_invariants(const FundamentalSolutionGrid& g);

// residual family: signed residuals per step, with (time node, zeta index, eta index, entry) keys
struct ResidualFamily {
    std::string id;
    bool gating = true;  // printed variants are reported but do not gate
    std::vector<std::array<int, 4>> keys;
    std::vector<std::vector<cplx>> per_step;
    ConvergenceStudy study;
};

struct PsiResiduals {
    std::vector<double> steps;
    std::vector<ResidualFamily> families;

    const ResidualFamily& family(const std::string& id) const;
};

// central-difference residuals of every equation in the chain for each step in `steps`
// (decreasing), with time and spectral offsets taken by fixed-step hops from each node
PsiResiduals psi_residuals(const FundamentalSolutionGrid& g, const std::vector<double>& steps,
                           const PsiMutation& mut = {});

// node coordinates, the family id and the residual magnitude at the smallest step
void write_psi_csv(std::ostream& os, const FundamentalSolutionGrid& g, const PsiResiduals& r);

}  // namespace h221
