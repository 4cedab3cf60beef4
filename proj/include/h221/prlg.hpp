#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "h221/flows.hpp"

namespace h221 {

// a, b: summed off-diagonal entries of the two residue matrices; c = P2 - 1/2, d = -u P2, e = (P2 - 1)/u
struct PrlgState {
    cplx a, b, c, d, e;

    cplx constraint() const { return c * c + d * e - 0.25; }
};

PrlgState extract_prlg(const KnsState& s, const ParameterSet& p);

struct PrlgOptions {
    bool flip_d = false;  // negative control: d -> -d everywhere
    int substeps = 4;     // fixed steps per stencil hop
};

// residuals of
//   tau1 c_1 = e b - a d,  tau1 d_1 = -2 b c,  tau1 e_1 = 2 a c,  b_2 = tau1 d,  a_2 = -e tau1
// and of the second-order pair
//   tau1 b_12 = b_2 - b R,  tau1 a_12 = a_2 - a R,  R = sqrt(tau1^2 + 4 a_2 b_2)
struct PrlgNodeResidual {
    int i = 0, j = 0;
    TimePoint tau;
    PrlgState value;
    std::array<cplx, 5> system{};
    std::array<cplx, 2> second{};  // b equation, a equation
    cplx root;                     // continued square root
};

// Central differences with step h around every node of the grid. The square root is anchored at
// node (0,0) on the root nearest tau1 and continued node to node (row start from the row above,
// otherwise from the left neighbour) by picking the sign closest to the reference.
std::vector<PrlgNodeResidual> prlg_residuals(const Dynamics& dyn, const GridStates& grid, double h,
                                             const PrlgOptions& opt = {});

// sign choice of the continued root; throws BranchAmbiguity when both signs are comparably close
cplx continue_root(cplx principal, cplx reference);

void write_prlg_csv(std::ostream& os, const std::vector<PrlgNodeResidual>& nodes);

}  // namespace h221
