#pragma once

#include "h221/flows.hpp"

namespace h221 {

// coefficients of the untransformed system in the t chart:
// Y_eta = (A0m1/eta^2 + A00/eta + A10/(eta-1) + Ainf) Y,
// Y_t1 = (E2 eta + B1 + A0m1/(t1 eta)) Y,  Y_t2 = -A0m1/(t2 eta) Y
struct AFamily {
    Mat2 A0m1, A00, A10, Ainf, E2, B1;
    cplx t1, t2;
};

// traceless coefficients after the scalar gauge, tau chart:
// Z_eta = (B0m1/eta^2 + B00/eta + B10/(eta-1) + Binf) Z,
// Z_tau1 = (F2 eta + B1) Z,  Z_tau2 = -B0m1/(tau2 eta) Z
struct LaxMatrices {
    Mat2 B0m1, B00, B10, Binf, F2, B1;
    cplx tau1, tau2;
};

AFamily build_A(const TimePoint& time, const KnsState& s, const ParameterSet& p);
LaxMatrices build_B(const TimePoint& time, const KnsState& s, const ParameterSet& p);

Mat2 rhs_eta(const LaxMatrices& m, cplx eta);
Mat2 rhs_eta_derivative(const LaxMatrices& m, cplx eta);
// j = 1: F2 eta + B1, j = 2: -B0m1/(tau2 eta)
Mat2 rhs_tau(const LaxMatrices& m, int j, cplx eta);

Mat2 rhs_eta(const AFamily& a, cplx eta);
Mat2 rhs_t(const AFamily& a, int j, cplx eta);

// exponent of Y = exp(phi) Z, principal logarithms
cplx gauge_exponent(const TimePoint& time, cplx eta, const ParameterSet& p);
Mat2 gauge_Y_to_Z(const Mat2& Y, const TimePoint& time, cplx eta, const ParameterSet& p);
Mat2 gauge_Z_to_Y(const Mat2& Z, const TimePoint& time, cplx eta, const ParameterSet& p);

void require_regular_eta(cplx eta);

enum class LaxPair { eta_tau1, eta_tau2, tau1_tau2 };
const char* pair_name(LaxPair pair);

// Zero-curvature residual  d_b M_a - d_a M_b + [M_a, M_b]  for Z_a = M_a Z, Z_b = M_b Z.
// Time derivatives come from central differences of the stencil states (step h); eta
// derivatives are exact. `commutator_state` replaces the centre state in the undifferentiated
// terms (negative control); pass nullptr for the genuine check.
Mat2 zero_curvature_matrix(LaxPair pair, const TimePoint& tau, const Stencil& st, double h, cplx eta,
                           const ParameterSet& p, const Vec* commutator_state = nullptr);
double zero_curvature_residual(LaxPair pair, const TimePoint& tau, const Stencil& st, double h, cplx eta,
                               const ParameterSet& p, const Vec* commutator_state = nullptr);

}  // namespace h221
