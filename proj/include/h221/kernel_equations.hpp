#pragma once

#include "h221/lax.hpp"

namespace h221 {

// `derived` is the internally consistent formula set used for certification; `printed`
// reproduces the source formulas where they differ, for side-by-side reporting.
enum class Variant { derived, printed };

// T F_T = a1 F_11 + a2 F_22 + b1 F_1 + b2 F_2 + g F in spectral variables (1, 2)
struct PdeCoefficients {
    cplx a1, a2, b1, b2, g;
};

struct TimeState {
    TimePoint tau;  // tau chart
    KnsState state;
};

// kernel M = Z(eta)^-1 Z(zeta); tau1 and tau2 evolutions in (zeta, eta)
PdeCoefficients kernel_tau1(cplx zeta, cplx eta, const TimeState& ts, const ParameterSet& p);
PdeCoefficients kernel_tau2(cplx zeta, cplx eta, const TimeState& ts, const ParameterSet& p);

// right-hand sides of tau1 S_tau1 and tau2 S_tau2; `corrupt` drops the off-diagonal part of det(B00)
cplx s_rate(int j, const TimeState& ts, const ParameterSet& p, bool corrupt = false);

// after W = exp(-S) M the potentials no longer depend on the phase variables
PdeCoefficients scalar_tau1(cplx zeta, cplx eta, const TimePoint& tau, const ParameterSet& p);
PdeCoefficients scalar_tau2(cplx zeta, cplx eta, const TimePoint& tau, const ParameterSet& p);

// spectral map x = zeta/(zeta-1), an involution
cplx spectral_map(cplx z);

// the same equations in x = x(zeta), y = y(eta)
PdeCoefficients mapped_tau1(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v);
PdeCoefficients mapped_tau2(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v);

// gauge W = exp(f1 + f2) Psi, principal logarithms
cplx gauge_f1(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v);
cplx gauge_f2(const TimePoint& tau, const ParameterSet& p);

// final pair for Psi; kappa_shift perturbs kappa in the potentials only (negative control)
PdeCoefficients final_tau1(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v,
                           double kappa_shift = 0);
PdeCoefficients final_tau2(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v,
                           double kappa_shift = 0);

// r = (x-1)(y-1)/tau1, rho = xy, s1 = 1/tau1, s2 = -tau2 and d(r, rho)/d(x, y);
// throws JacobianSingular when the map degenerates
struct PolynomialChart {
    cplx r, rho, s1, s2;
    Mat2 jacobian;  // rows r, rho; columns x, y
};

PolynomialChart polynomial_chart(cplx x, cplx y, const TimePoint& tau);

// polynomial-chart pair in (r, rho) with s times:
//   s1^2 Phi_s1  = rr Phi_rr + rq Phi_r,rho + qq Phi_rho,rho + r Phi_r + q Phi_rho + v Phi
//   -s2 Phi_s2   = (same shape)
struct PolyCoefficients {
    cplx rr, rq, qq, r, q, v;
};

PolyCoefficients poly_s1(cplx r, cplx rho, cplx s1, cplx s2, const ParameterSet& p, Variant v, double kappa_shift = 0);
PolyCoefficients poly_s2(cplx r, cplx rho, cplx s1, cplx s2, const ParameterSet& p, Variant v, double kappa_shift = 0);

}  // namespace h221
