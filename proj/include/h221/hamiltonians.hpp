#pragma once

#include <array>

#include "h221/params.hpp"
#include "h221/phase.hpp"

namespace h221 {

enum class Form { rational, polynomial, kns };

const char* form_name(Form f);

// partial derivatives with respect to the two coordinates and the two momenta
struct Gradient {
    std::array<cplx, 2> dq{}, dp{};
};

// Rational chart, times taken in the tau chart. H1 = (first form)/tau1, H2 = (second form)/tau2.
cplx eval_H_rational(int j, const TimePoint& time, const RationalState& s, const ParameterSet& p);
Gradient grad_H_rational(int j, const TimePoint& time, const RationalState& s, const ParameterSet& p);

// Polynomial chart, times taken in the s chart. H1 = (form)/s1^2, H2 = -(form)/s2.
cplx eval_H_polynomial(int j, const TimePoint& time, const PolynomialState& s, const ParameterSet& p);
Gradient grad_H_polynomial(int j, const TimePoint& time, const PolynomialState& s, const ParameterSet& p);

// KNS chart, times taken in the t chart. K_j = (form)/t_j.
cplx eval_K(int j, const TimePoint& time, const KnsState& s, const ParameterSet& p);
Gradient grad_K(int j, const TimePoint& time, const KnsState& s, const ParameterSet& p);
// du/dt_j from the linear equations for the gauge scalar
cplx u_rate(int j, const TimePoint& time, const KnsState& s, const ParameterSet& p);

// Phase velocity d(state)/d(c_j) where c_j is the j-th coordinate of `time` in its own chart.
// Supported: rational in TAU, polynomial in S, kns in T or TAU (u included for kns).
Vec vector_field(Form form, int j, const TimePoint& time, const Vec& state, const ParameterSet& p);

// coordinate half of the rational -> polynomial map: q1 = (l1-1)(l2-1)/tau1, q2 = l1 l2
PolynomialState map_rational_coordinates(const TimePoint& tau, const RationalState& s);
// point transformation extended to momenta: p = J^{-T} mu with J = d(q)/d(lambda)
PolynomialState map_rational_state(const TimePoint& tau, const RationalState& s);

}  // namespace h221
