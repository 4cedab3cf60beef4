#pragma once

#include "h221/common.hpp"

namespace h221 {

// T: (t1, t2), TAU: (tau1, tau2) with tau1 = t1, tau2 = t2/t1,
// S: (s1, s2) with s1 = 1/tau1, s2 = -tau2
enum class Chart { T, TAU, S };

struct TimePoint {
    Chart chart = Chart::TAU;
    cplx c1{1.0}, c2{1.0};

    cplx operator[](int j) const { return j == 1 ? c1 : c2; }
    TimePoint with(int j, cplx value) const;

    TimePoint to(Chart target) const;
    TimePoint to_t() const { return to(Chart::T); }
    TimePoint to_tau() const { return to(Chart::TAU); }
    TimePoint to_s() const { return to(Chart::S); }
};

const char* chart_name(Chart c);

// throws ZeroTimeError when either coordinate is within singular_tol of 0
void require_nonzero_time(const TimePoint& t);

struct RationalState {
    cplx lambda1, lambda2, mu1, mu2;
};

struct PolynomialState {
    cplx q1, q2, p1, p2;
};

struct KnsState {
    cplx Q1, Q2, P1, P2;
    cplx u{1.0};
};

Vec to_vec(const RationalState& s);
Vec to_vec(const PolynomialState& s);
Vec to_vec(const KnsState& s);
RationalState rational_from(const Vec& v);
PolynomialState polynomial_from(const Vec& v);
KnsState kns_from(const Vec& v);

}  // namespace h221
