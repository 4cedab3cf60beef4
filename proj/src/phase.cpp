#include "h221/phase.hpp"

namespace h221 {

TimePoint TimePoint::with(int j, cplx value) const {
    TimePoint t = *this;
    (j == 1 ? t.c1 : t.c2) = value;
    return t;
}

TimePoint TimePoint::to(Chart target) const {
    if (target == chart) return *this;
    require_nonzero_time(*this);
    cplx tau1, tau2;
    switch (chart) {
        case Chart::T:
            tau1 = c1;
            tau2 = c2 / c1;
            break;
        case Chart::TAU:
            tau1 = c1;
            tau2 = c2;
            break;
        case Chart::S:
            tau1 = 1.0 / c1;
            tau2 = -c2;
            break;
    }
    switch (target) {
        case Chart::T:
            return {Chart::T, tau1, tau1 * tau2};
        case Chart::TAU:
            return {Chart::TAU, tau1, tau2};
        case Chart::S:
            return {Chart::S, 1.0 / tau1, -tau2};
    }
    return *this;
}

const char* chart_name(Chart c) {
    switch (c) {
        case Chart::T:
            return "t";
        case Chart::TAU:
            return "tau";
        case Chart::S:
            return "s";
    }
    return "?";
}

void require_nonzero_time(const TimePoint& t) {
    if (std::abs(t.c1) < singular_tol || std::abs(t.c2) < singular_tol)
        throw ZeroTimeError(std::string("time coordinate at zero in chart ") + chart_name(t.chart));
}

Vec to_vec(const RationalState& s) {
    Vec v(4);
    v << s.lambda1, s.lambda2, s.mu1, s.mu2;
    return v;
}

Vec to_vec(const PolynomialState& s) {
    Vec v(4);
    v << s.q1, s.q2, s.p1, s.p2;
    return v;
}

Vec to_vec(const KnsState& s) {
    Vec v(5);
    v << s.Q1, s.Q2, s.P1, s.P2, s.u;
    return v;
}

RationalState rational_from(const Vec& v) { return {v[0], v[1], v[2], v[3]}; }
PolynomialState polynomial_from(const Vec& v) { return {v[0], v[1], v[2], v[3]}; }
KnsState kns_from(const Vec& v) { return {v[0], v[1], v[2], v[3], v.size() > 4 ? v[4] : cplx(1.0)}; }

}  // namespace h221
