#include "h221/lax.hpp"

namespace h221 {

namespace {

void require_gauge(const KnsState& s) {
    if (std::abs(s.u) < singular_tol) throw GaugeZero("gauge scalar u vanishes");
}

Mat2 mat(cplx a, cplx b, cplx c, cplx d) {
    Mat2 m;
    m << a, b, c, d;
    return m;
}

// entries shared by both families
struct Common {
    cplx PQ1, A00_12, A00_21, A10_12, A10_21;
};

Common common_entries(const KnsState& s, const ParameterSet& p) {
    Common c;
    c.PQ1 = s.P1 * s.Q1;
    c.A00_12 = -s.u * (c.PQ1 + s.P2 * s.Q2 + p.theta2_inf);
    c.A00_21 = (c.PQ1 + (1.0 - s.P2) * s.Q2 - p.theta1 - p.theta1_inf) / s.u;
    c.A10_12 = s.u * s.P1;
    c.A10_21 = (p.theta1 * s.Q1 - s.P1 * s.Q1 * s.Q1) / s.u;
    return c;
}

}  // namespace

AFamily build_A(const TimePoint& time, const KnsState& s, const ParameterSet& p) {
    require_gauge(s);
    const TimePoint t = time.to_t();
    require_nonzero_time(t);
    const Common c = common_entries(s, p);
    AFamily a;
    a.t1 = t.c1;
    a.t2 = t.c2;
    a.A0m1 = (t.c2 / t.c1) * mat(1.0 - s.P2, s.u * s.P2, (1.0 - s.P2) / s.u, s.P2);
    a.A00 = mat(c.PQ1 - p.theta1 - p.theta1_inf, c.A00_12, c.A00_21, -c.PQ1 - p.theta2_inf);
    a.A10 = mat(-c.PQ1 + p.theta1, c.A10_12, c.A10_21, c.PQ1);
    a.Ainf = mat(0.0, 0.0, 0.0, t.c1);
    a.E2 = mat(0.0, 0.0, 0.0, 1.0);
    a.B1 = mat(0.0, c.A00_12 + c.A10_12, c.A00_21 + c.A10_21, 0.0) / t.c1;
    return a;
}

LaxMatrices build_B(const TimePoint& time, const KnsState& s, const ParameterSet& p) {
    require_gauge(s);
    const TimePoint t = time.to_tau();
    require_nonzero_time(t);
    const Common c = common_entries(s, p);
    LaxMatrices m;
    m.tau1 = t.c1;
    m.tau2 = t.c2;
    m.B0m1 = t.c2 * mat(0.5 - s.P2, s.u * s.P2, (1.0 - s.P2) / s.u, s.P2 - 0.5);
    const cplx d00 = c.PQ1 + 0.5 * p.theta0 + p.theta2_inf;
    m.B00 = mat(d00, c.A00_12, c.A00_21, -d00);
    m.B10 = mat(-c.PQ1 + 0.5 * p.theta1, c.A10_12, c.A10_21, c.PQ1 - 0.5 * p.theta1);
    m.Binf = mat(-0.5 * t.c1, 0.0, 0.0, 0.5 * t.c1);
    m.F2 = mat(-0.5, 0.0, 0.0, 0.5);
    m.B1 = mat(0.0, c.A00_12 + c.A10_12, c.A00_21 + c.A10_21, 0.0) / t.c1;
    return m;
}

void require_regular_eta(cplx eta) {
    if (std::abs(eta) < singular_tol || std::abs(eta - 1.0) < singular_tol)
        throw SpectralPole("spectral point at a pole of the eta equation");
}

Mat2 rhs_eta(const LaxMatrices& m, cplx eta) {
    require_regular_eta(eta);
    return m.B0m1 / (eta * eta) + m.B00 / eta + m.B10 / (eta - 1.0) + m.Binf;
}

Mat2 rhs_eta_derivative(const LaxMatrices& m, cplx eta) {
    require_regular_eta(eta);
    return -2.0 * m.B0m1 / (eta * eta * eta) - m.B00 / (eta * eta) - m.B10 / ((eta - 1.0) * (eta - 1.0));
}

Mat2 rhs_tau(const LaxMatrices& m, int j, cplx eta) {
    if (j == 1) return m.F2 * eta + m.B1;
    require_regular_eta(eta);
    return -m.B0m1 / (m.tau2 * eta);
}

Mat2 rhs_eta(const AFamily& a, cplx eta) {
    require_regular_eta(eta);
    return a.A0m1 / (eta * eta) + a.A00 / eta + a.A10 / (eta - 1.0) + a.Ainf;
}

Mat2 rhs_t(const AFamily& a, int j, cplx eta) {
    require_regular_eta(eta);
    if (j == 1) return a.E2 * eta + a.B1 + a.A0m1 / (a.t1 * eta);
    return -a.A0m1 / (a.t2 * eta);
}

cplx gauge_exponent(const TimePoint& time, cplx eta, const ParameterSet& p) {
    require_regular_eta(eta);
    const TimePoint t = time.to_t();
    require_nonzero_time(t);
    return eta * t.c1 / 2.0 - t.c2 / (2.0 * eta * t.c1) + 0.5 * p.theta0 * std::log(eta) +
           0.5 * p.theta1 * std::log(eta - 1.0);
}

Mat2 gauge_Y_to_Z(const Mat2& Y, const TimePoint& time, cplx eta, const ParameterSet& p) {
    return std::exp(-gauge_exponent(time, eta, p)) * Y;
}

Mat2 gauge_Z_to_Y(const Mat2& Z, const TimePoint& time, cplx eta, const ParameterSet& p) {
    return std::exp(gauge_exponent(time, eta, p)) * Z;
}

const char* pair_name(LaxPair pair) {
    switch (pair) {
        case LaxPair::eta_tau1:
            return "eta_tau1";
        case LaxPair::eta_tau2:
            return "eta_tau2";
        case LaxPair::tau1_tau2:
            return "tau1_tau2";
    }
    return "?";
}

Mat2 zero_curvature_matrix(LaxPair pair, const TimePoint& tau_in, const Stencil& st, double h, cplx eta,
                           const ParameterSet& p, const Vec* commutator_state) {
    const TimePoint tau = tau_in.to_tau();
    auto B_at = [&](const Vec& y, double d1, double d2) {
        return build_B({Chart::TAU, tau.c1 + d1, tau.c2 + d2}, kns_from(y), p);
    };
    const LaxMatrices c = B_at(commutator_state ? *commutator_state : st.center, 0, 0);
    // time derivative of the matrix attached to `which` (0: eta, 1: tau1, 2: tau2) along time k
    auto d_time = [&](int which, int k) {
        const double d1 = k == 1 ? h : 0, d2 = k == 2 ? h : 0;
        const LaxMatrices mp = B_at(st.plus[k - 1], d1, d2), mm = B_at(st.minus[k - 1], -d1, -d2);
        const Mat2 vp = which == 0 ? rhs_eta(mp, eta) : rhs_tau(mp, which, eta);
        const Mat2 vm = which == 0 ? rhs_eta(mm, eta) : rhs_tau(mm, which, eta);
        return Mat2((vp - vm) / (2.0 * h));
    };
    Mat2 Ma, Mb, dbMa, daMb;
    switch (pair) {
        case LaxPair::eta_tau1:
            Ma = rhs_eta(c, eta);
            Mb = rhs_tau(c, 1, eta);
            dbMa = d_time(0, 1);
            daMb = c.F2;
            break;
        case LaxPair::eta_tau2:
            Ma = rhs_eta(c, eta);
            Mb = rhs_tau(c, 2, eta);
            dbMa = d_time(0, 2);
            daMb = c.B0m1 / (c.tau2 * eta * eta);
            break;
        case LaxPair::tau1_tau2:
            Ma = rhs_tau(c, 1, eta);
            Mb = rhs_tau(c, 2, eta);
            dbMa = d_time(1, 2);
            daMb = d_time(2, 1);
            break;
    }
    return dbMa - daMb + (Ma * Mb - Mb * Ma);
}

double zero_curvature_residual(LaxPair pair, const TimePoint& tau, const Stencil& st, double h, cplx eta,
                               const ParameterSet& p, const Vec* commutator_state) {
    return zero_curvature_matrix(pair, tau, st, h, eta, p, commutator_state).norm();
}

}  // namespace h221
