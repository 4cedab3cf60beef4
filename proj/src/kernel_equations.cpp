#include "h221/kernel_equations.hpp"

namespace h221 {

namespace {

// products of the residue matrices entering both potentials
struct ResidueProducts {
    cplx det00, mix0, mixm1;
};

ResidueProducts residue_products(const LaxMatrices& B) {
    ResidueProducts r;
    r.det00 = B.B00.determinant();
    r.mix0 = 2.0 * B.B00(0, 0) * B.B10(0, 0) + B.B00(1, 0) * B.B10(0, 1) + B.B00(0, 1) * B.B10(1, 0);
    r.mixm1 = 2.0 * B.B0m1(0, 0) * B.B10(0, 0) + B.B0m1(1, 0) * B.B10(0, 1) + B.B0m1(0, 1) * B.B10(1, 0);
    return r;
}

void require_distinct(cplx a, cplx b) {
    if (std::abs(a - b) < singular_tol) throw CoincidentSpectral("coincident spectral arguments");
}

}  // namespace

cplx s_rate(int j, const TimeState& ts, const ParameterSet& p, bool corrupt) {
    const LaxMatrices B = build_B(ts.tau, ts.state, p);
    ResidueProducts r = residue_products(B);
    if (corrupt) r.det00 = B.B00(0, 0) * B.B00(1, 1);
    const cplx t1 = B.tau1, t2 = B.tau2;
    const cplx common = t1 * t2 * (0.5 - ts.state.P2) + r.det00;
    if (j == 1) return common - r.mix0 - t1 * ts.state.P1 * ts.state.Q1;
    return common + r.mixm1;
}

PdeCoefficients kernel_tau1(cplx z, cplx e, const TimeState& ts, const ParameterSet& p) {
    require_distinct(z, e);
    const LaxMatrices B = build_B(ts.tau, ts.state, p);
    const ResidueProducts r = residue_products(B);
    const cplx t1 = B.tau1, t2 = B.tau2, D = z - e;
    PdeCoefficients c;
    c.a1 = z * z * (z - 1.0) / D;
    c.a2 = -e * e * (e - 1.0) / D;
    c.b1 = z * (z * z - 3.0 * z * e + 2.0 * e) / (D * D);
    c.b2 = e * (e * e - 3.0 * z * e + 2.0 * z) / (D * D);
    const cplx PQ = ts.state.P1 * ts.state.Q1;
    c.g = t2 * t2 * (z * e - z - e) / (4.0 * z * z * e * e) - p.theta0 * t2 / (2.0 * z * e) +
          t1 * t2 * (0.5 - ts.state.P2) + r.det00 +
          p.theta1 * p.theta1 * (z + e - z * e) / (4.0 * (z - 1.0) * (e - 1.0)) - r.mix0 -
          t1 * (PQ + 0.5 * p.theta0 + p.theta2_inf) + t1 * (p.theta2_inf - p.theta1_inf) * (z + e) / 2.0 +
          t1 * t1 * (z + e - z * z - e * e - z * e) / 4.0;
    return c;
}

PdeCoefficients kernel_tau2(cplx z, cplx e, const TimeState& ts, const ParameterSet& p) {
    require_distinct(z, e);
    const LaxMatrices B = build_B(ts.tau, ts.state, p);
    const ResidueProducts r = residue_products(B);
    const cplx t1 = B.tau1, t2 = B.tau2, D = z - e;
    PdeCoefficients c;
    c.a1 = z * z * e * (z - 1.0) / D;
    c.a2 = -z * e * e * (e - 1.0) / D;
    c.b1 = c.b2 = z * e * (z + e - 2.0 * z * e) / (D * D);
    c.g = t2 * t2 * (z * e * (z + e) - z * z - e * e - z * e) / (4.0 * z * z * e * e) +
          p.theta0 * t2 * (z * e - z - e) / (2.0 * z * e) + t1 * t2 * (0.5 - ts.state.P2) + r.det00 +
          p.theta1 * p.theta1 * z * e / (4.0 * (z - 1.0) * (e - 1.0)) + r.mixm1 +
          t1 * (p.theta2_inf - p.theta1_inf) * z * e / 2.0 + t1 * t1 * z * e * (1.0 - z - e) / 4.0;
    return c;
}

PdeCoefficients scalar_tau1(cplx z, cplx e, const TimePoint& tau, const ParameterSet& p) {
    require_distinct(z, e);
    const TimePoint t = tau.to_tau();
    const cplx t1 = t.c1, t2 = t.c2, D = z - e;
    PdeCoefficients c;
    c.a1 = z * z * (z - 1.0) / D;
    c.a2 = -e * e * (e - 1.0) / D;
    c.b1 = z * (z * z - 3.0 * z * e + 2.0 * e) / (D * D);
    c.b2 = e * (e * e - 3.0 * z * e + 2.0 * z) / (D * D);
    c.g = t2 * t2 * (z * e - z - e) / (4.0 * z * z * e * e) - p.theta0 * t2 / (2.0 * z * e) +
          p.theta1 * p.theta1 * (z + e - z * e) / (4.0 * (z - 1.0) * (e - 1.0)) - t1 * (0.5 * p.theta0 + p.theta2_inf) +
          t1 * (p.theta2_inf - p.theta1_inf) * (z + e) / 2.0 + t1 * t1 * (z + e - z * z - e * e - z * e) / 4.0;
    return c;
}

PdeCoefficients scalar_tau2(cplx z, cplx e, const TimePoint& tau, const ParameterSet& p) {
    require_distinct(z, e);
    const TimePoint t = tau.to_tau();
    const cplx t1 = t.c1, t2 = t.c2, D = z - e;
    PdeCoefficients c;
    c.a1 = z * z * e * (z - 1.0) / D;
    c.a2 = -z * e * e * (e - 1.0) / D;
    c.b1 = c.b2 = z * e * (z + e - 2.0 * z * e) / (D * D);
    c.g = t2 * t2 * (z * e * (z + e) - z * z - e * e - z * e) / (4.0 * z * z * e * e) +
          p.theta0 * t2 * (z * e - z - e) / (2.0 * z * e) +
          p.theta1 * p.theta1 * z * e / (4.0 * (z - 1.0) * (e - 1.0)) +
          t1 * (p.theta2_inf - p.theta1_inf) * z * e / 2.0 + t1 * t1 * z * e * (1.0 - z - e) / 4.0;
    return c;
}

cplx spectral_map(cplx z) {
    if (std::abs(z - 1.0) < singular_tol) throw MapPole("spectral map evaluated at 1");
    return z / (z - 1.0);
}

PdeCoefficients mapped_tau1(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v) {
    require_distinct(x, y);
    const TimePoint t = tau.to_tau();
    const cplx t1 = t.c1, t2 = t.c2, D = x - y, xm = x - 1.0, ym = y - 1.0;
    PdeCoefficients c;
    c.a1 = -x * x * xm * xm * ym / D;
    c.a2 = y * y * ym * ym * xm / D;
    if (v == Variant::derived) {
        c.b1 = x * xm * ym * (-x * x + 3.0 * x * y - 2.0 * y) / (D * D);
        c.b2 = y * xm * ym * (-y * y + 3.0 * x * y - 2.0 * x) / (D * D);
    } else {
        c.b1 = x * xm * ym * (x * x + x * y - 2.0 * y) / (D * D);
        c.b2 = y * ym * xm * (y * y + x * y - 2.0 * x) / (D * D);
    }
    c.g = t2 * t2 * (x + y - x * y) * xm * ym / (4.0 * x * x * y * y) - p.theta0 * t2 * xm * ym / (2.0 * x * y) +
          p.theta1 * p.theta1 * (x * y - x - y) / 4.0 - t1 * (0.5 * p.theta0 + p.theta2_inf) +
          t1 * (p.theta2_inf - p.theta1_inf) * (2.0 * x * y - x - y) / (2.0 * xm * ym) -
          t1 * t1 * (x * x * y * y - 3.0 * x * y + x + y) / (4.0 * xm * xm * ym * ym);
    return c;
}

PdeCoefficients mapped_tau2(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v) {
    require_distinct(x, y);
    const TimePoint t = tau.to_tau();
    const cplx t1 = t.c1, t2 = t.c2, D = x - y, xm = x - 1.0, ym = y - 1.0;
    PdeCoefficients c;
    c.a1 = -x * x * xm * xm * y / D;
    c.a2 = y * y * ym * ym * x / D;
    if (v == Variant::derived) {
        c.b1 = x * y * xm * (-x * x + 3.0 * x * y - x - y) / (D * D);
        c.b2 = x * y * ym * (3.0 * x * y - x - y - y * y) / (D * D);
    } else {
        c.b1 = x * y * (x + y) * xm * xm / (D * D);
        c.b2 = x * y * (x + y) * ym * ym / (D * D);
    }
    c.g =
        t2 * t2 * (2.0 * x * x * y + 2.0 * x * y * y - x * x * y * y - x * y - x * x - y * y) / (4.0 * x * x * y * y) +
        p.theta0 * t2 * (x + y - x * y) / (2.0 * x * y) + p.theta1 * p.theta1 * x * y / 4.0 +
        t1 * (p.theta2_inf - p.theta1_inf) * x * y / (2.0 * xm * ym) +
        t1 * t1 * x * y * (1.0 - x * y) / (4.0 * xm * xm * ym * ym);
    return c;
}

cplx gauge_f1(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v) {
    const TimePoint t = tau.to_tau();
    const cplx xm = x - 1.0, ym = y - 1.0;
    const cplx coeff = v == Variant::derived ? 0.5 * p.kappa1 - 1.0 : 0.5 * p.kappa1;
    return (0.5 * p.kappa0 - 1.0) * std::log(x * y) + coeff * std::log(xm * ym) + std::log(x - y) +
           p.gamma1 * t.c2 * (x + y) / (2.0 * x * y) + p.gamma2 * t.c1 * (x + y - 2.0) / (2.0 * xm * ym);
}

cplx gauge_f2(const TimePoint& tau, const ParameterSet& p) {
    const TimePoint t = tau.to_tau();
    const cplx t1 = t.c1, t2 = t.c2;
    const cplx k0 = p.kappa0 - 2.0, k1 = p.kappa1 - 2.0;
    return (k1 * k1 - p.theta1 * p.theta1 - 4.0) * std::log(t1) / 4.0 + k0 * k0 * std::log(t2) / 4.0 -
           (k0 * p.gamma2 + p.theta0 + 2.0 * p.theta2_inf) * t1 / 2.0 + (k1 * p.gamma1 + p.theta0) * t2 / 2.0 +
           p.gamma1 * p.gamma2 * t1 * t2 / 2.0;
}

namespace {

cplx bracket(cplx k0, cplx k1, cplx v, cplx t1, cplx t2, const ParameterSet& p) {
    return k0 / v - p.gamma1 * t2 / (v * v) + k1 / (v - 1.0) - p.gamma2 * t1 / ((v - 1.0) * (v - 1.0));
}

}  // namespace

PdeCoefficients final_tau1(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v, double kappa_shift) {
    require_distinct(x, y);
    const TimePoint t = tau.to_tau();
    const cplx t1 = t.c1, t2 = t.c2, D = x - y, xm = x - 1.0, ym = y - 1.0;
    const cplx kappa = p.kappa + kappa_shift;
    PdeCoefficients c;
    c.a1 = -x * x * xm * xm * ym / D;
    c.a2 = xm * y * y * ym * ym / D;
    c.b1 = c.a1 * bracket(p.kappa0, p.kappa1 - 1.0, x, t1, t2, p);
    c.b2 = c.a2 * bracket(p.kappa0, p.kappa1 - 1.0, y, t1, t2, p);
    const cplx g1sq = p.gamma1 * p.gamma1 - 1.0, g2sq = p.gamma2 * p.gamma2 - 1.0;
    const cplx tail = g2sq * t1 * t1 * (x * x * y * y - 3.0 * x * y + x + y) / (4.0 * xm * xm * ym * ym);
    if (v == Variant::derived) {
        c.g =
            -(kappa + 1.0) * xm * ym + 1.0 + g1sq * t2 * t2 * xm * ym * (x * y - x - y) / (4.0 * x * x * y * y) + tail;
    } else {
        c.g = -kappa * xm * ym + g1sq * t2 * t2 * xm * ym * (x + y - x * y) / (4.0 * x * x * y * y) + tail +
              4.0 * xm * ym * x * y / (D * D);
    }
    return c;
}

PdeCoefficients final_tau2(cplx x, cplx y, const TimePoint& tau, const ParameterSet& p, Variant v, double kappa_shift) {
    require_distinct(x, y);
    const TimePoint t = tau.to_tau();
    const cplx t1 = t.c1, t2 = t.c2, D = x - y, xm = x - 1.0, ym = y - 1.0;
    const cplx kappa = p.kappa + kappa_shift;
    PdeCoefficients c;
    c.a1 = -x * x * xm * xm * y / D;
    c.a2 = x * y * y * ym * ym / D;
    c.b1 = c.a1 * bracket(p.kappa0 - 1.0, p.kappa1, x, t1, t2, p);
    c.b2 = c.a2 * bracket(p.kappa0 - 1.0, p.kappa1, y, t1, t2, p);
    const cplx g1sq = p.gamma1 * p.gamma1 - 1.0, g2sq = p.gamma2 * p.gamma2 - 1.0;
    c.g = -kappa * x * y +
          g1sq * t2 * t2 * (x * x * y * y + x * y + x * x + y * y - 2.0 * x * x * y - 2.0 * x * y * y) /
              (4.0 * x * x * y * y) +
          g2sq * t1 * t1 * x * y * (x * y - 1.0) / (4.0 * xm * xm * ym * ym);
    if (v == Variant::derived)
        c.g -= x * y;
    else
        c.g += 2.0 * x * y * (2.0 * x * y - x - y) / (D * D);
    return c;
}

PolyCoefficients poly_s1(cplx r, cplx rho, cplx s1, cplx s2, const ParameterSet& p, Variant v, double kappa_shift) {
    const cplx kappa = p.kappa + kappa_shift;
    PolyCoefficients c;
    c.rr = r * r * (r - s1);
    c.rq = 2.0 * r * r * rho;
    c.qq = r * rho * rho;
    c.r = (p.kappa0 - 1.0) * r * r + (p.kappa1 * r + p.gamma2) * (r - s1) + p.gamma2 * s1 * rho;
    c.q = (p.kappa0 + p.kappa1 - 1.0) * r * rho + p.gamma1 * s2 * r + p.gamma2 * rho;
    if (v == Variant::derived) {
        const cplx g1sq = p.gamma1 * p.gamma1 - 1.0, g2sq = p.gamma2 * p.gamma2 - 1.0;
        c.v = (kappa + 1.0) * r - s1 - g1sq * s2 * s2 * r * (r - s1) / (4.0 * s1 * rho * rho) -
              g2sq * (s1 * (rho - 1.0) * (rho - 1.0) - r) / (4.0 * r * r);
    } else {
        c.v = kappa * r;
    }
    return c;
}

PolyCoefficients poly_s2(cplx r, cplx rho, cplx s1, cplx s2, const ParameterSet& p, Variant v, double kappa_shift) {
    const cplx kappa = p.kappa + kappa_shift;
    PolyCoefficients c;
    c.rr = r * r * rho;
    c.rq = 2.0 * r * rho * rho;
    c.qq = rho * rho * (rho - 1.0);
    c.r = (p.kappa0 + p.kappa1 - 1.0) * r * rho + p.gamma1 * s2 * r + p.gamma2 * rho;
    c.q = (p.kappa0 - 1.0) * rho * (rho - 1.0) + p.kappa1 * rho * rho + p.gamma1 * s2 * r / s1 +
          p.gamma1 * s2 * (rho - 1.0);
    if (v == Variant::derived) {
        const cplx g1sq = p.gamma1 * p.gamma1 - 1.0, g2sq = p.gamma2 * p.gamma2 - 1.0;
        const cplx w = 1.0 - r / s1;
        c.v = (kappa + 1.0) * rho - g1sq * s2 * s2 * (w * w - rho) / (4.0 * rho * rho) -
              g2sq * rho * (rho - 1.0) / (4.0 * r * r);
    } else {
        c.v = kappa * rho;
    }
    return c;
}

PolynomialChart polynomial_chart(cplx x, cplx y, const TimePoint& tau) {
    const TimePoint t = tau.to_tau();
    require_nonzero_time(t);
    PolynomialChart c;
    c.r = (x - 1.0) * (y - 1.0) / t.c1;
    c.rho = x * y;
    c.s1 = 1.0 / t.c1;
    c.s2 = -t.c2;
    c.jacobian << (y - 1.0) / t.c1, (x - 1.0) / t.c1, y, x;
    if (std::abs(c.jacobian.determinant()) < singular_tol) throw JacobianSingular("polynomial chart map is singular");
    return c;
}

}  // namespace h221
