#include "h221/hamiltonians.hpp"

namespace h221 {

const char* form_name(Form f) {
    switch (f) {
        case Form::rational:
            return "rational";
        case Form::polynomial:
            return "polynomial";
        case Form::kns:
            return "kns";
    }
    return "?";
}

namespace {

void check_index(int j) {
    if (j != 1 && j != 2) throw std::invalid_argument("time index must be 1 or 2");
}

// Both rational Hamiltonians share the shape
//   tau_j H_j = -C1 mu1^2 + C2 mu2^2 + C1 b(l1) mu1 - C2 b(l2) mu2 - kappa W
// with C1 = f(l1) g(l2)/(l1-l2), C2 = g(l1) f(l2)/(l1-l2), f(l) = l^2 (l-1)^2,
// g(l) = l-1, W = (l1-1)(l2-1) for j = 1 and g(l) = l, W = l1 l2 for j = 2.
struct RationalPieces {
    cplx C1, C2, b1, b2, W;
    cplx C1_l1, C1_l2, C2_l1, C2_l2, b1_l, b2_l, W_l1, W_l2;
};

RationalPieces rational_pieces(int j, cplx tau1, cplx tau2, const RationalState& s, const ParameterSet& p) {
    const cplx l1 = s.lambda1, l2 = s.lambda2;
    if (std::abs(l1 - l2) < singular_tol || std::abs(l1) < singular_tol || std::abs(l2) < singular_tol ||
        std::abs(l1 - 1.0) < singular_tol || std::abs(l2 - 1.0) < singular_tol)
        throw PoleError("rational Hamiltonian evaluated on its pole set");
    const cplx k0 = j == 1 ? p.kappa0 : p.kappa0 - 1.0;
    const cplx k1 = j == 1 ? p.kappa1 - 1.0 : p.kappa1;
    auto f = [](cplx l) { return l * l * (l - 1.0) * (l - 1.0); };
    auto df = [](cplx l) { return 2.0 * l * (l - 1.0) * (2.0 * l - 1.0); };
    auto g = [j](cplx l) { return j == 1 ? l - 1.0 : l; };
    auto b = [&](cplx l) {
        return k0 / l - p.gamma1 * tau2 / (l * l) + k1 / (l - 1.0) - p.gamma2 * tau1 / ((l - 1.0) * (l - 1.0));
    };
    auto db = [&](cplx l) {
        const cplx m = l - 1.0;
        return -k0 / (l * l) + 2.0 * p.gamma1 * tau2 / (l * l * l) - k1 / (m * m) + 2.0 * p.gamma2 * tau1 / (m * m * m);
    };
    const cplx D = l1 - l2;
    RationalPieces r;
    r.C1 = f(l1) * g(l2) / D;
    r.C2 = g(l1) * f(l2) / D;
    r.C1_l1 = g(l2) * (df(l1) / D - f(l1) / (D * D));
    r.C1_l2 = f(l1) * (1.0 / D + g(l2) / (D * D));
    r.C2_l1 = f(l2) * (1.0 / D - g(l1) / (D * D));
    r.C2_l2 = g(l1) * (df(l2) / D + f(l2) / (D * D));
    r.b1 = b(l1);
    r.b2 = b(l2);
    r.b1_l = db(l1);
    r.b2_l = db(l2);
    r.W = g(l1) * g(l2);
    r.W_l1 = g(l2);
    r.W_l2 = g(l1);
    return r;
}

}  // namespace

cplx eval_H_rational(int j, const TimePoint& time, const RationalState& s, const ParameterSet& p) {
    check_index(j);
    const TimePoint t = time.to_tau();
    require_nonzero_time(t);
    const auto r = rational_pieces(j, t.c1, t.c2, s, p);
    const cplx m1 = s.mu1, m2 = s.mu2;
    const cplx form = -r.C1 * m1 * m1 + r.C2 * m2 * m2 + r.C1 * r.b1 * m1 - r.C2 * r.b2 * m2 - p.kappa * r.W;
    return form / t[j];
}

Gradient grad_H_rational(int j, const TimePoint& time, const RationalState& s, const ParameterSet& p) {
    check_index(j);
    const TimePoint t = time.to_tau();
    require_nonzero_time(t);
    const auto r = rational_pieces(j, t.c1, t.c2, s, p);
    const cplx m1 = s.mu1, m2 = s.mu2;
    Gradient g;
    g.dq[0] = -r.C1_l1 * m1 * m1 + r.C2_l1 * m2 * m2 + (r.C1_l1 * r.b1 + r.C1 * r.b1_l) * m1 - r.C2_l1 * r.b2 * m2 -
              p.kappa * r.W_l1;
    g.dq[1] = -r.C1_l2 * m1 * m1 + r.C2_l2 * m2 * m2 + r.C1_l2 * r.b1 * m1 - (r.C2_l2 * r.b2 + r.C2 * r.b2_l) * m2 -
              p.kappa * r.W_l2;
    g.dp[0] = -2.0 * r.C1 * m1 + r.C1 * r.b1;
    g.dp[1] = 2.0 * r.C2 * m2 - r.C2 * r.b2;
    const cplx scale = 1.0 / t[j];
    for (auto* a : {&g.dq, &g.dp})
        for (auto& v : *a) v *= scale;
    return g;
}

namespace {

// linear-in-momentum brackets of the polynomial Hamiltonians
struct PolyBrackets {
    cplx L1, L2, L3;
};

PolyBrackets poly_brackets(cplx s1, cplx s2, const PolynomialState& s, const ParameterSet& p) {
    const cplx q1 = s.q1, q2 = s.q2;
    PolyBrackets b;
    b.L1 = (p.kappa0 - 1.0) * q1 * q1 + p.kappa1 * q1 * (q1 - s1) + p.gamma2 * (q1 - s1) + p.gamma2 * s1 * q2;
    b.L2 = (p.kappa0 + p.kappa1 - 1.0) * q1 * q2 + p.gamma1 * s2 * q1 + p.gamma2 * q2;
    b.L3 = (p.kappa0 - 1.0) * q2 * (q2 - 1.0) + p.kappa1 * q2 * q2 + p.gamma1 * (s2 / s1) * q1 +
           p.gamma1 * s2 * (q2 - 1.0);
    return b;
}

}  // namespace

cplx eval_H_polynomial(int j, const TimePoint& time, const PolynomialState& s, const ParameterSet& p) {
    check_index(j);
    const TimePoint t = time.to_s();
    require_nonzero_time(t);
    const cplx s1 = t.c1, s2 = t.c2;
    const cplx q1 = s.q1, q2 = s.q2, p1 = s.p1, p2 = s.p2;
    const auto b = poly_brackets(s1, s2, s, p);
    if (j == 1) {
        const cplx form = q1 * q1 * (q1 - s1) * p1 * p1 + 2.0 * q1 * q1 * q2 * p1 * p2 + q1 * q2 * q2 * p2 * p2 -
                          b.L1 * p1 - b.L2 * p2 + p.kappa * q1;
        return form / (s1 * s1);
    }
    const cplx form = q1 * q1 * q2 * p1 * p1 + 2.0 * q1 * q2 * q2 * p1 * p2 + q2 * q2 * (q2 - 1.0) * p2 * p2 -
                      b.L2 * p1 - b.L3 * p2 + p.kappa * q2;
    return -form / s2;
}

Gradient grad_H_polynomial(int j, const TimePoint& time, const PolynomialState& s, const ParameterSet& p) {
    check_index(j);
    const TimePoint t = time.to_s();
    require_nonzero_time(t);
    const cplx s1 = t.c1, s2 = t.c2;
    const cplx q1 = s.q1, q2 = s.q2, p1 = s.p1, p2 = s.p2;
    const auto b = poly_brackets(s1, s2, s, p);
    const cplx L2_q1 = (p.kappa0 + p.kappa1 - 1.0) * q2 + p.gamma1 * s2;
    const cplx L2_q2 = (p.kappa0 + p.kappa1 - 1.0) * q1 + p.gamma2;
    Gradient g;
    cplx scale;
    if (j == 1) {
        const cplx L1_q1 = 2.0 * (p.kappa0 - 1.0) * q1 + p.kappa1 * (2.0 * q1 - s1) + p.gamma2;
        const cplx L1_q2 = p.gamma2 * s1;
        g.dq[0] = (3.0 * q1 * q1 - 2.0 * s1 * q1) * p1 * p1 + 4.0 * q1 * q2 * p1 * p2 + q2 * q2 * p2 * p2 - L1_q1 * p1 -
                  L2_q1 * p2 + p.kappa;
        g.dq[1] = 2.0 * q1 * q1 * p1 * p2 + 2.0 * q1 * q2 * p2 * p2 - L1_q2 * p1 - L2_q2 * p2;
        g.dp[0] = 2.0 * q1 * q1 * (q1 - s1) * p1 + 2.0 * q1 * q1 * q2 * p2 - b.L1;
        g.dp[1] = 2.0 * q1 * q1 * q2 * p1 + 2.0 * q1 * q2 * q2 * p2 - b.L2;
        scale = 1.0 / (s1 * s1);
    } else {
        const cplx L3_q1 = p.gamma1 * s2 / s1;
        const cplx L3_q2 = (p.kappa0 - 1.0) * (2.0 * q2 - 1.0) + 2.0 * p.kappa1 * q2 + p.gamma1 * s2;
        g.dq[0] = 2.0 * q1 * q2 * p1 * p1 + 2.0 * q2 * q2 * p1 * p2 - L2_q1 * p1 - L3_q1 * p2;
        g.dq[1] = q1 * q1 * p1 * p1 + 4.0 * q1 * q2 * p1 * p2 + (3.0 * q2 * q2 - 2.0 * q2) * p2 * p2 - L2_q2 * p1 -
                  L3_q2 * p2 + p.kappa;
        g.dp[0] = 2.0 * q1 * q1 * q2 * p1 + 2.0 * q1 * q2 * q2 * p2 - b.L2;
        g.dp[1] = 2.0 * q1 * q2 * q2 * p1 + 2.0 * q2 * q2 * (q2 - 1.0) * p2 - b.L3;
        scale = -1.0 / s2;
    }
    for (auto* a : {&g.dq, &g.dp})
        for (auto& v : *a) v *= scale;
    return g;
}

cplx eval_K(int j, const TimePoint& time, const KnsState& s, const ParameterSet& p) {
    check_index(j);
    const TimePoint t = time.to_t();
    require_nonzero_time(t);
    const cplx t1 = t.c1, t2 = t.c2, ratio = t2 / t1;
    const cplx Q1 = s.Q1, Q2 = s.Q2, P1 = s.P1, P2 = s.P2;
    const cplx th1 = p.theta1, th1i = p.theta1_inf, th2i = p.theta2_inf;
    const cplx X = P1 * Q1 - P1 - th1;
    const cplx Y = P2 * Q1 - P2 + 1.0;
    if (j == 1) {
        const cplx bracket = (th1 + th1i) * (Q1 - 1.0) + (th2i - th1) * Q1 * (Q1 - 1.0) + t1 * Q1;
        const cplx form = P1 * P1 * Q1 * (Q1 - 1.0) * (Q1 - 1.0) + bracket * P1 - th1 * th2i * (Q1 - 1.0) +
                          (P1 * Q1 * Q1 - th1 * Q1 - P1) * P2 * Q2 + P1 * Q2 - ratio * X * Y;
        return form / t1;
    }
    const cplx form =
        P2 * P2 * Q2 * Q2 - P2 * Q2 * Q2 - p.theta0 * P2 * Q2 + t2 * P2 - th2i * Q2 - P1 * Q1 * Q2 + ratio * X * Y;
    return form / t2;
}

Gradient grad_K(int j, const TimePoint& time, const KnsState& s, const ParameterSet& p) {
    check_index(j);
    const TimePoint t = time.to_t();
    require_nonzero_time(t);
    const cplx t1 = t.c1, t2 = t.c2, ratio = t2 / t1;
    const cplx Q1 = s.Q1, Q2 = s.Q2, P1 = s.P1, P2 = s.P2;
    const cplx th1 = p.theta1, th1i = p.theta1_inf, th2i = p.theta2_inf;
    const cplx X = P1 * Q1 - P1 - th1;
    const cplx Y = P2 * Q1 - P2 + 1.0;
    Gradient g;
    cplx scale;
    if (j == 1) {
        const cplx m = Q1 - 1.0;
        g.dq[0] = P1 * P1 * (m * m + 2.0 * Q1 * m) + ((th1 + th1i) + (th2i - th1) * (2.0 * Q1 - 1.0) + t1) * P1 -
                  th1 * th2i + (2.0 * P1 * Q1 - th1) * P2 * Q2 - ratio * (P1 * Y + X * P2);
        g.dq[1] = (P1 * Q1 * Q1 - th1 * Q1 - P1) * P2 + P1;
        g.dp[0] = 2.0 * P1 * Q1 * m * m + (th1 + th1i) * m + (th2i - th1) * Q1 * m + t1 * Q1 +
                  (Q1 * Q1 - 1.0) * P2 * Q2 + Q2 - ratio * m * Y;
        g.dp[1] = (P1 * Q1 * Q1 - th1 * Q1 - P1) * Q2 - ratio * X * m;
        scale = 1.0 / t1;
    } else {
        g.dq[0] = -P1 * Q2 + ratio * (P1 * Y + X * P2);
        g.dq[1] = 2.0 * P2 * P2 * Q2 - 2.0 * P2 * Q2 - p.theta0 * P2 - th2i - P1 * Q1;
        g.dp[0] = -Q1 * Q2 + ratio * (Q1 - 1.0) * Y;
        g.dp[1] = 2.0 * P2 * Q2 * Q2 - Q2 * Q2 - p.theta0 * Q2 + t2 + ratio * X * (Q1 - 1.0);
        scale = 1.0 / t2;
    }
    for (auto* a : {&g.dq, &g.dp})
        for (auto& v : *a) v *= scale;
    return g;
}

cplx u_rate(int j, const TimePoint& time, const KnsState& s, const ParameterSet& p) {
    check_index(j);
    const TimePoint t = time.to_t();
    require_nonzero_time(t);
    if (j == 1) {
        const cplx m = 1.0 - s.Q1;
        return s.u * (p.theta1 * m + s.P1 * m * m + p.theta1_inf - p.theta2_inf) / t.c1;
    }
    return -s.u * s.Q2 / t.c2;
}

namespace {

Vec hamiltonian_velocity(const Gradient& g) {
    Vec v(4);
    v << g.dp[0], g.dp[1], -g.dq[0], -g.dq[1];
    return v;
}

Vec kns_t_velocity(int j, const TimePoint& t, const KnsState& s, const ParameterSet& p) {
    Vec v(5);
    v.head(4) = hamiltonian_velocity(grad_K(j, t, s, p));
    v[4] = u_rate(j, t, s, p);
    return v;
}

}  // namespace

Vec vector_field(Form form, int j, const TimePoint& time, const Vec& state, const ParameterSet& p) {
    check_index(j);
    switch (form) {
        case Form::rational:
            if (time.chart != Chart::TAU) throw std::invalid_argument("rational flows run in the tau chart");
            return hamiltonian_velocity(grad_H_rational(j, time, rational_from(state), p));
        case Form::polynomial:
            if (time.chart != Chart::S) throw std::invalid_argument("polynomial flows run in the s chart");
            return hamiltonian_velocity(grad_H_polynomial(j, time, polynomial_from(state), p));
        case Form::kns: {
            const KnsState s = kns_from(state);
            if (time.chart == Chart::T) return kns_t_velocity(j, time, s, p);
            if (time.chart != Chart::TAU) throw std::invalid_argument("kns flows run in the t or tau chart");
            // t1 = tau1, t2 = tau1 tau2: d/dtau1 = d/dt1 + tau2 d/dt2, d/dtau2 = tau1 d/dt2
            const TimePoint t = time.to_t();
            const Vec v2 = kns_t_velocity(2, t, s, p);
            if (j == 2) return time.c1 * v2;
            return kns_t_velocity(1, t, s, p) + time.c2 * v2;
        }
    }
    throw std::invalid_argument("unknown form");
}

PolynomialState map_rational_coordinates(const TimePoint& tau, const RationalState& s) {
    const TimePoint t = tau.to_tau();
    require_nonzero_time(t);
    return {(s.lambda1 - 1.0) * (s.lambda2 - 1.0) / t.c1, s.lambda1 * s.lambda2, 0.0, 0.0};
}

PolynomialState map_rational_state(const TimePoint& tau, const RationalState& s) {
    const TimePoint t = tau.to_tau();
    PolynomialState q = map_rational_coordinates(t, s);
    // mu = J^T p
    Mat2 J;
    J << (s.lambda2 - 1.0) / t.c1, (s.lambda1 - 1.0) / t.c1, s.lambda2, s.lambda1;
    Eigen::Vector2cd mu(s.mu1, s.mu2);
    const cplx det = J.determinant();
    if (std::abs(det) < singular_tol) throw PoleError("coordinate map degenerate at lambda1 = lambda2");
    Eigen::Vector2cd pm = J.transpose().inverse() * mu;
    q.p1 = pm[0];
    q.p2 = pm[1];
    return q;
}

}  // namespace h221
