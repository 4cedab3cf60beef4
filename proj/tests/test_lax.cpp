#include <doctest.h>

#include <random>

#include "h221/lax.hpp"

using namespace h221;

namespace {

const ParameterSet demo = make_parameter_set({2.5, 0.1}, {3.0, -0.05}, {0.7, 0.05}, {0.4, 0.02}, {0.3, 0.1});
const KnsState demo_state{{0.3, 0.05}, {0.5, -0.1}, {0.2, 0.03}, {0.8, 0.05}, {1.0, 0.1}};
const TimePoint base{Chart::TAU, {1.0, 0.0}, {0.5, 0.0}};

Mat2 mat(cplx a, cplx b, cplx c, cplx d) {
    Mat2 m;
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("lax: pole coefficient at P2 = 0 and P2 = 1") {
    const TimePoint t{Chart::T, 2.0, 3.0};
    const cplx r = t.c2 / t.c1;
    CHECK(max_abs(build_A(t, {0.3, 0.4, 0.5, 0.0, 1.0}, demo).A0m1 - r * mat(1, 0, 1, 0)) < 1e-15);
    CHECK(max_abs(build_A(t, {0.3, 0.4, 0.5, 1.0, 1.0}, demo).A0m1 - r * mat(0, 1, 0, 1)) < 1e-15);
}

TEST_CASE("lax: transcription oracle at a small-integer point") {
    // exact values from tests/oracles/transcription.py
    const ParameterSet p = make_parameter_set(3.0, 5.0, 1.0, 2.0, 1.0);
    const KnsState s{2.0, 3.0, 1.0, -1.0, 2.0};
    const AFamily a = build_A({Chart::T, 2.0, 3.0}, s, p);
    CHECK(max_abs(a.A0m1 - mat(3, -3, 1.5, -1.5)) < 1e-14);
    CHECK(max_abs(a.A00 - mat(5, -2, 5.5, -4)) < 1e-14);
    CHECK(max_abs(a.A10 - mat(-1, 2, -1, 2)) < 1e-14);
    CHECK(max_abs(a.B1 - mat(0, 0, 2.25, 0)) < 1e-14);
    CHECK(max_abs(a.Ainf - mat(0, 0, 0, 2)) < 1e-14);
    CHECK(max_abs(a.E2 - mat(0, 0, 0, 1)) < 1e-14);

    const LaxMatrices b = build_B({Chart::TAU, 2.0, 1.5}, s, p);
    CHECK(max_abs(b.B0m1 - mat(2.25, -3, 1.5, -2.25)) < 1e-14);
    CHECK(max_abs(b.B00 - mat(4.5, -2, 5.5, -4.5)) < 1e-14);
    CHECK(max_abs(b.B10 - mat(-1.5, 2, -1, 1.5)) < 1e-14);
    CHECK(max_abs(b.B1 - mat(0, 0, 2.25, 0)) < 1e-14);
    CHECK(max_abs(b.Binf - mat(-1, 0, 0, 1)) < 1e-14);
    CHECK(max_abs(b.F2 - mat(-0.5, 0, 0, 0.5)) < 1e-14);
}

TEST_CASE("lax: pole coefficient at P2 = 1/2") {
    const LaxMatrices b = build_B(base, {0.3, 0.4, 0.5, 0.5, {1.2, 0.3}}, demo);
    CHECK(std::abs(b.B0m1(0, 0)) < 1e-15);
    CHECK(std::abs(b.B0m1(1, 1)) < 1e-15);
    CHECK(std::abs(b.B0m1.determinant() + base.c2 * base.c2 / 4.0) < 1e-15);
}

TEST_CASE("lax: algebraic invariants at random states") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const TimePoint tau{Chart::TAU, {d(rng), d(rng)}, {d(rng), d(rng)}};
        if (std::abs(tau.c1) < 0.1 || std::abs(tau.c2) < 0.1) continue;
        KnsState s{{d(rng), d(rng)}, {d(rng), d(rng)}, {d(rng), d(rng)}, {d(rng), d(rng)}, {d(rng), d(rng)}};
        if (std::abs(s.u) < 0.1) continue;
        const LaxMatrices b = build_B(tau, s, demo);
        for (const Mat2* m : {&b.B0m1, &b.B00, &b.B10, &b.Binf})
            CHECK(std::abs(m->trace()) <= 1e-12 * std::max(1.0, max_abs(*m)));
        CHECK(std::abs(b.B0m1.determinant() / (tau.c2 * tau.c2) + 0.25) < 1e-12);

        const AFamily a = build_A(tau.to_t(), s, demo);
        CHECK(a.A00(0, 1) == b.B00(0, 1));
        CHECK(a.A00(1, 0) == b.B00(1, 0));
        CHECK(a.A10(0, 1) == b.B10(0, 1));
        CHECK(a.A10(1, 0) == b.B10(1, 0));
        // diagonals shift by half the exponents
        CHECK(std::abs(a.A00(0, 0) - b.B00(0, 0) - (a.A00(1, 1) - b.B00(1, 1))) < 1e-12);
        CHECK(std::abs(a.A10(0, 0) - b.B10(0, 0) - demo.theta1 / 2.0) < 1e-12);
    }
}

TEST_CASE("lax: scalar gauge") {
    const ParameterSet zero = make_parameter_set(2.0, 2.0, 1.0, 1.0, 0.0);
    const TimePoint t{Chart::T, 1.0, 2.0};
    CHECK(std::abs(gauge_exponent(t, 2.0, zero) - 0.5) < 1e-15);
    const Mat2 Z = mat(1, 0, 0, 1);
    CHECK(max_abs(gauge_Z_to_Y(Z, t, 2.0, zero) - std::exp(0.5) * Z) < 1e-14);

    const Mat2 W = mat({1, 2}, {0.5, -1}, {3, 0.1}, {-0.2, 0.7});
    const cplx eta(-0.4, 0.9);
    CHECK(max_abs(gauge_Y_to_Z(gauge_Z_to_Y(W, t, eta, demo), t, eta, demo) - W) < 1e-14);
}

TEST_CASE("lax: gauged A-family equation is the B-family equation") {
    // Y = exp(phi) Z, so the two eta coefficients differ by phi_eta times the identity
    const TimePoint tau{Chart::TAU, {1.1, 0.2}, {0.6, -0.1}};
    const AFamily a = build_A(tau.to_t(), demo_state, demo);
    const LaxMatrices b = build_B(tau, demo_state, demo);
    for (cplx eta : {cplx(2.0, 0.2), cplx(-0.7, 0.5), cplx(0.4, -0.6)}) {
        const double h = 1e-5;
        const cplx dphi = (gauge_exponent(tau, eta + h, demo) - gauge_exponent(tau, eta - h, demo)) / (2 * h);
        const Mat2 diff = rhs_eta(a, eta) - rhs_eta(b, eta) - dphi * Mat2::Identity();
        CHECK(max_abs(diff) < 1e-8);
    }
}

TEST_CASE("lax: spectral poles are refused") {
    const LaxMatrices b = build_B(base, demo_state, demo);
    CHECK_THROWS_AS(rhs_eta(b, 0.0), SpectralPole);
    CHECK_THROWS_AS(rhs_eta(b, 1.0), SpectralPole);
    CHECK_THROWS_AS(build_B(base, {0.3, 0.4, 0.5, 0.5, 0.0}, demo), GaugeZero);
}

TEST_CASE("lax: derivative of the eta coefficient") {
    const LaxMatrices b = build_B(base, demo_state, demo);
    const cplx eta(0.4, -0.6);
    const double h = 1e-5;
    const Mat2 fd = (rhs_eta(b, eta + h) - rhs_eta(b, eta - h)) / (2 * h);
    CHECK(max_abs(fd - rhs_eta_derivative(b, eta)) < 1e-8);
}

TEST_CASE("lax: zero curvature converges at second order on a trajectory") {
    const Dynamics dyn{Form::kns, demo};
    const TimePoint tau{Chart::TAU, {1.05, 0.0}, {0.55, 0.0}};
    FlowOptions fo;
    fo.tol = 1e-11;
    const Vec y = integrate_path(dyn, {base, {{1, tau.c1}, {2, tau.c2}}}, to_vec(demo_state), fo).final_state();
    const cplx eta(2.0, 0.2);
    for (LaxPair pair : {LaxPair::eta_tau1, LaxPair::eta_tau2, LaxPair::tau1_tau2}) {
        const double h = 2e-3;
        const double r1 = zero_curvature_residual(pair, tau, sample_stencil(dyn, tau, y, h, true), h, eta, demo);
        const double r2 =
            zero_curvature_residual(pair, tau, sample_stencil(dyn, tau, y, h / 2, true), h / 2, eta, demo);
        CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));

        Vec off = y;
        off[3] += 0.1;
        const double bad =
            zero_curvature_residual(pair, tau, sample_stencil(dyn, tau, y, h / 2, true), h / 2, eta, demo, &off);
        CHECK(bad > 1e-3);
    }
}
